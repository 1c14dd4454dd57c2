#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "anisograd/bounds.hpp"
#include "anisograd/core.hpp"
#include "anisograd/objectives.hpp"

namespace anisograd {

enum class Algo { sgd, adagrad, adagrad_norm };
enum class ProjOption { I, II };  // I = projected, II = unconstrained
enum class Sampling { replacement, epoch };

std::string algo_name(Algo a);
Algo parse_algo(const std::string& s);

struct OptimizerConfig {
  Algo algo = Algo::adagrad;
  ProjOption option = ProjOption::II;
  StepSchedule schedule = StepSchedule::constant(0.1);
  double epsilon = 1e-10;  // accumulator init; ignored by sgd
  int batch_size = 1;
  BoxSet box = BoxSet::unbounded(1);  // must be bounded for Option I
  int64_t steps = 1;                  // T
  uint64_t seed = 0;
  Sampling sampling = Sampling::replacement;
  // trace cadence: loss/gradient-norm records and w snapshots every
  // record_every steps (0 = only start and finish)
  int64_t record_every = 0;
  bool record_snapshots = true;
  bool average_iterates = true;
  double divergence_loss = 1e30;
};

struct OptimizerState {
  Vec w;
  Vec v;                 // adagrad per-coordinate accumulator
  double v_scalar = 0.0;  // adagrad_norm accumulator
  int64_t t = 0;
};

OptimizerState init_state(const OptimizerConfig& cfg, const Vec& w0);

// Algorithm steps. Each consumes the already-drawn minibatch gradient.
void adagrad_step(OptimizerState& st, const Vec& g, double eta_t, ProjOption option,
                  const BoxSet& box);
void adagrad_norm_step(OptimizerState& st, const Vec& g, double eta_t, ProjOption option,
                       const BoxSet& box);
void sgd_step(OptimizerState& st, const Vec& g, double eta_t, ProjOption option,
              const BoxSet& box);

struct TraceRecord {
  int64_t t;
  double loss;
  double g_norm1;  // norms of the minibatch gradient used at step t
  double g_norm2;
};

struct RunTrace {
  std::vector<TraceRecord> records;
  std::vector<Vec> snapshots;  // w at record cadence, starts with w0
  Vec final_w;
  Vec avg_w;  // (1/T) sum_{t=0}^{T-1} w_t
  double final_loss = std::numeric_limits<double>::quiet_NaN();
  double avg_loss = std::numeric_limits<double>::quiet_NaN();
  double best_loss = std::numeric_limits<double>::infinity();  // over recorded losses
  bool diverged = false;
  int64_t steps_done = 0;
};

RunTrace run(const OptimizerConfig& cfg, const GradientOracle& oracle, const Vec& w0);

// step-size presets named thm1, thm2, thm3, thm5, thm6
StepSchedule theory_step_size(const std::string& theorem, const BoundInputs& b);

}  // namespace anisograd
