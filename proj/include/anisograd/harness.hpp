#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "anisograd/analysis.hpp"
#include "anisograd/core.hpp"
#include "anisograd/dataset.hpp"
#include "anisograd/objectives.hpp"
#include "anisograd/optimizers.hpp"

namespace anisograd {

struct ExperimentConfig {
  std::string dataset;  // path or synth spec, see make_dataset
  std::optional<int> dim_override;
  std::vector<Algo> algos{Algo::adagrad, Algo::sgd};
  std::vector<double> lr_grid{10.0, 1.0, 0.1, 0.01};
  std::vector<std::string> schedules{"constant", "inverse_sqrt"};
  std::vector<int> batch_sizes{1, 4, 16, 64, 256, 1024};
  int epochs = 100;
  std::vector<uint64_t> seeds{1, 2, 3};
  double w0_halfwidth = 0.05;  // w0 ~ U(-h, h)^d per seed
  uint64_t w0_seed = 12345;
  double epsilon = 1e-10;
  ProjOption option = ProjOption::II;
  double box_halfwidth = 0.0;  // > 0 pairs with Option I
  Sampling sampling = Sampling::epoch;
  int workers = 0;             // 0 = ANISOGRAD_WORKERS or hardware count
  int64_t steps_override = 0;  // 0 = epochs * ceil(n / M)
  int64_t record_every = 0;    // 0 = once per epoch
  double divergence_loss = 1e6;
  std::string out_dir = "out";
};

void validate(const ExperimentConfig& cfg);

struct RunResult {
  Algo algo = Algo::adagrad;
  int batch = 1;
  double lr = 0.0;
  std::string schedule;
  uint64_t seed = 0;
  int64_t steps = 0;
  double final_loss = 0.0;
  double avg_loss = 0.0;
  double best_loss = 0.0;
  // headline gap = min(final, averaged-iterate) loss - f_star; the final and
  // averaged variants are kept side by side
  double gap = std::numeric_limits<double>::quiet_NaN();
  double final_gap = std::numeric_limits<double>::quiet_NaN();
  double avg_gap = std::numeric_limits<double>::quiet_NaN();
  bool diverged = false;
  double wall_s = 0.0;  // never written into CSV, only into the JSON report
};

struct CellAggregate {
  Algo algo = Algo::adagrad;
  int batch = 1;
  double lr = 0.0;
  std::string schedule;
  int seeds = 0;
  double mean_final = 0.0;
  // per-seed min(final, averaged-iterate) loss, then averaged; the selection
  // key for the per-(algo, M) winner so picking stays consistent with the
  // headline gap column
  double mean_headline = 0.0;
  double mean_gap = 0.0;
  double std_gap = 0.0;
  double mean_final_gap = 0.0;
  double std_final_gap = 0.0;
  double mean_avg_gap = 0.0;
  double std_avg_gap = 0.0;
  bool any_diverged = false;
};

struct ExperimentResult {
  std::vector<RunResult> runs;   // sorted by (algo, M, lr, schedule, seed)
  std::vector<RunTrace> traces;  // parallel to runs
  std::vector<CellAggregate> cells;
  std::vector<CellAggregate> best;  // per (algo, M), picked by mean final loss
  double f_star = std::numeric_limits<double>::quiet_NaN();
  int64_t steps_per_epoch = 0;
};

ExperimentResult run_grid(const ExperimentConfig& cfg, const GradientOracle& oracle,
                          std::optional<double> f_star);

struct WStarOptions {
  std::string method = "gd";  // gd | adagrad, both full batch
  int64_t iterations = 100000;
  double step = 0.0;     // 0 = 1/l_specbound for gd, 1.0 for adagrad
  double grad_tol = 1e-9;  // inf-norm plateau threshold
  double epsilon = 1e-10;
  int threads = 1;
  Vec w0;  // empty = zeros
};

struct WStarEstimate {
  Vec w_star;
  double f_star = 0.0;
  std::string method;
  int64_t iterations = 0;
  double grad_norminf = 0.0;  // at the returned iterate
  bool plateau_reached = false;
};

WStarEstimate estimate_wstar(const GradientOracle& oracle, const WStarOptions& opts,
                             double l_specbound = 0.0);

// "loss explosion" rule for trace filtering: diverged, or ended well above the
// starting loss
bool loss_exploded(const RunTrace& tr);

struct Table1Report {
  std::string dataset;
  int64_t n = 0;
  int dim = 0;
  double d_inf = 0.0;
  double d_2 = 0.0;
  double c_var = 0.0;
  double l_norm1_diag = 0.0;    // candidates from the diagonal curvature bound
  double l_norminf_diag = 0.0;
  double l_specbound = 0.0;     // candidate from the spectral bound
  double lambda_max = 0.0;
  std::optional<double> tail_tau;
};

Table1Report table1_report(const std::string& dataset, const std::vector<const RunTrace*>& traces,
                           const Vec& w_star, const DataStats& stats,
                           const SmoothnessVectors& sv);

// CSV builders; writers below dump them next to the JSON report.  All numbers
// go through fmt_g so repeated runs produce identical bytes.
std::string runs_csv(const ExperimentResult& r, const std::string& dataset);
std::string cells_csv(const ExperimentResult& r, const std::string& dataset);
std::string table2_csv(const ExperimentResult& r, const std::string& dataset);
std::string curves_csv(const ExperimentResult& r, const std::string& dataset);
std::string table1_csv(const Table1Report& t);
std::string result_json(const ExperimentConfig& cfg, const ExperimentResult& r,
                        const std::string& dataset_hash);

std::string fmt_g(double v);  // shortest round-trip decimal form
std::string fnv1a_hex(const std::string& bytes);
std::string hash_file(const std::string& path);  // fnv1a over raw bytes
void write_text(const std::string& path, const std::string& content);

int resolve_workers(int requested);  // cfg value, else env, else hardware

// shared per-seed starting point: U(-h, h)^d drawn from mix_seed(w0_seed, k)
Vec draw_w0(int dim, double halfwidth, uint64_t w0_seed, uint64_t seed);

}  // namespace anisograd
