#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "anisograd/bounds.hpp"
#include "anisograd/core.hpp"
#include "anisograd/objectives.hpp"
#include "anisograd/optimizers.hpp"

namespace anisograd {

// D_inf / D_2 trajectory envelopes: maxima of ||w - w*|| over every snapshot
// of every non-diverged trace
struct DiameterEstimate {
  double d_inf = 0.0;
  double d_2 = 0.0;
};
DiameterEstimate estimate_diameters(const std::vector<const RunTrace*>& traces,
                                    const Vec& w_star);

struct SigmaEstimate {
  Vec sigma;  // per-coordinate noise bound estimate, max over probe points
  double norm1 = 0.0;
  double norm2 = 0.0;
  bool exact = false;  // true when population enumeration was used
};

// finite-sum oracles get the exact population standard deviation per
// coordinate; distribution oracles are sampled `samples` times at M = 1
SigmaEstimate estimate_sigma(const GradientOracle& oracle, const std::vector<Vec>& probes,
                             int64_t samples = 10000, uint64_t seed = 1234);

struct ScatterPoint {
  int coord;
  double grad_abs;  // |d_j f(w)|
  double ratio;     // |d_j f(w) - d_j f(w')| / |w_j - w'_j|
  int64_t iter_index;
};

struct CoordFit {
  int coord = 0;
  double l0 = 0.0;
  double l1 = 0.0;
  double violation_frac = 0.0;
  int64_t points = 0;
};

struct SmoothnessProfile {
  std::vector<ScatterPoint> scatter;
  std::vector<CoordFit> fits;
};

struct ProfileOptions {
  int random_pairs_per_point = 5;  // extra same-trajectory pairs ...
  int max_index_distance = 10;     // ... within this index distance
  double displacement_floor = 1e-12;
  double quantile = 0.99;  // envelope coverage target
  int bins = 20;
  uint64_t seed = 20240;
};

// upper-envelope fit of ratio <= L0 + L1 |d_j f(w)| per sampled coordinate,
// pairs drawn along the given trajectory
SmoothnessProfile profile_generalized_smoothness(const GradientOracle& oracle,
                                                 const std::vector<Vec>& trajectory,
                                                 const std::vector<int>& coord_sample,
                                                 const ProfileOptions& opts = {});

struct RatioReport {
  double r1 = 0.0;     // D_inf ||sigma||_1 / (D_2 ||sigma||_2)
  double r2 = 0.0;     // ||L||_1 D_inf^2 / (||L||_inf D_2^2)
  double c_var = 0.0;  // D_inf / D_2
  std::optional<double> tail_tau;
};

RatioReport compute_ratios(const BoundInputs& b);

}  // namespace anisograd
