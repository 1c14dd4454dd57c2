#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace anisograd {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b);
double norm1(const Vec& v);
double norm2(const Vec& v);
double norminf(const Vec& v);
bool all_finite(const Vec& v);

// diagonal positive definite metric Lambda = diag(lambda)
struct DiagMetric {
  Vec lambda;

  explicit DiagMetric(Vec l);
  int dim() const { return (int)lambda.size(); }
};

// ||w||_Lambda = sqrt(sum_j lambda_j w_j^2)
double weighted_norm(const Vec& w, const DiagMetric& m);

// axis-aligned box {w : lower <= w <= upper}; bounded=false stands for all of
// R^d so the projected and unconstrained update variants share one code path
struct BoxSet {
  Vec lower, upper;
  bool bounded = true;

  static BoxSet box(Vec lo, Vec hi);
  static BoxSet hypercube(int dim, double halfwidth);  // [-h, h]^d
  static BoxSet unbounded(int dim);

  int dim() const { return (int)lower.size(); }
  bool contains(const Vec& w, double tol = 0.0) const;
};

// (D_inf, D_2) of a bounded box
struct BoxDiameters {
  double d_inf = 0.0;
  double d_2 = 0.0;
};
BoxDiameters box_diameters(const BoxSet& b);

// argmin_{z in set} ||z - w||_Lambda. For a box the objective is separable,
// so the minimizer is the coordinate-wise clip whatever the (positive)
// metric entries are; the metric argument is kept for the general contract.
Vec project(const BoxSet& set, const DiagMetric& m, const Vec& w);

struct StepSchedule {
  enum class Kind { constant, inverse_sqrt, cosine, capped_inverse_sqrt };

  Kind kind = Kind::constant;
  double base = 0.1;    // eta
  int64_t horizon = 0;  // cosine only
  double cap = 0.0;     // capped_inverse_sqrt only

  static StepSchedule constant(double eta);
  static StepSchedule inverse_sqrt(double eta);
  static StepSchedule cosine(double eta, int64_t horizon);
  // eta_t = min(cap, base / sqrt(t+1)); packages the Theorem-5 rule
  static StepSchedule capped_inverse_sqrt(double cap, double base);

  std::string name() const;
};

// eta_t at step index t >= 0
double step_size(const StepSchedule& s, int64_t t);

// deterministic derivation of per-run rng seeds from tuple components
uint64_t mix_seed(uint64_t a, uint64_t b = 0, uint64_t c = 0, uint64_t d = 0);

}  // namespace anisograd
