#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>

#include "anisograd/core.hpp"
#include "anisograd/dataset.hpp"

namespace anisograd {

// derivative bounds of the logistic phi(t) = ln(1 + e^{-t})
inline constexpr double kG1 = 1.0;   // sup |phi'|
inline constexpr double kG2 = 0.25;  // sup phi''

struct GradientOracle {
  virtual ~GradientOracle() = default;
  virtual int dim() const = 0;
  virtual double loss(const Vec& w) const = 0;
  virtual Vec full_grad(const Vec& w) const = 0;
  // fused loss + full gradient; threads is a hint, the default path is serial
  virtual double loss_grad(const Vec& w, Vec& grad, int threads) const;
  // average of M single draws, uniform with replacement; deterministic in rng
  virtual Vec minibatch_grad(const Vec& w, int M, std::mt19937_64& rng) const = 0;

  // finite-sum extras; 0 means the oracle is a distribution, not a finite sum
  virtual int64_t num_samples() const { return 0; }
  virtual Vec sample_grad(const Vec& w, int64_t i) const;
  // gradient averaged over an explicit index set (epoch-mode batches)
  virtual Vec batch_grad(const Vec& w, const int64_t* ids, int64_t count) const;
};

// f(w) = (1/n) sum_i ln(1 + exp(-y_i x_i^T w))
class LogisticObjective : public GradientOracle {
 public:
  explicit LogisticObjective(const Dataset& ds, bool add_bias = false);

  int dim() const override;
  double loss(const Vec& w) const override;
  Vec full_grad(const Vec& w) const override;
  Vec minibatch_grad(const Vec& w, int M, std::mt19937_64& rng) const override;
  int64_t num_samples() const override { return ds_.n(); }
  Vec sample_grad(const Vec& w, int64_t i) const override;
  Vec batch_grad(const Vec& w, const int64_t* ids, int64_t count) const override;

  // fused single pass; threads > 1 splits examples into fixed chunks whose
  // partial sums are reduced in index order, so the result is deterministic
  double loss_grad(const Vec& w, Vec& grad, int threads = 1) const override;
  double loss_threaded(const Vec& w, int threads) const;

  const Dataset& dataset() const { return ds_; }

 private:
  const Dataset& ds_;
  bool add_bias_;
  double margin(const Vec& w, int64_t i) const;  // x_i^T w (with implicit bias)
};

// f(w) = 1/2 sum_j l_j (w_j - w*_j)^2 with per-coordinate gaussian gradient
// noise of standard deviation sigma_j per single draw
class AnisoQuadratic : public GradientOracle {
 public:
  AnisoQuadratic(Vec l_vec, Vec w_star, Vec sigma);

  int dim() const override { return (int)l_.size(); }
  double loss(const Vec& w) const override;
  Vec full_grad(const Vec& w) const override;
  Vec minibatch_grad(const Vec& w, int M, std::mt19937_64& rng) const override;

  const Vec& l_vec() const { return l_; }
  const Vec& w_star() const { return star_; }
  const Vec& sigma() const { return sigma_; }

 private:
  Vec l_, star_, sigma_;
};

enum class SigmaMode { none, prop_sqrt, constant };

// l_j = scale * exp(-tau * j) for j = 1..d (assumption requires tau > 1/d);
// sigma_j is 0, coef * sqrt(l_j), or coef, depending on the mode
AnisoQuadratic make_exp_tail_quadratic(int d, double tau, double scale,
                                       SigmaMode mode = SigmaMode::none,
                                       double sigma_coef = 1.0);

struct ScalarEval {
  double f, d1, d2;
};

// small closed-form 1-d functions feeding the smoothness profiler
struct ScalarTestFunction {
  enum class Kind { quadratic, exp, quartic };
  Kind kind = Kind::quadratic;
  double domain_lo = -10.0, domain_hi = 10.0;

  ScalarEval eval(double x) const;
};

// wraps a ScalarTestFunction as a deterministic 1-d oracle
class ScalarOracle : public GradientOracle {
 public:
  explicit ScalarOracle(ScalarTestFunction fn) : fn_(fn) {}
  int dim() const override { return 1; }
  double loss(const Vec& w) const override { return fn_.eval(w.at(0)).f; }
  Vec full_grad(const Vec& w) const override { return {fn_.eval(w.at(0)).d1}; }
  Vec minibatch_grad(const Vec& w, int, std::mt19937_64&) const override {
    return full_grad(w);
  }

 private:
  ScalarTestFunction fn_;
};

// c * f for a constant c > 0; consumes the rng exactly like the base oracle
// so same-seed runs see identical sample draws
class ScaledOracle : public GradientOracle {
 public:
  ScaledOracle(const GradientOracle& base, double c) : base_(base), c_(c) {
    if (!(c > 0.0)) throw std::invalid_argument("ScaledOracle: c must be > 0");
  }
  int dim() const override { return base_.dim(); }
  double loss(const Vec& w) const override { return c_ * base_.loss(w); }
  Vec full_grad(const Vec& w) const override { return scaled(base_.full_grad(w)); }
  Vec minibatch_grad(const Vec& w, int M, std::mt19937_64& rng) const override {
    return scaled(base_.minibatch_grad(w, M, rng));
  }
  int64_t num_samples() const override { return base_.num_samples(); }
  Vec sample_grad(const Vec& w, int64_t i) const override {
    return scaled(base_.sample_grad(w, i));
  }
  Vec batch_grad(const Vec& w, const int64_t* ids, int64_t count) const override {
    return scaled(base_.batch_grad(w, ids, count));
  }

 private:
  Vec scaled(Vec g) const {
    for (double& x : g) x *= c_;
    return g;
  }
  const GradientOracle& base_;
  double c_;
};

struct SmoothnessVectors {
  Vec l_diag;          // 2 G2 H_jj
  double l_norm1 = 0;  // sum of l_diag
  double l_norminf = 0;
  double l_specbound = 0;  // G2 lambda_max(H)
};

SmoothnessVectors smoothness_vectors(const LogisticObjective& obj, const DataStats& stats);

}  // namespace anisograd
