#include "anisograd/objectives.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>
#include <vector>

namespace anisograd {

Vec GradientOracle::sample_grad(const Vec&, int64_t) const {
  throw std::logic_error("sample_grad: oracle is not a finite sum");
}

double GradientOracle::loss_grad(const Vec& w, Vec& grad, int) const {
  grad = full_grad(w);
  return loss(w);
}

Vec GradientOracle::batch_grad(const Vec& w, const int64_t* ids, int64_t count) const {
  if (count < 1) throw std::invalid_argument("batch_grad: empty batch");
  Vec acc = sample_grad(w, ids[0]);
  for (int64_t k = 1; k < count; ++k) {
    Vec g = sample_grad(w, ids[k]);
    for (size_t j = 0; j < acc.size(); ++j) acc[j] += g[j];
  }
  for (double& x : acc) x /= (double)count;
  return acc;
}

// stable ln(1 + e^{-t}) = max(0, -t) + ln(1 + e^{-|t|})
static double softplus_neg(double t) {
  return std::max(0.0, -t) + std::log1p(std::exp(-std::fabs(t)));
}

// 1 / (1 + e^{t})
static double sigmoid_neg(double t) {
  if (t >= 0) {
    double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}

LogisticObjective::LogisticObjective(const Dataset& ds, bool add_bias)
    : ds_(ds), add_bias_(add_bias) {
  if (ds.n() < 1) throw std::invalid_argument("LogisticObjective: empty dataset");
}

int LogisticObjective::dim() const { return ds_.dim + (add_bias_ ? 1 : 0); }

double LogisticObjective::margin(const Vec& w, int64_t i) const {
  double t = 0.0;
  for (int64_t k = ds_.offs[i]; k < ds_.offs[i + 1]; ++k) t += ds_.val[k] * w[ds_.idx[k]];
  if (add_bias_) t += w[ds_.dim];
  return t;
}

double LogisticObjective::loss(const Vec& w) const {
  if ((int)w.size() != dim()) throw std::invalid_argument("loss: dimension mismatch");
  double s = 0.0;
  for (int64_t i = 0; i < ds_.n(); ++i) s += softplus_neg(ds_.y[i] * margin(w, i));
  return s / (double)ds_.n();
}

Vec LogisticObjective::full_grad(const Vec& w) const {
  Vec g;
  loss_grad(w, g, 1);
  return g;
}

double LogisticObjective::loss_grad(const Vec& w, Vec& grad, int threads) const {
  if ((int)w.size() != dim()) throw std::invalid_argument("loss_grad: dimension mismatch");
  const int64_t n = ds_.n();
  const int d = dim();
  if (threads < 2 || n < 4096) {
    grad.assign(d, 0.0);
    double s = 0.0;
    for (int64_t i = 0; i < n; ++i) {
      double yt = ds_.y[i] * margin(w, i);
      s += softplus_neg(yt);
      double coef = -ds_.y[i] * sigmoid_neg(yt);
      for (int64_t k = ds_.offs[i]; k < ds_.offs[i + 1]; ++k)
        grad[ds_.idx[k]] += coef * ds_.val[k];
      if (add_bias_) grad[d - 1] += coef;
    }
    for (double& x : grad) x /= (double)n;
    return s / (double)n;
  }

  int nt = std::min<int64_t>(threads, (n + 4095) / 4096);
  std::vector<Vec> part_g(nt, Vec(d, 0.0));
  std::vector<double> part_s(nt, 0.0);
  std::vector<std::thread> pool;
  int64_t chunk = (n + nt - 1) / nt;
  for (int t = 0; t < nt; ++t) {
    pool.emplace_back([&, t]() {
      int64_t lo = t * chunk, hi = std::min<int64_t>(n, lo + chunk);
      Vec& g = part_g[t];
      double s = 0.0;
      for (int64_t i = lo; i < hi; ++i) {
        double yt = ds_.y[i] * margin(w, i);
        s += softplus_neg(yt);
        double coef = -ds_.y[i] * sigmoid_neg(yt);
        for (int64_t k = ds_.offs[i]; k < ds_.offs[i + 1]; ++k)
          g[ds_.idx[k]] += coef * ds_.val[k];
        if (add_bias_) g[d - 1] += coef;
      }
      part_s[t] = s;
    });
  }
  for (auto& th : pool) th.join();
  grad.assign(d, 0.0);
  double s = 0.0;
  for (int t = 0; t < nt; ++t) {  // fixed reduction order keeps this deterministic
    s += part_s[t];
    for (int j = 0; j < d; ++j) grad[j] += part_g[t][j];
  }
  for (double& x : grad) x /= (double)n;
  return s / (double)n;
}

double LogisticObjective::loss_threaded(const Vec& w, int threads) const {
  const int64_t n = ds_.n();
  if (threads < 2 || n < 4096) return loss(w);
  int nt = std::min<int64_t>(threads, (n + 4095) / 4096);
  std::vector<double> part(nt, 0.0);
  std::vector<std::thread> pool;
  int64_t chunk = (n + nt - 1) / nt;
  for (int t = 0; t < nt; ++t) {
    pool.emplace_back([&, t]() {
      int64_t lo = t * chunk, hi = std::min<int64_t>(n, lo + chunk);
      double s = 0.0;
      for (int64_t i = lo; i < hi; ++i) s += softplus_neg(ds_.y[i] * margin(w, i));
      part[t] = s;
    });
  }
  for (auto& th : pool) th.join();
  double s = 0.0;
  for (double p : part) s += p;
  return s / (double)n;
}

Vec LogisticObjective::sample_grad(const Vec& w, int64_t i) const {
  if (i < 0 || i >= ds_.n()) throw std::out_of_range("sample_grad: bad sample index");
  Vec g(dim(), 0.0);
  double yt = ds_.y[i] * margin(w, i);
  double coef = -ds_.y[i] * sigmoid_neg(yt);
  for (int64_t k = ds_.offs[i]; k < ds_.offs[i + 1]; ++k) g[ds_.idx[k]] = coef * ds_.val[k];
  if (add_bias_) g[dim() - 1] = coef;
  return g;
}

Vec LogisticObjective::batch_grad(const Vec& w, const int64_t* ids, int64_t count) const {
  if (count < 1) throw std::invalid_argument("batch_grad: empty batch");
  Vec g(dim(), 0.0);
  for (int64_t k = 0; k < count; ++k) {
    int64_t i = ids[k];
    double yt = ds_.y[i] * margin(w, i);
    double coef = -ds_.y[i] * sigmoid_neg(yt);
    for (int64_t p = ds_.offs[i]; p < ds_.offs[i + 1]; ++p) g[ds_.idx[p]] += coef * ds_.val[p];
    if (add_bias_) g[dim() - 1] += coef;
  }
  for (double& x : g) x /= (double)count;
  return g;
}

Vec LogisticObjective::minibatch_grad(const Vec& w, int M, std::mt19937_64& rng) const {
  if (M < 1) throw std::invalid_argument("minibatch_grad: M must be >= 1");
  std::uniform_int_distribution<int64_t> pick(0, ds_.n() - 1);
  std::vector<int64_t> ids(M);
  for (int k = 0; k < M; ++k) ids[k] = pick(rng);
  return batch_grad(w, ids.data(), M);
}

AnisoQuadratic::AnisoQuadratic(Vec l_vec, Vec w_star, Vec sigma)
    : l_(std::move(l_vec)), star_(std::move(w_star)), sigma_(std::move(sigma)) {
  if (l_.empty() || l_.size() != star_.size() || l_.size() != sigma_.size())
    throw std::invalid_argument("AnisoQuadratic: l, w_star, sigma sizes must match");
  for (double l : l_)
    if (!(l > 0.0)) throw std::invalid_argument("AnisoQuadratic: l entries must be positive");
  for (double s : sigma_)
    if (s < 0.0) throw std::invalid_argument("AnisoQuadratic: sigma entries must be >= 0");
}

double AnisoQuadratic::loss(const Vec& w) const {
  if (w.size() != l_.size()) throw std::invalid_argument("loss: dimension mismatch");
  double s = 0.0;
  for (size_t j = 0; j < l_.size(); ++j) {
    double dlt = w[j] - star_[j];
    s += l_[j] * dlt * dlt;
  }
  return 0.5 * s;
}

Vec AnisoQuadratic::full_grad(const Vec& w) const {
  if (w.size() != l_.size()) throw std::invalid_argument("full_grad: dimension mismatch");
  Vec g(l_.size());
  for (size_t j = 0; j < l_.size(); ++j) g[j] = l_[j] * (w[j] - star_[j]);
  return g;
}

Vec AnisoQuadratic::minibatch_grad(const Vec& w, int M, std::mt19937_64& rng) const {
  if (M < 1) throw std::invalid_argument("minibatch_grad: M must be >= 1");
  Vec g = full_grad(w);
  std::normal_distribution<double> gauss(0.0, 1.0);
  // the mean of M independent N(0, sigma^2) draws is N(0, sigma^2 / M)
  double inv_sqrt_m = 1.0 / std::sqrt((double)M);
  for (size_t j = 0; j < g.size(); ++j)
    if (sigma_[j] > 0.0) g[j] += sigma_[j] * inv_sqrt_m * gauss(rng);
  return g;
}

AnisoQuadratic make_exp_tail_quadratic(int d, double tau, double scale,
                                       SigmaMode mode, double sigma_coef) {
  if (d < 1) throw std::invalid_argument("make_exp_tail_quadratic: d must be >= 1");
  if (!(tau > 1.0 / d))
    throw std::invalid_argument(
        "make_exp_tail_quadratic: the exponential tail requires tau > 1/d");
  if (!(scale > 0.0)) throw std::invalid_argument("make_exp_tail_quadratic: scale must be > 0");
  Vec l(d), sigma(d, 0.0);
  for (int j = 0; j < d; ++j) l[j] = scale * std::exp(-tau * (double)(j + 1));
  if (mode == SigmaMode::prop_sqrt)
    for (int j = 0; j < d; ++j) sigma[j] = sigma_coef * std::sqrt(l[j]);
  else if (mode == SigmaMode::constant)
    for (int j = 0; j < d; ++j) sigma[j] = sigma_coef;
  return AnisoQuadratic(std::move(l), Vec(d, 0.0), std::move(sigma));
}

ScalarEval ScalarTestFunction::eval(double x) const {
  if (x < domain_lo || x > domain_hi)
    throw std::domain_error("ScalarTestFunction: x outside the declared domain");
  switch (kind) {
    case Kind::quadratic: return {0.5 * x * x, x, 1.0};
    case Kind::exp: return {std::exp(x), std::exp(x), std::exp(x)};
    case Kind::quartic: return {0.25 * x * x * x * x, x * x * x, 3.0 * x * x};
  }
  throw std::logic_error("ScalarTestFunction: bad kind");
}

SmoothnessVectors smoothness_vectors(const LogisticObjective& obj, const DataStats& stats) {
  if (stats.dim != obj.dataset().dim)
    throw std::invalid_argument("smoothness_vectors: stats and dataset disagree on dim");
  SmoothnessVectors sv;
  sv.l_diag.resize(stats.h_diag.size());
  for (size_t j = 0; j < stats.h_diag.size(); ++j) sv.l_diag[j] = 2.0 * kG2 * stats.h_diag[j];
  sv.l_norm1 = 0.0;
  sv.l_norminf = 0.0;
  for (double l : sv.l_diag) {
    sv.l_norm1 += l;
    sv.l_norminf = std::max(sv.l_norminf, l);
  }
  sv.l_specbound = kG2 * stats.lambda_max;
  return sv;
}

}  // namespace anisograd
