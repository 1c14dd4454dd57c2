#include "anisograd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace anisograd {

namespace {

double need(const std::optional<double>& f, const char* fn, const char* name) {
  if (!f) throw std::invalid_argument(std::string(fn) + ": missing input " + name);
  return *f;
}

int64_t needi(const std::optional<int64_t>& f, const char* fn, const char* name) {
  if (!f) throw std::invalid_argument(std::string(fn) + ": missing input " + name);
  if (*f < 1) throw std::invalid_argument(std::string(fn) + ": " + name + " must be >= 1");
  return *f;
}

double need_pos(const std::optional<double>& f, const char* fn, const char* name) {
  double v = need(f, fn, name);
  if (!(v > 0.0)) throw std::invalid_argument(std::string(fn) + ": " + name + " must be > 0");
  return v;
}

double need_nonneg(const std::optional<double>& f, const char* fn, const char* name) {
  double v = need(f, fn, name);
  if (!(v >= 0.0)) throw std::invalid_argument(std::string(fn) + ": " + name + " must be >= 0");
  return v;
}

double finish(BoundReport& r) {
  double total = 0.0;
  for (const auto& t : r.terms) total += t.value;
  r.total = total;
  return total;
}

constexpr const char* kOrderNote = "order-level, not certified: unit constants, log factors dropped";

}  // namespace

BoundReport bound_adagrad_convex(const BoundInputs& b) {
  const char* fn = "bound_adagrad_convex";
  double l1 = need_nonneg(b.L_norm1, fn, "L_norm1");
  double dinf = need_pos(b.D_inf, fn, "D_inf");
  double s1 = need_nonneg(b.sigma_norm1, fn, "sigma_norm1");
  double m = (double)needi(b.M, fn, "M");
  double t = (double)needi(b.T, fn, "T");

  BoundReport r;
  r.certified = true;
  r.note = "certified constants (convex, step size D_inf)";
  r.terms.push_back({"bias", 4.0 * l1 * dinf * dinf / t});
  r.terms.push_back({"noise", std::sqrt(2.0) * dinf * s1 / std::sqrt(m * t)});
  double eps_term = 0.0;
  if (b.epsilon > 0.0) {
    double d2 = need_pos(b.D_2, fn, "D_2");
    eps_term = b.epsilon * d2 * d2 / (dinf * t);
  }
  r.terms.push_back({"eps", eps_term});
  finish(r);
  return r;
}

BoundReport bound_sgd_convex(const BoundInputs& b) {
  const char* fn = "bound_sgd_convex";
  double linf = need_nonneg(b.L_norminf, fn, "L_norminf");
  double d2 = need_pos(b.D_2, fn, "D_2");
  double s2 = need_nonneg(b.sigma_norm2, fn, "sigma_norm2");
  double m = (double)needi(b.M, fn, "M");
  double t = (double)needi(b.T, fn, "T");

  BoundReport r;
  r.certified = true;
  r.note = "certified constants (convex, capped 1/sqrt(t) step)";
  r.terms.push_back({"bias", linf * d2 * d2 / t});
  r.terms.push_back({"noise", 2.0 * std::sqrt(2.0) * d2 * s2 / std::sqrt(m * t)});
  finish(r);
  return r;
}

BoundReport bound_adagrad_nonconvex(const BoundInputs& b, bool generalized) {
  const char* fn = "bound_adagrad_nonconvex";
  double l0, l1;
  if (generalized) {
    l0 = need_nonneg(b.L0_norm1, fn, "L0_norm1");
    l1 = need_nonneg(b.L1_norminf, fn, "L1_norminf");
  } else {
    l0 = need_nonneg(b.L_norm1, fn, "L_norm1");
    l1 = 0.0;
  }
  double delta = need_pos(b.Delta, fn, "Delta");
  double s1 = need_nonneg(b.sigma_norm1, fn, "sigma_norm1");
  double m = (double)needi(b.M, fn, "M");
  double t = (double)needi(b.T, fn, "T");
  double curv = std::sqrt(l0 * delta);

  BoundReport r;
  r.note = kOrderNote;
  r.terms.push_back({"noise", curv * s1 / std::sqrt(m * t)});
  if (generalized) r.terms.push_back({"noise_l1", l1 * delta * s1 / std::sqrt(m * t)});
  r.terms.push_back({"noise_sq", s1 * s1 / (m * std::sqrt(t))});
  r.terms.push_back({"bias", l0 * delta / t});
  if (generalized) r.terms.push_back({"bias_l1", l1 * l1 * delta * delta / t});
  double eps_curv = 0.0, eps_noise = 0.0;
  if (b.epsilon > 0.0) {
    if (b.d < 1) throw std::invalid_argument(std::string(fn) + ": d must be >= 1 when epsilon > 0");
    eps_curv = b.d * b.epsilon * (curv + l1 * delta) / t;
    eps_noise = b.d * b.epsilon * s1 / (std::sqrt(m) * t);
  }
  r.terms.push_back({"eps_curv", eps_curv});
  r.terms.push_back({"eps_noise", eps_noise});
  finish(r);
  return r;
}

BoundReport bound_sgd_nonconvex(const BoundInputs& b) {
  const char* fn = "bound_sgd_nonconvex";
  double linf = need_nonneg(b.L_norminf, fn, "L_norminf");
  double delta = need_pos(b.Delta, fn, "Delta");
  double s2 = need_nonneg(b.sigma_norm2, fn, "sigma_norm2");
  double m = (double)needi(b.M, fn, "M");
  double t = (double)needi(b.T, fn, "T");

  BoundReport r;
  r.note = kOrderNote;
  r.terms.push_back({"noise", std::sqrt(linf * delta) * s2 / std::sqrt(m * t)});
  r.terms.push_back({"bias", linf * delta / t});
  finish(r);
  return r;
}

// scalar L0/L1 ride in the generalized fields here
BoundReport bound_adagradnorm_nonconvex(const BoundInputs& b) {
  const char* fn = "bound_adagradnorm_nonconvex";
  double l0 = need_nonneg(b.L0_norm1, fn, "L0_norm1");
  double l1 = need_nonneg(b.L1_norminf, fn, "L1_norminf");
  double delta = need_pos(b.Delta, fn, "Delta");
  double s2 = need_nonneg(b.sigma_norm2, fn, "sigma_norm2");
  double m = (double)needi(b.M, fn, "M");
  double t = (double)needi(b.T, fn, "T");

  BoundReport r;
  r.note = kOrderNote;
  r.terms.push_back({"noise", std::sqrt(l0 * delta) * s2 / std::sqrt(m * t)});
  r.terms.push_back({"bias", l0 * delta / t});
  r.terms.push_back({"noise_l1", l1 * delta * s2 / std::sqrt(m * t)});
  r.terms.push_back({"bias_l1", l1 * l1 * delta * delta / t});
  finish(r);
  return r;
}

double scaled_total(const BoundReport& r, const std::vector<double>& scales) {
  if (scales.size() != r.terms.size())
    throw std::invalid_argument("scaled_total: need one scale per term, got " +
                                std::to_string(scales.size()) + " for " +
                                std::to_string(r.terms.size()) + " terms");
  double total = 0.0;
  for (size_t i = 0; i < scales.size(); ++i) total += scales[i] * r.terms[i].value;
  return total;
}

DiameterEstimate estimate_diameters(const std::vector<const RunTrace*>& traces,
                                    const Vec& w_star) {
  DiameterEstimate est;
  int64_t used = 0;
  Vec diff(w_star.size());
  for (const RunTrace* tr : traces) {
    if (tr == nullptr || tr->diverged) continue;
    for (const Vec& w : tr->snapshots) {
      if (w.size() != w_star.size())
        throw std::invalid_argument("estimate_diameters: snapshot dimension mismatch");
      for (size_t j = 0; j < w.size(); ++j) diff[j] = w[j] - w_star[j];
      est.d_inf = std::max(est.d_inf, norminf(diff));
      est.d_2 = std::max(est.d_2, norm2(diff));
      ++used;
    }
  }
  if (used == 0)
    throw std::invalid_argument("estimate_diameters: no snapshots in non-diverged traces");
  return est;
}

SigmaEstimate estimate_sigma(const GradientOracle& oracle, const std::vector<Vec>& probes,
                             int64_t samples, uint64_t seed) {
  if (probes.empty()) throw std::invalid_argument("estimate_sigma: no probe points");
  if (samples < 2) throw std::invalid_argument("estimate_sigma: samples must be >= 2");
  const int d = oracle.dim();
  SigmaEstimate est;
  est.sigma.assign(d, 0.0);
  est.exact = oracle.num_samples() > 0;

  std::mt19937_64 rng(seed);
  Vec var(d);
  for (const Vec& w : probes) {
    if ((int)w.size() != d) throw std::invalid_argument("estimate_sigma: probe dimension mismatch");
    std::fill(var.begin(), var.end(), 0.0);
    if (est.exact) {
      // population variance of the per-sample gradient around the full gradient
      const int64_t n = oracle.num_samples();
      Vec mean = oracle.full_grad(w);
      for (int64_t i = 0; i < n; ++i) {
        Vec g = oracle.sample_grad(w, i);
        for (int j = 0; j < d; ++j) {
          double dj = g[j] - mean[j];
          var[j] += dj * dj;
        }
      }
      for (int j = 0; j < d; ++j) var[j] /= (double)n;
    } else {
      // Monte Carlo around the sample mean, Bessel corrected
      std::vector<Vec> draws;
      draws.reserve(samples);
      Vec mean(d, 0.0);
      for (int64_t s = 0; s < samples; ++s) {
        draws.push_back(oracle.minibatch_grad(w, 1, rng));
        for (int j = 0; j < d; ++j) mean[j] += draws.back()[j];
      }
      for (int j = 0; j < d; ++j) mean[j] /= (double)samples;
      for (const Vec& g : draws)
        for (int j = 0; j < d; ++j) {
          double dj = g[j] - mean[j];
          var[j] += dj * dj;
        }
      for (int j = 0; j < d; ++j) var[j] /= (double)(samples - 1);
    }
    for (int j = 0; j < d; ++j) est.sigma[j] = std::max(est.sigma[j], std::sqrt(var[j]));
  }
  est.norm1 = norm1(est.sigma);
  est.norm2 = norm2(est.sigma);
  return est;
}

namespace {

// upper envelope of (x, y) points: max y per x-bin, then least squares on
// those maxima
struct EnvelopeFit {
  double l0 = 0.0, l1 = 0.0;
};

EnvelopeFit fit_envelope(const std::vector<double>& xs, const std::vector<double>& ys, int bins) {
  double xmin = *std::min_element(xs.begin(), xs.end());
  double xmax = *std::max_element(xs.begin(), xs.end());
  EnvelopeFit fit;
  if (xmax - xmin < 1e-12) {  // one effective x value: flat line through the max
    fit.l0 = *std::max_element(ys.begin(), ys.end());
    return fit;
  }
  std::vector<double> bx(bins, 0.0), by(bins, -std::numeric_limits<double>::infinity());
  double width = (xmax - xmin) / bins;
  for (size_t p = 0; p < xs.size(); ++p) {
    int bin = std::min(bins - 1, (int)((xs[p] - xmin) / width));
    if (ys[p] > by[bin]) {
      by[bin] = ys[p];
      bx[bin] = xs[p];
    }
  }
  // least squares over the nonempty bins
  double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int bin = 0; bin < bins; ++bin) {
    if (by[bin] == -std::numeric_limits<double>::infinity()) continue;
    n += 1;
    sx += bx[bin];
    sy += by[bin];
    sxx += bx[bin] * bx[bin];
    sxy += bx[bin] * by[bin];
  }
  double det = n * sxx - sx * sx;
  if (n < 2 || std::abs(det) < 1e-300) {
    fit.l0 = *std::max_element(ys.begin(), ys.end());
    return fit;
  }
  fit.l1 = (n * sxy - sx * sy) / det;
  fit.l0 = (sy - fit.l1 * sx) / n;
  return fit;
}

}  // namespace

SmoothnessProfile profile_generalized_smoothness(const GradientOracle& oracle,
                                                 const std::vector<Vec>& trajectory,
                                                 const std::vector<int>& coord_sample,
                                                 const ProfileOptions& opts) {
  if (trajectory.size() < 2)
    throw std::invalid_argument("profile_generalized_smoothness: trajectory needs >= 2 points");
  if (coord_sample.empty())
    throw std::invalid_argument("profile_generalized_smoothness: no coordinates sampled");
  const int d = oracle.dim();
  for (int j : coord_sample)
    if (j < 0 || j >= d)
      throw std::invalid_argument("profile_generalized_smoothness: coordinate out of range");

  const int64_t n = (int64_t)trajectory.size();
  std::vector<Vec> grads(n);
  for (int64_t i = 0; i < n; ++i) grads[i] = oracle.full_grad(trajectory[i]);

  // consecutive pairs plus a few random nearby pairs per point
  std::vector<std::pair<int64_t, int64_t>> pairs;
  for (int64_t i = 0; i + 1 < n; ++i) pairs.push_back({i, i + 1});
  std::mt19937_64 rng(opts.seed);
  for (int64_t i = 0; i < n; ++i) {
    int64_t lo = std::max<int64_t>(0, i - opts.max_index_distance);
    int64_t hi = std::min<int64_t>(n - 1, i + opts.max_index_distance);
    if (hi <= lo) continue;
    std::uniform_int_distribution<int64_t> pick(lo, hi);
    for (int r = 0; r < opts.random_pairs_per_point; ++r) {
      int64_t other = pick(rng);
      if (other != i) pairs.push_back({i, other});
    }
  }

  SmoothnessProfile out;
  for (const auto& [a, b] : pairs) {
    const Vec& wa = trajectory[a];
    const Vec& wb = trajectory[b];
    for (int j : coord_sample) {
      double dx = std::abs(wa[j] - wb[j]);
      if (dx < opts.displacement_floor) continue;
      double ratio = std::abs(grads[a][j] - grads[b][j]) / dx;
      out.scatter.push_back({j, std::abs(grads[a][j]), ratio, a});
    }
  }
  if (out.scatter.empty())
    throw std::runtime_error("profile_generalized_smoothness: all pairs below displacement floor");

  for (int j : coord_sample) {
    std::vector<double> xs, ys;
    for (const auto& p : out.scatter)
      if (p.coord == j) {
        xs.push_back(p.grad_abs);
        ys.push_back(p.ratio);
      }
    CoordFit fit;
    fit.coord = j;
    fit.points = (int64_t)xs.size();
    if (xs.empty()) {
      out.fits.push_back(fit);
      continue;
    }
    EnvelopeFit env = fit_envelope(xs, ys, opts.bins);
    // lift the intercept until the target quantile of points sits under the line
    std::vector<double> resid(xs.size());
    for (size_t p = 0; p < xs.size(); ++p) resid[p] = ys[p] - (env.l0 + env.l1 * xs[p]);
    std::sort(resid.begin(), resid.end());
    size_t qidx = (size_t)std::ceil(opts.quantile * (double)resid.size());
    if (qidx > 0) --qidx;
    if (qidx >= resid.size()) qidx = resid.size() - 1;
    double lift = std::max(0.0, resid[qidx]);
    fit.l0 = env.l0 + lift;
    fit.l1 = env.l1;
    int64_t violations = 0;
    for (size_t p = 0; p < xs.size(); ++p) {
      double line = fit.l0 + fit.l1 * xs[p];
      if (ys[p] > line + 1e-12 * std::max(1.0, std::abs(line))) ++violations;
    }
    fit.violation_frac = (double)violations / (double)xs.size();
    out.fits.push_back(fit);
  }
  return out;
}

RatioReport compute_ratios(const BoundInputs& b) {
  const char* fn = "compute_ratios";
  double dinf = need_pos(b.D_inf, fn, "D_inf");
  double d2 = need_pos(b.D_2, fn, "D_2");
  double s1 = need_nonneg(b.sigma_norm1, fn, "sigma_norm1");
  double s2 = need_nonneg(b.sigma_norm2, fn, "sigma_norm2");
  double l1 = need_nonneg(b.L_norm1, fn, "L_norm1");
  double linf = need_nonneg(b.L_norminf, fn, "L_norminf");
  if (s2 == 0.0) throw std::invalid_argument("compute_ratios: sigma_norm2 is zero");
  if (linf == 0.0) throw std::invalid_argument("compute_ratios: L_norminf is zero");

  RatioReport r;
  r.r1 = dinf * s1 / (d2 * s2);
  r.r2 = l1 * dinf * dinf / (linf * d2 * d2);
  r.c_var = dinf / d2;
  return r;
}

}  // namespace anisograd
