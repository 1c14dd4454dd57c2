#include "anisograd/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace anisograd {

std::string algo_name(Algo a) {
  switch (a) {
    case Algo::sgd: return "sgd";
    case Algo::adagrad: return "adagrad";
    case Algo::adagrad_norm: return "adagrad-norm";
  }
  return "?";
}

Algo parse_algo(const std::string& s) {
  if (s == "sgd") return Algo::sgd;
  if (s == "adagrad") return Algo::adagrad;
  if (s == "adagrad-norm" || s == "adagrad_norm") return Algo::adagrad_norm;
  throw std::invalid_argument("unknown algorithm: " + s);
}

OptimizerState init_state(const OptimizerConfig& cfg, const Vec& w0) {
  if (cfg.epsilon < 0.0) throw std::invalid_argument("epsilon must be >= 0");
  if (cfg.batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (cfg.steps < 1) throw std::invalid_argument("steps must be >= 1");
  if (cfg.option == ProjOption::I && !cfg.box.bounded)
    throw std::invalid_argument("Option I needs a bounded box");
  OptimizerState st;
  st.w = w0;
  if (cfg.option == ProjOption::I && !cfg.box.contains(st.w))
    st.w = project(cfg.box, DiagMetric(Vec(w0.size(), 1.0)), st.w);
  if (cfg.algo == Algo::adagrad)
    st.v.assign(w0.size(), cfg.epsilon * cfg.epsilon);  // v_{-1} = eps^2 1_d
  else if (cfg.algo == Algo::adagrad_norm)
    st.v_scalar = cfg.epsilon * cfg.epsilon;
  return st;
}

void adagrad_step(OptimizerState& st, const Vec& g, double eta_t, ProjOption option,
                  const BoxSet& box) {
  if (g.size() != st.w.size() || st.v.size() != st.w.size())
    throw std::invalid_argument("adagrad_step: dimension mismatch");
  for (size_t j = 0; j < st.w.size(); ++j) {
    st.v[j] += g[j] * g[j];
    double lam = std::sqrt(st.v[j]);
    // lam can be 0 only with eps = 0 and an all-zero gradient history; the
    // limiting update is 0
    if (lam > 0.0) st.w[j] -= (eta_t * g[j]) / lam;
  }
  if (option == ProjOption::I)
    for (size_t j = 0; j < st.w.size(); ++j)
      st.w[j] = std::clamp(st.w[j], box.lower[j], box.upper[j]);
  ++st.t;
}

void adagrad_norm_step(OptimizerState& st, const Vec& g, double eta_t, ProjOption option,
                       const BoxSet& box) {
  if (g.size() != st.w.size())
    throw std::invalid_argument("adagrad_norm_step: dimension mismatch");
  double sq = 0.0;
  for (double x : g) sq += x * x;
  st.v_scalar += sq;
  double b = std::sqrt(st.v_scalar);
  if (b > 0.0)
    for (size_t j = 0; j < st.w.size(); ++j) st.w[j] -= (eta_t * g[j]) / b;
  if (option == ProjOption::I)
    for (size_t j = 0; j < st.w.size(); ++j)
      st.w[j] = std::clamp(st.w[j], box.lower[j], box.upper[j]);
  ++st.t;
}

void sgd_step(OptimizerState& st, const Vec& g, double eta_t, ProjOption option,
              const BoxSet& box) {
  if (g.size() != st.w.size()) throw std::invalid_argument("sgd_step: dimension mismatch");
  for (size_t j = 0; j < st.w.size(); ++j) st.w[j] -= eta_t * g[j];
  if (option == ProjOption::I)
    for (size_t j = 0; j < st.w.size(); ++j)
      st.w[j] = std::clamp(st.w[j], box.lower[j], box.upper[j]);
  ++st.t;
}

RunTrace run(const OptimizerConfig& cfg, const GradientOracle& oracle, const Vec& w0) {
  if ((int)w0.size() != oracle.dim()) throw std::invalid_argument("run: w0 dimension mismatch");
  if (!all_finite(w0)) throw std::invalid_argument("run: w0 must be finite");
  if (cfg.sampling == Sampling::epoch && oracle.num_samples() < 1)
    throw std::invalid_argument("run: epoch sampling needs a finite-sum oracle");

  OptimizerState st = init_state(cfg, w0);
  std::mt19937_64 rng(cfg.seed);

  RunTrace trace;
  Vec avg_acc(w0.size(), 0.0);

  const int64_t n = oracle.num_samples();
  std::vector<int64_t> order;
  int64_t epoch_pos = 0;
  if (cfg.sampling == Sampling::epoch) {
    order.resize(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
  }

  auto record = [&](int64_t t, double loss_val, const Vec& g) {
    trace.records.push_back({t, loss_val, norm1(g), norm2(g)});
    if (cfg.record_snapshots) trace.snapshots.push_back(st.w);
    if (std::isfinite(loss_val)) trace.best_loss = std::min(trace.best_loss, loss_val);
  };

  Vec g;
  for (int64_t t = 0; t < cfg.steps; ++t) {
    if (cfg.sampling == Sampling::replacement) {
      g = oracle.minibatch_grad(st.w, cfg.batch_size, rng);
    } else {
      if (epoch_pos >= n) {
        std::shuffle(order.begin(), order.end(), rng);
        epoch_pos = 0;
      }
      int64_t take = std::min<int64_t>(cfg.batch_size, n - epoch_pos);
      g = oracle.batch_grad(st.w, order.data() + epoch_pos, take);
      epoch_pos += take;
    }

    bool cadence = cfg.record_every > 0 && t % cfg.record_every == 0;
    if (t == 0 || cadence) {
      double lv = oracle.loss(st.w);
      record(t, lv, g);
      if (!std::isfinite(lv) || lv > cfg.divergence_loss || !all_finite(st.w)) {
        trace.diverged = true;
        break;
      }
    }

    if (cfg.average_iterates)
      for (size_t j = 0; j < avg_acc.size(); ++j) avg_acc[j] += st.w[j];

    double eta_t = step_size(cfg.schedule, t);
    switch (cfg.algo) {
      case Algo::sgd: sgd_step(st, g, eta_t, cfg.option, cfg.box); break;
      case Algo::adagrad: adagrad_step(st, g, eta_t, cfg.option, cfg.box); break;
      case Algo::adagrad_norm: adagrad_norm_step(st, g, eta_t, cfg.option, cfg.box); break;
    }
    trace.steps_done = t + 1;
  }

  trace.final_w = st.w;
  if (!trace.diverged) {
    trace.final_loss = oracle.loss(st.w);
    if (!std::isfinite(trace.final_loss) || trace.final_loss > cfg.divergence_loss ||
        !all_finite(st.w))
      trace.diverged = true;
    record(trace.steps_done, trace.final_loss, g.empty() ? Vec(st.w.size(), 0.0) : g);
  }
  if (cfg.average_iterates && !trace.diverged && trace.steps_done > 0) {
    trace.avg_w.resize(avg_acc.size());
    for (size_t j = 0; j < avg_acc.size(); ++j)
      trace.avg_w[j] = avg_acc[j] / (double)trace.steps_done;
    trace.avg_loss = oracle.loss(trace.avg_w);
  }
  return trace;
}

static double req(const std::optional<double>& f, const char* name) {
  if (!f) throw std::invalid_argument(std::string("theory_step_size: missing input ") + name);
  return *f;
}

static int64_t reqi(const std::optional<int64_t>& f, const char* name) {
  if (!f) throw std::invalid_argument(std::string("theory_step_size: missing input ") + name);
  return *f;
}

StepSchedule theory_step_size(const std::string& theorem, const BoundInputs& b) {
  if (theorem == "thm1") {
    // eta = D_inf
    return StepSchedule::constant(req(b.D_inf, "D_inf"));
  }
  if (theorem == "thm2") {
    // eta = sqrt(||L||_1 / Delta), as stated
    return StepSchedule::constant(std::sqrt(req(b.L_norm1, "L_norm1") / req(b.Delta, "Delta")));
  }
  if (theorem == "thm3") {
    // eta = min{ 1/(4 ||L1||_inf), sqrt(||L0||_1 / Delta) }
    double l1 = req(b.L1_norminf, "L1_norminf");
    double branch2 = std::sqrt(req(b.L0_norm1, "L0_norm1") / req(b.Delta, "Delta"));
    return StepSchedule::constant(l1 > 0.0 ? std::min(1.0 / (4.0 * l1), branch2) : branch2);
  }
  if (theorem == "thm5") {
    // eta_t = min{ 1/||L||_inf, sqrt(D_2^2 M / (2 ||sigma||_2^2 (t+1))) }
    double cap = 1.0 / req(b.L_norminf, "L_norminf");
    double s2 = req(b.sigma_norm2, "sigma_norm2");
    if (s2 == 0.0) return StepSchedule::constant(cap);
    double base = req(b.D_2, "D_2") * std::sqrt((double)reqi(b.M, "M") / 2.0) / s2;
    return StepSchedule::capped_inverse_sqrt(cap, base);
  }
  if (theorem == "thm6") {
    // eta = min{ 1/(2 ||L||_inf), sqrt(2 Delta M / (||L||_inf ||sigma||_2^2 T)) }
    double linf = req(b.L_norminf, "L_norminf");
    double cap = 1.0 / (2.0 * linf);
    double s2 = req(b.sigma_norm2, "sigma_norm2");
    if (s2 == 0.0) return StepSchedule::constant(cap);
    double noise = std::sqrt(2.0 * req(b.Delta, "Delta") * (double)reqi(b.M, "M") /
                             (linf * s2 * s2 * (double)reqi(b.T, "T")));
    return StepSchedule::constant(std::min(cap, noise));
  }
  throw std::invalid_argument("theory_step_size: unknown theorem id " + theorem);
}

}  // namespace anisograd
