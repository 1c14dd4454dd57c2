#include "anisograd/core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace anisograd {

static void check_same_dim(size_t a, size_t b, const char* who) {
  if (a != b)
    throw std::invalid_argument(std::string(who) + ": dimension mismatch (" +
                                std::to_string(a) + " vs " + std::to_string(b) + ")");
}

double dot(const Vec& a, const Vec& b) {
  check_same_dim(a.size(), b.size(), "dot");
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm1(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += std::fabs(x);
  return s;
}

double norm2(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double norminf(const Vec& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::fabs(x));
  return s;
}

bool all_finite(const Vec& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

DiagMetric::DiagMetric(Vec l) : lambda(std::move(l)) {
  for (double x : lambda)
    if (!(x > 0.0) || !std::isfinite(x))
      throw std::invalid_argument("DiagMetric: entries must be positive and finite");
}

double weighted_norm(const Vec& w, const DiagMetric& m) {
  check_same_dim(w.size(), m.lambda.size(), "weighted_norm");
  double s = 0.0;
  for (size_t j = 0; j < w.size(); ++j) s += m.lambda[j] * w[j] * w[j];
  return std::sqrt(s);
}

BoxSet BoxSet::box(Vec lo, Vec hi) {
  check_same_dim(lo.size(), hi.size(), "BoxSet");
  for (size_t j = 0; j < lo.size(); ++j) {
    if (!std::isfinite(lo[j]) || !std::isfinite(hi[j]))
      throw std::invalid_argument("BoxSet: bounds must be finite");
    if (lo[j] > hi[j])
      throw std::invalid_argument("BoxSet: lower > upper at coordinate " + std::to_string(j));
  }
  BoxSet b;
  b.lower = std::move(lo);
  b.upper = std::move(hi);
  b.bounded = true;
  return b;
}

BoxSet BoxSet::hypercube(int dim, double halfwidth) {
  if (dim < 1) throw std::invalid_argument("BoxSet::hypercube: dim must be >= 1");
  if (!(halfwidth > 0.0)) throw std::invalid_argument("BoxSet::hypercube: halfwidth must be > 0");
  return box(Vec(dim, -halfwidth), Vec(dim, halfwidth));
}

BoxSet BoxSet::unbounded(int dim) {
  if (dim < 1) throw std::invalid_argument("BoxSet::unbounded: dim must be >= 1");
  BoxSet b;
  b.lower.assign(dim, 0.0);
  b.upper.assign(dim, 0.0);
  b.bounded = false;
  return b;
}

bool BoxSet::contains(const Vec& w, double tol) const {
  check_same_dim(w.size(), lower.size(), "BoxSet::contains");
  if (!bounded) return true;
  for (size_t j = 0; j < w.size(); ++j)
    if (w[j] < lower[j] - tol || w[j] > upper[j] + tol) return false;
  return true;
}

BoxDiameters box_diameters(const BoxSet& b) {
  if (!b.bounded) throw std::invalid_argument("box_diameters: box is unbounded");
  BoxDiameters d;
  double sq = 0.0;
  for (size_t j = 0; j < b.lower.size(); ++j) {
    double side = b.upper[j] - b.lower[j];
    d.d_inf = std::max(d.d_inf, side);
    sq += side * side;
  }
  d.d_2 = std::sqrt(sq);
  return d;
}

Vec project(const BoxSet& set, const DiagMetric& m, const Vec& w) {
  check_same_dim(w.size(), m.lambda.size(), "project");
  check_same_dim(w.size(), set.lower.size(), "project");
  if (!set.bounded) return w;
  Vec out(w.size());
  for (size_t j = 0; j < w.size(); ++j)
    out[j] = std::clamp(w[j], set.lower[j], set.upper[j]);
  return out;
}

static StepSchedule make_schedule(StepSchedule::Kind k, double base) {
  if (!(base > 0.0)) throw std::invalid_argument("StepSchedule: base must be > 0");
  StepSchedule s;
  s.kind = k;
  s.base = base;
  return s;
}

StepSchedule StepSchedule::constant(double eta) {
  return make_schedule(Kind::constant, eta);
}

StepSchedule StepSchedule::inverse_sqrt(double eta) {
  return make_schedule(Kind::inverse_sqrt, eta);
}

StepSchedule StepSchedule::cosine(double eta, int64_t horizon) {
  if (horizon < 1) throw std::invalid_argument("StepSchedule::cosine: horizon must be >= 1");
  StepSchedule s = make_schedule(Kind::cosine, eta);
  s.horizon = horizon;
  return s;
}

StepSchedule StepSchedule::capped_inverse_sqrt(double cap, double base) {
  if (!(cap > 0.0)) throw std::invalid_argument("StepSchedule: cap must be > 0");
  StepSchedule s = make_schedule(Kind::capped_inverse_sqrt, base);
  s.cap = cap;
  return s;
}

std::string StepSchedule::name() const {
  switch (kind) {
    case Kind::constant: return "constant";
    case Kind::inverse_sqrt: return "inverse_sqrt";
    case Kind::cosine: return "cosine";
    case Kind::capped_inverse_sqrt: return "capped_inverse_sqrt";
  }
  return "?";
}

double step_size(const StepSchedule& s, int64_t t) {
  if (t < 0) throw std::invalid_argument("step_size: t must be >= 0");
  switch (s.kind) {
    case StepSchedule::Kind::constant:
      return s.base;
    case StepSchedule::Kind::inverse_sqrt:
      return s.base / std::sqrt((double)(t + 1));
    case StepSchedule::Kind::cosine: {
      // clamp past the horizon, harness epoch counts may not divide evenly
      double x = std::min((double)t, (double)s.horizon);
      return s.base * 0.5 * (1.0 + std::cos(M_PI * x / (double)s.horizon));
    }
    case StepSchedule::Kind::capped_inverse_sqrt:
      return std::min(s.cap, s.base / std::sqrt((double)(t + 1)));
  }
  return s.base;
}

// splitmix64 finalizer
static uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

uint64_t mix_seed(uint64_t a, uint64_t b, uint64_t c, uint64_t d) {
  // fold each argument into the running state before finalizing, so that
  // swapping two positions lands on a different stream
  uint64_t h = mix64(a);
  h = mix64(h + 0x9e3779b97f4a7c15ULL + b);
  h = mix64(h + 0x9e3779b97f4a7c15ULL + c);
  h = mix64(h + 0x9e3779b97f4a7c15ULL + d);
  return h;
}

}  // namespace anisograd
