#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace anisograd {

// symbols shared by the theorem step-size presets and the bound evaluators;
// every evaluator names the missing field when one it needs is absent
struct BoundInputs {
  std::optional<double> L_norm1, L_norminf;    // plain smoothness ||L||_1, ||L||_inf
  std::optional<double> L0_norm1, L1_norminf;  // generalized smoothness
  std::optional<double> sigma_norm1, sigma_norm2;
  std::optional<double> D_inf, D_2;
  std::optional<double> Delta;  // f(w0) - f*
  std::optional<int64_t> M, T;
  double epsilon = 0.0;
  int d = 0;
};

struct BoundTerm {
  std::string name;
  double value;
};

struct BoundReport {
  std::vector<BoundTerm> terms;
  double total = 0.0;
  bool certified = false;  // true only when the leading constants are proven
  std::string note;
};

// certified constants from the convex analysis:
//   4 ||L||_1 D_inf^2 / T + sqrt(2) D_inf ||sigma||_1 / sqrt(MT)
//   + eps D_2^2 / (D_inf T)
BoundReport bound_adagrad_convex(const BoundInputs& b);

// ||L||_inf D_2^2 / T + 2 sqrt(2) D_2 ||sigma||_2 / sqrt(MT)
BoundReport bound_sgd_convex(const BoundInputs& b);

// order-level sums with unit constants, logs dropped; generalized=true adds
// the L1 terms and switches the L0 symbol
BoundReport bound_adagrad_nonconvex(const BoundInputs& b, bool generalized = false);
BoundReport bound_sgd_nonconvex(const BoundInputs& b);
BoundReport bound_adagradnorm_nonconvex(const BoundInputs& b);

// term-wise scaling hook for sensitivity studies; scales must match the
// report's term count
double scaled_total(const BoundReport& r, const std::vector<double>& scales);

}  // namespace anisograd
