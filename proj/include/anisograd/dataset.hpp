#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "anisograd/core.hpp"

namespace anisograd {

// sparse examples in CSR layout; feature ids are 0-based in memory and
// 1-based on disk (libsvm convention), converted in the parser only
struct Dataset {
  std::string name;
  int dim = 0;
  std::vector<int64_t> offs{0};  // n+1 row offsets into idx/val
  std::vector<int> idx;
  std::vector<double> val;
  std::vector<double> y;  // -1 or +1

  int64_t n() const { return (int64_t)y.size(); }
  int64_t nnz() const { return (int64_t)idx.size(); }
  double avg_nnz() const { return y.empty() ? 0.0 : (double)idx.size() / (double)y.size(); }
};

// "label idx:val idx:val ..." lines; blank lines tolerated. Labels "+1"/"1"
// map to +1 and "-1"/"0" to -1. dim_override = 0 means use the max index.
// add_bias appends a constant-1 feature after the last column.
Dataset parse_libsvm(std::istream& in, const std::string& name,
                     int dim_override = 0, bool add_bias = false);
Dataset load_libsvm(const std::string& path, int dim_override = 0, bool add_bias = false);

// debug serializer; parse(emit(ds)) round-trips exactly
void emit_libsvm(const Dataset& ds, std::ostream& out);
void save_libsvm(const Dataset& ds, const std::string& path);

struct DataStats {
  int64_t n = 0;
  int dim = 0;
  double avg_nnz = 0.0;
  Vec h_diag;                    // H_jj = (1/n) sum_i x_{i,j}^2
  std::map<double, double> m_p;  // p -> (sum_j H_jj^{p/2})^{1/p}
  double lambda_max = 0.0;       // top eigenvalue of H, power iteration
  std::optional<double> tail_tau;
  double tail_residual = 0.0;  // rms residual of the log-linear tail fit
};

DataStats compute_stats(const Dataset& ds, const std::vector<double>& p_list = {1.0, 2.0},
                        int power_iters = 10);

// least-squares fit of ln H_(j) ~ a - tau * j over the descending-sorted
// strictly positive entries, rank j starting at 1
double fit_exponential_tail(const Vec& h_diag, double* rms_residual = nullptr);

// matrix-free product v -> H v = (1/n) sum_i x_i (x_i^T v)
Vec h_matvec(const Dataset& ds, const Vec& v);

}  // namespace anisograd
