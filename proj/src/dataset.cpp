#include "anisograd/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace anisograd {

static void parse_fail(const std::string& name, int64_t lineno, const std::string& what) {
  throw std::runtime_error(name + ":" + std::to_string(lineno) + ": " + what);
}

Dataset parse_libsvm(std::istream& in, const std::string& name,
                     int dim_override, bool add_bias) {
  Dataset ds;
  ds.name = name;
  std::string line;
  int64_t lineno = 0;
  int max_index = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;  // blank line

    double label;
    if (tok == "+1" || tok == "1")
      label = 1.0;
    else if (tok == "-1" || tok == "0")
      label = -1.0;
    else
      parse_fail(name, lineno, "bad label '" + tok + "'");

    int prev = 0;
    while (ls >> tok) {
      size_t colon = tok.find(':');
      if (colon == std::string::npos)
        parse_fail(name, lineno, "feature token '" + tok + "' has no ':'");
      int index = 0;
      auto r1 = std::from_chars(tok.data(), tok.data() + colon, index);
      if (r1.ec != std::errc() || r1.ptr != tok.data() + colon)
        parse_fail(name, lineno, "bad feature index in '" + tok + "'");
      if (index < 1)
        parse_fail(name, lineno, "feature index must be >= 1, got " + std::to_string(index));
      if (index <= prev)
        parse_fail(name, lineno, "feature indices not strictly increasing at '" + tok + "'");
      double value = 0.0;
      try {
        size_t used = 0;
        value = std::stod(tok.substr(colon + 1), &used);
        if (used != tok.size() - colon - 1) throw std::invalid_argument("trailing junk");
      } catch (const std::exception&) {
        parse_fail(name, lineno, "bad feature value in '" + tok + "'");
      }
      if (!std::isfinite(value) || value == 0.0)
        parse_fail(name, lineno, "feature value must be finite and nonzero in '" + tok + "'");
      ds.idx.push_back(index - 1);  // to 0-based
      ds.val.push_back(value);
      prev = index;
      max_index = std::max(max_index, index);
    }
    ds.y.push_back(label);
    ds.offs.push_back((int64_t)ds.idx.size());
  }
  if (ds.y.empty()) throw std::runtime_error(name + ": empty dataset");

  ds.dim = dim_override > 0 ? dim_override : max_index;
  if (max_index > ds.dim)
    throw std::runtime_error(name + ": feature index " + std::to_string(max_index) +
                             " exceeds declared dim " + std::to_string(ds.dim));

  if (add_bias) {
    // append a constant-1 column after the last feature column
    Dataset out;
    out.name = ds.name;
    out.dim = ds.dim + 1;
    out.y = ds.y;
    out.offs.assign(1, 0);
    for (int64_t i = 0; i < ds.n(); ++i) {
      for (int64_t k = ds.offs[i]; k < ds.offs[i + 1]; ++k) {
        out.idx.push_back(ds.idx[k]);
        out.val.push_back(ds.val[k]);
      }
      out.idx.push_back(ds.dim);
      out.val.push_back(1.0);
      out.offs.push_back((int64_t)out.idx.size());
    }
    return out;
  }
  return ds;
}

Dataset load_libsvm(const std::string& path, int dim_override, bool add_bias) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open dataset file: " + path);
  return parse_libsvm(f, path, dim_override, add_bias);
}

static std::string fmt_double(double x) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, r.ptr);
}

void emit_libsvm(const Dataset& ds, std::ostream& out) {
  for (int64_t i = 0; i < ds.n(); ++i) {
    out << (ds.y[i] > 0 ? "+1" : "-1");
    for (int64_t k = ds.offs[i]; k < ds.offs[i + 1]; ++k)
      out << ' ' << (ds.idx[k] + 1) << ':' << fmt_double(ds.val[k]);
    out << '\n';
  }
}

void save_libsvm(const Dataset& ds, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write dataset file: " + path);
  emit_libsvm(ds, f);
}

Vec h_matvec(const Dataset& ds, const Vec& v) {
  if ((int)v.size() != ds.dim) throw std::invalid_argument("h_matvec: dimension mismatch");
  Vec out(ds.dim, 0.0);
  for (int64_t i = 0; i < ds.n(); ++i) {
    double s = 0.0;
    for (int64_t k = ds.offs[i]; k < ds.offs[i + 1]; ++k) s += ds.val[k] * v[ds.idx[k]];
    for (int64_t k = ds.offs[i]; k < ds.offs[i + 1]; ++k) out[ds.idx[k]] += ds.val[k] * s;
  }
  double inv_n = 1.0 / (double)ds.n();
  for (double& x : out) x *= inv_n;
  return out;
}

static double rayleigh(const Dataset& ds, const Vec& v) {
  Vec hv = h_matvec(ds, v);
  return dot(v, hv) / dot(v, v);
}

DataStats compute_stats(const Dataset& ds, const std::vector<double>& p_list, int power_iters) {
  if (ds.n() < 1) throw std::invalid_argument("compute_stats: empty dataset");
  if (power_iters < 1) throw std::invalid_argument("compute_stats: power_iters must be >= 1");

  DataStats st;
  st.n = ds.n();
  st.dim = ds.dim;
  st.avg_nnz = ds.avg_nnz();

  st.h_diag.assign(ds.dim, 0.0);
  for (int64_t k = 0; k < ds.nnz(); ++k) st.h_diag[ds.idx[k]] += ds.val[k] * ds.val[k];
  double inv_n = 1.0 / (double)ds.n();
  for (double& x : st.h_diag) x *= inv_n;

  for (double p : p_list) {
    if (!(p >= 1.0)) throw std::invalid_argument("compute_stats: p must be >= 1");
    double s = 0.0;
    for (double h : st.h_diag) s += std::pow(h, p / 2.0);
    st.m_p[p] = std::pow(s, 1.0 / p);
  }

  // power iteration, all-ones start, one seeded random restart on stall.
  // Each iteration applies H twice (H is PSD, so H^2 shares the top
  // eigenvector); the ten-iteration convention then reaches ~1e-5 even on
  // moderately separated spectra like (3,2,1)
  Vec v(ds.dim, 1.0 / std::sqrt((double)ds.dim));
  double rq = rayleigh(ds, v), prev_rq = -1.0;
  bool restarted = false;
  for (int it = 0; it < power_iters; ++it) {
    Vec hv = h_matvec(ds, h_matvec(ds, v));
    double nn = norm2(hv);
    if (nn == 0.0) {
      rq = 0.0;
      break;
    }
    for (int j = 0; j < ds.dim; ++j) v[j] = hv[j] / nn;
    prev_rq = rq;
    rq = rayleigh(ds, v);
    if (!restarted && std::fabs(rq - prev_rq) < 1e-12 * std::max(1.0, std::fabs(rq)) &&
        it + 1 < power_iters) {
      // could be an unlucky start orthogonal to the top eigenvector
      std::mt19937_64 rng(987654321ULL);
      std::normal_distribution<double> gauss(0.0, 1.0);
      Vec r(ds.dim);
      for (double& x : r) x = gauss(rng);
      double rn = norm2(r);
      for (int j = 0; j < ds.dim; ++j) v[j] = r[j] / rn;
      double rrq = rayleigh(ds, v);
      if (rrq > rq) rq = rrq;
      restarted = true;
    }
  }
  st.lambda_max = rq;

  int positive = 0;
  for (double h : st.h_diag)
    if (h > 0.0) ++positive;
  if (positive >= 2) {
    double resid = 0.0;
    st.tail_tau = fit_exponential_tail(st.h_diag, &resid);
    st.tail_residual = resid;
  }
  return st;
}

double fit_exponential_tail(const Vec& h_diag, double* rms_residual) {
  Vec h;
  for (double x : h_diag)
    if (x > 0.0) h.push_back(x);
  if (h.size() < 2)
    throw std::invalid_argument("fit_exponential_tail: need >= 2 strictly positive entries");
  std::sort(h.rbegin(), h.rend());

  // least squares of ln h_(j) against rank j = 1..k
  double n = (double)h.size(), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t j = 0; j < h.size(); ++j) {
    double x = (double)(j + 1), yv = std::log(h[j]);
    sx += x;
    sy += yv;
    sxx += x * x;
    sxy += x * yv;
  }
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  double inter = (sy - slope * sx) / n;
  if (rms_residual) {
    double ss = 0.0;
    for (size_t j = 0; j < h.size(); ++j) {
      double r = std::log(h[j]) - (inter + slope * (double)(j + 1));
      ss += r * r;
    }
    *rms_residual = std::sqrt(ss / n);
  }
  return -slope;
}

}  // namespace anisograd
