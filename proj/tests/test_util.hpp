#pragma once

// Shared independent oracles for the test suite. These deliberately avoid the
// library's own code paths: the grid searcher minimizes by exhaustive
// evaluation and the eigensolver is a classic dense Jacobi sweep.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "anisograd/core.hpp"

namespace testutil {

// coarse-to-fine full-grid minimizer of sum_j lambda_j (z_j - w_j)^2 over a box
inline anisograd::Vec grid_argmin(const anisograd::Vec& lower,
                                  const anisograd::Vec& upper,
                                  const anisograd::Vec& lambda,
                                  const anisograd::Vec& w,
                                  int points_per_axis, int rounds) {
  const int d = (int)w.size();
  anisograd::Vec lo = lower, hi = upper;
  anisograd::Vec best(d, 0.0);
  for (int round = 0; round < rounds; ++round) {
    const int n = points_per_axis;
    std::vector<int> ix(d, 0);
    double bestval = std::numeric_limits<double>::infinity();
    anisograd::Vec z(d, 0.0);
    while (true) {
      for (int j = 0; j < d; ++j)
        z[j] = (n == 1) ? lo[j] : lo[j] + (hi[j] - lo[j]) * ix[j] / (n - 1);
      double val = 0.0;
      for (int j = 0; j < d; ++j) val += lambda[j] * (z[j] - w[j]) * (z[j] - w[j]);
      if (val < bestval) {
        bestval = val;
        best = z;
      }
      int k = 0;
      while (k < d && ++ix[k] == n) ix[k++] = 0;
      if (k == d) break;
    }
    // shrink to +-1.5 grid cells around the incumbent, clipped to the box
    for (int j = 0; j < d; ++j) {
      double cell = (n == 1) ? (hi[j] - lo[j]) : (hi[j] - lo[j]) / (n - 1);
      lo[j] = std::max(lower[j], best[j] - 1.5 * cell);
      hi[j] = std::min(upper[j], best[j] + 1.5 * cell);
    }
  }
  return best;
}

// Jacobi eigenvalue sweep for a small symmetric matrix; returns eigenvalues
// sorted descending
inline std::vector<double> jacobi_eigenvalues(std::vector<std::vector<double>> a) {
  const int n = (int)a.size();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-24) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::fabs(a[p][q]) < 1e-300) continue;
        double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (int k = 0; k < n; ++k) {
          double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (int i = 0; i < n; ++i) ev[i] = a[i][i];
  std::sort(ev.rbegin(), ev.rend());
  return ev;
}

// least squares fit y ~ a + b x via the 2x2 normal equations
inline std::pair<double, double> linear_fit(const std::vector<double>& x,
                                            const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("linear_fit: need >= 2 matching points");
  double n = (double)x.size(), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double den = n * sxx - sx * sx;
  if (std::fabs(den) < 1e-300) throw std::runtime_error("linear_fit: degenerate x");
  double b = (n * sxy - sx * sy) / den;
  double a = (sy - b * sx) / n;
  return {a, b};
}

}  // namespace testutil
