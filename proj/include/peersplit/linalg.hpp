#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "peersplit/error.hpp"

namespace peersplit::linalg {

/// Dense row-major square matrix, just enough for the small systems here.
struct DenseMatrix {
  std::size_t n = 0;
  std::vector<double> data;

  explicit DenseMatrix(std::size_t size) : n(size), data(size * size, 0.0) {}
  double& operator()(std::size_t i, std::size_t j) { return data[i * n + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * n + j]; }
};

/// Gaussian elimination with partial pivoting. Throws SingularSystem when a
/// pivot falls below `pivot_tol` times the largest absolute entry of the input.
inline std::vector<double> solve(DenseMatrix a, std::vector<double> b, double pivot_tol = 1e-13) {
  const std::size_t n = a.n;
  double scale = 0.0;
  for (double v : a.data) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) throw Error(ErrorCode::SingularSystem, "zero matrix");

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    if (std::abs(a(piv, k)) <= pivot_tol * scale)
      throw Error(ErrorCode::SingularSystem, "matrix is numerically singular");
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      std::swap(b[k], b[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      if (f == 0.0) continue;
      for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
      b[i] -= f * b[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t k = n; k-- > 0;) {
    double s = b[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= a(k, j) * x[j];
    x[k] = s / a(k, k);
  }
  return x;
}

}  // namespace peersplit::linalg
