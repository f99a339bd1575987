#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "peersplit/core_model.hpp"
#include "peersplit/linalg.hpp"

namespace peersplit {

namespace detail {

inline WeightVector to_unit_sum(std::vector<double> v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  for (double& x : v) x /= sum;
  return WeightVector(std::move(v), true);
}

inline void require_complete(const PCMatrix& m) {
  if (!m.is_complete())
    throw Error(ErrorCode::IncompleteMatrix, "method needs a complete comparison matrix", m.expert_id());
}

}  // namespace detail

struct EvmResult {
  WeightVector weights;
  double lambda_max = 0.0;
  std::size_t iterations = 0;
};

inline constexpr std::size_t kEvmMaxIterations = 10000;
inline constexpr double kEvmTolerance = 1e-12;

/// Principal right eigenvector by power iteration from the uniform vector.
inline EvmResult derive_evm(const PCMatrix& m) {
  detail::require_complete(m);
  const std::size_t n = m.size();
  std::vector<double> x(n, 1.0 / static_cast<double>(n));
  std::vector<double> y(n);

  auto apply = [&](const std::vector<double>& in, std::vector<double>& out) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += m.value(i, j) * in[j];
      out[i] = s;
    }
  };

  for (std::size_t it = 1; it <= kEvmMaxIterations; ++it) {
    apply(x, y);
    double sum = 0.0;
    for (double v : y) sum += v;
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      y[i] /= sum;
      change = std::max(change, std::abs(y[i] - x[i]));
    }
    x.swap(y);
    if (change <= kEvmTolerance) {
      apply(x, y);
      double lambda = 0.0;
      for (double v : y) lambda += v;
      return {detail::to_unit_sum(std::move(x)), lambda, it};
    }
  }
  throw Error(ErrorCode::NoConvergence, "power iteration did not converge", m.expert_id());
}

/// Normalized row geometric means.
inline WeightVector derive_gmm(const PCMatrix& m) {
  detail::require_complete(m);
  const std::size_t n = m.size();
  std::vector<double> logs(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) logs[i] += std::log(m.value(i, j));
    logs[i] /= static_cast<double>(n);
  }
  // Shift by the max so the largest weight is exp(0) before normalizing.
  const double top = *std::max_element(logs.begin(), logs.end());
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = std::exp(logs[i] - top);
  return detail::to_unit_sum(std::move(w));
}

/// Logarithmic least squares over the present comparisons.
///
/// Minimizes sum over present (i,j) of (ln c_ij - x_i + x_j)^2 via the
/// graph-Laplacian normal equations with x_0 fixed at 0, then returns
/// exp(x) normalized. Works for incomplete matrices with a connected
/// comparison graph and coincides with GMM on complete ones.
inline WeightVector derive_llsm(const PCMatrix& m) {
  if (!comparison_graph_connected(m))
    throw Error(ErrorCode::DisconnectedGraph, "comparison graph is not connected", m.expert_id());
  const std::size_t n = m.size();
  linalg::DenseMatrix lap(n);
  std::vector<double> rhs(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || !m.has(i, j)) continue;
      const double r = std::log(m.value(i, j));
      lap(i, i) += 1.0;
      lap(j, j) += 1.0;
      lap(i, j) -= 1.0;
      lap(j, i) -= 1.0;
      rhs[i] += r;
      rhs[j] -= r;
    }
  }

  // Gauge: drop the first unknown.
  const std::size_t r = n - 1;
  linalg::DenseMatrix reduced(r);
  std::vector<double> b(r);
  for (std::size_t i = 0; i < r; ++i) {
    b[i] = rhs[i + 1];
    for (std::size_t j = 0; j < r; ++j) reduced(i, j) = lap(i + 1, j + 1);
  }
  const auto sol = linalg::solve(std::move(reduced), std::move(b));

  std::vector<double> x(n, 0.0);
  for (std::size_t i = 0; i < r; ++i) x[i + 1] = sol[i];
  const double top = *std::max_element(x.begin(), x.end());
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = std::exp(x[i] - top);
  return detail::to_unit_sum(std::move(w));
}

inline WeightVector derive_weights(const PCMatrix& m, DerivationMethod method) {
  switch (method) {
    case DerivationMethod::EVM: return derive_evm(m).weights;
    case DerivationMethod::GMM: return derive_gmm(m);
    case DerivationMethod::LLSM: return derive_llsm(m);
  }
  throw Error(ErrorCode::InvalidConfig, "unknown derivation method");
}

/// Saaty's random consistency index for n = 3..15.
inline std::optional<double> random_index(std::size_t n) {
  static constexpr std::array<double, 13> table{0.58, 0.90, 1.12, 1.24, 1.32, 1.41, 1.45,
                                                1.49, 1.51, 1.48, 1.56, 1.57, 1.59};
  if (n < 3 || n > 15) return std::nullopt;
  return table[n - 3];
}

/// CI = (lambda_max - n)/(n - 1); CR = CI/RI_n where the random index is tabulated.
inline ConsistencyInfo consistency_index(const PCMatrix& m) {
  detail::require_complete(m);
  const auto n = static_cast<double>(m.size());
  const double lambda = derive_evm(m).lambda_max;
  ConsistencyInfo out;
  out.ci = (lambda - n) / (n - 1.0);
  if (auto ri = random_index(m.size())) out.cr = out.ci / *ri;
  return out;
}

}  // namespace peersplit
