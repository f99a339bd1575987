#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "peersplit/aggregation.hpp"
#include "peersplit/core_model.hpp"
#include "peersplit/linalg.hpp"

namespace peersplit {

namespace detail {

inline void require_square(const WeightMatrix& w) {
  if (w.rows() != w.cols())
    throw Error(ErrorCode::DimensionMismatch, "peer panels need one expert per alternative");
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace detail

/// Sum of squared differences between AGG(W, y/sum(y)) and y.
///
/// y is the unnormalized share vector; the residual is zero exactly when
/// p = y/sum(y) is a fixed point of the normalized aggregation map and y
/// equals the raw aggregate.
inline double residual(AggregationMode mode, const WeightMatrix& w, std::span<const double> y) {
  detail::require_square(w);
  if (y.size() != w.rows()) throw Error(ErrorCode::DimensionMismatch, "share vector length mismatch");
  detail::require_positive(y, "share vector");
  double sum = 0.0;
  for (double v : y) sum += v;
  std::vector<double> p(y.begin(), y.end());
  for (double& v : p) v /= sum;
  const auto agg = aggregate(mode, w, p);
  double r = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) r += (agg[i] - y[i]) * (agg[i] - y[i]);
  return r;
}

/// Multiplicative residual g.
inline double residual_g(const WeightMatrix& w, std::span<const double> y) {
  return residual(AggregationMode::GAIP, w, y);
}

/// Additive residual h.
inline double residual_h(const WeightMatrix& w, std::span<const double> y) {
  return residual(AggregationMode::AAIP, w, y);
}

/// Direct iteration p <- normalize(AGG(W, p)) from the normalized aggregate
/// of uniform priorities.
///
/// Stops once consecutive iterates differ by less than delta in max-norm,
/// then evaluates the residual at y = AGG(W, p_prev), whose normalization is
/// the returned share vector. Running out of iterations is reported through
/// converged = false, never thrown.
inline SolveReport dia_solve(const WeightMatrix& w, const SolverConfig& cfg) {
  detail::require_square(w);
  if (cfg.gamma < 1 || !(cfg.delta > 0.0) || !(cfg.epsilon > 0.0))
    throw Error(ErrorCode::InvalidConfig, "DIA needs gamma >= 1, delta > 0, epsilon > 0");
  const AggregationMode mode = cfg.aggregation_mode;
  const std::size_t n = w.rows();

  SolveReport report;
  report.solver = "dia";
  report.per_expert_weights = w;

  const std::vector<double> uniform(n, 1.0 / static_cast<double>(n));
  ExpertPriorityVector current = normalize(aggregate(mode, w, uniform));
  if (cfg.trace) report.trace.emplace_back(current.values().begin(), current.values().end());

  std::vector<double> raw;
  for (std::size_t it = 1; it <= cfg.gamma; ++it) {
    raw = aggregate(mode, w, current.values());
    ExpertPriorityVector next = normalize(raw);
    if (cfg.trace) report.trace.emplace_back(next.values().begin(), next.values().end());
    const double change = detail::max_abs_diff(next.values(), current.values());
    current = std::move(next);
    report.iterations = it;
    if (change < cfg.delta) {
      report.residual = residual(mode, w, raw);
      report.converged = report.residual <= cfg.epsilon;
      report.point = std::move(raw);
      report.shares = std::move(current);
      return report;
    }
  }
  // Solution not found: hand back the last iterate and its residual.
  report.residual = residual(mode, w, raw);
  report.converged = false;
  report.point = std::move(raw);
  report.shares = std::move(current);
  return report;
}

/// Positive normalized solution of W p = p by a direct solve of
/// (W - I) p = 0 with the last equation replaced by sum(p) = 1.
inline ExpertPriorityVector aaip_exact(const WeightMatrix& w) {
  detail::require_square(w);
  const std::size_t n = w.rows();
  linalg::DenseMatrix a(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = w(i, j) - (i == j ? 1.0 : 0.0);
  for (std::size_t j = 0; j < n; ++j) a(n - 1, j) = 1.0;
  std::vector<double> rhs(n, 0.0);
  rhs[n - 1] = 1.0;
  auto p = linalg::solve(std::move(a), std::move(rhs), 1e-12);
  for (double v : p)
    if (!(v > 0.0)) throw Error(ErrorCode::SingularSystem, "stationary vector is not strictly positive");
  return normalize(p);
}

}  // namespace peersplit
