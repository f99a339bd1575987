#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "peersplit/core_model.hpp"

namespace peersplit {

namespace detail {

inline void require_matching(const WeightMatrix& w, std::span<const double> p) {
  if (p.size() != w.cols())
    throw Error(ErrorCode::DimensionMismatch, "priority vector has " + std::to_string(p.size()) +
                                                  " entries but the weight matrix has " +
                                                  std::to_string(w.cols()) + " experts");
}

}  // namespace detail

// The raw operators take a plain span for the priorities so that the
// optimizers can feed unvalidated intermediate points; the
// ExpertPriorityVector overloads are the checked entry points.

/// Weighted geometric mean per alternative: prod_q w_q(a_i)^p_q. Not normalized.
inline std::vector<double> gaip(const WeightMatrix& w, std::span<const double> p) {
  detail::require_matching(w, p);
  std::vector<double> out(w.rows());
  for (std::size_t i = 0; i < w.rows(); ++i) {
    double log_sum = 0.0;
    for (std::size_t q = 0; q < w.cols(); ++q) log_sum += p[q] * std::log(w(i, q));
    out[i] = std::exp(log_sum);
  }
  return out;
}

/// Weighted arithmetic mean per alternative, i.e. W·p.
inline std::vector<double> aaip(const WeightMatrix& w, std::span<const double> p) {
  detail::require_matching(w, p);
  std::vector<double> out(w.rows(), 0.0);
  for (std::size_t q = 0; q < w.cols(); ++q) {
    const auto col = w.column(q);
    for (std::size_t i = 0; i < w.rows(); ++i) out[i] += p[q] * col[i];
  }
  return out;
}

inline std::vector<double> gaip(const WeightMatrix& w, const ExpertPriorityVector& p) { return gaip(w, p.values()); }
inline std::vector<double> aaip(const WeightMatrix& w, const ExpertPriorityVector& p) { return aaip(w, p.values()); }

inline std::vector<double> aggregate(AggregationMode mode, const WeightMatrix& w, std::span<const double> p) {
  return mode == AggregationMode::GAIP ? gaip(w, p) : aaip(w, p);
}

/// v / sum(v) as a priority vector.
inline ExpertPriorityVector normalize(std::span<const double> v) {
  detail::require_positive(v, "vector to normalize");
  double sum = 0.0;
  for (double x : v) sum += x;
  std::vector<double> out(v.begin(), v.end());
  for (double& x : out) x /= sum;
  return ExpertPriorityVector(std::move(out));
}

}  // namespace peersplit
