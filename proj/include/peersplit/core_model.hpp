#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "peersplit/error.hpp"

namespace peersplit {

/// Row-major n×n table as supplied by an expert; std::nullopt marks a
/// comparison that was not provided.
using RawMatrix = std::vector<std::vector<std::optional<double>>>;

inline constexpr double kReciprocityTolerance = 1e-6;
inline constexpr double kSimplexTolerance = 1e-12;

/// One expert's pairwise-comparison matrix. Instances only come out of
/// validate_pcmatrix, so every PCMatrix satisfies: n >= 2, unit diagonal,
/// positive present entries, reciprocal fill for half-present pairs.
class PCMatrix {
 public:
  std::size_t size() const noexcept { return n_; }
  const std::string& expert_id() const noexcept { return expert_id_; }

  std::optional<double> at(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }
  bool has(std::size_t i, std::size_t j) const { return entries_[i * n_ + j].has_value(); }
  /// Value of a present entry; only valid when has(i, j).
  double value(std::size_t i, std::size_t j) const { return *entries_[i * n_ + j]; }

  bool is_complete() const {
    for (const auto& e : entries_)
      if (!e) return false;
    return true;
  }

  RawMatrix raw() const {
    RawMatrix out(n_, std::vector<std::optional<double>>(n_));
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) out[i][j] = at(i, j);
    return out;
  }

  friend bool operator==(const PCMatrix&, const PCMatrix&) = default;

 private:
  PCMatrix(std::size_t n, std::vector<std::optional<double>> entries, std::string id)
      : n_(n), entries_(std::move(entries)), expert_id_(std::move(id)) {}

  friend PCMatrix validate_pcmatrix(const RawMatrix&, bool, std::string);

  std::size_t n_ = 0;
  std::vector<std::optional<double>> entries_;
  std::string expert_id_;
};

/// Checks and completes a raw comparison table.
///
/// The diagonal is set to 1 (a present diagonal entry other than 1 is a
/// reciprocity violation when enforcement is on). If exactly one of
/// (i,j)/(j,i) is present the other becomes its reciprocal; present entries
/// are never overwritten.
inline PCMatrix validate_pcmatrix(const RawMatrix& raw, bool enforce_reciprocity = true,
                                  std::string expert_id = {}) {
  const std::size_t n = raw.size();
  if (n < 2)
    throw Error(ErrorCode::BadDimension, "comparison matrix needs at least 2 alternatives", expert_id);
  for (const auto& row : raw)
    if (row.size() != n)
      throw Error(ErrorCode::BadDimension, "comparison matrix is not square", expert_id);

  std::vector<std::optional<double>> entries(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto& e = raw[i][j];
      if (!e) continue;
      const std::string where = "(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")";
      if (!std::isfinite(*e))
        throw Error(ErrorCode::NonFiniteEntry, "entry " + where + " is not finite", expert_id);
      if (*e <= 0.0)
        throw Error(ErrorCode::NonPositiveEntry,
                    "entry " + where + " = " + std::to_string(*e) + " is not positive", expert_id);
      entries[i * n + j] = *e;
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    auto& d = entries[i * n + i];
    if (d && enforce_reciprocity && std::abs(*d * *d - 1.0) > kReciprocityTolerance)
      throw Error(ErrorCode::ReciprocityViolation,
                  "diagonal entry (" + std::to_string(i + 1) + "," + std::to_string(i + 1) + ") is not 1",
                  expert_id);
    d = 1.0;
  }

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      auto& upper = entries[i * n + j];
      auto& lower = entries[j * n + i];
      if (upper && lower) {
        if (enforce_reciprocity && std::abs(*upper * *lower - 1.0) > kReciprocityTolerance)
          throw Error(ErrorCode::ReciprocityViolation,
                      "entries (" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ") and (" +
                          std::to_string(j + 1) + "," + std::to_string(i + 1) + ") are not reciprocal",
                      expert_id);
      } else if (upper) {
        lower = 1.0 / *upper;
      } else if (lower) {
        upper = 1.0 / *lower;
      }
    }
  }
  return PCMatrix(n, std::move(entries), std::move(expert_id));
}

/// True iff the undirected graph with an edge for every present off-diagonal
/// comparison connects all alternatives.
inline bool comparison_graph_connected(const PCMatrix& m) {
  const std::size_t n = m.size();
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    for (std::size_t j = 0; j < n; ++j) {
      if (seen[j] || !(m.has(i, j) || m.has(j, i))) continue;
      seen[j] = true;
      ++reached;
      stack.push_back(j);
    }
  }
  return reached == n;
}

namespace detail {

inline void require_positive(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteEntry, std::string(what) + " has a non-finite entry");
    if (v <= 0.0) throw Error(ErrorCode::NonPositiveEntry, std::string(what) + " has a non-positive entry");
  }
}

inline bool on_simplex(std::span<const double> values) {
  const double sum = std::accumulate(values.begin(), values.end(), 0.0);
  return std::abs(sum - 1.0) <= kSimplexTolerance;
}

}  // namespace detail

/// Priority vector derived from one expert's matrix.
class WeightVector {
 public:
  WeightVector() = default;
  WeightVector(std::vector<double> values, bool normalized) : values_(std::move(values)), normalized_(normalized) {
    detail::require_positive(values_, "weight vector");
    if (normalized_ && !detail::on_simplex(values_))
      throw Error(ErrorCode::InvalidConfig, "weight vector flagged normalized does not sum to 1");
  }

  std::size_t size() const noexcept { return values_.size(); }
  bool normalized() const noexcept { return normalized_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }

  friend bool operator==(const WeightVector&, const WeightVector&) = default;

 private:
  std::vector<double> values_;
  bool normalized_ = false;
};

/// Voting priorities of the experts: strictly positive, summing to 1.
class ExpertPriorityVector {
 public:
  ExpertPriorityVector() = default;
  explicit ExpertPriorityVector(std::vector<double> values) : values_(std::move(values)) {
    detail::require_positive(values_, "priority vector");
    if (!detail::on_simplex(values_))
      throw Error(ErrorCode::InvalidConfig, "priority vector does not sum to 1");
  }

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }

  friend bool operator==(const ExpertPriorityVector&, const ExpertPriorityVector&) = default;

 private:
  std::vector<double> values_;
};

/// Column q holds expert q's normalized weights over the n alternatives.
class WeightMatrix {
 public:
  WeightMatrix() = default;
  explicit WeightMatrix(std::vector<std::vector<double>> columns) : columns_(std::move(columns)) {
    if (columns_.empty()) throw Error(ErrorCode::BadDimension, "weight matrix has no columns");
    const std::size_t n = columns_.front().size();
    if (n == 0) throw Error(ErrorCode::BadDimension, "weight matrix has empty columns");
    for (const auto& c : columns_) {
      if (c.size() != n) throw Error(ErrorCode::DimensionMismatch, "weight matrix columns differ in length");
      detail::require_positive(c, "weight matrix column");
      if (!detail::on_simplex(c)) throw Error(ErrorCode::InvalidConfig, "weight matrix column does not sum to 1");
    }
  }
  explicit WeightMatrix(const std::vector<WeightVector>& columns)
      : WeightMatrix([&] {
          std::vector<std::vector<double>> cols;
          cols.reserve(columns.size());
          for (const auto& w : columns) cols.emplace_back(w.values().begin(), w.values().end());
          return cols;
        }()) {}

  /// Number of alternatives.
  std::size_t rows() const noexcept { return columns_.empty() ? 0 : columns_.front().size(); }
  /// Number of experts.
  std::size_t cols() const noexcept { return columns_.size(); }
  double operator()(std::size_t alternative, std::size_t expert) const { return columns_[expert][alternative]; }
  std::span<const double> column(std::size_t expert) const { return columns_[expert]; }

  friend bool operator==(const WeightMatrix&, const WeightMatrix&) = default;

 private:
  std::vector<std::vector<double>> columns_;
};

enum class DerivationMethod { EVM, GMM, LLSM };
enum class AggregationMode { GAIP, AAIP };
enum class SolverKind { DIA, NelderMead, DifferentialEvolution, SimulatedAnnealing, AAIPExact };

struct SolverConfig {
  DerivationMethod derivation_method = DerivationMethod::GMM;
  AggregationMode aggregation_mode = AggregationMode::GAIP;
  SolverKind solver = SolverKind::DIA;

  std::size_t gamma = 1000;  // max DIA iterations
  double delta = 1e-10;      // max-norm change between consecutive iterates
  double epsilon = 1e-8;     // largest acceptable residual
  std::uint64_t seed = 0;
  bool trace = false;

  // Nelder–Mead; a zero budget means 200·n evaluations per start.
  std::size_t nm_starts = 8;
  std::size_t nm_max_evaluations = 0;
  double nm_initial_step = 0.5;
  double nm_ftol = 1e-12;

  std::size_t de_population = 40;
  double de_scale = 0.8;
  double de_crossover = 0.9;
  std::size_t de_generations = 1000;
  std::size_t de_stall_generations = 60;

  std::size_t sa_starts = 4;
  std::size_t sa_iterations = 2000;
  double sa_radius_decay = 0.99;
  std::size_t sa_stall = 400;
};

struct ConsistencyInfo {
  double ci = 0.0;
  std::optional<double> cr;

  friend bool operator==(const ConsistencyInfo&, const ConsistencyInfo&) = default;
};

struct SolveReport {
  ExpertPriorityVector shares;
  /// Unnormalized point y at which the residual was evaluated.
  std::vector<double> point;
  double residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::string solver;
  /// Set when DIA failed and a global optimizer took over.
  bool fallback = false;
  /// Set when independent optimizer starts reached distinct zero-residual points.
  bool ambiguous = false;
  WeightMatrix per_expert_weights;
  std::vector<ConsistencyInfo> consistency;
  std::vector<std::vector<double>> trace;
};

inline std::string_view to_string(DerivationMethod m) {
  switch (m) {
    case DerivationMethod::EVM: return "evm";
    case DerivationMethod::GMM: return "gmm";
    case DerivationMethod::LLSM: return "llsm";
  }
  return "?";
}

inline std::string_view to_string(AggregationMode m) { return m == AggregationMode::GAIP ? "gaip" : "aaip"; }

inline std::string_view to_string(SolverKind s) {
  switch (s) {
    case SolverKind::DIA: return "dia";
    case SolverKind::NelderMead: return "nm";
    case SolverKind::DifferentialEvolution: return "de";
    case SolverKind::SimulatedAnnealing: return "sa";
    case SolverKind::AAIPExact: return "exact";
  }
  return "?";
}

}  // namespace peersplit
