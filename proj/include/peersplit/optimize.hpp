#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "peersplit/aggregation.hpp"
#include "peersplit/core_model.hpp"
#include "peersplit/fixed_point.hpp"

namespace peersplit {

/// Box-constrained scalar objective.
struct Objective {
  std::size_t dimension = 0;
  std::function<double(std::span<const double>)> evaluate;
  std::vector<double> lower;
  std::vector<double> upper;

  bool contains(std::span<const double> x) const {
    for (std::size_t i = 0; i < dimension; ++i)
      if (!(x[i] >= lower[i] && x[i] <= upper[i])) return false;
    return true;
  }

  void clamp(std::span<double> x) const {
    for (std::size_t i = 0; i < dimension; ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
  }
};

struct OptimResult {
  std::vector<double> argmin;
  double value = std::numeric_limits<double>::infinity();
  std::size_t evaluations = 0;
  bool budget_exhausted = false;
  /// Best value found so far, one entry per solver iteration.
  std::vector<double> history;
};

inline constexpr double kLogShareBound = 12.0;

/// Residual g (GAIP) or h (AAIP) as a function of z = ln y over [-12, 12]^n.
inline Objective build_residual_objective(const WeightMatrix& w, AggregationMode mode) {
  detail::require_square(w);
  const std::size_t n = w.rows();
  Objective obj;
  obj.dimension = n;
  obj.lower.assign(n, -kLogShareBound);
  obj.upper.assign(n, kLogShareBound);
  obj.evaluate = [w, mode](std::span<const double> z) {
    std::vector<double> y(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) y[i] = std::exp(z[i]);
    return residual(mode, w, y);
  };
  return obj;
}

namespace detail {

/// splitmix64 finalizer, used to derive independent per-start seeds.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline double uniform01(std::mt19937_64& rng) { return std::generate_canonical<double, 53>(rng); }

inline std::vector<double> uniform_in_box(const Objective& obj, std::mt19937_64& rng) {
  std::vector<double> x(obj.dimension);
  for (std::size_t i = 0; i < obj.dimension; ++i)
    x[i] = obj.lower[i] + (obj.upper[i] - obj.lower[i]) * uniform01(rng);
  return x;
}

class CountingObjective {
 public:
  explicit CountingObjective(const Objective& obj) : obj_(obj) {}
  double operator()(std::span<const double> x) {
    ++count_;
    return obj_.evaluate(x);
  }
  std::size_t count() const noexcept { return count_; }

 private:
  const Objective& obj_;
  std::size_t count_ = 0;
};

}  // namespace detail

/// Nelder–Mead downhill simplex with clamping to the objective's box.
///
/// Classical coefficients: reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2. Stops when the spread of function values over the simplex
/// drops below cfg.nm_ftol or the evaluation budget runs out.
inline OptimResult nelder_mead(const Objective& obj, std::span<const double> start, const SolverConfig& cfg) {
  constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;
  const std::size_t n = obj.dimension;
  if (start.size() != n || !obj.contains(start))
    throw Error(ErrorCode::InvalidConfig, "Nelder-Mead start point must lie inside the bounds");
  const std::size_t budget = cfg.nm_max_evaluations ? cfg.nm_max_evaluations : 200 * n;

  detail::CountingObjective f(obj);
  std::vector<std::vector<double>> simplex(n + 1, std::vector<double>(start.begin(), start.end()));
  std::vector<double> fx(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    auto& v = simplex[i + 1];
    v[i] += cfg.nm_initial_step;
    if (v[i] > obj.upper[i]) v[i] = start[i] - cfg.nm_initial_step;
    obj.clamp(v);
  }
  for (std::size_t i = 0; i <= n; ++i) fx[i] = f(simplex[i]);

  OptimResult result;
  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), xr(n), xe(n), xc(n);

  auto point = [&](double coeff, const std::vector<double>& from, std::vector<double>& out) {
    for (std::size_t j = 0; j < n; ++j) out[j] = centroid[j] + coeff * (from[j] - centroid[j]);
    obj.clamp(out);
  };

  while (true) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fx[a] < fx[b]; });
    {
      std::vector<std::vector<double>> s2;
      std::vector<double> f2;
      for (std::size_t k : order) {
        s2.push_back(std::move(simplex[k]));
        f2.push_back(fx[k]);
      }
      simplex = std::move(s2);
      fx = std::move(f2);
    }
    result.history.push_back(fx[0]);

    if (fx[n] - fx[0] < cfg.nm_ftol) break;
    if (f.count() + 2 > budget) {
      result.budget_exhausted = true;
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j] / static_cast<double>(n);

    point(-kReflect, simplex[n], xr);
    const double fr = f(xr);
    if (fr < fx[0]) {
      point(kExpand, xr, xe);
      const double fe = f(xe);
      if (fe < fr) {
        simplex[n] = xe;
        fx[n] = fe;
      } else {
        simplex[n] = xr;
        fx[n] = fr;
      }
      continue;
    }
    if (fr < fx[n - 1]) {
      simplex[n] = xr;
      fx[n] = fr;
      continue;
    }
    bool accepted = false;
    if (fr < fx[n]) {
      point(kContract, xr, xc);
      const double fc = f(xc);
      if (fc <= fr) {
        simplex[n] = xc;
        fx[n] = fc;
        accepted = true;
      }
    } else {
      point(kContract, simplex[n], xc);
      const double fc = f(xc);
      if (fc < fx[n]) {
        simplex[n] = xc;
        fx[n] = fc;
        accepted = true;
      }
    }
    if (!accepted) {
      if (f.count() + n > budget) {
        result.budget_exhausted = true;
        break;
      }
      for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 0; j < n; ++j) simplex[i][j] = simplex[0][j] + kShrink * (simplex[i][j] - simplex[0][j]);
        fx[i] = f(simplex[i]);
      }
    }
  }

  result.argmin = simplex[0];
  result.value = fx[0];
  result.evaluations = f.count();
  return result;
}

/// DE/rand/1/bin. Deterministic for a given cfg.seed.
inline OptimResult differential_evolution(const Objective& obj, const SolverConfig& cfg) {
  const std::size_t m = cfg.de_population;
  const std::size_t n = obj.dimension;
  if (m < 4) throw Error(ErrorCode::InvalidConfig, "differential evolution needs a population of at least 4");
  if (!(cfg.de_crossover > 0.0 && cfg.de_crossover <= 1.0))
    throw Error(ErrorCode::InvalidConfig, "crossover probability must lie in (0, 1]");
  if (!(cfg.de_scale > 0.0 && cfg.de_scale < 2.0))
    throw Error(ErrorCode::InvalidConfig, "scaling factor must lie in (0, 2)");

  std::mt19937_64 rng(detail::mix_seed(cfg.seed, 0));
  detail::CountingObjective f(obj);
  std::vector<std::vector<double>> pop(m);
  std::vector<double> fit(m);
  for (std::size_t j = 0; j < m; ++j) {
    pop[j] = detail::uniform_in_box(obj, rng);
    fit[j] = f(pop[j]);
  }
  std::size_t best = static_cast<std::size_t>(std::min_element(fit.begin(), fit.end()) - fit.begin());

  OptimResult result;
  result.history.push_back(fit[best]);
  std::uniform_int_distribution<std::size_t> pick(0, m - 1);
  std::uniform_int_distribution<std::size_t> pick_dim(0, n - 1);
  std::size_t stall = 0;

  auto next_pop = pop;
  auto next_fit = fit;
  for (std::size_t gen = 0; gen < cfg.de_generations; ++gen) {
    for (std::size_t j = 0; j < m; ++j) {
      std::size_t u, v, w;
      do u = pick(rng); while (u == j);
      do v = pick(rng); while (v == j || v == u);
      do w = pick(rng); while (w == j || w == u || w == v);
      const std::size_t forced = pick_dim(rng);
      std::vector<double> cand(pop[j]);
      for (std::size_t i = 0; i < n; ++i) {
        if (i == forced || detail::uniform01(rng) < cfg.de_crossover)
          cand[i] = pop[w][i] + cfg.de_scale * (pop[u][i] - pop[v][i]);
      }
      obj.clamp(cand);
      const double fc = f(cand);
      if (fc < fit[j]) {
        next_pop[j] = std::move(cand);
        next_fit[j] = fc;
      } else {
        next_pop[j] = pop[j];
        next_fit[j] = fit[j];
      }
    }
    pop.swap(next_pop);
    fit.swap(next_fit);
    const std::size_t gen_best = static_cast<std::size_t>(std::min_element(fit.begin(), fit.end()) - fit.begin());
    if (fit[gen_best] < result.history.back()) {
      stall = 0;
    } else {
      ++stall;
    }
    best = gen_best;
    result.history.push_back(fit[best]);
    if (stall >= cfg.de_stall_generations) break;
  }

  result.argmin = pop[best];
  result.value = fit[best];
  result.evaluations = f.count();
  return result;
}

/// Multi-start simulated annealing with a geometrically shrinking
/// neighbourhood. Each iteration is a sweep that perturbs every coordinate
/// in turn; the radius shrinks once per sweep. A worse proposal is accepted
/// with probability exp(-df * (i + 1) / (|f0| + 1e-12)), f0 being the
/// current value.
inline OptimResult simulated_annealing(const Objective& obj, const SolverConfig& cfg) {
  if (cfg.sa_starts < 1) throw Error(ErrorCode::InvalidConfig, "simulated annealing needs at least one start");
  const std::size_t n = obj.dimension;
  detail::CountingObjective f(obj);
  OptimResult result;

  std::vector<double> radius0(n);
  for (std::size_t i = 0; i < n; ++i) radius0[i] = 0.5 * (obj.upper[i] - obj.lower[i]);

  for (std::size_t s = 0; s < cfg.sa_starts; ++s) {
    std::mt19937_64 rng(detail::mix_seed(cfg.seed, s));
    std::vector<double> x = detail::uniform_in_box(obj, rng);
    double fx = f(x);
    if (fx < result.value) {
      result.value = fx;
      result.argmin = x;
    }
    std::vector<double> cand(n);
    double scale = 1.0;
    std::size_t still = 0;
    for (std::size_t it = 0; it < cfg.sa_iterations; ++it) {
      bool moved = false;
      for (std::size_t k = 0; k < n; ++k) {
        cand = x;
        cand[k] = x[k] + scale * radius0[k] * (2.0 * detail::uniform01(rng) - 1.0);
        obj.clamp(cand);
        const double fc = f(cand);
        bool accept = fc < fx;
        if (!accept) {
          const double b = -(fc - fx) * static_cast<double>(it + 1) / (std::abs(fx) + 1e-12);
          accept = detail::uniform01(rng) < std::exp(b);
        }
        if (accept && cand != x) {
          x = cand;
          fx = fc;
          moved = true;
        }
        if (fx < result.value) {
          result.value = fx;
          result.argmin = x;
        }
      }
      result.history.push_back(result.value);
      still = moved ? 0 : still + 1;
      scale *= cfg.sa_radius_decay;
      if (still >= cfg.sa_stall || scale < 1e-15) break;
    }
  }
  result.evaluations = f.count();
  return result;
}

namespace detail {

inline std::vector<double> log_point(std::span<const double> p) {
  std::vector<double> z(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) z[i] = std::clamp(std::log(p[i]), -kLogShareBound, kLogShareBound);
  return z;
}

inline std::vector<double> exp_point(std::span<const double> z) {
  std::vector<double> y(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) y[i] = std::exp(z[i]);
  return y;
}

/// Uniformly random point on the probability simplex.
inline std::vector<double> random_simplex_point(std::size_t n, std::mt19937_64& rng) {
  std::vector<double> p(n);
  double sum = 0.0;
  for (double& v : p) {
    v = -std::log1p(-uniform01(rng));
    sum += v;
  }
  for (double& v : p) v = std::max(v / sum, 1e-6);
  return p;
}

/// Turns an optimum in z = ln y into a report. One fixed-point step from
/// the optimum is taken as well and kept if it lowers the residual.
inline SolveReport report_from_optimum(const WeightMatrix& w, const SolverConfig& cfg, const OptimResult& opt,
                                       const char* solver) {
  SolveReport report;
  report.solver = solver;
  report.per_expert_weights = w;
  report.point = exp_point(opt.argmin);
  report.residual = opt.value;
  auto stepped = aggregate(cfg.aggregation_mode, w, normalize(report.point).values());
  const double stepped_residual = residual(cfg.aggregation_mode, w, stepped);
  if (stepped_residual < report.residual) {
    report.point = std::move(stepped);
    report.residual = stepped_residual;
  }
  report.shares = normalize(report.point);
  report.iterations = opt.evaluations;
  report.converged = report.residual <= cfg.epsilon;
  return report;
}

}  // namespace detail

inline constexpr double kAgreementTolerance = 1e-4;

/// Nelder–Mead from `hint` (uniform priorities when absent) plus
/// cfg.nm_starts - 1 random simplex starts; keeps the best.
inline SolveReport nelder_mead_multistart(const WeightMatrix& w, const SolverConfig& cfg,
                                          std::optional<std::vector<double>> hint = std::nullopt) {
  const Objective obj = build_residual_objective(w, cfg.aggregation_mode);
  const std::size_t n = obj.dimension;
  const std::size_t starts = std::max<std::size_t>(cfg.nm_starts, 1);
  std::mt19937_64 rng(detail::mix_seed(cfg.seed, 0x4E4D));

  std::vector<OptimResult> runs;
  std::size_t evaluations = 0;
  for (std::size_t s = 0; s < starts; ++s) {
    std::vector<double> p;
    if (s == 0)
      p = hint ? *hint : std::vector<double>(n, 1.0 / static_cast<double>(n));
    else
      p = detail::random_simplex_point(n, rng);
    runs.push_back(nelder_mead(obj, detail::log_point(p), cfg));
    evaluations += runs.back().evaluations;
  }
  const auto best = std::min_element(runs.begin(), runs.end(),
                                     [](const OptimResult& a, const OptimResult& b) { return a.value < b.value; });
  SolveReport report = detail::report_from_optimum(w, cfg, *best, "nm");
  report.iterations = evaluations;

  for (const auto& r : runs) {
    if (r.value > cfg.epsilon || !report.converged) continue;
    const auto p = normalize(detail::exp_point(r.argmin));
    if (detail::max_abs_diff(p.values(), report.shares.values()) > kAgreementTolerance) report.ambiguous = true;
  }
  return report;
}

inline SolveReport differential_evolution_solve(const WeightMatrix& w, const SolverConfig& cfg) {
  const auto opt = differential_evolution(build_residual_objective(w, cfg.aggregation_mode), cfg);
  return detail::report_from_optimum(w, cfg, opt, "de");
}

inline SolveReport simulated_annealing_solve(const WeightMatrix& w, const SolverConfig& cfg) {
  const auto opt = simulated_annealing(build_residual_objective(w, cfg.aggregation_mode), cfg);
  return detail::report_from_optimum(w, cfg, opt, "sa");
}

}  // namespace peersplit
