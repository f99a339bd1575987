#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "peersplit/core_model.hpp"
#include "peersplit/fixed_point.hpp"
#include "peersplit/optimize.hpp"
#include "peersplit/prioritization.hpp"

namespace peersplit {

using Json = nlohmann::ordered_json;

/// A panel in which every member both rates and is rated.
struct PanelDocument {
  std::vector<std::string> alternatives;
  /// Validated matrices, in the order of `alternatives`.
  std::vector<PCMatrix> matrices;
  /// Raw "options" object from the document, empty when absent.
  Json options = Json::object();
};

struct ReportDocument {
  std::vector<std::string> peers;
  std::vector<double> shares;
  std::vector<std::vector<double>> weights;
  /// Absent for experts whose matrix is incomplete.
  std::vector<std::optional<ConsistencyInfo>> consistency;
  double residual = 0.0;
  std::string solver;
  std::size_t iterations = 0;
  bool converged = false;
  bool fallback = false;
  bool ambiguous = false;
  std::string mode;
  std::string method;
  std::vector<std::string> upgraded_to_llsm;
  std::vector<std::vector<double>> trace;

  friend bool operator==(const ReportDocument&, const ReportDocument&) = default;
};

enum class ReportFormat { Machine, Table };

namespace detail {

inline std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

inline DerivationMethod parse_method(std::string_view s) {
  if (s == "evm") return DerivationMethod::EVM;
  if (s == "gmm") return DerivationMethod::GMM;
  if (s == "llsm") return DerivationMethod::LLSM;
  throw Error(ErrorCode::InvalidConfig, "unknown derivation method '" + std::string(s) + "'");
}

inline AggregationMode parse_mode(std::string_view s) {
  if (s == "gaip") return AggregationMode::GAIP;
  if (s == "aaip") return AggregationMode::AAIP;
  throw Error(ErrorCode::InvalidConfig, "unknown aggregation mode '" + std::string(s) + "'");
}

inline SolverKind parse_solver(std::string_view s) {
  if (s == "dia") return SolverKind::DIA;
  if (s == "nm") return SolverKind::NelderMead;
  if (s == "de") return SolverKind::DifferentialEvolution;
  if (s == "sa") return SolverKind::SimulatedAnnealing;
  if (s == "exact") return SolverKind::AAIPExact;
  throw Error(ErrorCode::InvalidConfig, "unknown solver '" + std::string(s) + "'");
}

}  // namespace detail

inline DerivationMethod method_from_string(std::string_view s) { return detail::parse_method(s); }
inline AggregationMode mode_from_string(std::string_view s) { return detail::parse_mode(s); }
inline SolverKind solver_from_string(std::string_view s) { return detail::parse_solver(s); }

/// Parses and validates a panel document.
///
/// Schema: {"alternatives": [name...], "matrices": {name: [[number|null...]...]},
/// "options": {...}}. Every alternative must supply an n×n matrix.
/// Reciprocity is enforced unless options.enforce_reciprocity is false.
inline PanelDocument parse_input(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    const auto [line, col] = detail::line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    throw Error(ErrorCode::ParseError,
                "malformed document at line " + std::to_string(line) + ", column " + std::to_string(col));
  }
  if (!doc.is_object()) throw Error(ErrorCode::SchemaError, "document must be an object");
  for (const auto& [key, _] : doc.items())
    if (key != "alternatives" && key != "matrices" && key != "options")
      throw Error(ErrorCode::SchemaError, "unknown top-level key '" + key + "'");

  PanelDocument out;
  const auto alts = doc.find("alternatives");
  if (alts == doc.end() || !alts->is_array())
    throw Error(ErrorCode::SchemaError, "'alternatives' must be an array of names");
  std::set<std::string> seen;
  for (const auto& a : *alts) {
    if (!a.is_string()) throw Error(ErrorCode::SchemaError, "alternative names must be strings");
    auto name = a.get<std::string>();
    if (!seen.insert(name).second) throw Error(ErrorCode::SchemaError, "duplicate alternative '" + name + "'");
    out.alternatives.push_back(std::move(name));
  }
  const std::size_t n = out.alternatives.size();
  if (n < 2) throw Error(ErrorCode::SchemaError, "a panel needs at least 2 alternatives");

  if (auto opts = doc.find("options"); opts != doc.end()) {
    if (!opts->is_object()) throw Error(ErrorCode::SchemaError, "'options' must be an object");
    out.options = *opts;
  }
  bool enforce = true;
  if (auto e = out.options.find("enforce_reciprocity"); e != out.options.end()) {
    if (!e->is_boolean()) throw Error(ErrorCode::SchemaError, "options.enforce_reciprocity must be a boolean");
    enforce = e->get<bool>();
  }

  const auto mats = doc.find("matrices");
  if (mats == doc.end() || !mats->is_object()) throw Error(ErrorCode::SchemaError, "'matrices' must be an object");
  for (const auto& [key, _] : mats->items())
    if (!seen.contains(key)) throw Error(ErrorCode::SchemaError, "matrix for unknown peer '" + key + "'", key);

  for (const auto& name : out.alternatives) {
    const auto m = mats->find(name);
    if (m == mats->end()) throw Error(ErrorCode::SchemaError, "peer '" + name + "' supplied no matrix", name);
    if (!m->is_array() || m->size() != n)
      throw Error(ErrorCode::SchemaError, "matrix of '" + name + "' must have " + std::to_string(n) + " rows", name);
    RawMatrix raw;
    for (const auto& row : *m) {
      if (!row.is_array() || row.size() != n)
        throw Error(ErrorCode::SchemaError,
                    "every row of '" + name + "' must have " + std::to_string(n) + " entries", name);
      auto& r = raw.emplace_back();
      for (const auto& v : row) {
        if (v.is_null())
          r.emplace_back(std::nullopt);
        else if (v.is_number())
          r.emplace_back(v.get<double>());
        else
          throw Error(ErrorCode::SchemaError, "entries of '" + name + "' must be numbers or null", name);
      }
    }
    out.matrices.push_back(validate_pcmatrix(raw, enforce, name));
  }
  return out;
}

/// Applies a document's "options" object on top of `cfg`.
inline void apply_options(const Json& options, SolverConfig& cfg) {
  for (const auto& [key, v] : options.items()) {
    auto need = [&](bool ok) {
      if (!ok) throw Error(ErrorCode::SchemaError, "option '" + key + "' has the wrong type");
    };
    if (key == "mode") {
      need(v.is_string());
      cfg.aggregation_mode = detail::parse_mode(v.get<std::string>());
    } else if (key == "method") {
      need(v.is_string());
      cfg.derivation_method = detail::parse_method(v.get<std::string>());
    } else if (key == "solver") {
      need(v.is_string());
      cfg.solver = detail::parse_solver(v.get<std::string>());
    } else if (key == "gamma" || key == "seed" || key == "nm_starts" || key == "de_population" ||
               key == "de_generations" || key == "sa_starts" || key == "sa_iterations") {
      need(v.is_number_unsigned());
      const auto u = v.get<std::uint64_t>();
      if (key == "gamma") cfg.gamma = u;
      else if (key == "seed") cfg.seed = u;
      else if (key == "nm_starts") cfg.nm_starts = u;
      else if (key == "de_population") cfg.de_population = u;
      else if (key == "de_generations") cfg.de_generations = u;
      else if (key == "sa_starts") cfg.sa_starts = u;
      else cfg.sa_iterations = u;
    } else if (key == "delta" || key == "epsilon" || key == "de_scale" || key == "de_crossover") {
      need(v.is_number());
      const auto d = v.get<double>();
      if (key == "delta") cfg.delta = d;
      else if (key == "epsilon") cfg.epsilon = d;
      else if (key == "de_scale") cfg.de_scale = d;
      else cfg.de_crossover = d;
    } else if (key == "trace") {
      need(v.is_boolean());
      cfg.trace = v.get<bool>();
    } else if (key != "enforce_reciprocity") {
      throw Error(ErrorCode::SchemaError, "unknown option '" + key + "'");
    }
  }
}

/// Derives every expert's weights, solves the peer fixed point and
/// assembles the report.
///
/// Incomplete matrices are switched to LLSM when another method is
/// configured. A DIA run that does not converge is retried with multi-start
/// Nelder–Mead seeded at the last iterate. Non-convergence is reported via
/// converged = false.
inline ReportDocument run_pipeline(const PanelDocument& doc, const SolverConfig& cfg) {
  if (cfg.solver == SolverKind::AAIPExact && cfg.aggregation_mode != AggregationMode::AAIP)
    throw Error(ErrorCode::InvalidConfig, "the exact solver is only available in aaip mode");

  ReportDocument rep;
  rep.peers = doc.alternatives;
  rep.mode = std::string(to_string(cfg.aggregation_mode));
  rep.method = std::string(to_string(cfg.derivation_method));

  std::vector<WeightVector> columns;
  for (const auto& m : doc.matrices) {
    DerivationMethod method = cfg.derivation_method;
    if (!m.is_complete() && method != DerivationMethod::LLSM) {
      method = DerivationMethod::LLSM;
      rep.upgraded_to_llsm.push_back(m.expert_id());
    }
    columns.push_back(derive_weights(m, method));
    rep.weights.emplace_back(columns.back().values().begin(), columns.back().values().end());
    rep.consistency.push_back(m.is_complete() ? std::optional(consistency_index(m)) : std::nullopt);
  }
  const WeightMatrix w(columns);

  SolveReport sol;
  switch (cfg.solver) {
    case SolverKind::DIA: {
      sol = dia_solve(w, cfg);
      if (!sol.converged) {
        const std::size_t dia_iterations = sol.iterations;
        auto trace = std::move(sol.trace);
        const std::vector<double> hint(sol.shares.values().begin(), sol.shares.values().end());
        sol = nelder_mead_multistart(w, cfg, hint);
        sol.solver = "dia+nm";
        sol.fallback = true;
        sol.iterations += dia_iterations;
        sol.trace = std::move(trace);
      }
      break;
    }
    case SolverKind::NelderMead: sol = nelder_mead_multistart(w, cfg); break;
    case SolverKind::DifferentialEvolution: sol = differential_evolution_solve(w, cfg); break;
    case SolverKind::SimulatedAnnealing: sol = simulated_annealing_solve(w, cfg); break;
    case SolverKind::AAIPExact: {
      sol.shares = aaip_exact(w);
      sol.point.assign(sol.shares.values().begin(), sol.shares.values().end());
      sol.residual = residual_h(w, sol.point);
      sol.converged = sol.residual <= cfg.epsilon;
      sol.solver = "exact";
      break;
    }
  }

  rep.shares.assign(sol.shares.values().begin(), sol.shares.values().end());
  rep.residual = sol.residual;
  rep.solver = sol.solver;
  rep.iterations = sol.iterations;
  rep.converged = sol.converged;
  rep.fallback = sol.fallback;
  rep.ambiguous = sol.ambiguous;
  rep.trace = std::move(sol.trace);
  return rep;
}

namespace detail {

inline Json report_to_json(const ReportDocument& r) {
  Json j;
  j["peers"] = r.peers;
  Json pct = Json::object(), shares = Json::object();
  for (std::size_t i = 0; i < r.peers.size(); ++i) {
    pct[r.peers[i]] = 100.0 * r.shares[i];
    shares[r.peers[i]] = r.shares[i];
  }
  j["shares_percent"] = std::move(pct);
  j["shares"] = std::move(shares);
  j["converged"] = r.converged;
  j["residual"] = r.residual;
  j["solver"] = r.solver;
  j["iterations"] = r.iterations;
  j["fallback"] = r.fallback;
  j["ambiguous"] = r.ambiguous;
  j["mode"] = r.mode;
  j["method"] = r.method;
  j["upgraded_to_llsm"] = r.upgraded_to_llsm;
  Json weights = Json::object(), consistency = Json::object();
  for (std::size_t i = 0; i < r.peers.size(); ++i) {
    weights[r.peers[i]] = r.weights[i];
    if (const auto& c = r.consistency[i]) {
      consistency[r.peers[i]] = {{"ci", c->ci}, {"cr", c->cr ? Json(*c->cr) : Json(nullptr)}};
    } else {
      consistency[r.peers[i]] = nullptr;
    }
  }
  j["weights"] = std::move(weights);
  j["consistency"] = std::move(consistency);
  if (!r.trace.empty()) j["trace"] = r.trace;
  return j;
}

inline std::string format_percent(double share) {
  const double rounded = std::floor(share * 10000.0 + 0.5) / 100.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", rounded);
  return buf;
}

}  // namespace detail

/// Machine mode: full-precision JSON. Table mode: aligned peer/percent rows
/// followed by solver diagnostics.
inline std::string render_report(const ReportDocument& r, ReportFormat format) {
  if (format == ReportFormat::Machine) return detail::report_to_json(r).dump(2) + "\n";

  std::size_t width = 5;
  for (const auto& p : r.peers) width = std::max(width, p.size());
  std::string out;
  auto row = [&](const std::string& name, const std::string& value) {
    out += name;
    out.append(width - name.size() + 2, ' ');
    out.append(value.size() < 8 ? 8 - value.size() : 0, ' ');
    out += value + "\n";
  };
  row("peer", "share");
  double total = 0.0;
  for (std::size_t i = 0; i < r.peers.size(); ++i) {
    row(r.peers[i], detail::format_percent(r.shares[i]));
    total += r.shares[i];
  }
  row("total", detail::format_percent(total));
  out += "\n";

  char buf[256];
  std::snprintf(buf, sizeof buf, "mode %s, method %s, solver %s, iterations %zu\nconverged %s, residual %.3e\n",
                r.mode.c_str(), r.method.c_str(), r.solver.c_str(), r.iterations, r.converged ? "yes" : "no",
                r.residual);
  out += buf;
  if (r.fallback) out += "note: direct iteration did not converge; Nelder-Mead result shown\n";
  if (r.ambiguous) out += "note: optimizer starts reached different zero-residual shares\n";
  for (const auto& name : r.upgraded_to_llsm) out += "note: " + name + "'s matrix is incomplete; used llsm\n";
  return out;
}

/// Reads a machine-mode report back.
inline ReportDocument parse_report(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error&) {
    throw Error(ErrorCode::ParseError, "malformed report");
  }
  try {
    ReportDocument r;
    r.peers = j.at("peers").get<std::vector<std::string>>();
    for (const auto& p : r.peers) {
      r.shares.push_back(j.at("shares").at(p).get<double>());
      r.weights.push_back(j.at("weights").at(p).get<std::vector<double>>());
      const auto& c = j.at("consistency").at(p);
      if (c.is_null()) {
        r.consistency.emplace_back(std::nullopt);
      } else {
        ConsistencyInfo info;
        info.ci = c.at("ci").get<double>();
        if (!c.at("cr").is_null()) info.cr = c.at("cr").get<double>();
        r.consistency.emplace_back(info);
      }
    }
    r.converged = j.at("converged").get<bool>();
    r.residual = j.at("residual").get<double>();
    r.solver = j.at("solver").get<std::string>();
    r.iterations = j.at("iterations").get<std::size_t>();
    r.fallback = j.at("fallback").get<bool>();
    r.ambiguous = j.at("ambiguous").get<bool>();
    r.mode = j.at("mode").get<std::string>();
    r.method = j.at("method").get<std::string>();
    r.upgraded_to_llsm = j.at("upgraded_to_llsm").get<std::vector<std::string>>();
    if (j.contains("trace")) r.trace = j.at("trace").get<std::vector<std::vector<double>>>();
    return r;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("report: ") + e.what());
  }
}

}  // namespace peersplit
