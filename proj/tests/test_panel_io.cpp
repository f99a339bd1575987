#include <gtest/gtest.h>

#include "peersplit/panel_io.hpp"

using namespace peersplit;

namespace {

const char* kTwoPeers = R"({
  "alternatives": ["alice", "bob"],
  "matrices": {"alice": [[1, 2], [0.5, 1]], "bob": [[1, 1], [1, 1]]}
})";

ErrorCode code_of(std::string_view text) {
  try {
    parse_input(text);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::ParseError;
}

ReportDocument run(std::string_view text, SolverConfig cfg = {}) {
  const auto doc = parse_input(text);
  apply_options(doc.options, cfg);
  return run_pipeline(doc, cfg);
}

}  // namespace

TEST(ParseInput, TwoPeers) {
  const auto doc = parse_input(kTwoPeers);
  ASSERT_EQ(doc.alternatives.size(), 2u);
  ASSERT_EQ(doc.matrices.size(), 2u);
  EXPECT_EQ(doc.matrices[0].expert_id(), "alice");
  EXPECT_EQ(doc.matrices[0].value(0, 1), 2.0);
  EXPECT_EQ(doc.matrices[1].size(), 2u);
}

TEST(ParseInput, MatrixOrderFollowsAlternatives) {
  const auto doc = parse_input(R"({"alternatives": ["b", "a"],
    "matrices": {"a": [[1, 2], [0.5, 1]], "b": [[1, 1], [1, 1]]}})");
  EXPECT_EQ(doc.matrices[0].expert_id(), "b");
  EXPECT_EQ(doc.matrices[1].expert_id(), "a");
}

TEST(ParseInput, NullIsMissingEntry) {
  const auto doc = parse_input(R"({"alternatives": ["a", "b"],
    "matrices": {"a": [[1, null], [0.5, 1]], "b": [[1, 1], [1, 1]]}})");
  EXPECT_DOUBLE_EQ(doc.matrices[0].value(0, 1), 2.0);
}

TEST(ParseInput, WrongDimensionIsSchemaError) {
  EXPECT_EQ(code_of(R"({"alternatives": ["alice", "bob"],
    "matrices": {"alice": [[1, 1], [1, 1]], "bob": [[1, 1, 1], [1, 1, 1], [1, 1, 1]]}})"),
            ErrorCode::SchemaError);
}

TEST(ParseInput, SchemaErrors) {
  EXPECT_EQ(code_of(R"({"alternatives": ["a", "b"], "matrices": {"a": [[1, 1], [1, 1]]}})"), ErrorCode::SchemaError);
  EXPECT_EQ(code_of(R"({"alternatives": ["a", "b"], "matrices": {"a": [[1, 1], [1, 1]], "b": [[1, 1], [1, 1]],
    "c": [[1, 1], [1, 1]]}})"),
            ErrorCode::SchemaError);
  EXPECT_EQ(code_of(R"({"alternatives": ["a", "a"], "matrices": {"a": [[1, 1], [1, 1]]}})"), ErrorCode::SchemaError);
  EXPECT_EQ(code_of(R"({"alternatives": ["a", "b"], "matrices": {"a": [[1, "x"], [1, 1]], "b": [[1, 1], [1, 1]]}})"),
            ErrorCode::SchemaError);
  EXPECT_EQ(code_of(R"({"alternatives": ["a", "b"], "matrices": {}, "colour": 1})"), ErrorCode::SchemaError);
  EXPECT_EQ(code_of(R"([1, 2])"), ErrorCode::SchemaError);
}

TEST(ParseInput, MalformedReportsPosition) {
  try {
    parse_input("{\n  \"alternatives\": [\"a\",\n}");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(ParseInput, NegativeEntryNamesExpert) {
  try {
    parse_input(R"({"alternatives": ["alice", "bob"],
      "matrices": {"alice": [[1, 1], [1, 1]], "bob": [[1, -1], [-1, 1]]}})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonPositiveEntry);
    EXPECT_EQ(e.expert(), "bob");
  }
}

TEST(ParseInput, ReciprocityCanBeRelaxed) {
  const char* text = R"({"alternatives": ["a", "b"],
    "matrices": {"a": [[1, 2], [2, 1]], "b": [[1, 1], [1, 1]]}%s})";
  char strict[512], relaxed[512];
  std::snprintf(strict, sizeof strict, text, "");
  std::snprintf(relaxed, sizeof relaxed, text, R"(, "options": {"enforce_reciprocity": false})");
  EXPECT_EQ(code_of(strict), ErrorCode::ReciprocityViolation);
  EXPECT_NO_THROW(parse_input(relaxed));
}

TEST(ApplyOptions, OverridesAndRejectsUnknown) {
  SolverConfig cfg;
  apply_options(Json::parse(R"({"mode": "aaip", "method": "evm", "solver": "de", "gamma": 7, "seed": 9})"), cfg);
  EXPECT_EQ(cfg.aggregation_mode, AggregationMode::AAIP);
  EXPECT_EQ(cfg.derivation_method, DerivationMethod::EVM);
  EXPECT_EQ(cfg.solver, SolverKind::DifferentialEvolution);
  EXPECT_EQ(cfg.gamma, 7u);
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_THROW(apply_options(Json::parse(R"({"speed": 1})"), cfg), Error);
  EXPECT_THROW(apply_options(Json::parse(R"({"mode": "median"})"), cfg), Error);
}

TEST(RunPipeline, AllOnesPair) {
  const auto r = run(R"({"alternatives": ["a", "b"], "matrices": {"a": [[1, 1], [1, 1]], "b": [[1, 1], [1, 1]]}})");
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.residual, 0.0);
  EXPECT_NEAR(r.shares[0], 0.5, 1e-15);
  EXPECT_NEAR(r.shares[1], 0.5, 1e-15);
}

TEST(RunPipeline, AaipPair) {
  const auto r = run(R"({"alternatives": ["a", "b"], "matrices": {"a": [[1, 1], [1, 1]],
    "b": [[1, 2.3333333333333335], [0.42857142857142855, 1]]}, "options": {"mode": "aaip"}})");
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.shares[0], 7.0 / 12, 1e-10);
  EXPECT_NEAR(r.shares[1], 5.0 / 12, 1e-10);
  EXPECT_NEAR(r.weights[1][0], 0.7, 1e-15);
}

TEST(RunPipeline, UnanimousTrio) {
  const auto r = run(R"({"alternatives": ["x", "y", "z"], "matrices": {
    "x": [[1, 2, 4], [0.5, 1, 2], [0.25, 0.5, 1]],
    "y": [[1, 2, 4], [0.5, 1, 2], [0.25, 0.5, 1]],
    "z": [[1, 2, 4], [0.5, 1, 2], [0.25, 0.5, 1]]}})");
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.shares[0], 4.0 / 7, 1e-12);
  EXPECT_NEAR(r.shares[1], 2.0 / 7, 1e-12);
  EXPECT_NEAR(r.shares[2], 1.0 / 7, 1e-12);
  for (const auto& c : r.consistency) {
    ASSERT_TRUE(c.has_value());
    EXPECT_NEAR(c->ci, 0.0, 1e-12);
  }
}

TEST(RunPipeline, IncompleteMatrixUpgradesToLlsm) {
  const auto r = run(R"({"alternatives": ["a", "b", "c"], "matrices": {
    "a": [[1, 2, null], [null, 1, 2], [null, null, 1]],
    "b": [[1, 2, 4], [0.5, 1, 2], [0.25, 0.5, 1]],
    "c": [[1, 2, 4], [0.5, 1, 2], [0.25, 0.5, 1]]}})");
  ASSERT_EQ(r.upgraded_to_llsm, std::vector<std::string>{"a"});
  EXPECT_FALSE(r.consistency[0].has_value());
  EXPECT_NEAR(r.weights[0][0], 4.0 / 7, 1e-12);
}

TEST(RunPipeline, DisconnectedIncompleteMatrix) {
  try {
    run(R"({"alternatives": ["a", "b", "c"], "matrices": {
      "a": [[1, 2, null], [null, 1, null], [null, null, 1]],
      "b": [[1, 1, 1], [1, 1, 1], [1, 1, 1]],
      "c": [[1, 1, 1], [1, 1, 1], [1, 1, 1]]}})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DisconnectedGraph);
  }
}

TEST(RunPipeline, ExactNeedsAaip) {
  SolverConfig cfg;
  cfg.solver = SolverKind::AAIPExact;
  EXPECT_THROW(run(kTwoPeers, cfg), Error);
  cfg.aggregation_mode = AggregationMode::AAIP;
  const auto r = run(kTwoPeers, cfg);
  EXPECT_EQ(r.solver, "exact");
  EXPECT_TRUE(r.converged);
}

TEST(RunPipeline, FallbackIsRecorded) {
  SolverConfig cfg;
  cfg.gamma = 1;
  const auto r = run(kTwoPeers, cfg);
  EXPECT_TRUE(r.fallback);
  EXPECT_EQ(r.solver, "dia+nm");
  EXPECT_TRUE(r.converged);
}

TEST(RenderReport, TableRows) {
  ReportDocument r;
  r.peers = {"alice", "bob"};
  r.shares = {7.0 / 12, 5.0 / 12};
  r.weights = {{0.5, 0.5}, {0.7, 0.3}};
  r.consistency = {std::nullopt, std::nullopt};
  r.mode = "aaip";
  r.method = "gmm";
  r.solver = "dia";
  r.converged = true;
  const auto text = render_report(r, ReportFormat::Table);
  EXPECT_NE(text.find("alice    58.33%\n"), std::string::npos) << text;
  EXPECT_NE(text.find("bob      41.67%\n"), std::string::npos) << text;
  EXPECT_NE(text.find("total   100.00%\n"), std::string::npos) << text;
  r.shares = {0.5, 0.5};
  const auto even = render_report(r, ReportFormat::Table);
  EXPECT_NE(even.find("alice    50.00%\n"), std::string::npos) << even;
  EXPECT_NE(even.find("bob      50.00%\n"), std::string::npos) << even;
}

TEST(RenderReport, MachineRoundTrip) {
  for (const char* mode : {"gaip", "aaip"}) {
    SolverConfig cfg;
    cfg.aggregation_mode = mode_from_string(mode);
    cfg.trace = true;
    const auto r = run(R"({"alternatives": ["p", "q", "r"], "matrices": {
      "p": [[1, 3, 5], [0.3333333333333333, 1, 2], [0.2, 0.5, 1]],
      "q": [[1, 1, 2], [1, 1, null], [0.5, null, 1]],
      "r": [[1, 0.5, 0.25], [2, 1, 0.5], [4, 2, 1]]}})",
                       cfg);
    const auto text = render_report(r, ReportFormat::Machine);
    const auto back = parse_report(text);
    EXPECT_EQ(back, r);
    EXPECT_EQ(render_report(back, ReportFormat::Machine), text);
    const auto j = Json::parse(text);
    double total = 0.0;
    for (const auto& [k, v] : j["shares_percent"].items()) total += v.get<double>();
    EXPECT_NEAR(total, 100.0, 1e-6);
    EXPECT_EQ(j["peers"], Json({"p", "q", "r"}));
  }
}
