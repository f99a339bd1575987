// Three authors rate each other, shares are computed with both aggregation
// models and printed as a table.

#include <iostream>

#include "peersplit/peersplit.hpp"

int main() {
  using namespace peersplit;

  // Everyone roughly agrees that ann did most of the work; cid's own matrix
  // leaves the ann/bo comparison blank.
  const char* panel = R"({
    "alternatives": ["ann", "bo", "cid"],
    "matrices": {
      "ann": [[1, 2, 4], [0.5, 1, 2], [0.25, 0.5, 1]],
      "bo":  [[1, 3, 3], [null, 1, 1], [null, 1, 1]],
      "cid": [[1, null, 2], [null, 1, 3], [0.5, null, 1]]
    }
  })";

  const PanelDocument doc = parse_input(panel);
  for (auto mode : {AggregationMode::GAIP, AggregationMode::AAIP}) {
    SolverConfig cfg;
    cfg.aggregation_mode = mode;
    std::cout << render_report(run_pipeline(doc, cfg), ReportFormat::Table) << "\n";
  }
}
