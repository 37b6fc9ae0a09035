#pragma once

#include <string>
#include <vector>

#include "ecosim/scenario.hpp"

namespace ecosim {

// Deterministic number formatting shared by every report writer, so reruns
// produce byte-identical files.
std::string fmt_num(double v);

struct ReportFiles {
  std::string results_csv;
  std::string costs_csv;
  std::string pareto_csv;
  std::string scorecard_csv;
  std::vector<std::string> charts;  // SVG paths
};

// results.csv: one row per scenario, all replication-mean metrics.
void write_results_csv(const std::string& path,
                       const std::vector<ScenarioResult>& results);

// costs.csv: per-scenario monetized per-km breakdown.
void write_costs_csv(const std::string& path,
                     const std::vector<ScenarioResult>& results,
                     const std::vector<CostBreakdown>& costs);

// pareto.csv: feature importances sorted descending with cumulative share.
void write_pareto_csv(const std::string& path, const FeatureImportance& imp);

void write_scorecard_csv(const std::string& path, const ScoreCard& card);

// Static vector charts: grouped WTW GHG bars per CAV level, importance
// Pareto chart, and the two-column scorecard.
std::vector<std::string> write_charts(const std::string& out_dir,
                                      const std::vector<ScenarioResult>& results,
                                      const FeatureImportance& imp,
                                      const ScoreCard& card);

// Everything above in one call; creates out_dir if needed.
ReportFiles export_all(const std::string& out_dir,
                       const std::vector<ScenarioResult>& results,
                       const std::vector<CostBreakdown>& costs,
                       const FeatureImportance& imp, const ScoreCard& card);

}  // namespace ecosim
