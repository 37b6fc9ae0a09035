#include "ecosim/report.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>

#include "ecosim/csv.hpp"

namespace ecosim {

namespace fs = std::filesystem;

std::string fmt_num(double v) {
  if (v == 0.0) return "0";  // normalize -0
  char buf[48];
  snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_results_csv(const std::string& path,
                       const std::vector<ScenarioResult>& results) {
  csv::Writer w(path);
  w.row({"scenario", "cav_mpr", "routing", "eco", "mix", "replications",
         "used_replications", "tailpipe_ghg_g", "upstream_ghg_g", "wtw_ghg_g",
         "tailpipe_nox_g", "upstream_nox_g", "wtw_nox_g", "mean_tt_s",
         "mean_dist_m", "total_tt_s", "fleet_km", "completion_t", "braking_j"});
  for (const auto& r : results) {
    const Scenario& s = r.scenario;
    const ReplicationResult& m = r.mean;
    w.row({s.label(), fmt_num(s.cav_mpr), routing_name(s.routing),
           s.eco_driving ? "ED" : "NED", s.mix_name,
           std::to_string(s.replications), std::to_string(r.used_replications),
           fmt_num(m.wtw.tailpipe_ghg_g), fmt_num(m.wtw.upstream_ghg_g),
           fmt_num(m.wtw.wtw_ghg_g), fmt_num(m.wtw.tailpipe_nox_g),
           fmt_num(m.wtw.upstream_nox_g), fmt_num(m.wtw.wtw_nox_g),
           fmt_num(m.mean_tt_s), fmt_num(m.mean_dist_m), fmt_num(m.total_tt_s),
           fmt_num(m.fleet_km), fmt_num(m.completion_t), fmt_num(m.braking_j)});
  }
}

void write_costs_csv(const std::string& path,
                     const std::vector<ScenarioResult>& results,
                     const std::vector<CostBreakdown>& costs) {
  if (results.size() != costs.size())
    throw std::runtime_error("costs table size mismatch");
  csv::Writer w(path);
  w.row({"scenario", "ghg_emission_perkm", "nox_emission_perkm",
         "travel_time_perkm", "fuel_perkm", "om_perkm", "capital_perkm",
         "emission_total_perkm", "other_total_perkm"});
  for (size_t i = 0; i < results.size(); ++i) {
    const CostBreakdown& c = costs[i];
    w.row({results[i].scenario.label(), fmt_num(c.ghg_emission),
           fmt_num(c.nox_emission), fmt_num(c.travel_time), fmt_num(c.fuel),
           fmt_num(c.om), fmt_num(c.vehicle_capital),
           fmt_num(c.emission_total()), fmt_num(c.other_total())});
  }
}

void write_pareto_csv(const std::string& path, const FeatureImportance& imp) {
  csv::Writer w(path);
  w.row({"rank", "feature", "importance", "cumulative"});
  for (size_t j = 0; j < imp.ranking.size(); ++j) {
    size_t f = imp.ranking[j];
    w.row({std::to_string(j + 1), imp.names[f], fmt_num(imp.importance[f]),
           fmt_num(imp.cumulative[j])});
  }
}

void write_scorecard_csv(const std::string& path, const ScoreCard& card) {
  csv::Writer w(path);
  w.row({"mix", "emission_score", "other_score"});
  for (size_t i = 0; i < card.mix.size(); ++i)
    w.row({card.mix[i], fmt_num(card.emission_score[i]),
           fmt_num(card.other_score[i])});
}

// ---------------------------------------------------------------------------
// SVG charts

namespace {

class Svg {
 public:
  Svg(const std::string& path, int w, int h) : out_(path), w_(w), h_(h) {
    if (!out_) throw std::runtime_error("cannot write chart file: " + path);
    out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
         << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << " " << h
         << "\">\n<rect width=\"" << w << "\" height=\"" << h
         << "\" fill=\"white\"/>\n";
  }
  ~Svg() { out_ << "</svg>\n"; }

  void rect(double x, double y, double w, double h, const std::string& fill) {
    out_ << "<rect x=\"" << fmt_num(x) << "\" y=\"" << fmt_num(y) << "\" width=\""
         << fmt_num(w) << "\" height=\"" << fmt_num(h) << "\" fill=\"" << fill
         << "\"/>\n";
  }
  void line(double x1, double y1, double x2, double y2) {
    out_ << "<line x1=\"" << fmt_num(x1) << "\" y1=\"" << fmt_num(y1)
         << "\" x2=\"" << fmt_num(x2) << "\" y2=\"" << fmt_num(y2)
         << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  }
  void text(double x, double y, const std::string& s, int size = 11,
            const std::string& anchor = "start", double rotate = 0.0) {
    out_ << "<text x=\"" << fmt_num(x) << "\" y=\"" << fmt_num(y)
         << "\" font-size=\"" << size << "\" font-family=\"sans-serif\""
         << " text-anchor=\"" << anchor << "\"";
    if (rotate != 0.0)
      out_ << " transform=\"rotate(" << fmt_num(rotate) << " " << fmt_num(x)
           << " " << fmt_num(y) << ")\"";
    out_ << ">" << s << "</text>\n";
  }
  void circle(double x, double y, double r, const std::string& fill) {
    out_ << "<circle cx=\"" << fmt_num(x) << "\" cy=\"" << fmt_num(y)
         << "\" r=\"" << fmt_num(r) << "\" fill=\"" << fill << "\"/>\n";
  }

 private:
  std::ofstream out_;
  int w_, h_;
};

const char* kPalette[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52",
                          "#8172b3", "#937860"};

// grouped bars: one group per mix, one bar per (routing, eco) series
void ghg_bar_chart(const std::string& path, const std::string& title,
                   const std::vector<ScenarioResult>& cell) {
  std::vector<std::string> mixes;
  std::vector<std::string> series;
  std::map<std::pair<std::string, std::string>, double> value;
  double vmax = 0.0;
  for (const auto& r : cell) {
    std::string ser = std::string(routing_name(r.scenario.routing)) + "/" +
                      (r.scenario.eco_driving ? "ED" : "NED");
    if (std::find(mixes.begin(), mixes.end(), r.scenario.mix_name) == mixes.end())
      mixes.push_back(r.scenario.mix_name);
    if (std::find(series.begin(), series.end(), ser) == series.end())
      series.push_back(ser);
    double v = r.mean.wtw.wtw_ghg_g / 1000.0;  // kg
    value[{r.scenario.mix_name, ser}] = v;
    vmax = std::max(vmax, v);
  }
  if (vmax <= 0) vmax = 1.0;

  const int W = 900, H = 420, left = 70, bottom = 70, top = 40, right = 20;
  Svg svg(path, W, H);
  svg.text(W / 2.0, 22, title, 14, "middle");
  double plot_w = W - left - right, plot_h = H - top - bottom;
  svg.line(left, H - bottom, W - right, H - bottom);
  svg.line(left, top, left, H - bottom);
  for (int g = 0; g <= 4; ++g) {
    double v = vmax * g / 4.0;
    double y = H - bottom - plot_h * g / 4.0;
    svg.line(left - 4, y, left, y);
    svg.text(left - 8, y + 4, fmt_num(v), 10, "end");
  }
  svg.text(16, top - 10, "WTW GHG (kg)", 11);

  double group_w = plot_w / std::max<size_t>(1, mixes.size());
  double bar_w = group_w * 0.8 / std::max<size_t>(1, series.size());
  for (size_t i = 0; i < mixes.size(); ++i) {
    double gx = left + group_w * i + group_w * 0.1;
    for (size_t s = 0; s < series.size(); ++s) {
      auto it = value.find({mixes[i], series[s]});
      if (it == value.end()) continue;
      double h = plot_h * it->second / vmax;
      svg.rect(gx + bar_w * s, H - bottom - h, bar_w * 0.92, h,
               kPalette[s % 6]);
    }
    svg.text(gx + group_w * 0.4, H - bottom + 14, mixes[i], 10, "end", -45);
  }
  // legend
  double lx = left + 10;
  for (size_t s = 0; s < series.size(); ++s) {
    svg.rect(lx, top + 2, 10, 10, kPalette[s % 6]);
    svg.text(lx + 14, top + 11, series[s], 10);
    lx += 14 + 9.0 * series[s].size() + 18;
  }
}

void pareto_chart(const std::string& path, const FeatureImportance& imp) {
  const int W = 640, H = 400, left = 60, bottom = 90, top = 40, right = 60;
  Svg svg(path, W, H);
  svg.text(W / 2.0, 22, "Feature importance Pareto", 14, "middle");
  double plot_w = W - left - right, plot_h = H - top - bottom;
  svg.line(left, H - bottom, W - right, H - bottom);
  svg.line(left, top, left, H - bottom);
  size_t n = imp.ranking.size();
  if (n == 0) return;
  double bw = plot_w / n;
  double imax = 0.0;
  for (double v : imp.importance) imax = std::max(imax, v);
  if (imax <= 0) imax = 1.0;
  for (size_t j = 0; j < n; ++j) {
    size_t f = imp.ranking[j];
    double h = plot_h * imp.importance[f] / imax;
    svg.rect(left + bw * j + bw * 0.1, H - bottom - h, bw * 0.8, h, kPalette[0]);
    svg.text(left + bw * j + bw * 0.5, H - bottom + 12, imp.names[f], 10, "end",
             -45);
    double cy = H - bottom - plot_h * imp.cumulative[j];
    svg.circle(left + bw * j + bw * 0.5, cy, 3, "#c44e52");
    if (j > 0) {
      size_t fp = imp.ranking[j - 1];
      (void)fp;
      double cyp = H - bottom - plot_h * imp.cumulative[j - 1];
      svg.line(left + bw * (j - 1) + bw * 0.5, cyp, left + bw * j + bw * 0.5, cy);
    }
  }
  svg.text(W - right + 6, top + 10, "cumulative", 10);
}

void scorecard_chart(const std::string& path, const ScoreCard& card) {
  const int W = 700, H = 60 + 22 * static_cast<int>(card.mix.size());
  Svg svg(path, W, H);
  svg.text(W / 2.0, 22, "Lifecycle cost scorecard (50 = best)", 14, "middle");
  double x0 = 110, half = (W - x0 - 30) / 2.0;
  svg.text(x0, 40, "emission", 11);
  svg.text(x0 + half + 10, 40, "other", 11);
  for (size_t i = 0; i < card.mix.size(); ++i) {
    double y = 50 + 22 * i;
    svg.text(x0 - 8, y + 12, card.mix[i], 11, "end");
    double we = (half - 40) * card.emission_score[i] / 50.0;
    double wo = (half - 40) * card.other_score[i] / 50.0;
    svg.rect(x0, y + 3, we, 12, kPalette[2]);
    svg.text(x0 + we + 4, y + 13, fmt_num(card.emission_score[i]), 10);
    svg.rect(x0 + half + 10, y + 3, wo, 12, kPalette[3]);
    svg.text(x0 + half + 10 + wo + 4, y + 13, fmt_num(card.other_score[i]), 10);
  }
}

}  // namespace

std::vector<std::string> write_charts(const std::string& out_dir,
                                      const std::vector<ScenarioResult>& results,
                                      const FeatureImportance& imp,
                                      const ScoreCard& card) {
  std::vector<std::string> files;
  // one grouped bar chart per CAV market-penetration level
  std::vector<double> levels;
  for (const auto& r : results)
    if (std::find(levels.begin(), levels.end(), r.scenario.cav_mpr) == levels.end())
      levels.push_back(r.scenario.cav_mpr);
  for (double lvl : levels) {
    std::vector<ScenarioResult> cell;
    for (const auto& r : results)
      if (r.scenario.cav_mpr == lvl) cell.push_back(r);
    char name[64];
    snprintf(name, sizeof(name), "ghg_mpr%g.svg", lvl * 100.0);
    std::string path = (fs::path(out_dir) / name).string();
    char title[96];
    snprintf(title, sizeof(title), "WTW GHG by fleet mix, CAV penetration %g%%",
             lvl * 100.0);
    ghg_bar_chart(path, title, cell);
    files.push_back(path);
  }
  std::string p1 = (fs::path(out_dir) / "pareto.svg").string();
  pareto_chart(p1, imp);
  files.push_back(p1);
  std::string p2 = (fs::path(out_dir) / "scorecard.svg").string();
  scorecard_chart(p2, card);
  files.push_back(p2);
  return files;
}

ReportFiles export_all(const std::string& out_dir,
                       const std::vector<ScenarioResult>& results,
                       const std::vector<CostBreakdown>& costs,
                       const FeatureImportance& imp, const ScoreCard& card) {
  fs::create_directories(out_dir);
  ReportFiles f;
  f.results_csv = (fs::path(out_dir) / "results.csv").string();
  f.costs_csv = (fs::path(out_dir) / "costs.csv").string();
  f.pareto_csv = (fs::path(out_dir) / "pareto.csv").string();
  f.scorecard_csv = (fs::path(out_dir) / "scorecard.csv").string();
  write_results_csv(f.results_csv, results);
  write_costs_csv(f.costs_csv, results, costs);
  write_pareto_csv(f.pareto_csv, imp);
  write_scorecard_csv(f.scorecard_csv, card);
  f.charts = write_charts(out_dir, results, imp, card);
  return f;
}

}  // namespace ecosim
