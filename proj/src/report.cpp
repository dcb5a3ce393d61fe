#include "umlbench/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "umlbench/descriptive.hpp"

namespace umlbench::report {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string itos(std::size_t v) { return std::to_string(v); }

std::string pct(double num, double den, int d) { return den > 0 ? format_fixed(100.0 * num / den, d) : "NA"; }

struct Spread {
  double mean = NAN, sd = NAN, lo = NAN, hi = NAN;
};

Spread spread(const std::vector<double>& xs) {
  if (xs.empty()) return {};
  return {stats::mean(xs), stats::sample_sd(xs), *std::min_element(xs.begin(), xs.end()),
          *std::max_element(xs.begin(), xs.end())};
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) { return format_fixed(v, 2); }

double nice_ceiling(double v) {
  if (!(v > 0) || !std::isfinite(v)) return 1.0;
  const double p = std::pow(10.0, std::floor(std::log10(v)));
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
    if (m * p >= v * (1 - 1e-12)) return m * p;
  }
  return 10.0 * p;
}

// Shared frame of both chart kinds; y runs from 0 (or the data minimum when
// negative) to a rounded maximum.
struct Canvas {
  static constexpr double kLeft = 64, kTop = 40, kBottom = 96, kSlot = 64, kHeight = 360;
  std::size_t n;
  double ymin, ymax;
  std::ostringstream svg;

  Canvas(const Series& s, double lo, double hi) : n(s.groups.size()) {
    ymin = lo < 0 ? -nice_ceiling(-lo) : 0.0;
    ymax = nice_ceiling(hi);
    if (ymax <= ymin) ymax = ymin + 1.0;
    const double w = width();
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w) << "\" height=\"" << num(kHeight)
        << "\" viewBox=\"0 0 " << num(w) << ' ' << num(kHeight) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    svg << "<text x=\"" << num(w / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(s.title)
        << "</text>\n";
    svg << "<text x=\"14\" y=\"" << num(kTop + plot_h() / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
        << num(kTop + plot_h() / 2) << ")\">" << xml_escape(s.unit) << "</text>\n";
    for (int i = 0; i <= 5; ++i) {
      const double v = ymin + (ymax - ymin) * i / 5.0;
      svg << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(y(v)) << "\" x2=\"" << num(w - 16) << "\" y2=\""
          << num(y(v)) << "\" stroke=\"#dddddd\"/>\n";
      svg << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(y(v) + 4) << "\" text-anchor=\"end\">"
          << format_fixed(v, 2) << "</text>\n";
    }
    svg << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(kLeft) << "\" y2=\""
        << num(kTop + plot_h()) << "\" stroke=\"#000000\"/>\n";
    for (std::size_t i = 0; i < n; ++i) {
      const double cx = center(i);
      const double ly = kTop + plot_h() + 14;
      svg << "<text x=\"" << num(cx) << "\" y=\"" << num(ly) << "\" text-anchor=\"end\" transform=\"rotate(-35 "
          << num(cx) << ' ' << num(ly) << ")\">" << xml_escape(s.groups[i].first) << "</text>\n";
    }
  }

  double width() const { return kLeft + kSlot * static_cast<double>(n) + 16; }
  double plot_h() const { return kHeight - kTop - kBottom; }
  double y(double v) const { return kTop + plot_h() * (ymax - v) / (ymax - ymin); }
  double center(std::size_t i) const { return kLeft + kSlot * (static_cast<double>(i) + 0.5); }

  void whisker(const std::string& id, double cx, double lo, double hi, double half, double stroke) {
    svg << "<g id=\"" << id << "\" stroke=\"#000000\" stroke-width=\"" << num(stroke) << "\">"
        << "<line x1=\"" << num(cx) << "\" y1=\"" << num(y(lo)) << "\" x2=\"" << num(cx) << "\" y2=\"" << num(y(hi))
        << "\"/><line x1=\"" << num(cx - half) << "\" y1=\"" << num(y(lo)) << "\" x2=\"" << num(cx + half)
        << "\" y2=\"" << num(y(lo)) << "\"/><line x1=\"" << num(cx - half) << "\" y1=\"" << num(y(hi))
        << "\" x2=\"" << num(cx + half) << "\" y2=\"" << num(y(hi)) << "\"/></g>\n";
  }

  std::string finish() {
    svg << "</svg>\n";
    return svg.str();
  }
};

const char* kFill = "#4C72B0";

std::string md_table(const Grid& g) {
  std::string out = "|";
  for (const auto& h : g.header) out += " " + h + " |";
  out += "\n|";
  for (std::size_t i = 0; i < g.header.size(); ++i) out += i == 0 ? " --- |" : " ---: |";
  out += "\n";
  for (const auto& r : g.rows) {
    out += "|";
    for (const auto& c : r) {
      std::string cell = c;
      std::replace(cell.begin(), cell.end(), '|', '/');
      out += " " + cell + " |";
    }
    out += "\n";
  }
  return out;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  out << text;
  if (!out) throw IoError("write failed: " + p.string());
}

void make_dirs(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw IoError("cannot create " + p.string() + ": " + ec.message());
}

std::string file_for(std::string_view name, Format f) {
  return std::string(name) + (f == Format::Csv ? ".csv" : ".json");
}

std::string render(const Grid& g, Format f) { return f == Format::Csv ? to_csv(g) : to_json(g).dump(2) + "\n"; }

}  // namespace

std::string_view table_name(Table t) {
  switch (t) {
    case Table::MqSummary: return "mq_summary";
    case Table::SrMetrics: return "sr_metrics";
    case Table::AcBreakdown: return "ac_breakdown";
    case Table::SfDetail: return "sf_detail";
    case Table::ScContingency: return "sc_contingency";
    case Table::Tmc: return "tmc";
    case Table::Cmc: return "cmc";
    case Table::Spc: return "spc";
    case Table::Stats: return "stats";
  }
  return "";
}

Table table_from_name(std::string_view name) {
  for (Table t : kTables) {
    if (table_name(t) == name) return t;
  }
  throw ConfigError("unknown table: " + std::string(name));
}

int default_rounding(Table) { return 4; }

int ReportSpec::decimals(Table t) const {
  const auto it = rounding.find(t);
  if (it == rounding.end()) return default_rounding(t);
  if (it->second < 0) throw ConfigError("rounding must be non-negative");
  return it->second;
}

int ReportSpec::percent_decimals(Table t) const { return rounding.count(t) ? decimals(t) : 2; }

const Series* Analysis::find_series(std::string_view name) const {
  for (const auto& s : series) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

std::string format_fixed(double v, int decimals) {
  if (!std::isfinite(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string format_p(double p, int decimals) {
  if (!std::isfinite(p)) return "NA";
  if (p > 0 && p < 1e-4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4e", p);
    return buf;
  }
  return format_fixed(p, decimals);
}

Grid table_grid(const Analysis& a, Table t, int d, int pd) {
  Grid g;
  switch (t) {
    case Table::MqSummary:
      g.header = {"model", "total_methods", "runs", "min_run", "max_run", "mean", "sd", "sem", "syntax_errors"};
      for (const auto& m : a.models) {
        const auto s = spread(m.mq_per_run);
        g.rows.push_back({m.model, itos(m.mq_total), itos(m.runs), format_fixed(s.lo, 0), format_fixed(s.hi, 0),
                          format_fixed(m.mq_mean, d), format_fixed(m.mq_sd, d), format_fixed(m.mq_sem, d),
                          itos(m.sc_errored)});
      }
      break;
    case Table::SrMetrics:
      g.header = {"model",          "mean_params",    "param_iqr",         "rtc_pct",         "lexdiv",
                  "lexdiv_run_mean", "redundancy",    "camelcase_pct",     "vis_public_pct",  "vis_private_pct",
                  "vis_protected_pct", "vis_package_pct", "vis_none_pct"};
      for (const auto& m : a.models) {
        const auto& sr = m.pooled_sr;
        std::vector<std::string> row = {m.model,
                                        format_fixed(sr.mean_params, d),
                                        format_fixed(sr.param_iqr, d),
                                        format_fixed(sr.rtc_pct, pd),
                                        format_fixed(sr.lexdiv, d),
                                        format_fixed(m.lexdiv_run_mean, d),
                                        format_fixed(sr.redundancy, d),
                                        format_fixed(sr.camelcase_pct, pd)};
        for (double v : sr.visibility_pct) row.push_back(format_fixed(v, pd));
        g.rows.push_back(std::move(row));
      }
      break;
    case Table::AcBreakdown:
      g.header = {"model", "full", "uc_only", "action_only", "none", "total",
                  "full_pct", "uc_only_pct", "action_only_pct", "none_pct"};
      for (const auto& m : a.models) {
        const auto& ac = m.ac;
        const double n = static_cast<double>(ac.total());
        g.rows.push_back({m.model, itos(ac.full), itos(ac.uc_only), itos(ac.action_only), itos(ac.none),
                          itos(ac.total()), pct(static_cast<double>(ac.full), n, pd),
                          pct(static_cast<double>(ac.uc_only), n, pd), pct(static_cast<double>(ac.action_only), n, pd),
                          pct(static_cast<double>(ac.none), n, pd)});
      }
      break;
    case Table::SfDetail:
      g.header = {"model", "Pkg", "Enum", "Ev", "Cls", "Attr", "Rel", "Glob"};
      for (const auto& m : a.models) {
        std::vector<std::string> row = {m.model};
        for (double v : m.sf_mean) row.push_back(format_fixed(v, pd));
        row.push_back(format_fixed(m.sf_global_mean, pd));
        g.rows.push_back(std::move(row));
      }
      break;
    case Table::ScContingency:
      g.header = {"model", "correct", "errored", "rate_pct"};
      for (const auto& m : a.models) {
        const double n = static_cast<double>(m.sc_correct + m.sc_errored);
        g.rows.push_back({m.model, itos(m.sc_correct), itos(m.sc_errored),
                          pct(static_cast<double>(m.sc_correct), n, pd)});
      }
      break;
    case Table::Tmc:
    case Table::Cmc: {
      const bool tmc = t == Table::Tmc;
      g.header = {"model", "k", "runs", "mean_pct", "sd_pct", "min_pct", "max_pct"};
      if (tmc) g.header.push_back("class_match_pct");
      for (const auto& m : a.models) {
        std::vector<double> vals;
        for (const auto& r : a.consensus.runs) {
          if (r.model == m.model) vals.push_back(tmc ? r.tmc_pct : r.cmc_pct);
        }
        const auto s = spread(vals);
        std::vector<std::string> row = {m.model,
                                        itos(a.consensus.k),
                                        itos(vals.size()),
                                        format_fixed(s.mean, pd),
                                        format_fixed(s.sd, pd),
                                        format_fixed(s.lo, pd),
                                        format_fixed(s.hi, pd)};
        if (tmc) {
          double match = NAN;
          for (const auto& mc : a.consensus.models) {
            if (mc.model == m.model) match = mc.class_match_pct;
          }
          row.push_back(format_fixed(match, pd));
        }
        g.rows.push_back(std::move(row));
      }
      break;
    }
    case Table::Spc:
      g.header = {"method", "display_name", "dominant_class", "dominant_tie",
                  "models_generating", "models_matching", "consistency_pct"};
      for (const auto& p : a.consensus.placements) {
        g.rows.push_back({p.method, p.display_name, p.dominant_class, p.dominant_tie ? "true" : "false",
                          itos(p.models_generating), itos(p.models_matching), format_fixed(p.consistency_pct, pd)});
      }
      break;
    case Table::Stats:
      g.header = {"family", "test", "label", "statistic", "df", "p_raw",
                  "p_holm", "effect_name", "effect_value", "magnitude"};
      for (const auto& s : a.stats) {
        const auto& r = s.result;
        g.rows.push_back({s.family, r.test_name, r.label, format_fixed(r.statistic, d),
                          r.df ? format_fixed(*r.df, 0) : "NA", format_p(r.p_raw, d),
                          r.p_adjusted ? format_p(*r.p_adjusted, d) : "NA", r.effect ? r.effect->name : "NA",
                          r.effect ? format_fixed(r.effect->value, d) : "NA",
                          r.effect && r.effect->magnitude ? std::string(stats::magnitude_name(*r.effect->magnitude))
                                                          : "NA"});
      }
      break;
  }
  return g;
}

Grid bootstrap_grid(const Analysis& a, int d) {
  Grid g;
  g.header = {"metric", "model", "seed", "mean", "ci_low", "ci_high"};
  for (const auto& b : a.bootstrap) {
    g.rows.push_back({b.metric, b.model, std::to_string(b.seed), format_fixed(b.mean, d), format_fixed(b.ci.low, d),
                      format_fixed(b.ci.high, d)});
  }
  return g;
}

std::string to_csv(const Grid& grid) {
  auto field = [](const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  };
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += field(cells[i]);
    }
    out += '\n';
  };
  line(grid.header);
  for (const auto& r : grid.rows) line(r);
  return out;
}

ordered_json to_json(const Grid& grid) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : grid.rows) {
    ordered_json obj = ordered_json::object();
    for (std::size_t i = 0; i < grid.header.size() && i < r.size(); ++i) {
      const auto& c = r[i];
      if (c == "NA") {
        obj[grid.header[i]] = nullptr;
        continue;
      }
      if (c == "true" || c == "false") {
        obj[grid.header[i]] = c == "true";
        continue;
      }
      char* end = nullptr;
      const bool numeric = !c.empty() && c.find_first_not_of("+-0123456789.eE") == std::string::npos;
      const double v = numeric ? std::strtod(c.c_str(), &end) : 0.0;
      if (numeric && end && *end == '\0') {
        if (c.find_first_of(".eE") == std::string::npos) obj[grid.header[i]] = std::strtoll(c.c_str(), nullptr, 10);
        else obj[grid.header[i]] = v;
      } else {
        obj[grid.header[i]] = c;
      }
    }
    arr.push_back(std::move(obj));
  }
  return arr;
}

void emit_tables(const Analysis& analysis, const ReportSpec& spec, const fs::path& dir) {
  if (spec.tables.empty()) throw EmptySelection("no tables selected");
  make_dirs(dir);
  for (Table t : spec.tables) {
    write_text(dir / file_for(table_name(t), spec.format), render(table_grid(analysis, t, spec.decimals(t), spec.percent_decimals(t)), spec.format));
    if (t == Table::Stats) {
      write_text(dir / file_for("bootstrap", spec.format), render(bootstrap_grid(analysis, spec.decimals(t)), spec.format));
    }
  }
}

std::string bar_chart_svg(const Series& s) {
  struct Bar {
    double mean, sem;
  };
  std::vector<std::optional<Bar>> bars;
  double lo = 0, hi = 0;
  for (const auto& [model, xs] : s.groups) {
    if (xs.empty()) {
      bars.emplace_back();
      continue;
    }
    const Bar b{stats::mean(xs), stats::sem(xs)};
    lo = std::min(lo, b.mean - 1.96 * b.sem);
    hi = std::max(hi, b.mean + 1.96 * b.sem);
    bars.emplace_back(b);
  }
  Canvas c(s, lo, hi);
  for (std::size_t i = 0; i < bars.size(); ++i) {
    if (!bars[i]) continue;
    const auto& b = *bars[i];
    const double cx = c.center(i);
    const double top = std::max(c.y(b.mean), c.y(0));
    const double bottom = std::min(c.y(b.mean), c.y(0));
    c.svg << "<rect id=\"bar-" << i << "\" x=\"" << num(cx - 20) << "\" y=\"" << num(bottom) << "\" width=\"40\" height=\""
          << num(top - bottom) << "\" fill=\"" << kFill << "\"/>\n";
    c.whisker("ci95-" + std::to_string(i), cx, b.mean - 1.96 * b.sem, b.mean + 1.96 * b.sem, 5, 1);
    c.whisker("sem-" + std::to_string(i), cx, b.mean - b.sem, b.mean + b.sem, 9, 2.5);
  }
  return c.finish();
}

std::string box_plot_svg(const Series& s) {
  double lo = 0, hi = 0;
  for (const auto& [model, xs] : s.groups) {
    for (double v : xs) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  Canvas c(s, lo, hi);
  for (std::size_t i = 0; i < s.groups.size(); ++i) {
    const auto& xs = s.groups[i].second;
    if (xs.empty()) continue;
    const double q1 = stats::quantile(xs, 0.25), q2 = stats::quantile(xs, 0.5), q3 = stats::quantile(xs, 0.75);
    const double mn = *std::min_element(xs.begin(), xs.end()), mx = *std::max_element(xs.begin(), xs.end());
    const double cx = c.center(i);
    c.whisker("range-" + std::to_string(i), cx, mn, mx, 8, 1);
    c.svg << "<rect id=\"box-" << i << "\" x=\"" << num(cx - 18) << "\" y=\"" << num(c.y(q3)) << "\" width=\"36\" height=\""
          << num(c.y(q1) - c.y(q3)) << "\" fill=\"" << kFill << "\" fill-opacity=\"0.6\" stroke=\"#000000\"/>\n";
    c.svg << "<line id=\"median-" << i << "\" x1=\"" << num(cx - 18) << "\" y1=\"" << num(c.y(q2)) << "\" x2=\""
          << num(cx + 18) << "\" y2=\"" << num(c.y(q2)) << "\" stroke=\"#000000\" stroke-width=\"2\"/>\n";
  }
  return c.finish();
}

void emit_charts(const Analysis& analysis, const ReportSpec& spec, const fs::path& dir) {
  if (!spec.charts) return;
  make_dirs(dir);
  for (const auto& s : analysis.series) {
    write_text(dir / (s.name + "_bar.svg"), bar_chart_svg(s));
    write_text(dir / (s.name + "_box.svg"), box_plot_svg(s));
  }
}

std::string summary_markdown(const Analysis& a, const ReportSpec& spec) {
  std::size_t diagrams = 0, methods = 0;
  for (const auto& m : a.models) {
    diagrams += m.runs;
    methods += m.mq_total;
  }
  std::ostringstream md;
  md << "# UML method enrichment report\n\n";
  md << "- Models: " << a.models.size() << "\n";
  md << "- Diagrams: " << diagrams << "\n";
  md << "- Methods: " << methods << "\n";
  md << "- Consensus k: " << a.consensus.k << "\n";
  if (!a.consensus.tmc_core.names.empty()) {
    md << "- Normalized core names:";
    for (const auto& n : a.consensus.tmc_core.names) md << ' ' << n;
    md << "\n";
  }
  if (std::isfinite(a.consensus.spc_mean)) md << "- Mean placement consistency: " << format_fixed(a.consensus.spc_mean, 2) << "\n";
  if (std::isfinite(a.consensus.top_set_overlap)) {
    md << "- Overlap of per-model top-k sets: " << format_fixed(a.consensus.top_set_overlap, 4) << "\n";
  }
  for (Table t : spec.tables) {
    md << "\n## " << table_name(t) << "\n\n" << md_table(table_grid(a, t, spec.decimals(t), spec.percent_decimals(t)));
    if (t == Table::Stats && !a.bootstrap.empty()) {
      md << "\n## bootstrap\n\n" << md_table(bootstrap_grid(a, spec.decimals(t)));
    }
  }
  return md.str();
}

void emit_report(const Analysis& analysis, const ReportSpec& spec, const fs::path& dir) {
  emit_tables(analysis, spec, dir);
  emit_charts(analysis, spec, dir / "charts");
  write_text(dir / "summary.md", summary_markdown(analysis, spec));
}

}  // namespace umlbench::report
