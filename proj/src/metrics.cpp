#include "umlbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <unordered_set>

#include "umlbench/descriptive.hpp"

namespace umlbench::metrics {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    const auto c = static_cast<unsigned char>(s[i]);
    int len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 0;
    if (len == 0 || i + len > s.size()) {
      out.push_back(c);  // invalid byte stands for itself
      ++i;
      continue;
    }
    char32_t cp = len == 1 ? c : c & (0xFF >> (len + 1));
    for (int k = 1; k < len; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::vector<std::string> names_of(const std::vector<puml::MethodRecord>& methods) {
  std::vector<std::string> out;
  out.reserve(methods.size());
  for (const auto& m : methods) out.push_back(m.name);
  return out;
}

std::size_t visibility_slot(puml::Visibility v) {
  for (std::size_t i = 0; i < kVisibilityOrder.size(); ++i) {
    if (kVisibilityOrder[i] == v) return i;
  }
  return kVisibilityOrder.size() - 1;
}

std::string key(std::initializer_list<std::string_view> parts) {
  std::string k;
  for (auto p : parts) {
    if (!k.empty()) k += '\x1f';
    k += p;
  }
  return k;
}

SRRow nan_sr() { return {{kNaN, kNaN, kNaN, kNaN, kNaN}, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN}; }

double mean_or_nan(const std::vector<double>& xs) {
  std::vector<double> finite;
  for (double x : xs) {
    if (!std::isnan(x)) finite.push_back(x);
  }
  return finite.empty() ? kNaN : stats::mean(finite);
}

}  // namespace

std::size_t method_quantity(const puml::Diagram& diagram) {
  std::size_t n = 0;
  for (const auto& c : diagram.classes) n += c.methods.size();
  return n;
}

std::vector<std::pair<std::string, std::size_t>> methods_per_class(const puml::Diagram& diagram) {
  std::vector<std::pair<std::string, std::size_t>> out;
  for (const auto& c : diagram.classes) out.emplace_back(c.name, c.methods.size());
  return out;
}

std::vector<puml::MethodRecord> all_methods(const puml::Diagram& diagram) {
  std::vector<puml::MethodRecord> out;
  for (const auto& c : diagram.classes) out.insert(out.end(), c.methods.begin(), c.methods.end());
  return out;
}

double name_redundancy(const std::vector<std::string>& names) {
  if (names.empty()) throw EmptyInputError("redundancy of an empty name list");
  const std::unordered_set<std::string> unique(names.begin(), names.end());
  return static_cast<double>(names.size()) / static_cast<double>(unique.size());
}

double return_type_completeness(const std::vector<puml::MethodRecord>& methods) {
  if (methods.empty()) throw EmptyInputError("return-type completeness of an empty method list");
  std::size_t r = 0;
  for (const auto& m : methods) {
    if (!m.return_type) continue;
    std::string t = *m.return_type;
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t != "void") ++r;
  }
  return 100.0 * static_cast<double>(r) / static_cast<double>(methods.size());
}

std::size_t levenshtein(std::string_view a_utf8, std::string_view b_utf8) {
  const auto a = decode_utf8(a_utf8);
  const auto b = decode_utf8(b_utf8);
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

double levenshtein_diversity(const std::vector<std::string>& unique_names) {
  const std::set<std::string> names(unique_names.begin(), unique_names.end());
  if (names.size() < 2) throw TooFewNames("lexical diversity needs at least two distinct names");
  const std::vector<std::string> v(names.begin(), names.end());
  std::vector<std::size_t> lengths;
  for (const auto& s : v) lengths.push_back(decode_utf8(s).size());
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = i + 1; j < v.size(); ++j) {
      sum += static_cast<double>(levenshtein(v[i], v[j])) / static_cast<double>(std::max(lengths[i], lengths[j]));
      ++pairs;
    }
  }
  return sum / static_cast<double>(pairs);
}

ParamStats param_stats(const std::vector<puml::MethodRecord>& methods) {
  if (methods.empty()) throw EmptyInputError("parameter statistics of an empty method list");
  std::vector<double> counts;
  for (const auto& m : methods) counts.push_back(static_cast<double>(m.parameters.size()));
  return {stats::mean(counts), stats::iqr(counts)};
}

bool is_camel_case(std::string_view name) {
  if (name.empty() || !(name[0] >= 'a' && name[0] <= 'z')) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
  });
}

double naming_convention_rate(const std::vector<std::string>& names) {
  if (names.empty()) throw EmptyInputError("naming convention rate of an empty name list");
  const auto ok = std::count_if(names.begin(), names.end(), [](const std::string& n) { return is_camel_case(n); });
  return 100.0 * static_cast<double>(ok) / static_cast<double>(names.size());
}

std::array<std::size_t, 5> visibility_counts(const std::vector<puml::MethodRecord>& methods) {
  std::array<std::size_t, 5> counts{};
  for (const auto& m : methods) ++counts[visibility_slot(m.visibility)];
  return counts;
}

SRRow signature_richness(const std::vector<puml::MethodRecord>& methods) {
  if (methods.empty()) throw EmptyInputError("signature richness of an empty method list");
  SRRow row;
  const auto vis = visibility_counts(methods);
  for (std::size_t i = 0; i < vis.size(); ++i) {
    row.visibility_pct[i] = 100.0 * static_cast<double>(vis[i]) / static_cast<double>(methods.size());
  }
  const auto names = names_of(methods);
  row.camelcase_pct = naming_convention_rate(names);
  const auto ps = param_stats(methods);
  row.mean_params = ps.mean;
  row.param_iqr = ps.iqr;
  row.rtc_pct = return_type_completeness(methods);
  row.redundancy = name_redundancy(names);
  try {
    row.lexdiv = levenshtein_diversity(names);
  } catch (const TooFewNames&) {
    row.lexdiv = kNaN;
  }
  return row;
}

ACRow& ACRow::operator+=(const ACRow& o) {
  full += o.full;
  uc_only += o.uc_only;
  action_only += o.action_only;
  none += o.none;
  return *this;
}

Annotation classify_annotation(const puml::MethodRecord& m) {
  const bool uc = !m.uc_ids.empty();
  const bool act = m.action_text && !m.action_text->empty();
  if (uc && act) return Annotation::Full;
  if (uc) return Annotation::UcOnly;
  if (act) return Annotation::ActionOnly;
  return Annotation::None;
}

ACRow annotation_completeness(const std::vector<puml::MethodRecord>& methods) {
  ACRow row;
  for (const auto& m : methods) {
    switch (classify_annotation(m)) {
      case Annotation::Full: ++row.full; break;
      case Annotation::UcOnly: ++row.uc_only; break;
      case Annotation::ActionOnly: ++row.action_only; break;
      case Annotation::None: ++row.none; break;
    }
  }
  return row;
}

std::string_view element_name(Element e) {
  switch (e) {
    case Element::Package: return "package";
    case Element::Enum: return "enum";
    case Element::EnumValue: return "enum_value";
    case Element::Class: return "class";
    case Element::Attribute: return "attribute";
    case Element::Relationship: return "relationship";
  }
  return "?";
}

std::vector<std::string> element_keys(const puml::Diagram& d, Element category) {
  std::vector<std::string> keys;
  switch (category) {
    case Element::Package:
      for (const auto& p : d.packages) keys.push_back(p.name);
      break;
    case Element::Enum:
      for (const auto& e : d.enums) keys.push_back(e.name);
      break;
    case Element::EnumValue:
      for (const auto& e : d.enums) {
        for (const auto& v : e.values) keys.push_back(key({e.name, v}));
      }
      break;
    case Element::Class:
      for (const auto& c : d.classes) keys.push_back(c.name);
      break;
    case Element::Attribute:
      for (const auto& c : d.classes) {
        for (const auto& a : c.attributes) keys.push_back(key({c.name, a.name}));
      }
      break;
    case Element::Relationship:
      for (const auto& r : d.relationships) {
        auto ends = puml::semantic_ends(r);
        if (!ends.directed && ends.to < ends.from) std::swap(ends.from, ends.to);
        keys.push_back(key({puml::relation_kind_name(r.kind), ends.directed ? "->" : "--", ends.from, ends.to}));
      }
      break;
  }
  return keys;
}

double jaccard_percent(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const std::set<std::string> sa(a.begin(), a.end());
  const std::set<std::string> sb(b.begin(), b.end());
  if (sa.empty() && sb.empty()) return 100.0;
  std::size_t inter = 0;
  for (const auto& x : sa) inter += sb.count(x);
  const std::size_t uni = sa.size() + sb.size() - inter;
  return 100.0 * static_cast<double>(inter) / static_cast<double>(uni);
}

SFRow structural_fidelity(const puml::Diagram& augmented, const puml::Diagram& baseline) {
  SFRow row;
  double sum = 0.0;
  for (std::size_t i = 0; i < kElements.size(); ++i) {
    row.per_category[i] = jaccard_percent(element_keys(augmented, kElements[i]), element_keys(baseline, kElements[i]));
    sum += row.per_category[i];
  }
  row.global = sum / static_cast<double>(kElements.size());
  return row;
}

double SCRow::rate() const {
  const auto n = correct + errored;
  return n ? static_cast<double>(correct) / static_cast<double>(n) : kNaN;
}

std::vector<SCRow> syntactic_correctness(const corpus::CorpusIndex& index) {
  std::vector<SCRow> rows;
  for (const auto& e : index.entries) {
    if (rows.empty() || rows.back().model != e.model_name) rows.push_back({e.model_name, 0, 0});
    ++(e.validation.is_valid ? rows.back().correct : rows.back().errored);
  }
  return rows;
}

const std::vector<std::string>& MetricFrame::columns() {
  static const std::vector<std::string> cols = {
      "model",          "run",           "parsed",         "valid",       "mq",
      "vis_public_pct", "vis_private_pct", "vis_protected_pct", "vis_package_pct", "vis_none_pct",
      "camelcase_pct",  "mean_params",   "param_iqr",      "rtc_pct",     "redundancy",
      "lexdiv",         "ac_full",       "ac_uc_only",     "ac_action_only", "ac_none",
      "sf_package",     "sf_enum",       "sf_enum_value",  "sf_class",    "sf_attribute",
      "sf_relationship", "sf_global"};
  return cols;
}

void MetricFrame::write_csv(std::ostream& out) const {
  auto num = [](double v) {
    if (std::isnan(v)) return std::string("NA");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return std::string(buf);
  };
  const auto& cols = columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : rows) {
    std::string model = r.model;
    if (model.find_first_of(",\"\n") != std::string::npos) {
      std::string q = "\"";
      for (char c : model) q += c == '"' ? std::string("\"\"") : std::string(1, c);
      model = q + "\"";
    }
    out << model << ',' << r.run << ',' << (r.parsed ? "true" : "false") << ',' << (r.valid ? "true" : "false");
    if (!r.parsed) {
      for (std::size_t i = 4; i < cols.size(); ++i) out << ",NA";
      out << '\n';
      continue;
    }
    out << ',' << r.mq;
    for (double v : r.sr.visibility_pct) out << ',' << num(v);
    out << ',' << num(r.sr.camelcase_pct) << ',' << num(r.sr.mean_params) << ',' << num(r.sr.param_iqr) << ','
        << num(r.sr.rtc_pct) << ',' << num(r.sr.redundancy) << ',' << num(r.sr.lexdiv);
    out << ',' << r.ac.full << ',' << r.ac.uc_only << ',' << r.ac.action_only << ',' << r.ac.none;
    for (double v : r.sf.per_category) out << ',' << num(v);
    out << ',' << num(r.sf.global) << '\n';
  }
}

MetricFrame compute_frame(const corpus::CorpusIndex& index) {
  MetricFrame frame;
  for (const auto& e : index.entries) {
    MetricRow row;
    row.model = e.model_name;
    row.run = e.run_index;
    row.valid = e.validation.is_valid;
    row.parsed = e.diagram.has_value();
    if (row.parsed) {
      const auto methods = all_methods(*e.diagram);
      row.mq = methods.size();
      row.sr = methods.empty() ? nan_sr() : signature_richness(methods);
      row.ac = annotation_completeness(methods);
      row.sf = structural_fidelity(*e.diagram, index.baseline);
    }
    frame.rows.push_back(std::move(row));
  }
  return frame;
}

std::vector<ModelSummary> summarize_models(const corpus::CorpusIndex& index, const MetricFrame& frame) {
  std::vector<ModelSummary> out;
  std::map<std::string, std::vector<puml::MethodRecord>> pooled;
  std::map<std::string, std::vector<double>> lexdivs;
  std::map<std::string, std::array<std::vector<double>, 7>> sf;
  std::map<std::string, std::map<std::string, double>> class_sums;
  for (std::size_t i = 0; i < index.entries.size(); ++i) {
    const auto& e = index.entries[i];
    const auto& row = frame.rows.at(i);
    if (out.empty() || out.back().model != e.model_name) {
      out.emplace_back();
      out.back().model = e.model_name;
    }
    auto& s = out.back();
    ++s.runs;
    ++(e.validation.is_valid ? s.sc_correct : s.sc_errored);
    if (!e.diagram) continue;
    ++s.parsed_runs;
    s.mq_total += row.mq;
    s.mq_per_run.push_back(static_cast<double>(row.mq));
    s.ac += row.ac;
    auto methods = all_methods(*e.diagram);
    auto& pool = pooled[s.model];
    pool.insert(pool.end(), methods.begin(), methods.end());
    lexdivs[s.model].push_back(row.sr.lexdiv);
    for (std::size_t c = 0; c < 6; ++c) sf[s.model][c].push_back(row.sf.per_category[c]);
    sf[s.model][6].push_back(row.sf.global);
    for (const auto& [cls, n] : methods_per_class(*e.diagram)) class_sums[s.model][cls] += static_cast<double>(n);
  }
  for (auto& s : out) {
    if (s.parsed_runs == 0) {
      s.mq_mean = s.mq_sd = s.mq_sem = s.lexdiv_run_mean = s.sf_global_mean = kNaN;
      s.sf_mean.fill(kNaN);
      s.pooled_sr = nan_sr();
      continue;
    }
    s.mq_mean = stats::mean(s.mq_per_run);
    s.mq_sd = stats::sample_sd(s.mq_per_run);
    s.mq_sem = stats::sem(s.mq_per_run);
    const auto& pool = pooled[s.model];
    s.visibility_counts = visibility_counts(pool);
    s.pooled_sr = pool.empty() ? nan_sr() : signature_richness(pool);
    s.lexdiv_run_mean = mean_or_nan(lexdivs[s.model]);
    for (std::size_t c = 0; c < 6; ++c) s.sf_mean[c] = stats::mean(sf[s.model][c]);
    s.sf_global_mean = stats::mean(sf[s.model][6]);
    for (const auto& [cls, total] : class_sums[s.model]) {
      s.mean_methods_per_class[cls] = total / static_cast<double>(s.parsed_runs);
    }
  }
  return out;
}

std::vector<ModelSummary> order_by_mq(std::vector<ModelSummary> summaries) {
  std::stable_sort(summaries.begin(), summaries.end(), [](const ModelSummary& a, const ModelSummary& b) {
    if (a.mq_total != b.mq_total) return a.mq_total > b.mq_total;
    return a.model < b.model;
  });
  return summaries;
}

}  // namespace umlbench::metrics
