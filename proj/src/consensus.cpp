#include "umlbench/consensus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace umlbench::consensus {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <typename Map>
typename Map::const_iterator max_count(const Map& m) {
  // std::map iterates keys ascending, so the first maximum is the smallest key.
  auto best = m.begin();
  for (auto it = m.begin(); it != m.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return best;
}

}  // namespace

std::string normalize_name(std::string_view raw) {
  std::string out;
  for (unsigned char c : raw) {
    if (c >= 'A' && c <= 'Z') out += static_cast<char>(c - 'A' + 'a');
    else if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) out += static_cast<char>(c);
  }
  if (out.empty()) throw EmptyInputError("name has no alphanumeric characters: '" + std::string(raw) + "'");
  return out;
}

std::size_t compute_k(std::size_t total_methods, std::size_t total_diagrams) {
  if (total_diagrams == 0) throw ZeroDiagrams("k is undefined for an empty corpus");
  return (total_methods + total_diagrams - 1) / total_diagrams;
}

std::string FrequencyEntry::display_name() const { return raw_variants.empty() ? "" : max_count(raw_variants)->first; }

std::string FrequencyTable::key_of(std::string_view raw) const {
  return mode_ == KeyMode::Normalized ? normalize_name(raw) : std::string(raw);
}

void FrequencyTable::add(const puml::Diagram& diagram) {
  for (const auto& cls : diagram.classes) {
    std::set<std::string> seen;
    for (const auto& m : cls.methods) {
      std::string key;
      try {
        key = key_of(m.name);
      } catch (const EmptyInputError&) {
        continue;
      }
      if (!seen.insert(key).second) continue;
      auto& e = entries_[key];
      ++e.count;
      ++e.raw_variants[m.name];
      ++e.class_counts[cls.name];
    }
  }
}

void FrequencyTable::merge(const FrequencyTable& other) {
  if (other.mode_ != mode_) throw Error("cannot merge frequency tables with different key modes");
  for (const auto& [key, src] : other.entries_) {
    auto& dst = entries_[key];
    dst.count += src.count;
    for (const auto& [v, n] : src.raw_variants) dst.raw_variants[v] += n;
    for (const auto& [c, n] : src.class_counts) dst.class_counts[c] += n;
  }
}

const FrequencyEntry* FrequencyTable::find(const std::string& key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

ConsensusSet top_k(const FrequencyTable& table, std::size_t k) {
  if (k == 0) throw InsufficientNames("k must be positive");
  if (table.entries().size() < k) {
    throw InsufficientNames("table has " + std::to_string(table.entries().size()) + " names, fewer than k = " +
                            std::to_string(k));
  }
  std::vector<std::pair<std::string, std::size_t>> all;
  for (const auto& [name, e] : table.entries()) all.emplace_back(name, e.count);
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  ConsensusSet out;
  out.k = k;
  for (std::size_t i = 0; i < k; ++i) {
    out.names.push_back(all[i].first);
    out.counts.push_back(all[i].second);
  }
  out.boundary_tie = k < all.size() && all[k].second == all[k - 1].second;
  return out;
}

Coverage coverage(const std::vector<std::set<std::string>>& model_runs, const ConsensusSet& benchmark) {
  if (benchmark.names.empty()) throw InsufficientNames("empty benchmark set");
  Coverage out;
  for (const auto& run : model_runs) {
    std::size_t hit = 0;
    for (const auto& n : benchmark.names) hit += run.count(n);
    out.per_run.push_back(100.0 * static_cast<double>(hit) / static_cast<double>(benchmark.names.size()));
  }
  if (out.per_run.empty()) {
    out.mean = kNaN;
  } else {
    double s = 0.0;
    for (double v : out.per_run) s += v;
    out.mean = s / static_cast<double>(out.per_run.size());
  }
  return out;
}

double pairwise_model_jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) throw BothEmpty("Jaccard of two empty sets");
  std::size_t inter = 0;
  for (const auto& x : a) inter += b.count(x);
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

std::map<std::string, std::size_t> agreement_counts(const ConsensusSet& core,
                                                    const std::map<std::string, std::set<std::string>>& per_model) {
  std::map<std::string, std::size_t> out;
  for (const auto& name : core.names) {
    std::size_t n = 0;
    for (const auto& [model, names] : per_model) n += names.count(name);
    out[name] = n;
  }
  return out;
}

Dominant dominant_class(const FrequencyTable& table, const std::string& name) {
  const auto* e = table.find(name);
  if (!e || e->class_counts.empty()) throw UnknownName("name not in frequency table: " + name);
  const auto best = max_count(e->class_counts);
  std::size_t holders = 0;
  for (const auto& [cls, n] : e->class_counts) holders += n == best->second;
  return {best->first, holders > 1};
}

std::optional<std::string> modal_class(const Assignments& model, const std::string& name) {
  const auto it = model.find(name);
  if (it == model.end() || it->second.empty()) return std::nullopt;
  return max_count(it->second)->first;
}

double class_match_rate(const Assignments& model, const ConsensusSet& core,
                        const std::map<std::string, Dominant>& dominants) {
  std::size_t generated = 0, matched = 0;
  for (const auto& name : core.names) {
    const auto modal = modal_class(model, name);
    if (!modal) continue;
    ++generated;
    const auto d = dominants.find(name);
    if (d != dominants.end() && d->second.cls == *modal) ++matched;
  }
  if (generated == 0) throw NoCoreMethodsGenerated("model generated none of the core methods");
  return 100.0 * static_cast<double>(matched) / static_cast<double>(generated);
}

ConsensusReport analyze(const corpus::CorpusIndex& index, std::optional<std::size_t> k_override) {
  ConsensusReport rep;
  FrequencyTable norm(KeyMode::Normalized), raw(KeyMode::Raw);
  std::map<std::string, FrequencyTable> per_model_table;
  std::map<std::string, std::set<std::string>> model_norm, model_raw;
  std::map<std::string, Assignments> assignments;
  struct RunNames {
    std::string model;
    int run;
    std::set<std::string> norm, raw;
  };
  std::vector<RunNames> runs;

  for (const auto& e : index.entries) {
    if (!e.diagram) continue;
    ++rep.total_diagrams;
    rep.total_methods += e.diagram->method_count();
    norm.add(*e.diagram);
    raw.add(*e.diagram);
    per_model_table.try_emplace(e.model_name, KeyMode::Normalized).first->second.add(*e.diagram);
    RunNames rn{e.model_name, e.run_index, {}, {}};
    for (const auto& cls : e.diagram->classes) {
      std::set<std::string> seen;
      for (const auto& m : cls.methods) {
        rn.raw.insert(m.name);
        model_raw[e.model_name].insert(m.name);
        std::string key;
        try {
          key = normalize_name(m.name);
        } catch (const EmptyInputError&) {
          continue;
        }
        rn.norm.insert(key);
        model_norm[e.model_name].insert(key);
        if (seen.insert(key).second) ++assignments[e.model_name][key][cls.name];
      }
    }
    runs.push_back(std::move(rn));
  }
  if (rep.total_diagrams == 0) throw ZeroDiagrams("no parsed diagrams in the corpus");
  rep.k = k_override ? *k_override : compute_k(rep.total_methods, rep.total_diagrams);
  rep.k = std::min(rep.k, norm.entries().size());
  if (rep.k == 0) throw InsufficientNames("the corpus contains no method names");
  rep.tmc_core = top_k(norm, rep.k);
  rep.cmc_core = top_k(raw, rep.k);

  for (const auto& m : index.models()) {
    if (per_model_table.count(m)) rep.model_names.push_back(m);
  }
  for (const auto& model : rep.model_names) {
    std::vector<std::set<std::string>> norm_runs, raw_runs;
    for (const auto& r : runs) {
      if (r.model != model) continue;
      norm_runs.push_back(r.norm);
      raw_runs.push_back(r.raw);
    }
    const auto tmc = coverage(norm_runs, rep.tmc_core);
    const auto cmc = coverage(raw_runs, rep.cmc_core);
    std::size_t i = 0;
    for (const auto& r : runs) {
      if (r.model != model) continue;
      rep.runs.push_back({model, r.run, tmc.per_run[i], cmc.per_run[i]});
      ++i;
    }
    rep.models.push_back({model, tmc.mean, cmc.mean, kNaN});
  }

  for (const auto& a : rep.model_names) {
    std::vector<double> row;
    for (const auto& b : rep.model_names) {
      try {
        row.push_back(pairwise_model_jaccard(model_raw[a], model_raw[b]));
      } catch (const BothEmpty&) {
        row.push_back(kNaN);
      }
    }
    rep.jaccard.push_back(std::move(row));
  }

  rep.agreement = agreement_counts(rep.tmc_core, model_norm);
  std::map<std::string, Dominant> dominants;
  for (const auto& name : rep.tmc_core.names) {
    std::vector<bool> row;
    for (const auto& model : rep.model_names) row.push_back(model_norm[model].count(name) > 0);
    rep.presence.push_back(std::move(row));
    dominants[name] = dominant_class(norm, name);
  }

  double spc_sum = 0.0;
  for (const auto& name : rep.tmc_core.names) {
    PlacementRecord p;
    p.method = name;
    p.display_name = norm.find(name)->display_name();
    p.dominant_class = dominants[name].cls;
    p.dominant_tie = dominants[name].tie;
    for (const auto& model : rep.model_names) {
      const auto modal = modal_class(assignments[model], name);
      if (!modal) continue;
      ++p.models_generating;
      if (*modal == p.dominant_class) ++p.models_matching;
    }
    p.consistency_pct = 100.0 * static_cast<double>(p.models_matching) / static_cast<double>(p.models_generating);
    spc_sum += p.consistency_pct;
    rep.placements.push_back(std::move(p));
  }
  rep.spc_mean = spc_sum / static_cast<double>(rep.placements.size());

  for (auto& mc : rep.models) {
    try {
      mc.class_match_pct = class_match_rate(assignments[mc.model], rep.tmc_core, dominants);
    } catch (const NoCoreMethodsGenerated&) {
      mc.class_match_pct = kNaN;
    }
  }

  std::set<std::string> inter, uni;
  bool first = true;
  for (const auto& model : rep.model_names) {
    const auto& t = per_model_table.at(model);
    std::set<std::string> s;
    if (!t.entries().empty()) {
      const auto top = top_k(t, std::min(rep.k, t.entries().size()));
      s.insert(top.names.begin(), top.names.end());
    }
    uni.insert(s.begin(), s.end());
    if (first) {
      inter = s;
      first = false;
    } else {
      std::set<std::string> next;
      std::set_intersection(inter.begin(), inter.end(), s.begin(), s.end(), std::inserter(next, next.end()));
      inter = std::move(next);
    }
  }
  rep.top_set_overlap = uni.empty() ? kNaN : static_cast<double>(inter.size()) / static_cast<double>(uni.size());
  return rep;
}

}  // namespace umlbench::consensus
