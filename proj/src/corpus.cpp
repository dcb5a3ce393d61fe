#include "umlbench/corpus.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

namespace umlbench::corpus {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

const char* class_kind_name(puml::ClassKind k) {
  switch (k) {
    case puml::ClassKind::AbstractClass: return "abstract_class";
    case puml::ClassKind::Interface: return "interface";
    case puml::ClassKind::Class: break;
  }
  return "class";
}

puml::ClassKind class_kind_from(const std::string& s) {
  if (s == "abstract_class") return puml::ClassKind::AbstractClass;
  if (s == "interface") return puml::ClassKind::Interface;
  if (s == "class") return puml::ClassKind::Class;
  throw ConfigError("unknown class kind: " + s);
}

puml::RelationKind relation_kind_from(const std::string& s) {
  for (auto k : {puml::RelationKind::Association, puml::RelationKind::Aggregation, puml::RelationKind::Composition,
                 puml::RelationKind::Inheritance, puml::RelationKind::Dependency, puml::RelationKind::Realization}) {
    if (puml::relation_kind_name(k) == s) return k;
  }
  throw ConfigError("unknown relationship kind: " + s);
}

std::string visibility_json(puml::Visibility v) {
  const auto m = puml::visibility_marker(v);
  return m.empty() ? "none" : std::string(m);
}

puml::Visibility visibility_from_json(const std::string& s) {
  const auto v = puml::visibility_from_marker(s);
  if (!v) throw ConfigError("unknown visibility: " + s);
  return *v;
}

ordered_json opt(const std::optional<std::string>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

std::optional<std::string> opt_from(const ordered_json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::string>();
}

ordered_json method_json(const puml::MethodRecord& m) {
  ordered_json params = ordered_json::array();
  for (const auto& p : m.parameters) params.push_back({{"name", p.name}, {"type", opt(p.type)}});
  return {{"visibility", visibility_json(m.visibility)},
          {"name", m.name},
          {"params", params},
          {"return", opt(m.return_type)},
          {"uc_ids", m.uc_ids},
          {"action_text", opt(m.action_text)},
          {"modifiers", m.modifiers}};
}

puml::MethodRecord method_from(const ordered_json& j, const std::string& owner) {
  puml::MethodRecord m;
  m.visibility = visibility_from_json(j.at("visibility").get<std::string>());
  m.name = j.at("name").get<std::string>();
  for (const auto& p : j.at("params")) m.parameters.push_back({p.at("name").get<std::string>(), opt_from(p, "type")});
  m.return_type = opt_from(j, "return");
  m.uc_ids = j.value("uc_ids", std::vector<std::string>{});
  m.action_text = opt_from(j, "action_text");
  m.modifiers = j.value("modifiers", std::vector<std::string>{});
  m.owning_class = owner;
  return m;
}

}  // namespace

std::vector<std::string> CorpusIndex::models() const {
  std::vector<std::string> out;
  for (const auto& e : entries) {
    if (out.empty() || out.back() != e.model_name) out.push_back(e.model_name);
  }
  return out;
}

std::pair<std::string, int> parse_filename(std::string_view name) {
  static const std::regex pattern(R"(^(.+)_run(\d+)(\.[A-Za-z0-9]+)?$)", std::regex::icase);
  std::cmatch m;
  if (!std::regex_match(name.begin(), name.end(), m, pattern)) {
    throw NamingError("file name does not match <Model>_run<N>: " + std::string(name));
  }
  const std::string digits = m[2].str();
  if (digits.size() > 9) throw NamingError("run index out of range: " + std::string(name));
  const int run = std::stoi(digits);
  if (run < 1) throw NamingError("run index must be positive: " + std::string(name));
  return {m[1].str(), run};
}

puml::Diagram load_baseline(const fs::path& baseline) {
  const std::string text = read_file(baseline);
  auto outcome = puml::parse_with_issues(text);
  if (!outcome.diagram) {
    std::string msg = "baseline does not parse: " + baseline.string();
    for (const auto& i : outcome.issues) {
      if (i.severity == puml::Severity::Error) {
        msg += " (line " + std::to_string(i.line) + ": " + i.message + ")";
        break;
      }
    }
    throw BaselineInvalid(msg);
  }
  if (const auto n = outcome.diagram->method_count(); n != 0) {
    throw BaselineInvalid("baseline declares " + std::to_string(n) + " method(s): " + baseline.string());
  }
  return std::move(*outcome.diagram);
}

int run_external_validator(const std::string& command_template, const fs::path& file) {
  std::string cmd = command_template;
  const std::string quoted = shell_quote(file.string());
  bool substituted = false;
  for (std::size_t pos; (pos = cmd.find("{file}")) != std::string::npos; substituted = true) {
    cmd.replace(pos, 6, quoted);
  }
  if (!substituted) cmd += " " + quoted;
  cmd += " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1) throw IoError("cannot launch external validator: " + command_template);
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  return 128;
}

CorpusEntry make_entry(std::string model_name, int run_index, std::string source_path, std::string_view text) {
  CorpusEntry e{std::move(model_name), run_index, std::move(source_path), std::nullopt, {}};
  auto outcome = puml::parse_with_issues(text);
  e.validation = puml::validate(text);
  if (outcome.diagram) {
    outcome.diagram->provenance = puml::Provenance{e.model_name, e.run_index};
    e.diagram = std::move(outcome.diagram);
  }
  return e;
}

CorpusIndex scan_corpus(const fs::path& directory, const fs::path& baseline, const ScanOptions& options) {
  std::error_code ec;
  if (!fs::is_directory(directory, ec)) throw IoError("not a readable directory: " + directory.string());

  CorpusIndex index;
  index.baseline = load_baseline(baseline);
  const auto baseline_canon = fs::weakly_canonical(baseline, ec);

  struct Job {
    std::string model;
    int run;
    fs::path path;
  };
  std::vector<Job> jobs;
  fs::recursive_directory_iterator it(directory, fs::directory_options::skip_permission_denied, ec);
  if (ec) throw IoError("cannot enumerate " + directory.string() + ": " + ec.message());
  for (const auto& dirent : it) {
    if (!dirent.is_regular_file()) continue;
    const auto& p = dirent.path();
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext != ".puml") continue;
    if (fs::weakly_canonical(p, ec) == baseline_canon) continue;
    try {
      auto [model, run] = parse_filename(p.filename().string());
      jobs.push_back({std::move(model), run, p});
    } catch (const NamingError&) {
      index.skipped.push_back(p.string());
    }
  }
  std::sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) {
    return std::tie(a.model, a.run, a.path) < std::tie(b.model, b.run, b.path);
  });
  std::sort(index.skipped.begin(), index.skipped.end());
  for (std::size_t i = 1; i < jobs.size(); ++i) {
    if (jobs[i].model == jobs[i - 1].model && jobs[i].run == jobs[i - 1].run) {
      throw NamingError("duplicate (model, run) for " + jobs[i - 1].path.string() + " and " + jobs[i].path.string());
    }
  }

  index.entries.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> failures(jobs.size());
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();) {
      try {
        const auto& job = jobs[i];
        auto entry = make_entry(job.model, job.run, job.path.string(), read_file(job.path));
        if (options.external_validator && run_external_validator(*options.external_validator, job.path) != 0) {
          entry.validation.is_valid = false;
          entry.validation.issues.push_back(
              {0, 0, puml::IssueKind::ExternalValidator, puml::Severity::Error, "external validator rejected the file"});
        }
        index.entries[i] = std::move(entry);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  unsigned workers = options.workers ? options.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(jobs.size(), 1)));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return index;
}

ordered_json diagram_to_json(const puml::Diagram& d) {
  ordered_json doc;
  doc["name"] = d.name;
  if (d.provenance) {
    doc["provenance"] = {{"model", d.provenance->model_name}, {"run", d.provenance->run_index}};
  } else {
    doc["provenance"] = nullptr;
  }
  doc["packages"] = ordered_json::array();
  for (const auto& p : d.packages) doc["packages"].push_back({{"name", p.name}, {"parent_path", p.parent_path}});
  doc["classes"] = ordered_json::array();
  for (const auto& c : d.classes) {
    ordered_json attrs = ordered_json::array();
    for (const auto& a : c.attributes) {
      attrs.push_back({{"visibility", visibility_json(a.visibility)},
                       {"name", a.name},
                       {"type", opt(a.type)},
                       {"modifiers", a.modifiers},
                       {"uc_ids", a.uc_ids},
                       {"action_text", opt(a.action_text)}});
    }
    ordered_json methods = ordered_json::array();
    for (const auto& m : c.methods) methods.push_back(method_json(m));
    doc["classes"].push_back({{"name", c.name},
                              {"kind", class_kind_name(c.kind)},
                              {"package_path", c.package_path},
                              {"stereotype", opt(c.stereotype)},
                              {"attributes", attrs},
                              {"methods", methods}});
  }
  doc["enums"] = ordered_json::array();
  for (const auto& e : d.enums) {
    doc["enums"].push_back({{"name", e.name}, {"package_path", e.package_path}, {"values", e.values}});
  }
  doc["relationships"] = ordered_json::array();
  for (const auto& r : d.relationships) {
    doc["relationships"].push_back({{"kind", std::string(puml::relation_kind_name(r.kind))},
                                    {"source", r.source},
                                    {"target", r.target},
                                    {"source_multiplicity", opt(r.source_multiplicity)},
                                    {"target_multiplicity", opt(r.target_multiplicity)},
                                    {"label", opt(r.label)},
                                    {"arrow", r.arrow}});
  }
  return doc;
}

puml::Diagram diagram_from_json(const ordered_json& doc) {
  try {
    puml::Diagram d;
    d.name = doc.value("name", "");
    if (doc.contains("provenance") && !doc["provenance"].is_null()) {
      d.provenance = puml::Provenance{doc["provenance"].at("model").get<std::string>(),
                                      doc["provenance"].at("run").get<int>()};
    }
    for (const auto& p : doc.value("packages", ordered_json::array())) {
      d.packages.push_back({p.at("name").get<std::string>(), p.value("parent_path", std::vector<std::string>{})});
    }
    for (const auto& c : doc.at("classes")) {
      puml::UmlClass cls;
      cls.name = c.at("name").get<std::string>();
      cls.kind = class_kind_from(c.value("kind", "class"));
      cls.package_path = c.value("package_path", std::vector<std::string>{});
      cls.stereotype = opt_from(c, "stereotype");
      for (const auto& a : c.value("attributes", ordered_json::array())) {
        cls.attributes.push_back({visibility_from_json(a.at("visibility").get<std::string>()),
                                  a.at("name").get<std::string>(), opt_from(a, "type"),
                                  a.value("modifiers", std::vector<std::string>{}),
                                  a.value("uc_ids", std::vector<std::string>{}), opt_from(a, "action_text")});
      }
      for (const auto& m : c.at("methods")) cls.methods.push_back(method_from(m, cls.name));
      d.classes.push_back(std::move(cls));
    }
    for (const auto& e : doc.value("enums", ordered_json::array())) {
      d.enums.push_back({e.at("name").get<std::string>(), e.value("package_path", std::vector<std::string>{}),
                         e.value("values", std::vector<std::string>{})});
    }
    for (const auto& r : doc.value("relationships", ordered_json::array())) {
      d.relationships.push_back({relation_kind_from(r.at("kind").get<std::string>()), r.at("source").get<std::string>(),
                                 r.at("target").get<std::string>(), opt_from(r, "source_multiplicity"),
                                 opt_from(r, "target_multiplicity"), opt_from(r, "label"),
                                 r.value("arrow", std::string{})});
    }
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed diagram JSON: ") + e.what());
  }
}

ordered_json export_parsed(const CorpusEntry& entry) {
  if (!entry.diagram) throw NoDiagram("entry has no parsed diagram: " + entry.source_path);
  return diagram_to_json(*entry.diagram);
}

void write_parsed(const CorpusIndex& index, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  ordered_json summary = ordered_json::array();
  auto write = [](const fs::path& p, const ordered_json& j) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError("cannot write " + p.string());
    out << j.dump(2) << '\n';
  };
  for (const auto& e : index.entries) {
    const std::string file = e.model_name + "_run" + std::to_string(e.run_index) + ".json";
    ordered_json issues = ordered_json::array();
    for (const auto& i : e.validation.issues) {
      issues.push_back({{"line", i.line},
                        {"column", i.column},
                        {"kind", std::string(puml::issue_kind_name(i.kind))},
                        {"severity", i.severity == puml::Severity::Error ? "error" : "warning"},
                        {"message", i.message}});
    }
    summary.push_back({{"model", e.model_name},
                       {"run", e.run_index},
                       {"source", e.source_path},
                       {"parsed", e.diagram.has_value()},
                       {"valid", e.validation.is_valid},
                       {"methods", e.diagram ? e.diagram->method_count() : 0},
                       {"json", e.diagram ? ordered_json(file) : ordered_json(nullptr)},
                       {"issues", issues}});
    if (e.diagram) write(out_dir / file, diagram_to_json(*e.diagram));
  }
  write(out_dir / "index.json", {{"baseline", diagram_to_json(index.baseline)}, {"entries", summary}, {"skipped", index.skipped}});
}

CorpusIndex read_parsed(const fs::path& out_dir) {
  const auto index_path = out_dir / "index.json";
  std::ifstream in(index_path, std::ios::binary);
  if (!in) throw IoError("cannot read " + index_path.string());
  ordered_json doc;
  try {
    doc = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed " + index_path.string() + ": " + e.what());
  }
  auto kind_from = [](const std::string& name) {
    for (int k = 0; k <= static_cast<int>(puml::IssueKind::ExternalValidator); ++k) {
      if (puml::issue_kind_name(static_cast<puml::IssueKind>(k)) == name) return static_cast<puml::IssueKind>(k);
    }
    throw ConfigError("unknown issue kind in index: " + name);
  };
  CorpusIndex index;
  try {
    index.baseline = diagram_from_json(doc.at("baseline"));
    index.skipped = doc.value("skipped", std::vector<std::string>{});
    for (const auto& e : doc.at("entries")) {
      CorpusEntry entry;
      entry.model_name = e.at("model").get<std::string>();
      entry.run_index = e.at("run").get<int>();
      entry.source_path = e.at("source").get<std::string>();
      entry.validation.is_valid = e.at("valid").get<bool>();
      for (const auto& i : e.value("issues", ordered_json::array())) {
        entry.validation.issues.push_back({i.at("line").get<int>(), i.value("column", 0),
                                           kind_from(i.at("kind").get<std::string>()),
                                           i.at("severity").get<std::string>() == "error" ? puml::Severity::Error
                                                                                          : puml::Severity::Warning,
                                           i.value("message", std::string{})});
      }
      if (e.at("parsed").get<bool>()) {
        const auto p = out_dir / e.at("json").get<std::string>();
        std::ifstream din(p, std::ios::binary);
        if (!din) throw IoError("cannot read " + p.string());
        entry.diagram = diagram_from_json(ordered_json::parse(din));
      }
      index.entries.push_back(std::move(entry));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed " + index_path.string() + ": " + e.what());
  }
  return index;
}

}  // namespace umlbench::corpus
