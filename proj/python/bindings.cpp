// Python bindings over the C++ core. Structured results cross the boundary as
// plain dicts and lists built from the same JSON the CLI writes.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>

#include "umlbench/consensus.hpp"
#include "umlbench/corpus.hpp"
#include "umlbench/metrics.hpp"
#include "umlbench/pipeline.hpp"
#include "umlbench/puml.hpp"
#include "umlbench/stats.hpp"

namespace py = pybind11;
using namespace umlbench;
using nlohmann::ordered_json;

namespace {

py::object to_py(const ordered_json& j) {
  switch (j.type()) {
    case ordered_json::value_t::null: return py::none();
    case ordered_json::value_t::boolean: return py::bool_(j.get<bool>());
    case ordered_json::value_t::number_integer: return py::int_(j.get<std::int64_t>());
    case ordered_json::value_t::number_unsigned: return py::int_(j.get<std::uint64_t>());
    case ordered_json::value_t::number_float: return py::float_(j.get<double>());
    case ordered_json::value_t::string: return py::str(j.get<std::string>());
    case ordered_json::value_t::array: {
      py::list out;
      for (const auto& v : j) out.append(to_py(v));
      return std::move(out);
    }
    case ordered_json::value_t::object: {
      py::dict out;
      for (const auto& [k, v] : j.items()) out[py::str(k)] = to_py(v);
      return std::move(out);
    }
    default: return py::none();
  }
}

py::object maybe(std::optional<double> v) { return v ? py::object(py::float_(*v)) : py::object(py::none()); }

py::dict result_dict(const stats::StatResult& r) {
  py::dict d;
  d["test"] = r.test_name;
  d["statistic"] = r.statistic;
  d["df"] = maybe(r.df);
  d["p_raw"] = r.p_raw;
  d["p_adjusted"] = maybe(r.p_adjusted);
  if (r.effect) {
    d["effect_name"] = r.effect->name;
    d["effect_value"] = r.effect->value;
    d["magnitude"] = r.effect->magnitude ? py::object(py::str(std::string(stats::magnitude_name(*r.effect->magnitude))))
                                         : py::object(py::none());
  }
  return d;
}

py::list issue_list(const std::vector<puml::Issue>& issues) {
  py::list out;
  for (const auto& i : issues) {
    py::dict d;
    d["line"] = i.line;
    d["column"] = i.column;
    d["kind"] = std::string(puml::issue_kind_name(i.kind));
    d["severity"] = i.severity == puml::Severity::Error ? "error" : "warning";
    d["message"] = i.message;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "UML method-generation benchmark core";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<EmptyInputError>(m, "EmptyInputError", base.ptr());
  py::register_exception<puml::ParseError>(m, "ParseError", base.ptr());
  py::register_exception<stats::DegenerateInput>(m, "DegenerateInput", base.ptr());
  py::register_exception<stats::DegenerateMargins>(m, "DegenerateMargins", base.ptr());

  m.def("parse", [](const std::string& text) { return to_py(corpus::diagram_to_json(puml::parse_diagram(text))); },
        py::arg("text"), "Parse PlantUML source into a dict; raises ParseError.");
  m.def(
      "parse_with_issues",
      [](const std::string& text) {
        const auto o = puml::parse_with_issues(text);
        py::dict d;
        d["diagram"] = o.diagram ? to_py(corpus::diagram_to_json(*o.diagram)) : py::object(py::none());
        d["issues"] = issue_list(o.issues);
        return d;
      },
      py::arg("text"));
  m.def(
      "validate",
      [](const std::string& text) {
        const auto r = puml::validate(text);
        py::dict d;
        d["is_valid"] = r.is_valid;
        d["issues"] = issue_list(r.issues);
        return d;
      },
      py::arg("text"));
  m.def("canonicalize", [](const std::string& text) { return puml::serialize(puml::parse_diagram(text)); },
        py::arg("text"), "Parse and re-serialize in canonical form.");
  m.def("method_quantity", [](const std::string& text) { return metrics::method_quantity(puml::parse_diagram(text)); },
        py::arg("text"));

  m.def("levenshtein", [](const std::string& a, const std::string& b) { return metrics::levenshtein(a, b); });
  m.def("levenshtein_diversity", &metrics::levenshtein_diversity, py::arg("names"));
  m.def("normalize_name", [](const std::string& s) { return consensus::normalize_name(s); });
  m.def("compute_k", &consensus::compute_k, py::arg("total_methods"), py::arg("total_diagrams"));

  m.def("kruskal_wallis", [](const std::vector<std::vector<double>>& g) { return result_dict(stats::kruskal_wallis(g)); },
        py::arg("groups"));
  m.def(
      "dunn_posthoc",
      [](const std::vector<std::vector<double>>& g) {
        py::list out;
        for (const auto& p : stats::dunn_posthoc(g)) {
          auto d = result_dict(p.result);
          d["i"] = p.i;
          d["j"] = p.j;
          out.append(d);
        }
        return out;
      },
      py::arg("groups"));
  m.def("chi2_independence", [](const stats::CountTable& t) { return result_dict(stats::chi2_independence(t)); },
        py::arg("table"));
  m.def("cramers_v", &stats::cramers_v, py::arg("chi2"), py::arg("n"), py::arg("rows"), py::arg("cols"));
  m.def("holm_adjust", [](const std::vector<double>& p) { return stats::holm_adjust(p); }, py::arg("p_values"));
  m.def(
      "wilcoxon_signed_rank",
      [](const std::vector<double>& v, double mu0) {
        const auto r = stats::wilcoxon_signed_rank(v, mu0);
        auto d = result_dict(r);
        d["w_plus"] = r.w_plus;
        d["w_minus"] = r.w_minus;
        d["n_used"] = r.n_used;
        d["exact"] = r.exact;
        return d;
      },
      py::arg("values"), py::arg("mu0"));
  m.def("cliffs_delta", [](const std::vector<double>& x, const std::vector<double>& y) {
    return stats::cliffs_delta(x, y).delta;
  });
  m.def(
      "bootstrap_ci",
      [](const std::vector<double>& v, std::uint64_t seed, std::size_t n_resamples) {
        const auto ci = stats::bootstrap_ci(v, seed, n_resamples);
        return py::make_tuple(ci.low, ci.high);
      },
      py::arg("values"), py::arg("seed"), py::arg("n_resamples") = 1000);
  m.def("chi2_survival", &stats::chi2_survival, py::arg("x"), py::arg("df"));

  m.def(
      "run_pipeline",
      [](const std::string& corpus_dir, const std::string& baseline, const std::string& out,
         std::optional<std::size_t> top_k, std::vector<std::uint64_t> seeds, unsigned workers,
         std::optional<std::vector<std::string>> tables, bool charts, const std::string& format) {
        pipeline::RunConfig c;
        c.corpus_dir = corpus_dir;
        c.baseline_path = baseline;
        c.output_dir = out;
        c.top_k = top_k;
        c.seeds = std::move(seeds);
        c.workers = workers;
        c.report.charts = charts;
        if (format == "json") c.report.format = report::Format::Json;
        else if (format != "csv") throw ConfigError("format must be csv or json");
        if (tables) {
          c.report.tables.clear();
          for (const auto& t : *tables) c.report.tables.push_back(report::table_from_name(t));
        }
        report::Analysis a;
        {
          py::gil_scoped_release release;
          a = pipeline::run_pipeline(c);
        }
        py::dict d;
        py::list models;
        for (const auto& s : a.models) models.append(s.model);
        d["models"] = models;
        d["k"] = a.consensus.k;
        d["spc_mean"] = a.consensus.spc_mean;
        d["stats"] = to_py(pipeline::stats_json(a));
        return d;
      },
      py::arg("corpus_dir"), py::arg("baseline"), py::arg("out"), py::arg("top_k") = py::none(),
      py::arg("seeds") = std::vector<std::uint64_t>{17, 42, 123}, py::arg("workers") = 1u,
      py::arg("tables") = py::none(), py::arg("charts") = true, py::arg("format") = "csv");
}
