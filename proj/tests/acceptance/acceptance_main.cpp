// Acceptance checks. Prints one line per criterion:
//   criterion <n>: PASS|FAIL|SKIPPED  <detail>
// and exits non-zero when any criterion fails. Criterion 3 needs the public
// experiment corpus and is SKIPPED unless UMLBENCH_CORPUS_DIR and
// UMLBENCH_BASELINE are set; UMLBENCH_VALIDATOR optionally names the
// external compiler command (`{file}` is replaced by the diagram path).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "support/oracles.hpp"
#include "support/pinned.hpp"
#include "support/puml_fuzz.hpp"
#include "support/synthetic_corpus.hpp"
#include "support/temp_dir.hpp"
#include "umlbench/consensus.hpp"
#include "umlbench/corpus.hpp"
#include "umlbench/metrics.hpp"
#include "umlbench/pipeline.hpp"
#include "umlbench/puml.hpp"
#include "umlbench/stats.hpp"

namespace fs = std::filesystem;
using namespace umlbench;
namespace oracle = umlbench::testing::oracle;

namespace {

enum class Status { Pass, Fail, Skipped };

struct Outcome {
  Status status = Status::Pass;
  std::vector<std::string> notes;
  std::vector<std::string> failures;
};

// Collects failed expectations; a criterion passes when none failed.
class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (!ok && failures_.size() < 8) failures_.push_back(what);
    if (!ok) ++failed_;
  }
  void near(double got, double want, double tol, const std::string& what) {
    std::ostringstream s;
    s.precision(6);
    s << what << " = " << got << " (want " << want << " +/- " << tol << ")";
    expect(std::isfinite(got) && std::fabs(got - want) <= tol, s.str());
  }
  void note(std::string n) { notes_.push_back(std::move(n)); }

  Outcome done() const {
    Outcome o;
    o.status = failed_ ? Status::Fail : Status::Pass;
    o.notes = notes_;
    o.notes.push_back(std::to_string(checks_ - failed_) + "/" + std::to_string(checks_) + " checks");
    o.failures = failures_;
    return o;
  }

 private:
  std::size_t checks_ = 0, failed_ = 0;
  std::vector<std::string> notes_, failures_;
};

std::string fmt(double v, int places = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", places, v);
  return buf;
}

// ---- 1: effect-size arithmetic --------------------------------------------

Outcome effect_sizes() {
  Checker c;
  c.near(stats::cramers_v(3001.07, 3373, 3, 5), 0.667, 0.001, "V(chi2=3001.07, N=3373, min dim 3)");
  c.near(stats::cramers_v(6.43, 90, 9, 2), 0.267, 0.001, "V(chi2=6.43, N=90, min dim 2)");
  c.near(std::sqrt(3001.07 / (3373.0 * 2)), stats::cramers_v(3001.07, 3373, 3, 5), 1e-15, "V by definition");
  return c.done();
}

// ---- 2: k ------------------------------------------------------------------

Outcome k_value() {
  Checker c;
  const auto k = consensus::compute_k(3373, 90);
  c.expect(k == 38, "compute_k(3373, 90) = " + std::to_string(k) + " (want 38)");
  c.note("k = " + std::to_string(k));
  return c.done();
}

// ---- 3: published corpus ---------------------------------------------------

struct Published {
  const char* key;
  std::size_t methods;
  std::size_t errors;
};

// Substrings of lowercased model names, tried in order. "4o" precedes "o3".
const std::vector<Published> kPublished = {
    {"claude", 734, 0}, {"gemini", 477, 2},   {"qwen", 373, 0},  {"deepseek", 316, 1}, {"grok", 294, 1},
    {"llama", 268, 1},  {"mistral", 204, 0}, {"mixtral", 204, 0}, {"4o", 275, 1},      {"o3", 432, 0},
};

const Published* published_for(const std::string& model) {
  std::string lower = model;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
  for (const auto& p : kPublished) {
    if (lower.find(p.key) != std::string::npos) return &p;
  }
  return nullptr;
}

const stats::StatResult* find_row(const report::Analysis& a, const std::string& family, const std::string& test) {
  for (const auto& r : a.stats) {
    if (r.family == family && r.result.test_name == test) return &r.result;
  }
  return nullptr;
}

Outcome published_corpus() {
  const char* dir = std::getenv("UMLBENCH_CORPUS_DIR");
  const char* base = std::getenv("UMLBENCH_BASELINE");
  if (!dir || !base || !*dir || !*base || !fs::is_directory(dir) || !fs::is_regular_file(base)) {
    Outcome o;
    o.status = Status::Skipped;
    o.notes.push_back("set UMLBENCH_CORPUS_DIR and UMLBENCH_BASELINE to the published diagrams");
    return o;
  }
  Checker c;
  testing::TempDir out("umlbench_accept_");
  pipeline::RunConfig cfg;
  cfg.corpus_dir = dir;
  cfg.baseline_path = base;
  cfg.output_dir = out.path;
  cfg.seeds = {42};
  cfg.top_k = 37;
  const char* validator = std::getenv("UMLBENCH_VALIDATOR");
  if (validator && *validator) cfg.external_validator = validator;

  const auto t0 = std::chrono::steady_clock::now();
  const auto a = pipeline::run_pipeline(cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.note("pipeline " + fmt(secs, 1) + " s");

  std::size_t total = 0, errors = 0;
  std::set<std::string> seen;
  for (const auto& m : a.models) {
    const auto* p = published_for(m.model);
    c.expect(p != nullptr, "unmapped model " + m.model);
    if (!p) continue;
    seen.insert(p->methods == 204 ? "mistral" : p->key);
    c.expect(m.mq_total == p->methods,
             m.model + " methods " + std::to_string(m.mq_total) + " (want " + std::to_string(p->methods) + ")");
    if (cfg.external_validator) {
      c.expect(m.sc_errored == p->errors,
               m.model + " errors " + std::to_string(m.sc_errored) + " (want " + std::to_string(p->errors) + ")");
    }
    total += m.mq_total;
    errors += m.sc_errored;
  }
  c.expect(seen.size() == 9, "expected 9 distinct models, found " + std::to_string(seen.size()));
  c.expect(total == 3373, "total methods " + std::to_string(total) + " (want 3373)");
  if (cfg.external_validator) {
    c.expect(errors == 6, "total errored diagrams " + std::to_string(errors) + " (want 6)");
  } else {
    c.note("error column not checked without UMLBENCH_VALIDATOR (internal count " + std::to_string(errors) + ")");
  }

  if (const auto* kw = find_row(a, "MQ", "kruskal_wallis")) {
    c.near(kw->statistic, 51.85, 0.5, "MQ H");
    c.expect(kw->df && *kw->df == 8, "MQ df");
  } else {
    c.expect(false, "MQ Kruskal-Wallis row missing");
  }
  if (const auto* ac = find_row(a, "AC", "chi2_independence")) {
    c.near(ac->statistic, 3001.07, 5, "AC chi2");
    c.expect(ac->df && *ac->df == 16, "AC df");
    c.near(ac->effect ? ac->effect->value : NAN, 0.667, 0.005, "AC V");
  } else {
    c.expect(false, "AC chi-squared row missing");
  }

  c.expect(a.consensus.k == 37, "k = " + std::to_string(a.consensus.k));
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& m : a.consensus.models) {
    lo = std::min(lo, m.tmc_mean);
    hi = std::max(hi, m.tmc_mean);
  }
  c.near(lo, 43.2, 1.0, "lowest TMC mean");
  c.near(hi, 86.5, 1.0, "highest TMC mean");

  c.near(a.consensus.spc_mean, 92.7, 0.5, "SPC mean");
  if (const auto* w = find_row(a, "SPC", "wilcoxon_signed_rank")) {
    c.expect(w->p_raw < 0.05, "SPC Wilcoxon p = " + fmt(w->p_raw, 5));
  } else {
    c.expect(false, "SPC Wilcoxon row missing");
  }

  auto spot = [&](const std::string& norm, std::size_t gen, std::size_t match, double pct) {
    for (const auto& p : a.consensus.placements) {
      if (p.method != norm) continue;
      c.expect(p.models_generating == gen && p.models_matching == match,
               norm + " " + std::to_string(p.models_generating) + "/" + std::to_string(p.models_matching));
      c.near(p.consistency_pct, pct, 0.05, norm + " consistency");
      return;
    }
    c.expect(false, norm + " not in the core set");
  };
  spot(consensus::normalize_name("updatePassword"), 9, 9, 100.0);
  spot(consensus::normalize_name("verifyEmail"), 9, 8, 88.9);
  return c.done();
}

// ---- 4: oracle equivalence -------------------------------------------------

Outcome oracles() {
  Checker c;
  std::mt19937_64 rng(4242);
  std::uniform_int_distribution<int> gsize(1, 8), ngroups(2, 4), small(0, 6), signed_val(-4, 4);
  std::uniform_int_distribution<int> slen(1, 6), ch(0, 3), nset(0, 6);
  auto word = [&] {
    std::string s;
    for (int i = slen(rng); i > 0; --i) s += static_cast<char>('a' + ch(rng));
    return s;
  };
  const double tol = 1e-12;
  int kw_cases = 0;
  for (int t = 0; t < 200; ++t) {
    // Kruskal-Wallis and Dunn. All-tied draws are redrawn so every instance counts.
    std::vector<std::vector<double>> groups;
    std::optional<double> ref;
    do {
      groups.assign(static_cast<std::size_t>(ngroups(rng)), {});
      for (auto& g : groups) {
        for (int i = gsize(rng); i > 0; --i) g.push_back(small(rng));
      }
      ref = oracle::kruskal_wallis_h(groups);
    } while (!ref);
    ++kw_cases;
    const auto kw = stats::kruskal_wallis(groups);
    c.expect(std::fabs(kw.statistic - *ref) <= tol * std::max(1.0, *ref), "KW H instance " + std::to_string(t));
    for (const auto& p : stats::dunn_posthoc(groups)) {
      const double z = oracle::dunn_z(groups, p.i, p.j);
      c.expect(std::fabs(p.result.statistic - z) <= tol * std::max(1.0, std::fabs(z)), "Dunn z instance " + std::to_string(t));
    }

    // Wilcoxon exact.
    std::vector<double> xs;
    do {
      xs.clear();
      for (int i = gsize(rng); i > 0; --i) xs.push_back(signed_val(rng));
    } while (std::all_of(xs.begin(), xs.end(), [](double x) { return x == 0; }));
    const auto wr = oracle::wilcoxon(xs, 0.0);
    const auto w = stats::wilcoxon_signed_rank(xs, 0.0);
    c.expect(w.w_plus == wr.w_plus && w.w_minus == wr.w_minus, "Wilcoxon W instance " + std::to_string(t));
    c.expect(std::fabs(w.p_raw - wr.p_two_sided) <= tol, "Wilcoxon p instance " + std::to_string(t));

    // Cliff's delta.
    std::vector<double> x, y;
    for (int i = gsize(rng); i > 0; --i) x.push_back(small(rng));
    for (int i = gsize(rng); i > 0; --i) y.push_back(small(rng));
    c.expect(std::fabs(stats::cliffs_delta(x, y).delta - oracle::cliffs_delta(x, y)) <= tol,
             "Cliff's delta instance " + std::to_string(t));

    // Edit-distance diversity over 2..8 distinct names.
    std::set<std::string> names;
    const auto want = static_cast<std::size_t>(std::uniform_int_distribution<int>(2, 8)(rng));
    while (names.size() < want) names.insert(word());
    const std::vector<std::string> v(names.begin(), names.end());
    c.expect(std::fabs(metrics::levenshtein_diversity(v) - oracle::edit_diversity(v)) <= tol,
             "diversity instance " + std::to_string(t));

    // Pairwise Jaccard.
    std::set<std::string> sa, sb;
    do {
      sa.clear();
      sb.clear();
      for (int i = nset(rng); i > 0; --i) sa.insert(word());
      for (int i = nset(rng); i > 0; --i) sb.insert(word());
    } while (sa.empty() && sb.empty());
    c.expect(std::fabs(consensus::pairwise_model_jaccard(sa, sb) - oracle::jaccard(sa, sb)) <= tol,
             "Jaccard instance " + std::to_string(t));
  }

  // Tails against extended-precision quadrature.
  double worst = 0;
  std::uniform_real_distribution<double> ux(0.01, 60), uz(-6, 8);
  std::uniform_int_distribution<int> udf(1, 30);
  for (int t = 0; t < 200; ++t) {
    const double xv = ux(rng);
    const int df = udf(rng);
    const double e = std::fabs(stats::chi2_survival(xv, df) - static_cast<double>(oracle::chi2_sf(xv, df)));
    worst = std::max(worst, e);
    c.expect(e <= 1e-10, "chi2 tail x=" + fmt(xv) + " df=" + std::to_string(df));
    const double z = uz(rng);
    const double ez = std::fabs(stats::normal_survival(z) - static_cast<double>(oracle::normal_sf(z)));
    worst = std::max(worst, ez);
    c.expect(ez <= 1e-10, "normal tail z=" + fmt(z));
  }
  c.note(std::to_string(kw_cases) + " instances");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1e", worst);
  c.note(std::string("worst tail error ") + buf);
  return c.done();
}

// ---- 5: parser properties --------------------------------------------------

Outcome parser_properties() {
  Checker c;
  testing::PumlFuzzer fuzz(20240517);
  for (int i = 0; i < 100; ++i) {
    const auto src = fuzz.next();
    const auto d = puml::parse_diagram(src.text);
    const auto tag = "fuzzed diagram " + std::to_string(i);
    c.expect(d.method_count() == src.methods, tag + ": method count");
    std::size_t ids = 0;
    for (const auto& cls : d.classes) {
      for (const auto& m : cls.methods) ids += m.uc_ids.size();
      for (const auto& a : cls.attributes) ids += a.uc_ids.size();
    }
    c.expect(ids == src.uc_tokens && puml::count_uc_tokens(src.text) == src.uc_tokens, tag + ": annotations");
    const auto again = puml::parse_diagram(puml::serialize(d));
    c.expect(again == d, tag + ": round trip");
    c.expect(puml::serialize(again) == puml::serialize(d), tag + ": serialization fixpoint");
    const auto ac = metrics::annotation_completeness(metrics::all_methods(d));
    c.expect(ac.total() == metrics::method_quantity(d), tag + ": AC partition");
  }

  // AC partition on every entry of a corpus: the published one when present.
  testing::TempDir tmp("umlbench_accept_");
  fs::path dir, base;
  const char* env_dir = std::getenv("UMLBENCH_CORPUS_DIR");
  const char* env_base = std::getenv("UMLBENCH_BASELINE");
  if (env_dir && env_base && fs::is_directory(env_dir) && fs::is_regular_file(env_base)) {
    dir = env_dir;
    base = env_base;
    c.note("AC partition on the published corpus");
  } else {
    testing::SyntheticCorpus(11).write(tmp.path, 10);
    dir = tmp.path;
    base = tmp.path / "baseline.puml";
    c.note("AC partition on the synthetic corpus");
  }
  const auto index = corpus::scan_corpus(dir, base);
  std::size_t entries = 0;
  for (const auto& e : index.entries) {
    if (!e.diagram) continue;
    ++entries;
    const auto ac = metrics::annotation_completeness(metrics::all_methods(*e.diagram));
    c.expect(ac.full + ac.uc_only + ac.action_only + ac.none == metrics::method_quantity(*e.diagram),
             e.model_name + " run " + std::to_string(e.run_index) + ": AC partition");
  }
  c.expect(entries > 0, "no parsed corpus entries");
  c.note(std::to_string(entries) + " corpus entries");
  return c.done();
}

// ---- 6: null calibration ---------------------------------------------------

// One-sample Kolmogorov-Smirnov distance to U(0, 1).
double ks_uniform(std::vector<double> p) {
  std::sort(p.begin(), p.end());
  const double n = static_cast<double>(p.size());
  double d = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    d = std::max({d, (static_cast<double>(i) + 1) / n - p[i], p[i] - static_cast<double>(i) / n});
  }
  return d;
}

Outcome null_calibration() {
  Checker c;
  testing::TempDir tmp("umlbench_accept_");
  testing::SyntheticCorpus(606).write(tmp.path / "corpus", 10, true);
  const auto index = corpus::scan_corpus(tmp.path / "corpus", tmp.path / "corpus" / "baseline.puml");
  const auto frame = metrics::compute_frame(index);

  // Per-diagram samples with their model labels.
  std::vector<std::string> labels;
  std::vector<double> mq, lexdiv;
  for (const auto& r : frame.rows) {
    if (!r.parsed) continue;
    labels.push_back(r.model);
    mq.push_back(static_cast<double>(r.mq));
    lexdiv.push_back(r.sr.lexdiv);
  }
  std::vector<std::string> models = labels;
  std::sort(models.begin(), models.end());
  models.erase(std::unique(models.begin(), models.end()), models.end());

  constexpr std::size_t kPermutations = 500;
  const double critical = 1.628 / std::sqrt(static_cast<double>(kPermutations));
  std::mt19937_64 rng(6060);
  for (const auto& [name, values] : {std::pair{"MQ", mq}, std::pair{"lexdiv", lexdiv}}) {
    std::vector<double> ps;
    std::vector<std::string> shuffled = labels;
    for (std::size_t b = 0; b < kPermutations; ++b) {
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      std::vector<std::vector<double>> groups(models.size());
      for (std::size_t i = 0; i < values.size(); ++i) {
        const auto g = std::lower_bound(models.begin(), models.end(), shuffled[i]) - models.begin();
        groups[static_cast<std::size_t>(g)].push_back(values[i]);
      }
      ps.push_back(stats::kruskal_wallis(groups).p_raw);
    }
    const double d = ks_uniform(ps);
    c.expect(d < critical, std::string(name) + " KS D = " + fmt(d) + " >= " + fmt(critical));
    c.note(std::string(name) + " D = " + fmt(d) + " (critical " + fmt(critical) + ")");
  }

  // Holm never lowers a p-value, on the pipeline battery and on random vectors.
  pipeline::RunConfig cfg;
  cfg.corpus_dir = tmp.path / "corpus";
  cfg.baseline_path = tmp.path / "corpus" / "baseline.puml";
  cfg.output_dir = tmp.path / "out";
  cfg.seeds = {42};
  for (bool homogeneous : {true, false}) {
    if (!homogeneous) {
      fs::remove_all(cfg.corpus_dir);
      testing::SyntheticCorpus(607).write(cfg.corpus_dir, 10);
    }
    const auto a = pipeline::run_pipeline(cfg);
    for (const auto& r : a.stats) {
      if (r.result.p_adjusted) {
        c.expect(*r.result.p_adjusted >= r.result.p_raw, r.family + " " + r.result.label + ": Holm below raw");
      }
    }
  }
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> p(static_cast<std::size_t>(1 + t % 15));
    for (auto& x : p) x = u(rng) * u(rng);
    const auto adj = stats::holm_adjust(p);
    for (std::size_t i = 0; i < p.size(); ++i) c.expect(adj[i] >= p[i], "Holm below raw on random vector");
  }
  return c.done();
}

// ---- 7: determinism --------------------------------------------------------

Outcome determinism() {
  Checker c;
  testing::TempDir tmp("umlbench_accept_");
  testing::SyntheticCorpus(7).write(tmp.path / "corpus", 10);
  auto run = [&](const std::string& out, unsigned workers) {
    pipeline::RunConfig cfg;
    cfg.corpus_dir = tmp.path / "corpus";
    cfg.baseline_path = tmp.path / "corpus" / "baseline.puml";
    cfg.output_dir = tmp.path / out;
    cfg.seeds = {42};
    cfg.workers = workers;
    pipeline::run_pipeline(cfg);
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(cfg.output_dir / "reports")) {
      if (e.is_regular_file()) files[fs::relative(e.path(), cfg.output_dir).string()] = testing::slurp(e.path());
    }
    return files;
  };
  const auto first = run("a", 1), second = run("b", 1), parallel = run("c", 4);
  c.expect(!first.empty(), "empty report tree");
  c.expect(first == second, "report trees differ between identical runs");
  c.expect(first == parallel, "report tree depends on worker count");
  c.note(std::to_string(first.size()) + " report files identical");

  const std::vector<double> ten = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const auto ci = stats::bootstrap_ci(ten, 42);
  c.expect(ci.low == kBootstrapTenSeed42Low && ci.high == kBootstrapTenSeed42High,
           "bootstrap interval (" + fmt(ci.low, 17) + ", " + fmt(ci.high, 17) + ") differs from the pinned value");
  const auto ci4 = stats::bootstrap_ci(ten, 42, 1000, 4);
  c.expect(ci4.low == ci.low && ci4.high == ci.high, "bootstrap interval depends on worker count");
  return c.done();
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, effect_sizes}, {2, k_value},          {3, published_corpus}, {4, oracles},
      {5, parser_properties}, {6, null_calibration}, {7, determinism},
  };
  int failed = 0;
  for (const auto& [n, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.status = Status::Fail;
      o.failures.push_back(std::string("exception: ") + e.what());
    }
    const char* tag = o.status == Status::Pass ? "PASS" : o.status == Status::Fail ? "FAIL" : "SKIPPED";
    std::string detail;
    for (const auto& s : o.notes) detail += (detail.empty() ? "" : "; ") + s;
    std::printf("criterion %d: %s  %s\n", n, tag, detail.c_str());
    for (const auto& f : o.failures) std::printf("    %s\n", f.c_str());
    if (o.status == Status::Fail) ++failed;
  }
  std::fflush(stdout);
  return failed ? 1 : 0;
}
