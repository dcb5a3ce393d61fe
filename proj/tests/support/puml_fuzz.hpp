#pragma once

// Grammar fuzzer for the PlantUML subset. Emits source text using the many
// surface spellings the parser accepts (prefix and suffix return types,
// Java-style parameters, CRLF, packages, enums, assorted arrows) so that
// round-trip and annotation-conservation properties are exercised on
// non-canonical input.

#include <random>
#include <string>
#include <vector>

namespace umlbench::testing {

struct FuzzedSource {
  std::string text;
  std::size_t methods = 0;
  std::size_t uc_tokens = 0;
};

class PumlFuzzer {
 public:
  explicit PumlFuzzer(std::uint64_t seed) : rng_(seed) {}

  FuzzedSource next() {
    FuzzedSource out;
    const bool crlf = coin(0.2);
    const std::string nl = crlf ? "\r\n" : "\n";
    std::string& s = out.text;
    s += "@startuml" + std::string(coin(0.3) ? " Fuzz" : "") + nl;
    if (coin(0.3)) s += "skinparam classAttributeIconSize 0" + nl;
    if (coin(0.3)) s += "' a comment line" + nl;

    std::vector<std::string> names;
    const int n_classes = pick(1, 6);
    for (int i = 0; i < n_classes; ++i) names.push_back("C" + std::to_string(i) + word());
    std::vector<std::string> enums;
    const int n_enums = pick(0, 2);
    for (int i = 0; i < n_enums; ++i) enums.push_back("E" + std::to_string(i) + "Kind");

    const bool use_package = coin(0.5);
    int split = use_package ? pick(0, n_classes) : 0;
    if (use_package) s += "package \"Pkg" + word() + "\" {" + nl;
    for (int i = 0; i < n_classes; ++i) {
      if (use_package && i == split) s += "}" + nl;
      emit_class(out, names[i], nl);
    }
    if (use_package && split == n_classes) s += "}" + nl;
    for (const auto& e : enums) {
      s += "enum " + e + " {" + nl;
      const int nv = pick(1, 4);
      for (int v = 0; v < nv; ++v) s += "  V" + std::to_string(v) + (coin(0.2) ? "," : "") + nl;
      s += "}" + nl;
    }
    static const char* arrows[] = {"-->", "--", "..>", "<|--", "*--", "o--", "<|..", "--|>", "--*", "<--", "..", "-up->"};
    std::vector<std::string> all = names;
    all.insert(all.end(), enums.begin(), enums.end());
    const int n_rel = pick(0, 5);
    for (int r = 0; r < n_rel; ++r) {
      const auto& a = all[pick(0, static_cast<int>(all.size()) - 1)];
      const auto& b = all[pick(0, static_cast<int>(all.size()) - 1)];
      std::string line = a;
      if (coin(0.3)) line += " \"1\"";
      line += std::string(" ") + arrows[pick(0, 11)];
      if (coin(0.3)) line += " \"0..*\"";
      line += " " + b;
      if (coin(0.3)) line += " : " + word();
      s += line + nl;
    }
    s += "@enduml" + nl;
    return out;
  }

 private:
  void emit_class(FuzzedSource& out, const std::string& name, const std::string& nl) {
    std::string& s = out.text;
    const int style = pick(0, 2);
    s += (style == 0 ? "class " : style == 1 ? "abstract class " : "interface ") + name;
    if (coin(0.2)) s += " <<Entity>>";
    s += " {" + nl;
    const int n_attr = pick(0, 3);
    for (int i = 0; i < n_attr; ++i) {
      std::string line = "  " + vis();
      line += coin(0.5) ? "attr" + std::to_string(i) + " : String" : "int attr" + std::to_string(i);
      s += line + nl;
    }
    if (coin(0.2)) s += "  --" + nl;
    const int n_methods = pick(0, 5);
    for (int i = 0; i < n_methods; ++i) {
      std::string line = "  " + vis();
      const bool prefix_return = coin(0.25);
      if (prefix_return) line += "Boolean ";
      line += verb() + "Thing" + std::to_string(i) + "(";
      const int n_params = pick(0, 3);
      for (int p = 0; p < n_params; ++p) {
        if (p) line += coin(0.5) ? ", " : ",";
        const int ps = pick(0, 2);
        line += ps == 0 ? "p" + std::to_string(p) + ": String"
                : ps == 1 ? "Integer p" + std::to_string(p)
                          : "p" + std::to_string(p);
      }
      line += ")";
      if (!prefix_return && coin(0.5)) line += coin(0.5) ? " : void" : ": Boolean";
      const int n_uc = pick(0, 2);
      for (int u = 0; u < n_uc; ++u) {
        line += coin(0.5) ? " //UC" : "//UC";
        line += (pick(0, 1) ? "0" : "1") + std::to_string(pick(1, 9));
        ++out.uc_tokens;
      }
      if (coin(0.6)) line += std::string(coin(0.5) ? " " : "") + "//action: " + verb() + " the " + word();
      s += line + nl;
      ++out.methods;
    }
    s += "}" + nl;
  }

  std::string vis() {
    static const char* marks[] = {"+ ", "-", "# ", "~", ""};
    return marks[pick(0, 4)];
  }
  std::string word() {
    static const char* words[] = {"Account", "Order", "Waste", "Route", "Profile", "Request"};
    return words[pick(0, 5)];
  }
  std::string verb() {
    static const char* verbs[] = {"create", "update", "cancel", "verify", "assign", "schedule"};
    return verbs[pick(0, 5)];
  }
  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin(double p) { return std::bernoulli_distribution(p)(rng_); }

  std::mt19937_64 rng_;
};

}  // namespace umlbench::testing
