#include "umlbench/puml.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "puml_internal.hpp"

namespace umlbench::puml {

using detail::trim;

std::string_view visibility_marker(Visibility v) {
  switch (v) {
    case Visibility::Public: return "+";
    case Visibility::Private: return "-";
    case Visibility::Protected: return "#";
    case Visibility::Package: return "~";
    case Visibility::None: return "";
  }
  return "";
}

std::optional<Visibility> visibility_from_marker(std::string_view marker) {
  if (marker == "+") return Visibility::Public;
  if (marker == "-") return Visibility::Private;
  if (marker == "#") return Visibility::Protected;
  if (marker == "~") return Visibility::Package;
  if (marker.empty() || marker == "none") return Visibility::None;
  return std::nullopt;
}

std::string_view relation_kind_name(RelationKind k) {
  switch (k) {
    case RelationKind::Association: return "association";
    case RelationKind::Aggregation: return "aggregation";
    case RelationKind::Composition: return "composition";
    case RelationKind::Inheritance: return "inheritance";
    case RelationKind::Dependency: return "dependency";
    case RelationKind::Realization: return "realization";
  }
  return "association";
}

std::string_view issue_kind_name(IssueKind k) {
  switch (k) {
    case IssueKind::MissingStart: return "MissingStart";
    case IssueKind::UnbalancedBlock: return "UnbalancedBlock";
    case IssueKind::MalformedMember: return "MalformedMember";
    case IssueKind::UnknownEndpoint: return "UnknownEndpoint";
    case IssueKind::UnknownStatement: return "UnknownStatement";
    case IssueKind::DuplicateDeclaration: return "DuplicateDeclaration";
    case IssueKind::ImplicitDeclaration: return "ImplicitDeclaration";
    case IssueKind::ExternalValidator: return "ExternalValidator";
  }
  return "Unknown";
}

ParseError::ParseError(IssueKind kind, int line, int column, std::string message, std::string expected)
    : Error(std::string(issue_kind_name(kind)) + " at " + std::to_string(line) + ":" + std::to_string(column) + ": " +
            message + (expected.empty() ? "" : " (expected " + expected + ")")),
      kind_(kind),
      line_(line),
      column_(column),
      expected_(std::move(expected)) {}

const UmlClass* Diagram::find_class(std::string_view class_name) const {
  for (const auto& c : classes) {
    if (c.name == class_name) return &c;
  }
  return nullptr;
}

std::size_t Diagram::method_count() const {
  std::size_t n = 0;
  for (const auto& c : classes) n += c.methods.size();
  return n;
}

bool Diagram::resolves(std::string_view endpoint) const {
  auto matches = [&](std::string_view name) {
    if (name == endpoint) return true;
    const auto dot = endpoint.rfind('.');
    return dot != std::string_view::npos && endpoint.substr(dot + 1) == name;
  };
  for (const auto& c : classes) {
    if (matches(c.name)) return true;
  }
  for (const auto& e : enums) {
    if (matches(e.name)) return true;
  }
  for (const auto& p : packages) {
    if (matches(p.name)) return true;
  }
  return false;
}

namespace detail {

ArrowShape analyze_arrow(std::string_view arrow) {
  ArrowShape shape;
  std::string_view a = arrow;
  if (a.size() >= 2 && a.substr(0, 2) == "<|") {
    shape.left_head = "<|";
    a.remove_prefix(2);
  } else if (!a.empty() && std::string_view("<*o#x+}^").find(a.front()) != std::string_view::npos) {
    shape.left_head = std::string(1, a.front());
    a.remove_prefix(1);
  }
  if (a.size() >= 2 && a.substr(a.size() - 2) == "|>") {
    shape.right_head = "|>";
    a.remove_suffix(2);
  } else if (!a.empty() && std::string_view(">*o#x+{^").find(a.back()) != std::string_view::npos) {
    shape.right_head = std::string(1, a.back());
    a.remove_suffix(1);
  }
  // Style brackets may contain dots (e.g. colors); ignore them.
  bool in_bracket = false;
  for (const char c : a) {
    if (c == '[') in_bracket = true;
    if (c == ']') in_bracket = false;
    if (!in_bracket && c == '.') shape.dotted = true;
  }
  return shape;
}

}  // namespace detail

namespace {

bool is_triangle(std::string_view h) { return h == "<|" || h == "|>" || h == "^"; }

RelationKind classify(const detail::ArrowShape& s) {
  if (is_triangle(s.left_head) || is_triangle(s.right_head)) {
    return s.dotted ? RelationKind::Realization : RelationKind::Inheritance;
  }
  if (s.left_head == "*" || s.right_head == "*") return RelationKind::Composition;
  if (s.left_head == "o" || s.right_head == "o") return RelationKind::Aggregation;
  return s.dotted ? RelationKind::Dependency : RelationKind::Association;
}

}  // namespace

RelationEnds semantic_ends(const Relationship& r) {
  const auto s = detail::analyze_arrow(r.arrow);
  auto forward = RelationEnds{r.source, r.target, true};
  auto backward = RelationEnds{r.target, r.source, true};
  switch (r.kind) {
    case RelationKind::Inheritance:
    case RelationKind::Realization:
      return is_triangle(s.left_head) ? backward : forward;
    case RelationKind::Composition:
    case RelationKind::Aggregation:
      return (s.left_head == "*" || s.left_head == "o") ? forward : backward;
    case RelationKind::Association:
    case RelationKind::Dependency: {
      const bool left = s.left_head == "<";
      const bool right = s.right_head == ">";
      if (left == right) return {r.source, r.target, false};
      return right ? forward : backward;
    }
  }
  return forward;
}

namespace {

struct Line {
  int number;
  std::string_view text;
};

std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t start = 0;
  int number = 1;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back({number++, line});
    if (end == text.size()) break;
    start = end + 1;
  }
  return lines;
}

bool starts_with_word(std::string_view s, std::string_view word) {
  if (!detail::iequals_prefix(s, word)) return false;
  return s.size() == word.size() || !detail::is_ident_char(s[word.size()]);
}

std::string unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

// Cursor over one statement for hand-written sub-grammars.
struct Cursor {
  std::string_view s;
  std::size_t i = 0;

  void skip_ws() {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  }
  bool done() const { return i >= s.size(); }
  char peek() const { return done() ? '\0' : s[i]; }
  std::string_view rest() const { return s.substr(std::min(i, s.size())); }
  bool consume(std::string_view token) {
    if (s.substr(i).substr(0, token.size()) == token) {
      i += token.size();
      return true;
    }
    return false;
  }
  // Quoted string or identifier-like run (letters, digits, _ . $ :).
  std::optional<std::string> name() {
    if (peek() == '"') {
      const auto close = s.find('"', i + 1);
      if (close == std::string_view::npos) return std::nullopt;
      std::string out(s.substr(i + 1, close - i - 1));
      i = close + 1;
      return out;
    }
    const std::size_t b = i;
    while (i < s.size() && (detail::is_ident_char(s[i]) || s[i] == '.' || s[i] == ':')) {
      if (s[i] == ':' && !(i + 1 < s.size() && s[i + 1] == ':')) break;
      if (s[i] == '.' && !(i + 1 < s.size() && detail::is_ident_char(s[i + 1]))) break;
      i += s[i] == ':' ? 2 : 1;
    }
    if (i == b) return std::nullopt;
    return std::string(s.substr(b, i - b));
  }
  std::optional<std::string> quoted() {
    if (peek() != '"') return std::nullopt;
    const auto close = s.find('"', i + 1);
    if (close == std::string_view::npos) return std::nullopt;
    std::string out(s.substr(i + 1, close - i - 1));
    i = close + 1;
    return out;
  }
};

std::optional<std::string> scan_arrow(Cursor& c) {
  const std::size_t b = c.i;
  const auto& s = c.s;
  std::size_t i = c.i;
  auto is_line = [&](std::size_t k) { return k < s.size() && (s[k] == '-' || s[k] == '.' || s[k] == '='); };
  if (s.substr(i, 2) == "<|") {
    i += 2;
  } else if (i < s.size() && std::string_view("<*#+}^").find(s[i]) != std::string_view::npos) {
    ++i;
  } else if (i < s.size() && (s[i] == 'o' || s[i] == 'x') && is_line(i + 1)) {
    ++i;
  }
  if (!is_line(i)) return std::nullopt;
  while (is_line(i)) ++i;
  if (i < s.size() && s[i] == '[') {
    const auto close = s.find(']', i);
    if (close == std::string_view::npos) return std::nullopt;
    i = close + 1;
  } else {
    std::size_t j = i;
    while (j < s.size() && std::isalpha(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i && is_line(j)) {
      const auto word = s.substr(i, j - i);
      static const std::set<std::string_view> directions = {"up", "down", "left", "right", "u", "d", "l",
                                                            "r",  "le",   "ri",   "do",    "dow", "lef", "rig"};
      if (directions.count(word)) i = j;
    }
  }
  while (is_line(i)) ++i;
  if (s.substr(i, 2) == "|>") {
    i += 2;
  } else if (i < s.size() && std::string_view(">*#+{^").find(s[i]) != std::string_view::npos) {
    ++i;
  } else if (i < s.size() && (s[i] == 'o' || s[i] == 'x') &&
             (i + 1 >= s.size() || !detail::is_ident_char(s[i + 1]))) {
    ++i;
  }
  c.i = i;
  return std::string(s.substr(b, i - b));
}

std::optional<Relationship> parse_relationship(std::string_view stmt) {
  Cursor c{stmt};
  Relationship r;
  auto lhs = c.name();
  if (!lhs) return std::nullopt;
  r.source = *lhs;
  c.skip_ws();
  r.source_multiplicity = c.quoted();
  c.skip_ws();
  auto arrow = scan_arrow(c);
  if (!arrow) return std::nullopt;
  r.arrow = *arrow;
  c.skip_ws();
  r.target_multiplicity = c.quoted();
  c.skip_ws();
  auto rhs = c.name();
  if (!rhs) return std::nullopt;
  r.target = *rhs;
  c.skip_ws();
  if (!c.done()) {
    if (c.peek() != ':') return std::nullopt;
    ++c.i;
    auto label = trim(c.rest());
    if (!label.empty()) r.label = std::string(label);
  }
  r.kind = classify(detail::analyze_arrow(r.arrow));
  return r;
}

enum class HeaderKind { Class, AbstractClass, Interface, Enum };

struct ElementHeader {
  HeaderKind kind;
  std::string name;
  std::optional<std::string> stereotype;
  std::vector<std::string> extends;
  std::vector<std::string> implements;
  bool opens_body = false;
  std::string inline_body;  // text between `{` and `}` on the same line
  bool closes_body = false;
};

std::optional<ElementHeader> parse_element_header(std::string_view stmt, std::string& error) {
  struct Keyword {
    std::string_view word;
    HeaderKind kind;
  };
  static const Keyword keywords[] = {
      {"abstract class", HeaderKind::AbstractClass}, {"abstract", HeaderKind::AbstractClass},
      {"class", HeaderKind::Class},                  {"interface", HeaderKind::Interface},
      {"enum", HeaderKind::Enum},                    {"entity", HeaderKind::Class},
      {"struct", HeaderKind::Class},                 {"annotation", HeaderKind::Class},
      {"exception", HeaderKind::Class},              {"metaclass", HeaderKind::Class},
      {"protocol", HeaderKind::Class},
  };
  ElementHeader h{};
  Cursor c{stmt};
  bool matched = false;
  for (const auto& k : keywords) {
    if (starts_with_word(stmt, k.word)) {
      h.kind = k.kind;
      c.i = k.word.size();
      matched = true;
      break;
    }
  }
  if (!matched) return std::nullopt;
  c.skip_ws();
  auto name = c.name();
  if (!name) {
    error = "missing element name";
    return h;
  }
  h.name = *name;
  auto read_list = [&](std::vector<std::string>& out) {
    for (;;) {
      c.skip_ws();
      auto n = c.name();
      if (!n) return false;
      // generic arguments on a supertype
      if (c.peek() == '<' && !c.consume("<<")) {
        const auto close = c.s.find('>', c.i);
        if (close == std::string_view::npos) return false;
        c.i = close + 1;
      }
      out.push_back(*n);
      c.skip_ws();
      if (!c.consume(",")) return true;
    }
  };
  for (;;) {
    c.skip_ws();
    if (c.done()) break;
    if (c.consume("<<")) {
      const auto close = c.s.find(">>", c.i);
      if (close == std::string_view::npos) {
        error = "unterminated stereotype";
        return h;
      }
      if (!h.stereotype) h.stereotype = std::string(trim(c.s.substr(c.i, close - c.i)));
      c.i = close + 2;
    } else if (c.peek() == '<') {
      int depth = 0;
      while (!c.done()) {
        if (c.peek() == '<') ++depth;
        if (c.peek() == '>' && --depth == 0) {
          ++c.i;
          break;
        }
        ++c.i;
      }
      if (depth != 0) {
        error = "unterminated generic parameter list";
        return h;
      }
    } else if (c.peek() == '#') {
      while (!c.done() && c.peek() != ' ' && c.peek() != '\t' && c.peek() != '{') ++c.i;
    } else if (starts_with_word(c.rest(), "as")) {
      c.i += 2;
      c.skip_ws();
      auto alias = c.name();
      if (!alias) {
        error = "missing alias after 'as'";
        return h;
      }
      // `class "Long name" as L` names the element L; `class L as "Long name"`
      // keeps L.
      if (c.s[c.i - 1] != '"') h.name = *alias;
    } else if (starts_with_word(c.rest(), "extends")) {
      c.i += 7;
      if (!read_list(h.extends)) {
        error = "bad 'extends' list";
        return h;
      }
    } else if (starts_with_word(c.rest(), "implements")) {
      c.i += 10;
      if (!read_list(h.implements)) {
        error = "bad 'implements' list";
        return h;
      }
    } else if (c.peek() == '{') {
      h.opens_body = true;
      auto rest = c.rest().substr(1);
      const auto close = rest.rfind('}');
      if (close != std::string_view::npos) {
        h.closes_body = true;
        h.inline_body = std::string(trim(rest.substr(0, close)));
        if (!trim(rest.substr(close + 1)).empty()) {
          error = "unexpected text after '}'";
          return h;
        }
      } else if (!trim(rest).empty()) {
        h.inline_body = std::string(trim(rest));
      }
      break;
    } else if (c.consume("//") || c.peek() == '\'') {
      break;
    } else {
      error = "unexpected text '" + std::string(c.rest()) + "' in declaration";
      return h;
    }
  }
  return h;
}

enum class FrameKind { Package, Class, Enum, Block, Note };

struct Frame {
  FrameKind kind;
  int line;
  std::size_t index = 0;     // class/enum index
  std::string name;          // package name
  std::string terminator;    // for Note-like frames
};

const std::vector<std::string_view>& ignored_directives() {
  static const std::vector<std::string_view> words = {
      "skinparam", "hide",        "show",    "left to right direction", "top to bottom direction",
      "scale",     "caption",     "newpage", "set",                     "allowmixing",
      "allow_mixing", "remove",   "restore", "mainframe",               "center",
      "footer",    "header",      "title",   "legend",                  "page",
      "autonumber", "sprite",
  };
  return words;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : lines_(split_lines(text)) {}

  ParseOutcome run() {
    std::size_t i = 0;
    strip_block_comments();
    for (; i < lines_.size(); ++i) {
      const auto t = trim(lines_[i].text);
      if (detail::iequals_prefix(t, "@startuml")) {
        diagram_.name = unquote(t.substr(9));
        break;
      }
    }
    if (i == lines_.size()) {
      error(1, 1, IssueKind::MissingStart, "no @startuml line found");
      return finish();
    }
    for (++i; i < lines_.size(); ++i) {
      const auto& ln = lines_[i];
      const auto t = trim(ln.text);
      if (detail::iequals_prefix(t, "@enduml")) {
        ended_ = true;
        if (!frames_.empty()) {
          error(ln.number, 1, IssueKind::UnbalancedBlock,
                "block opened at line " + std::to_string(frames_.back().line) + " is not closed", "'}'");
        }
        break;
      }
      statement(ln.number, t);
    }
    if (!ended_) {
      const int last = lines_.empty() ? 1 : lines_.back().number;
      std::string msg = "reached end of input without @enduml";
      if (!frames_.empty()) msg += "; block opened at line " + std::to_string(frames_.back().line) + " is not closed";
      error(last, static_cast<int>(lines_.back().text.size()) + 1, IssueKind::UnbalancedBlock, msg,
            frames_.empty() ? "@enduml" : "'}'");
    }
    resolve_endpoints();
    return finish();
  }

 private:
  void strip_block_comments() {
    bool in_comment = false;
    for (auto& ln : lines_) {
      std::string_view t = ln.text;
      if (in_comment) {
        const auto end = t.find("'/");
        if (end == std::string_view::npos) {
          ln.text = {};
          continue;
        }
        in_comment = false;
        ln.text = t.substr(end + 2);
        continue;
      }
      const auto tt = trim(t);
      if (tt.substr(0, 2) == "/'") {
        const auto end = tt.find("'/", 2);
        if (end == std::string_view::npos) {
          in_comment = true;
          ln.text = {};
        } else {
          ln.text = tt.substr(end + 2);
        }
      }
    }
  }

  void error(int line, int col, IssueKind kind, std::string msg, std::string expected = {}) {
    if (!expected.empty()) msg += " (expected " + expected + ")";
    issues_.push_back({line, col, kind, Severity::Error, std::move(msg)});
  }
  void warn(int line, IssueKind kind, std::string msg) {
    issues_.push_back({line, 1, kind, Severity::Warning, std::move(msg)});
  }

  ParseOutcome finish() {
    ParseOutcome out;
    const bool failed = std::any_of(issues_.begin(), issues_.end(),
                                    [](const Issue& is) { return is.severity == Severity::Error; });
    if (!failed) out.diagram = std::move(diagram_);
    out.issues = std::move(issues_);
    return out;
  }

  std::vector<std::string> package_path() const {
    std::vector<std::string> path;
    for (const auto& f : frames_) {
      if (f.kind == FrameKind::Package) path.push_back(f.name);
    }
    return path;
  }

  void statement(int line, std::string_view t) {
    if (t.empty() || t.front() == '\'') return;
    if (!frames_.empty()) {
      auto& top = frames_.back();
      switch (top.kind) {
        case FrameKind::Class: return class_body_line(line, t, top.index);
        case FrameKind::Enum: return enum_body_line(line, t, top.index);
        case FrameKind::Note:
          if (detail::iequals_prefix(t, top.terminator)) frames_.pop_back();
          return;
        case FrameKind::Package:
        case FrameKind::Block: break;
      }
    }
    top_level(line, t);
  }

  void close_brace(int line, std::string_view t) {
    if (frames_.empty()) {
      error(line, 1, IssueKind::UnbalancedBlock, "unexpected '}'", "a statement");
      return;
    }
    frames_.pop_back();
    const auto rest = trim(t.substr(1));
    if (!rest.empty() && rest != ";") statement(line, rest);
  }

  void class_body_line(int line, std::string_view t, std::size_t idx) {
    if (t.front() == '}') return close_brace(line, t);
    if (t.substr(0, 2) == "--" || t.substr(0, 2) == ".." || t.substr(0, 2) == "==" || t.substr(0, 2) == "__") return;
    if (t.substr(0, 2) == "//") return;
    add_member(line, t, idx);
  }

  void add_member(int line, std::string_view t, std::size_t idx) {
    try {
      auto member = parse_member_line(t);
      auto& cls = diagram_.classes[idx];
      if (auto* m = std::get_if<MethodRecord>(&member)) {
        m->owning_class = cls.name;
        cls.methods.push_back(std::move(*m));
      } else {
        auto& a = std::get<AttributeDecl>(member);
        const bool dup = std::any_of(cls.attributes.begin(), cls.attributes.end(),
                                     [&](const AttributeDecl& x) { return x.name == a.name; });
        if (dup) {
          warn(line, IssueKind::DuplicateDeclaration, "attribute '" + a.name + "' repeated in " + cls.name);
          return;
        }
        cls.attributes.push_back(std::move(a));
      }
    } catch (const ParseError& e) {
      std::string msg = e.what();
      const auto colon = msg.find(": ");
      error(line, 1, IssueKind::MalformedMember, colon == std::string::npos ? msg : msg.substr(colon + 2));
    }
  }

  void enum_body_line(int line, std::string_view t, std::size_t idx) {
    if (t.front() == '}') return close_brace(line, t);
    if (t.substr(0, 2) == "--" || t.substr(0, 2) == ".." || t.substr(0, 2) == "==" || t.substr(0, 2) == "__") return;
    if (const auto c = detail::find_comment_start(t); c != std::string_view::npos) t = trim(t.substr(0, c));
    bool closes = false;
    if (!t.empty() && t.back() == '}') {
      closes = true;
      t = trim(t.substr(0, t.size() - 1));
    }
    auto& e = diagram_.enums[idx];
    for (auto part : detail::split_top_level(t, ',')) {
      part = trim(part);
      while (!part.empty() && part.back() == ';') part = trim(part.substr(0, part.size() - 1));
      if (part.empty()) continue;
      std::size_t n = 0;
      while (n < part.size() && detail::is_ident_char(part[n])) ++n;
      const auto value = part.substr(0, n);
      if (!detail::is_identifier(value)) {
        error(line, 1, IssueKind::MalformedMember, "bad enum value '" + std::string(part) + "'", "identifier");
        continue;
      }
      if (std::find(e.values.begin(), e.values.end(), value) != e.values.end()) {
        warn(line, IssueKind::DuplicateDeclaration, "enum value '" + std::string(value) + "' repeated in " + e.name);
        continue;
      }
      e.values.emplace_back(value);
    }
    if (closes) frames_.pop_back();
  }

  void declare_package(int line, std::string name, bool opens) {
    auto parent = package_path();
    const PackageDecl decl{name, parent};
    if (std::find(diagram_.packages.begin(), diagram_.packages.end(), decl) == diagram_.packages.end()) {
      diagram_.packages.push_back(decl);
    }
    if (opens) frames_.push_back({FrameKind::Package, line, 0, std::move(name), {}});
  }

  bool package_statement(int line, std::string_view t) {
    static const std::string_view words[] = {"package", "namespace", "folder", "frame",
                                             "rectangle", "node", "cloud", "database"};
    for (const auto w : words) {
      if (!starts_with_word(t, w)) continue;
      Cursor c{t, w.size()};
      c.skip_ws();
      std::string name;
      if (c.peek() == '{') {
        name = "";
      } else {
        auto n = c.name();
        if (!n) {
          error(line, static_cast<int>(c.i) + 1, IssueKind::UnknownStatement, "missing package name");
          return true;
        }
        name = *n;
      }
      c.skip_ws();
      if (starts_with_word(c.rest(), "as")) {
        c.i += 2;
        c.skip_ws();
        if (auto alias = c.name()) name = *alias;
      }
      const auto rest = c.rest();
      const bool opens = rest.find('{') != std::string_view::npos;
      const bool closes = opens && rest.find('}', rest.find('{')) != std::string_view::npos;
      declare_package(line, name, opens && !closes);
      return true;
    }
    return false;
  }

  std::size_t ensure_class(const std::string& name, ClassKind kind, int line, bool implicit) {
    for (std::size_t i = 0; i < diagram_.classes.size(); ++i) {
      if (diagram_.classes[i].name == name) {
        if (!implicit) warn(line, IssueKind::DuplicateDeclaration, "class '" + name + "' declared again; merged");
        return i;
      }
    }
    if (implicit) warn(line, IssueKind::ImplicitDeclaration, "class '" + name + "' used before declaration");
    UmlClass cls;
    cls.name = name;
    cls.kind = kind;
    cls.package_path = package_path();
    diagram_.classes.push_back(std::move(cls));
    return diagram_.classes.size() - 1;
  }

  bool element_statement(int line, std::string_view t) {
    std::string err;
    auto header = parse_element_header(t, err);
    if (!header) return false;
    if (!err.empty()) {
      error(line, 1, IssueKind::UnknownStatement, err);
      return true;
    }
    if (header->kind == HeaderKind::Enum) {
      std::size_t idx = diagram_.enums.size();
      for (std::size_t i = 0; i < diagram_.enums.size(); ++i) {
        if (diagram_.enums[i].name == header->name) idx = i;
      }
      if (idx == diagram_.enums.size()) {
        diagram_.enums.push_back({header->name, package_path(), {}});
      } else {
        warn(line, IssueKind::DuplicateDeclaration, "enum '" + header->name + "' declared again; merged");
      }
      if (header->opens_body) {
        frames_.push_back({FrameKind::Enum, line, idx, {}, {}});
        if (!header->inline_body.empty()) {
          enum_body_line(line, header->inline_body, idx);
        }
        if (header->closes_body) frames_.pop_back();
      }
      return true;
    }
    const ClassKind kind = header->kind == HeaderKind::Interface       ? ClassKind::Interface
                           : header->kind == HeaderKind::AbstractClass ? ClassKind::AbstractClass
                                                                       : ClassKind::Class;
    const auto idx = ensure_class(header->name, kind, line, false);
    if (header->stereotype && !diagram_.classes[idx].stereotype) diagram_.classes[idx].stereotype = header->stereotype;
    for (const auto& parent : header->extends) {
      Relationship r;
      r.kind = RelationKind::Inheritance;
      r.source = parent;
      r.target = header->name;
      r.arrow = "<|--";
      add_relationship(line, std::move(r));
    }
    for (const auto& iface : header->implements) {
      Relationship r;
      r.kind = RelationKind::Realization;
      r.source = iface;
      r.target = header->name;
      r.arrow = "<|..";
      add_relationship(line, std::move(r));
    }
    if (header->opens_body) {
      if (!header->inline_body.empty()) {
        for (auto part : detail::split_top_level(header->inline_body, ';')) {
          part = trim(part);
          if (!part.empty()) add_member(line, part, idx);
        }
      }
      if (!header->closes_body) frames_.push_back({FrameKind::Class, line, idx, {}, {}});
    }
    return true;
  }

  void add_relationship(int line, Relationship r) {
    if (notes_.count(r.source) || notes_.count(r.target)) return;
    relationship_lines_.push_back(line);
    diagram_.relationships.push_back(std::move(r));
  }

  bool note_statement(int line, std::string_view t) {
    if (!starts_with_word(t, "note") && !starts_with_word(t, "rnote") && !starts_with_word(t, "hnote")) return false;
    const auto as = t.find(" as ");
    if (as != std::string_view::npos) {
      Cursor c{t, as + 4};
      c.skip_ws();
      if (auto alias = c.name()) notes_.insert(*alias);
    }
    // Single-line forms: `note left of A : text` and `note "text" as N`.
    const bool single = t.find(':') != std::string_view::npos || t.find('"') != std::string_view::npos;
    if (!single) frames_.push_back({FrameKind::Note, line, 0, {}, "end note"});
    return true;
  }

  bool directive_statement(int line, std::string_view t) {
    if (t.front() == '!' || t.front() == '@') return true;
    for (const auto w : ignored_directives()) {
      if (!starts_with_word(t, w)) continue;
      const auto rest = trim(t.substr(w.size()));
      if (w == "legend" && (rest.empty() || starts_with_word(rest, "left") || starts_with_word(rest, "right") ||
                            starts_with_word(rest, "top") || starts_with_word(rest, "bottom") ||
                            starts_with_word(rest, "center"))) {
        frames_.push_back({FrameKind::Note, line, 0, {}, "end"});
      } else if ((w == "title" || w == "header" || w == "footer") && rest.empty()) {
        frames_.push_back({FrameKind::Note, line, 0, {}, "end"});
      } else if (!rest.empty() && rest.back() == '{') {
        frames_.push_back({FrameKind::Note, line, 0, {}, "}"});
      }
      return true;
    }
    if (starts_with_word(t, "together") && t.find('{') != std::string_view::npos) {
      frames_.push_back({FrameKind::Block, line, 0, {}, {}});
      return true;
    }
    return false;
  }

  void top_level(int line, std::string_view t) {
    if (t.front() == '}') return close_brace(line, t);
    if (t.substr(0, 2) == "//") return;
    if (auto rel = parse_relationship(t)) {
      add_relationship(line, std::move(*rel));
      return;
    }
    if (note_statement(line, t)) return;
    if (package_statement(line, t)) return;
    if (element_statement(line, t)) return;
    if (inline_member(line, t, true)) return;
    if (directive_statement(line, t)) return;
    if (inline_member(line, t, false)) return;
    error(line, 1, IssueKind::UnknownStatement, "unrecognized statement '" + std::string(t) + "'");
  }

  // `ClassName : member`
  bool inline_member(int line, std::string_view t, bool declared_only) {
    Cursor c{t};
    auto name = c.name();
    if (!name) return false;
    c.skip_ws();
    if (c.peek() != ':' || c.rest().substr(0, 2) == "::") return false;
    const bool known = diagram_.find_class(*name) != nullptr;
    if (declared_only && !known) return false;
    const auto member = trim(c.rest().substr(1));
    const auto idx = ensure_class(*name, ClassKind::Class, line, !known);
    if (!member.empty()) add_member(line, member, idx);
    return true;
  }

  void resolve_endpoints() {
    for (std::size_t i = 0; i < diagram_.relationships.size(); ++i) {
      const auto& r = diagram_.relationships[i];
      for (const auto* end : {&r.source, &r.target}) {
        if (!diagram_.resolves(*end)) {
          issues_.push_back({relationship_lines_[i], 1, IssueKind::UnknownEndpoint, Severity::Warning,
                             "relationship endpoint '" + *end + "' is not declared"});
        }
      }
    }
  }

  std::vector<Line> lines_;
  Diagram diagram_;
  std::vector<Issue> issues_;
  std::vector<Frame> frames_;
  std::vector<int> relationship_lines_;
  std::set<std::string> notes_;
  bool ended_ = false;
};

}  // namespace

ParseOutcome parse_with_issues(std::string_view text) { return Parser(text).run(); }

Diagram parse_diagram(std::string_view text) {
  auto outcome = parse_with_issues(text);
  for (const auto& is : outcome.issues) {
    if (is.severity != Severity::Error) continue;
    std::string expected;
    std::string message = is.message;
    if (const auto p = message.rfind(" (expected "); p != std::string::npos && message.back() == ')') {
      expected = message.substr(p + 11, message.size() - p - 12);
      message.resize(p);
    }
    throw ParseError(is.kind, is.line, is.column, message, expected);
  }
  return std::move(*outcome.diagram);
}

ValidationReport validate(std::string_view text) {
  auto outcome = parse_with_issues(text);
  ValidationReport report;
  for (auto& is : outcome.issues) {
    if (is.kind == IssueKind::UnknownEndpoint) is.severity = Severity::Error;
    if (is.severity == Severity::Error) report.is_valid = false;
  }
  report.issues = std::move(outcome.issues);
  return report;
}

namespace {

std::string quote_if_needed(const std::string& name) {
  const bool plain = !name.empty() && std::all_of(name.begin(), name.end(), [](char c) {
    return detail::is_ident_char(c) || c == '.' || c == ':';
  });
  return plain ? name : "\"" + name + "\"";
}

void append_annotations(std::string& out, const std::vector<std::string>& uc_ids,
                        const std::optional<std::string>& action) {
  for (const auto& id : uc_ids) out += " //" + id;
  if (action) {
    out += " //action:";
    if (!action->empty()) out += " " + *action;
  }
}

void append_modifiers(std::string& out, const std::vector<std::string>& mods) {
  for (const auto& m : mods) out += "{" + m + "} ";
}

void append_visibility(std::string& out, Visibility v) {
  if (v != Visibility::None) {
    out += visibility_marker(v);
    out += ' ';
  }
}

std::string member_text(const MethodRecord& m) {
  std::string out;
  append_modifiers(out, m.modifiers);
  append_visibility(out, m.visibility);
  out += m.name + "(";
  for (std::size_t i = 0; i < m.parameters.size(); ++i) {
    if (i) out += ", ";
    out += m.parameters[i].name;
    if (m.parameters[i].type) out += " : " + *m.parameters[i].type;
  }
  out += ")";
  if (m.return_type) out += " : " + *m.return_type;
  append_annotations(out, m.uc_ids, m.action_text);
  return out;
}

std::string member_text(const AttributeDecl& a) {
  std::string out;
  append_modifiers(out, a.modifiers);
  append_visibility(out, a.visibility);
  out += a.name;
  if (a.type) out += " : " + *a.type;
  append_annotations(out, a.uc_ids, a.action_text);
  return out;
}

class Writer {
 public:
  void line(const std::string& s) { out_ += s + "\n"; }

  // Opens/closes package blocks so that the current nesting equals path.
  void enter(const std::vector<std::string>& path) {
    std::size_t common = 0;
    while (common < open_.size() && common < path.size() && open_[common] == path[common]) ++common;
    while (open_.size() > common) {
      line("}");
      open_.pop_back();
    }
    for (std::size_t i = common; i < path.size(); ++i) {
      line("package \"" + path[i] + "\" {");
      open_.push_back(path[i]);
    }
  }

  std::string take() { return std::move(out_); }

 private:
  std::string out_;
  std::vector<std::string> open_;
};

}  // namespace

std::string serialize(const Diagram& d) {
  Writer w;
  w.line(d.name.empty() ? "@startuml" : "@startuml " + d.name);
  for (const auto& p : d.packages) {
    auto path = p.parent_path;
    path.push_back(p.name);
    w.enter(path);
  }
  for (const auto& c : d.classes) {
    w.enter(c.package_path);
    std::string head = c.kind == ClassKind::Interface       ? "interface "
                       : c.kind == ClassKind::AbstractClass ? "abstract class "
                                                            : "class ";
    head += quote_if_needed(c.name);
    if (c.stereotype) head += " <<" + *c.stereotype + ">>";
    w.line(head + " {");
    for (const auto& a : c.attributes) w.line("  " + member_text(a));
    for (const auto& m : c.methods) w.line("  " + member_text(m));
    w.line("}");
  }
  for (const auto& e : d.enums) {
    w.enter(e.package_path);
    w.line("enum " + quote_if_needed(e.name) + " {");
    for (const auto& v : e.values) w.line("  " + v);
    w.line("}");
  }
  w.enter({});
  for (const auto& r : d.relationships) {
    std::string s = quote_if_needed(r.source);
    if (r.source_multiplicity) s += " \"" + *r.source_multiplicity + "\"";
    s += " " + r.arrow;
    if (r.target_multiplicity) s += " \"" + *r.target_multiplicity + "\"";
    s += " " + quote_if_needed(r.target);
    if (r.label) s += " : " + *r.label;
    w.line(s);
  }
  auto out = w.take();
  return out + "@enduml";
}

}  // namespace umlbench::puml
