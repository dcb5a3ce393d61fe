// Member-line grammar: visibility, method/attribute signatures and the
// trailing `//UCnn` / `//action:` traceability comments.

#include <algorithm>
#include <cctype>

#include "puml_internal.hpp"
#include "umlbench/puml.hpp"

namespace umlbench::puml {
namespace detail {

std::string_view trim(std::string_view s) {
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool is_ident_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) || c == '_' || c == '$' || u >= 0x80;
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  const auto first = static_cast<unsigned char>(s.front());
  if (!(std::isalpha(first) || s.front() == '_' || s.front() == '$' || first >= 0x80)) return false;
  return std::all_of(s.begin(), s.end(), is_ident_char);
}

bool iequals_prefix(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) != std::tolower(static_cast<unsigned char>(prefix[i]))) {
      return false;
    }
  }
  return true;
}

std::size_t find_comment_start(std::string_view line) {
  int depth = 0;
  bool quoted = false;
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    const char c = line[i];
    if (c == '"') quoted = !quoted;
    if (quoted) continue;
    if (c == '(') ++depth;
    if (c == ')' && depth > 0) --depth;
    if (depth == 0 && c == '/' && line[i + 1] == '/') return i;
  }
  return std::string_view::npos;
}

namespace {

std::size_t skip_spaces(std::string_view s, std::size_t i) {
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  return i;
}

// Matches `UC`, an optional `_`/`-`, then digits starting at i. Returns the end
// position and writes the normalized id, or npos.
std::size_t match_uc_id(std::string_view s, std::size_t i, std::string& id) {
  if (i + 2 > s.size() || !iequals_prefix(s.substr(i), "uc")) return std::string_view::npos;
  std::size_t j = i + 2;
  if (j < s.size() && (s[j] == '_' || s[j] == '-')) ++j;
  const std::size_t digits = j;
  while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
  if (j == digits) return std::string_view::npos;
  if (j < s.size() && is_ident_char(s[j])) return std::string_view::npos;
  id = "UC" + std::string(s.substr(digits, j - digits));
  return j;
}

}  // namespace

std::vector<UcToken> scan_uc_tokens(std::string_view tail) {
  std::vector<UcToken> out;
  std::size_t i = 0;
  while (i + 1 < tail.size()) {
    if (tail[i] != '/' || tail[i + 1] != '/') {
      ++i;
      continue;
    }
    std::string id;
    std::size_t end = match_uc_id(tail, skip_spaces(tail, i + 2), id);
    if (end == std::string_view::npos) {
      i += 2;
      continue;
    }
    out.push_back({i, end, id});
    // `//UC01, UC02` and `//UC01/UC02` lists.
    for (;;) {
      std::size_t j = skip_spaces(tail, end);
      if (j >= tail.size() || (tail[j] != ',' && tail[j] != '/' && tail[j] != '&' && tail[j] != ';')) break;
      if (tail[j] == '/' && j + 1 < tail.size() && tail[j + 1] == '/') break;
      j = skip_spaces(tail, j + 1);
      std::string next;
      const std::size_t next_end = match_uc_id(tail, j, next);
      if (next_end == std::string_view::npos) break;
      out.push_back({end, next_end, next});
      end = next_end;
    }
    i = end;
  }
  return out;
}

Annotations parse_annotations(std::string_view tail) {
  Annotations ann;
  // Locate the first `//action:` (case-insensitive, blanks allowed).
  std::size_t action_at = std::string_view::npos;
  std::size_t action_body = std::string_view::npos;
  for (std::size_t i = 0; i + 1 < tail.size(); ++i) {
    if (tail[i] != '/' || tail[i + 1] != '/') continue;
    std::size_t j = skip_spaces(tail, i + 2);
    if (!iequals_prefix(tail.substr(j), "action")) continue;
    j = skip_spaces(tail, j + 6);
    if (j < tail.size() && tail[j] == ':') {
      action_at = i;
      action_body = j + 1;
      break;
    }
  }
  const auto tokens = scan_uc_tokens(tail);
  for (const auto& t : tokens) ann.uc_ids.push_back(t.id);
  if (action_at != std::string_view::npos) {
    std::string text;
    std::size_t pos = action_body;
    for (const auto& t : tokens) {
      if (t.end <= action_body) continue;
      const std::size_t b = std::max(t.begin, action_body);
      text.append(tail.substr(pos, b - pos));
      pos = t.end;
    }
    text.append(tail.substr(pos));
    ann.action_text = std::string(trim(text));
  }
  return ann;
}

std::vector<std::string_view> split_top_level(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '(' || c == '<' || c == '[' || c == '{') ++depth;
    if ((c == ')' || c == '>' || c == ']' || c == '}') && depth > 0) --depth;
    if (c == sep && depth == 0) {
      parts.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  parts.push_back(s.substr(start));
  return parts;
}

namespace {

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t b = i;
    int depth = 0;
    while (i < s.size() && (depth > 0 || (s[i] != ' ' && s[i] != '\t'))) {
      if (s[i] == '<' || s[i] == '(' || s[i] == '[') ++depth;
      if ((s[i] == '>' || s[i] == ')' || s[i] == ']') && depth > 0) --depth;
      ++i;
    }
    if (i > b) out.push_back(s.substr(b, i - b));
  }
  return out;
}

std::string join(const std::vector<std::string_view>& parts, std::size_t count) {
  std::string out;
  for (std::size_t i = 0; i < count; ++i) {
    if (i) out += ' ';
    out.append(parts[i]);
  }
  return out;
}

std::size_t find_top_level(std::string_view s, char target) {
  int depth = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '(' || c == '<' || c == '[') ++depth;
    if ((c == ')' || c == '>' || c == ']') && depth > 0) --depth;
    if (c == target && depth == 0) {
      // `::` is a scope operator, not a type separator.
      if (target == ':' && i + 1 < s.size() && s[i + 1] == ':') {
        ++i;
        continue;
      }
      return i;
    }
  }
  return std::string_view::npos;
}

[[noreturn]] void malformed(std::string_view line, std::string msg, std::string expected = {}) {
  throw ParseError(IssueKind::MalformedMember, 0, 1, std::move(msg) + ": '" + std::string(line) + "'",
                   std::move(expected));
}

const std::vector<std::string_view>& known_modifiers() {
  static const std::vector<std::string_view> mods = {"static", "abstract", "classifier", "field", "method"};
  return mods;
}

// Strips `{static}`-style modifiers from the front of s.
std::string_view take_modifiers(std::string_view s, std::vector<std::string>& mods) {
  for (;;) {
    s = trim(s);
    if (s.empty() || s.front() != '{') return s;
    const auto close = s.find('}');
    if (close == std::string_view::npos) return s;
    const auto word = trim(s.substr(1, close - 1));
    const auto& known = known_modifiers();
    if (std::find(known.begin(), known.end(), word) == known.end()) return s;
    mods.emplace_back(word);
    s.remove_prefix(close + 1);
  }
}

Parameter parse_parameter(std::string_view text, std::string_view line) {
  const auto t = trim(text);
  if (t.empty()) malformed(line, "empty parameter", "parameter name");
  const auto colon = find_top_level(t, ':');
  if (colon != std::string_view::npos) {
    const auto name = trim(t.substr(0, colon));
    const auto type = trim(t.substr(colon + 1));
    if (name.empty() || split_ws(name).size() != 1) malformed(line, "bad parameter name", "identifier");
    if (type.empty()) malformed(line, "missing parameter type", "type after ':'");
    return {std::string(name), std::string(type)};
  }
  const auto tokens = split_ws(t);
  if (tokens.size() == 1) return {std::string(tokens[0]), std::nullopt};
  return {std::string(tokens.back()), join(tokens, tokens.size() - 1)};
}

}  // namespace
}  // namespace detail

Member parse_member_line(std::string_view raw_line) {
  using namespace detail;
  const auto line = trim(raw_line);
  std::string_view body = line;
  Annotations ann;
  if (const auto c = find_comment_start(line); c != std::string_view::npos) {
    body = trim(line.substr(0, c));
    ann = parse_annotations(line.substr(c));
  }

  std::vector<std::string> mods;
  body = take_modifiers(body, mods);
  Visibility vis = Visibility::None;
  if (!body.empty()) {
    if (auto v = visibility_from_marker(body.substr(0, 1)); v && *v != Visibility::None) {
      vis = *v;
      body.remove_prefix(1);
    }
  }
  body = take_modifiers(body, mods);
  if (body.empty()) malformed(line, "empty member", "member name");

  const auto lp = body.find('(');
  if (lp != std::string_view::npos) {
    int depth = 0;
    std::size_t rp = std::string_view::npos;
    for (std::size_t i = lp; i < body.size(); ++i) {
      if (body[i] == '(') ++depth;
      if (body[i] == ')' && --depth == 0) {
        rp = i;
        break;
      }
    }
    if (rp == std::string_view::npos) malformed(line, "unbalanced parentheses", "')'");
    const auto head = split_ws(trim(body.substr(0, lp)));
    if (head.empty() || !is_identifier(head.back())) malformed(line, "bad method name", "identifier before '('");

    MethodRecord m;
    m.visibility = vis;
    m.name = std::string(head.back());
    m.modifiers = std::move(mods);
    if (head.size() > 1) m.return_type = join(head, head.size() - 1);

    const auto params = trim(body.substr(lp + 1, rp - lp - 1));
    if (!params.empty()) {
      for (const auto p : split_top_level(params, ',')) m.parameters.push_back(parse_parameter(p, line));
    }
    const auto rest = trim(body.substr(rp + 1));
    if (!rest.empty()) {
      if (rest.front() != ':') malformed(line, "unexpected text after parameter list", "':' return type");
      const auto ret = trim(rest.substr(1));
      if (ret.empty()) malformed(line, "missing return type", "type after ':'");
      if (m.return_type) malformed(line, "return type given twice");
      m.return_type = std::string(ret);
    }
    m.uc_ids = std::move(ann.uc_ids);
    m.action_text = std::move(ann.action_text);
    return m;
  }

  AttributeDecl a;
  a.visibility = vis;
  a.modifiers = std::move(mods);
  const auto colon = find_top_level(body, ':');
  if (colon != std::string_view::npos) {
    const auto name = trim(body.substr(0, colon));
    const auto type = trim(body.substr(colon + 1));
    if (!is_identifier(name)) malformed(line, "bad attribute name", "identifier");
    if (type.empty()) malformed(line, "missing attribute type", "type after ':'");
    a.name = std::string(name);
    a.type = std::string(type);
  } else {
    const auto tokens = split_ws(body);
    if (tokens.empty() || !is_identifier(tokens.back())) malformed(line, "bad attribute name", "identifier");
    a.name = std::string(tokens.back());
    if (tokens.size() > 1) a.type = join(tokens, tokens.size() - 1);
  }
  a.uc_ids = std::move(ann.uc_ids);
  a.action_text = std::move(ann.action_text);
  return a;
}

std::size_t count_uc_tokens(std::string_view text) {
  std::size_t count = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(start, end - start);
    if (const auto c = detail::find_comment_start(line); c != std::string_view::npos) {
      count += detail::scan_uc_tokens(line.substr(c)).size();
    }
    start = end + 1;
  }
  return count;
}

}  // namespace umlbench::puml
