#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace umlbench::puml::detail {

std::string_view trim(std::string_view s);
bool is_ident_char(char c);
bool is_identifier(std::string_view s);
bool iequals_prefix(std::string_view s, std::string_view prefix);

/// Offset of the first `//` outside quotes and parentheses, or npos.
std::size_t find_comment_start(std::string_view line);

struct UcToken {
  std::size_t begin;
  std::size_t end;
  std::string id;
};

/// `//UCnn` tokens (and `, UCmm` continuations) in a comment tail.
std::vector<UcToken> scan_uc_tokens(std::string_view tail);

struct Annotations {
  std::vector<std::string> uc_ids;
  std::optional<std::string> action_text;
};

Annotations parse_annotations(std::string_view tail);

std::vector<std::string_view> split_top_level(std::string_view s, char sep);

struct ArrowShape {
  std::string left_head;   // "", "<|", "<", "*", "o", ...
  std::string right_head;  // "", "|>", ">", "*", "o", ...
  bool dotted = false;
};

ArrowShape analyze_arrow(std::string_view arrow);

}  // namespace umlbench::puml::detail
