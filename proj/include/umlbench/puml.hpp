#pragma once

// PlantUML class-diagram subset: data model, parser, validator and
// canonical serializer.
//
// Supported constructs: `class`, `abstract class`, `interface`, `enum`,
// `package`/`namespace` blocks, member lines with optional visibility marker,
// relationship arrows (association, aggregation, composition, inheritance,
// dependency, realization) with optional quoted multiplicities and labels, and
// the inline traceability comments `//UCnn` and `//action: text` on members.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "umlbench/error.hpp"

namespace umlbench::puml {

enum class Visibility : std::uint8_t { Public, Private, Protected, Package, None };

/// The PlantUML marker for a visibility ("+", "-", "#", "~"); empty for None.
std::string_view visibility_marker(Visibility v);
/// Inverse of visibility_marker; "" and "none" map to None.
std::optional<Visibility> visibility_from_marker(std::string_view marker);

struct Parameter {
  std::string name;
  std::optional<std::string> type;

  bool operator==(const Parameter&) const = default;
};

struct MethodRecord {
  Visibility visibility = Visibility::None;
  std::string name;
  std::vector<Parameter> parameters;
  /// Absent means untyped. A literal "void" is stored verbatim.
  std::optional<std::string> return_type;
  /// Use-case identifiers, normalized to "UC" followed by the digits as written.
  std::vector<std::string> uc_ids;
  std::optional<std::string> action_text;
  std::string owning_class;
  /// `{static}` / `{abstract}` style modifiers, without braces.
  std::vector<std::string> modifiers;

  bool operator==(const MethodRecord&) const = default;
};

struct AttributeDecl {
  Visibility visibility = Visibility::None;
  std::string name;
  std::optional<std::string> type;
  std::vector<std::string> modifiers;
  // Annotations are legal on any member line; generated methods carry them,
  // attributes normally do not.
  std::vector<std::string> uc_ids;
  std::optional<std::string> action_text;

  bool operator==(const AttributeDecl&) const = default;
};

enum class ClassKind : std::uint8_t { Class, AbstractClass, Interface };

struct UmlClass {
  std::string name;
  ClassKind kind = ClassKind::Class;
  std::vector<std::string> package_path;
  std::vector<AttributeDecl> attributes;
  std::vector<MethodRecord> methods;
  std::optional<std::string> stereotype;

  bool operator==(const UmlClass&) const = default;
};

struct EnumDecl {
  std::string name;
  std::vector<std::string> package_path;
  std::vector<std::string> values;

  bool operator==(const EnumDecl&) const = default;
};

struct PackageDecl {
  std::string name;
  /// Enclosing packages, outermost first.
  std::vector<std::string> parent_path;

  bool operator==(const PackageDecl&) const = default;
};

enum class RelationKind : std::uint8_t {
  Association,
  Aggregation,
  Composition,
  Inheritance,
  Dependency,
  Realization,
};

std::string_view relation_kind_name(RelationKind k);

struct Relationship {
  RelationKind kind = RelationKind::Association;
  /// Left-hand endpoint as written.
  std::string source;
  /// Right-hand endpoint as written.
  std::string target;
  std::optional<std::string> source_multiplicity;
  std::optional<std::string> target_multiplicity;
  std::optional<std::string> label;
  /// Arrow token as written, e.g. "<|--", "-->", "*--".
  std::string arrow;

  bool operator==(const Relationship&) const = default;
};

/// Semantic orientation of a relationship, independent of how it was written.
/// For inheritance/realization `from` is the child; for composition and
/// aggregation `from` is the whole; for directed links it is the tail.
struct RelationEnds {
  std::string from;
  std::string to;
  bool directed = true;
};

RelationEnds semantic_ends(const Relationship& r);

struct Provenance {
  std::string model_name;
  int run_index = 0;

  bool operator==(const Provenance&) const = default;
};

struct Diagram {
  std::string name;
  std::vector<PackageDecl> packages;
  std::vector<UmlClass> classes;
  std::vector<EnumDecl> enums;
  std::vector<Relationship> relationships;
  std::optional<Provenance> provenance;

  bool operator==(const Diagram&) const = default;

  const UmlClass* find_class(std::string_view class_name) const;
  std::size_t method_count() const;
  /// True when `endpoint` names a declared class, enum or package (directly or
  /// by its last dotted segment).
  bool resolves(std::string_view endpoint) const;
};

enum class IssueKind : std::uint8_t {
  MissingStart,
  UnbalancedBlock,
  MalformedMember,
  UnknownEndpoint,
  UnknownStatement,
  DuplicateDeclaration,
  ImplicitDeclaration,
  ExternalValidator,
};

enum class Severity : std::uint8_t { Warning, Error };

std::string_view issue_kind_name(IssueKind k);

struct Issue {
  int line = 0;
  int column = 0;
  IssueKind kind = IssueKind::MalformedMember;
  Severity severity = Severity::Error;
  std::string message;
};

/// Fatal parse failure. Carries the 1-based line/column and a hint of what the
/// parser expected there.
class ParseError : public Error {
 public:
  ParseError(IssueKind kind, int line, int column, std::string message, std::string expected = {});

  IssueKind kind() const { return kind_; }
  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& expected() const { return expected_; }

 private:
  IssueKind kind_;
  int line_;
  int column_;
  std::string expected_;
};

struct ParseOutcome {
  /// Present iff no error-severity issue was found.
  std::optional<Diagram> diagram;
  std::vector<Issue> issues;
};

/// Parses and reports every issue found; never throws for malformed input.
ParseOutcome parse_with_issues(std::string_view text);

/// Parses a full `@startuml ... @enduml` source. Throws ParseError on the first
/// fatal issue; unknown relationship endpoints are tolerated.
Diagram parse_diagram(std::string_view text);

/// A single member line from a class body.
using Member = std::variant<MethodRecord, AttributeDecl>;

/// Parses one member line. Throws ParseError(MalformedMember) when neither the
/// method nor the attribute grammar matches.
Member parse_member_line(std::string_view line);

struct ValidationReport {
  bool is_valid = true;
  std::vector<Issue> issues;
};

/// Internal syntax check standing in for the PlantUML compiler. Unlike
/// parse_diagram, unresolved relationship endpoints are errors here.
ValidationReport validate(std::string_view text);

/// Canonical text: LF line endings, one member per line, annotations appended
/// as ` //UCnn ... //action: text`. No trailing newline.
std::string serialize(const Diagram& diagram);

/// Counts `//UCnn` style annotation tokens in the trailing comments of the
/// source lines; used to check that parsing drops no annotation.
std::size_t count_uc_tokens(std::string_view text);

}  // namespace umlbench::puml
