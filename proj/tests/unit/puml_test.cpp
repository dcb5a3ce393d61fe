#include <doctest.h>

#include "support/puml_fuzz.hpp"
#include "umlbench/puml.hpp"

using namespace umlbench::puml;

TEST_CASE("minimal class parses") {
  const auto d = parse_diagram("@startuml\nclass A {}\n@enduml");
  REQUIRE(d.classes.size() == 1);
  CHECK(d.classes[0].name == "A");
  CHECK(d.classes[0].methods.empty());
  CHECK(d.classes[0].attributes.empty());
}

TEST_CASE("association and public method") {
  const auto d = parse_diagram("@startuml\nclass A {\n+go()\n}\nclass B\nA --> B\n@enduml");
  REQUIRE(d.classes.size() == 2);
  REQUIRE(d.classes[0].methods.size() == 1);
  const auto& m = d.classes[0].methods[0];
  CHECK(m.name == "go");
  CHECK(m.visibility == Visibility::Public);
  CHECK(m.owning_class == "A");
  REQUIRE(d.relationships.size() == 1);
  CHECK(d.relationships[0].kind == RelationKind::Association);
  CHECK(d.relationships[0].source == "A");
  CHECK(d.relationships[0].target == "B");
  const auto ends = semantic_ends(d.relationships[0]);
  CHECK(ends.directed);
  CHECK(ends.from == "A");
}

TEST_CASE("unclosed class body is UnbalancedBlock at end of input") {
  try {
    parse_diagram("@startuml\nclass A {");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.kind() == IssueKind::UnbalancedBlock);
    CHECK(e.line() == 2);
  }
}

TEST_CASE("missing @startuml") {
  CHECK_THROWS_AS(parse_diagram("class A {}\n"), ParseError);
  try {
    parse_diagram("class A {}\n");
  } catch (const ParseError& e) {
    CHECK(e.kind() == IssueKind::MissingStart);
  }
}

TEST_CASE("member line: method with full annotation") {
  auto member = parse_member_line("+ activateAccount() //UC02 //action: activate the account");
  REQUIRE(std::holds_alternative<MethodRecord>(member));
  const auto& m = std::get<MethodRecord>(member);
  CHECK(m.visibility == Visibility::Public);
  CHECK(m.name == "activateAccount");
  CHECK(m.parameters.empty());
  CHECK_FALSE(m.return_type.has_value());
  CHECK(m.uc_ids == std::vector<std::string>{"UC02"});
  REQUIRE(m.action_text.has_value());
  CHECK(*m.action_text == "activate the account");
}

TEST_CASE("member line: attribute") {
  auto member = parse_member_line("- email : String");
  REQUIRE(std::holds_alternative<AttributeDecl>(member));
  const auto& a = std::get<AttributeDecl>(member);
  CHECK(a.visibility == Visibility::Private);
  CHECK(a.name == "email");
  CHECK(a.type == "String");
}

TEST_CASE("member line: typed parameters, return type, UC only") {
  auto member = parse_member_line("+ validateCredentials(login: String, pwd: String) : Boolean //UC01");
  const auto& m = std::get<MethodRecord>(member);
  REQUIRE(m.parameters.size() == 2);
  CHECK(m.parameters[0] == Parameter{"login", "String"});
  CHECK(m.parameters[1] == Parameter{"pwd", "String"});
  CHECK(m.return_type == "Boolean");
  CHECK(m.uc_ids == std::vector<std::string>{"UC01"});
  CHECK_FALSE(m.action_text.has_value());
}

TEST_CASE("member line: alternative spellings") {
  SUBCASE("Java-style prefix return and parameter types") {
    const auto m = std::get<MethodRecord>(parse_member_line("+ Boolean check(String login, int n)"));
    CHECK(m.return_type == "Boolean");
    CHECK(m.parameters[0] == Parameter{"login", "String"});
    CHECK(m.parameters[1] == Parameter{"n", "int"});
  }
  SUBCASE("void is stored verbatim") {
    const auto m = std::get<MethodRecord>(parse_member_line("~ reset() : void"));
    CHECK(m.visibility == Visibility::Package);
    CHECK(m.return_type == "void");
  }
  SUBCASE("no visibility marker") {
    const auto m = std::get<MethodRecord>(parse_member_line("reset()"));
    CHECK(m.visibility == Visibility::None);
  }
  SUBCASE("multiple use cases and lists") {
    const auto m = std::get<MethodRecord>(parse_member_line("+ a() //UC01 //UC_3, UC04 //action: do it"));
    CHECK(m.uc_ids == std::vector<std::string>{"UC01", "UC3", "UC04"});
    CHECK(m.action_text == "do it");
  }
  SUBCASE("use case after the action is collected, not kept in the text") {
    const auto m = std::get<MethodRecord>(parse_member_line("+ a() //action: do it //UC07"));
    CHECK(m.uc_ids == std::vector<std::string>{"UC07"});
    CHECK(m.action_text == "do it");
  }
  SUBCASE("generic parameter types keep their commas") {
    const auto m = std::get<MethodRecord>(parse_member_line("+ put(m : Map<String, Integer>) : List<Item>"));
    REQUIRE(m.parameters.size() == 1);
    CHECK(m.parameters[0].type == "Map<String, Integer>");
    CHECK(m.return_type == "List<Item>");
  }
  SUBCASE("static modifier") {
    const auto m = std::get<MethodRecord>(parse_member_line("{static} + make() : A"));
    CHECK(m.modifiers == std::vector<std::string>{"static"});
    CHECK(m.visibility == Visibility::Public);
  }
}

TEST_CASE("member line: malformed") {
  CHECK_THROWS_AS(parse_member_line("+ broken(a: String"), ParseError);
  CHECK_THROWS_AS(parse_member_line("+ (x)"), ParseError);
  CHECK_THROWS_AS(parse_member_line("+ f() extra"), ParseError);
  CHECK_THROWS_AS(parse_member_line("+"), ParseError);
  CHECK_THROWS_AS(parse_member_line("+ f(a:)"), ParseError);
  try {
    parse_member_line("+ f(,)");
  } catch (const ParseError& e) {
    CHECK(e.kind() == IssueKind::MalformedMember);
  }
}

TEST_CASE("validation") {
  SUBCASE("valid fixture has no issues") {
    const auto r = validate("@startuml\nclass A {\n+go()\n}\nclass B\nA --> B\n@enduml\n");
    CHECK(r.is_valid);
    CHECK(r.issues.empty());
  }
  SUBCASE("missing @enduml is one UnbalancedBlock") {
    const auto r = validate("@startuml\nclass A {\n+go()\n}\n");
    CHECK_FALSE(r.is_valid);
    REQUIRE(r.issues.size() == 1);
    CHECK(r.issues[0].kind == IssueKind::UnbalancedBlock);
  }
  SUBCASE("undeclared endpoint parses but fails validation") {
    const std::string src = "@startuml\nclass A\nA --> Ghost\n@enduml";
    CHECK_NOTHROW(parse_diagram(src));
    const auto r = validate(src);
    CHECK_FALSE(r.is_valid);
    REQUIRE(r.issues.size() == 1);
    CHECK(r.issues[0].kind == IssueKind::UnknownEndpoint);
    CHECK(r.issues[0].line == 3);
  }
  SUBCASE("garbage statement") {
    const auto r = validate("@startuml\nclass A\nHere is your diagram!\n@enduml");
    CHECK_FALSE(r.is_valid);
    CHECK(r.issues[0].kind == IssueKind::UnknownStatement);
  }
  SUBCASE("stray closing brace") {
    const auto r = validate("@startuml\nclass A\n}\n@enduml");
    CHECK_FALSE(r.is_valid);
    CHECK(r.issues[0].kind == IssueKind::UnbalancedBlock);
  }
  SUBCASE("warnings never invalidate") {
    const auto r = validate("@startuml\nclass A {\n+a : int\n+a : int\n}\n@enduml");
    CHECK(r.is_valid);
    REQUIRE(r.issues.size() == 1);
    CHECK(r.issues[0].severity == Severity::Warning);
  }
  SUBCASE("appending a well-formed class keeps a valid source valid") {
    std::string src = "@startuml\nclass A {\n+go()\n}\n";
    CHECK(validate(src + "@enduml").is_valid);
    CHECK(validate(src + "class Extra {\n- x : int\n+ y()\n}\n@enduml").is_valid);
  }
}

TEST_CASE("pass-through constructs") {
  const std::string src =
      "@startuml Waste\r\n"
      "skinparam class {\r\n  BackgroundColor white\r\n}\r\n"
      "hide empty members\r\n"
      "title Recycling\r\n"
      "/' block\r\ncomment '/\r\n"
      "note \"free note\" as N1\r\n"
      "note left of A\r\n  some text\r\nend note\r\n"
      "package \"Accounts\" {\r\n"
      "  class A <<Entity>> {\r\n    - id : UUID\r\n    .. ops ..\r\n    + close() : void //UC03\r\n  }\r\n"
      "}\r\n"
      "enum Status { OPEN, CLOSED }\r\n"
      "class B extends A\r\n"
      "N1 .. A\r\n"
      "A \"1\" *-- \"0..*\" B : owns >\r\n"
      "@enduml\r\n";
  const auto d = parse_diagram(src);
  CHECK(d.name == "Waste");
  REQUIRE(d.packages.size() == 1);
  CHECK(d.packages[0].name == "Accounts");
  REQUIRE(d.classes.size() == 2);
  CHECK(d.classes[0].package_path == std::vector<std::string>{"Accounts"});
  CHECK(d.classes[0].stereotype == "Entity");
  CHECK(d.classes[0].methods[0].uc_ids == std::vector<std::string>{"UC03"});
  REQUIRE(d.enums.size() == 1);
  CHECK(d.enums[0].values == std::vector<std::string>{"OPEN", "CLOSED"});
  REQUIRE(d.relationships.size() == 2);
  CHECK(d.relationships[0].kind == RelationKind::Inheritance);
  CHECK(d.relationships[1].kind == RelationKind::Composition);
  CHECK(d.relationships[1].source_multiplicity == "1");
  CHECK(d.relationships[1].target_multiplicity == "0..*");
  CHECK(d.relationships[1].label == "owns >");
  CHECK(validate(src).is_valid);
}

TEST_CASE("arrow kinds and orientation") {
  struct Case {
    const char* arrow;
    RelationKind kind;
    bool directed;
    bool forward;
  };
  const Case cases[] = {
      {"-->", RelationKind::Association, true, true},   {"--", RelationKind::Association, false, true},
      {"<--", RelationKind::Association, true, false},  {"..>", RelationKind::Dependency, true, true},
      {"<|--", RelationKind::Inheritance, true, false}, {"--|>", RelationKind::Inheritance, true, true},
      {"<|..", RelationKind::Realization, true, false}, {"..|>", RelationKind::Realization, true, true},
      {"*--", RelationKind::Composition, true, true},   {"--*", RelationKind::Composition, true, false},
      {"o--", RelationKind::Aggregation, true, true},   {"-up->", RelationKind::Association, true, true},
      {"-[#red]->", RelationKind::Association, true, true},
  };
  for (const auto& c : cases) {
    CAPTURE(c.arrow);
    const auto d = parse_diagram(std::string("@startuml\nclass X\nclass Y\nX ") + c.arrow + " Y\n@enduml");
    REQUIRE(d.relationships.size() == 1);
    CHECK(d.relationships[0].arrow == c.arrow);
    CHECK(d.relationships[0].kind == c.kind);
    const auto ends = semantic_ends(d.relationships[0]);
    CHECK(ends.directed == c.directed);
    if (c.directed) CHECK((ends.from == "X") == c.forward);
  }
}

TEST_CASE("serialize canonical forms") {
  Diagram d;
  d.classes.push_back(UmlClass{"A", ClassKind::Class, {}, {}, {}, std::nullopt});
  CHECK(serialize(d) == "@startuml\nclass A {\n}\n@enduml");

  const auto parsed = parse_diagram("@startuml\nclass A {\n+activateAccount()//action: activate the account //UC02\n}\n@enduml");
  const auto text = serialize(parsed);
  CHECK(text.find("+ activateAccount() //UC02 //action: activate the account\n") != std::string::npos);
}

TEST_CASE("method order follows source order") {
  const auto d = parse_diagram("@startuml\nclass A {\n+ c()\n+ a()\n+ b()\n}\n@enduml");
  REQUIRE(d.classes[0].methods.size() == 3);
  CHECK(d.classes[0].methods[0].name == "c");
  CHECK(d.classes[0].methods[1].name == "a");
  CHECK(d.classes[0].methods[2].name == "b");
}

TEST_CASE("property: round trip and annotation conservation on fuzzed sources") {
  umlbench::testing::PumlFuzzer fuzz(20240517);
  for (int i = 0; i < 100; ++i) {
    const auto src = fuzz.next();
    CAPTURE(src.text);
    const auto d = parse_diagram(src.text);
    CHECK(d.method_count() == src.methods);
    std::size_t ids = 0;
    for (const auto& c : d.classes) {
      for (const auto& m : c.methods) ids += m.uc_ids.size();
      for (const auto& a : c.attributes) ids += a.uc_ids.size();
    }
    CHECK(count_uc_tokens(src.text) == src.uc_tokens);
    CHECK(ids == src.uc_tokens);
    const auto again = parse_diagram(serialize(d));
    CHECK(again == d);
    CHECK(serialize(again) == serialize(d));
  }
}
