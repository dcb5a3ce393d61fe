#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "support/temp_dir.hpp"
#include "umlbench/corpus.hpp"

namespace fs = std::filesystem;
using namespace umlbench;
using namespace umlbench::corpus;

namespace {

using testing::TempDir;

const char* kBaseline = "@startuml\nclass A {\n- id : int\n}\nclass B\nA --> B\n@enduml\n";

std::string enriched(int n_methods) {
  std::string s = "@startuml\nclass A {\n- id : int\n";
  for (int i = 0; i < n_methods; ++i) s += "+ m" + std::to_string(i) + "() //UC01 //action: do\n";
  return s + "}\nclass B\nA --> B\n@enduml\n";
}

}  // namespace

TEST_CASE("parse_filename") {
  CHECK(parse_filename("Claude3_run7.puml") == std::pair<std::string, int>{"Claude3", 7});
  CHECK(parse_filename("Mixtral8x22B_Run10.puml") == std::pair<std::string, int>{"Mixtral8x22B", 10});
  CHECK(parse_filename("GPT_4o_RUN3.puml") == std::pair<std::string, int>{"GPT_4o", 3});
  CHECK(parse_filename("Gemini2.5_run1") == std::pair<std::string, int>{"Gemini2.5", 1});
  CHECK_THROWS_AS(parse_filename("baseline.puml"), NamingError);
  CHECK_THROWS_AS(parse_filename("_run3.puml"), NamingError);
  CHECK_THROWS_AS(parse_filename("Model_run0.puml"), NamingError);
  CHECK_THROWS_AS(parse_filename("Model_runX.puml"), NamingError);
}

TEST_CASE("scan_corpus") {
  TempDir dir;
  const auto base = dir.write("baseline.puml", kBaseline);

  SUBCASE("empty directory") {
    TempDir empty;
    const auto idx = scan_corpus(empty.path, base);
    CHECK(idx.entries.empty());
    CHECK(idx.baseline.classes.size() == 2);
  }

  SUBCASE("ordering, skipping and invalid entries") {
    dir.write("m/Beta_run10.puml", enriched(1));
    dir.write("m/Beta_run2.puml", enriched(2));
    dir.write("Alpha_run1.puml", enriched(3));
    dir.write("Alpha_run2.puml", "@startuml\nclass A {\n");
    dir.write("notes.puml", kBaseline);
    dir.write("Alpha_run3.txt", enriched(1));
    for (unsigned workers : {1u, 4u}) {
      const auto idx = scan_corpus(dir.path, base, {workers, std::nullopt});
      REQUIRE(idx.entries.size() == 4);
      CHECK(idx.entries[0].model_name == "Alpha");
      CHECK(idx.entries[0].run_index == 1);
      CHECK(idx.entries[1].run_index == 2);
      CHECK(idx.entries[2].model_name == "Beta");
      CHECK(idx.entries[2].run_index == 2);
      CHECK(idx.entries[3].run_index == 10);
      CHECK(idx.entries[0].diagram->method_count() == 3);
      CHECK(idx.entries[0].diagram->provenance == puml::Provenance{"Alpha", 1});
      CHECK_FALSE(idx.entries[1].diagram.has_value());
      CHECK_FALSE(idx.entries[1].validation.is_valid);
      REQUIRE(idx.skipped.size() == 1);
      CHECK(idx.models() == std::vector<std::string>{"Alpha", "Beta"});
    }
  }

  SUBCASE("idempotent") {
    dir.write("X_run1.puml", enriched(2));
    dir.write("X_run2.puml", enriched(0));
    const auto a = scan_corpus(dir.path, base);
    const auto b = scan_corpus(dir.path, base, {3, std::nullopt});
    REQUIRE(a.entries.size() == b.entries.size());
    for (std::size_t i = 0; i < a.entries.size(); ++i) CHECK(a.entries[i].diagram == b.entries[i].diagram);
  }

  SUBCASE("baseline with a method is rejected") {
    const auto bad = dir.write("bad_base.puml", enriched(1));
    CHECK_THROWS_AS(scan_corpus(dir.path, bad), BaselineInvalid);
  }

  SUBCASE("missing directory") { CHECK_THROWS_AS(scan_corpus(dir.path / "nope", base), IoError); }

  SUBCASE("external validator overrides validity") {
    dir.write("X_run1.puml", enriched(1));
    auto idx = scan_corpus(dir.path, base, {1, std::string("false {file}")});
    CHECK_FALSE(idx.entries[0].validation.is_valid);
    CHECK(idx.entries[0].diagram.has_value());
    idx = scan_corpus(dir.path, base, {1, std::string("test -f {file}")});
    CHECK(idx.entries[0].validation.is_valid);
  }
}

TEST_CASE("JSON export and re-import") {
  SUBCASE("minimal diagram") {
    const auto e = make_entry("M", 1, "M_run1.puml", "@startuml\nclass A {}\n@enduml");
    const auto j = export_parsed(e);
    REQUIRE(j["classes"].size() == 1);
    CHECK(j["classes"][0]["methods"].empty());
  }
  SUBCASE("params preserve order") {
    const auto e = make_entry("M", 1, "p", "@startuml\nclass A {\n+ f(b : Int, a : String) : void //UC1\n}\n@enduml");
    const auto j = export_parsed(e);
    const auto& params = j["classes"][0]["methods"][0]["params"];
    REQUIRE(params.size() == 2);
    CHECK(params[0]["name"] == "b");
    CHECK(params[1]["name"] == "a");
    CHECK(j["classes"][0]["methods"][0]["visibility"] == "+");
    const auto back = diagram_from_json(nlohmann::ordered_json::parse(j.dump()));
    CHECK(back.classes[0].methods == e.diagram->classes[0].methods);
    CHECK(back == *e.diagram);
  }
  SUBCASE("key order is stable") {
    const auto e = make_entry("M", 1, "p", enriched(1));
    CHECK(export_parsed(e).dump() == export_parsed(e).dump());
    const auto j = export_parsed(e);
    auto it = j.begin();
    CHECK(it.key() == "name");
  }
  SUBCASE("unparsed entry") {
    const auto e = make_entry("M", 1, "p", "@startuml\nclass A {\n");
    CHECK_THROWS_AS(export_parsed(e), NoDiagram);
  }
}

TEST_CASE("write_parsed persists entries and index") {
  TempDir dir;
  const auto base = dir.write("in/baseline.puml", kBaseline);
  dir.write("in/Model_run1.puml", enriched(2));
  dir.write("in/Model_run2.puml", "garbage");
  const auto idx = scan_corpus(dir.path / "in", base);
  write_parsed(idx, dir.path / "out");
  CHECK(fs::exists(dir.path / "out" / "Model_run1.json"));
  CHECK_FALSE(fs::exists(dir.path / "out" / "Model_run2.json"));
  std::ifstream in(dir.path / "out" / "index.json");
  const auto j = nlohmann::json::parse(in);
  REQUIRE(j["entries"].size() == 2);
  CHECK(j["entries"][0]["methods"] == 2);
  CHECK(j["entries"][1]["parsed"] == false);
}

TEST_CASE("read_parsed inverts write_parsed") {
  TempDir dir;
  const auto base = dir.write("in/baseline.puml", kBaseline);
  dir.write("in/Model_run1.puml", enriched(2));
  dir.write("in/Model_run2.puml", "garbage");
  dir.write("in/notes.puml", kBaseline);
  const auto idx = scan_corpus(dir.path / "in", base);
  write_parsed(idx, dir.path / "out");
  const auto back = read_parsed(dir.path / "out");
  REQUIRE(back.entries.size() == idx.entries.size());
  CHECK(back.skipped == idx.skipped);
  CHECK(puml::serialize(back.baseline) == puml::serialize(idx.baseline));
  for (std::size_t i = 0; i < idx.entries.size(); ++i) {
    const auto& a = idx.entries[i];
    const auto& b = back.entries[i];
    CHECK(a.model_name == b.model_name);
    CHECK(a.run_index == b.run_index);
    CHECK(a.validation.is_valid == b.validation.is_valid);
    REQUIRE(a.validation.issues.size() == b.validation.issues.size());
    for (std::size_t k = 0; k < a.validation.issues.size(); ++k) {
      CHECK(a.validation.issues[k].kind == b.validation.issues[k].kind);
      CHECK(a.validation.issues[k].line == b.validation.issues[k].line);
    }
    REQUIRE(a.diagram.has_value() == b.diagram.has_value());
    if (a.diagram) CHECK(puml::serialize(*a.diagram) == puml::serialize(*b.diagram));
  }
  CHECK_THROWS_AS(read_parsed(dir.path / "missing"), IoError);
}
