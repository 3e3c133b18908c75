#include <doctest.h>

#include <filesystem>
#include <map>
#include <string>

#include "medcot/prompt_registry.hpp"
#include "support.hpp"

using namespace medcot;
using testsupport::TempDir;

namespace {

std::map<std::string, std::string> dummy_bindings(
    const PromptTemplate& tmpl) {
  std::map<std::string, std::string> bindings;
  for (const auto& name : tmpl.required_bindings) bindings[name] = "<" + name + ">";
  return bindings;
}

}  // namespace

TEST_CASE("template vocabulary is closed, sorted and fully built in") {
  const auto& ids = template_id_vocabulary();
  CHECK(ids.size() == 14);
  CHECK(std::is_sorted(ids.begin(), ids.end()));

  auto reg = PromptRegistry::builtin();
  for (const auto& id : ids) {
    CHECK_MESSAGE(reg.has(id, kBuiltinPromptVersion), id);
  }
  CHECK(reg.list_templates().size() == 14);
}

TEST_CASE("every builtin renders cleanly with exact bindings") {
  auto reg = PromptRegistry::builtin();
  for (const auto& listing : reg.list_templates()) {
    const auto& tmpl = reg.get(listing.template_id, listing.version);
    auto rendered = reg.render(listing.template_id, listing.version,
                               dummy_bindings(tmpl));
    CHECK(rendered.text.find("<" ) != std::string::npos);
    // No unresolved required placeholder survives rendering.
    for (const auto& name : tmpl.required_bindings) {
      CHECK_MESSAGE(rendered.text.find("{" + name + "}") == std::string::npos,
                    (listing.template_id + "/" + name));
    }
  }
}

TEST_CASE("stage prompts carry their published wording") {
  auto reg = PromptRegistry::builtin();
  const std::string v = kBuiltinPromptVersion;

  auto caption = reg.render("caption", v, {{"question", "Q?"}});
  CHECK(caption.text.find("Please provide a detailed description of the "
                          "features you believe are relevant to the question") !=
        std::string::npos);
  CHECK(caption.text.find("Q?") != std::string::npos);

  auto guide = reg.render("guide", v,
                          {{"module", "radiology"}, {"task", "check modality"}});
  CHECK(guide.text.find("teaching a rookie to read a medical image") !=
        std::string::npos);
  CHECK(guide.text.find("You cannot give your speculation on the final "
                        "answer.") != std::string::npos);

  auto judge = reg.render(
      "judge", v,
      {{"question", "Q?"}, {"ground_truth", "GT"}, {"answer", "A"}});
  CHECK(judge.text.find("1 point represents a refusal to answer or a "
                        "completely incorrect answer.") != std::string::npos);
  CHECK(judge.text.find("4") != std::string::npos);

  auto assign = reg.render("assign_tasks", v,
                           {{"question", "Q?"}, {"caption", "C."}});
  for (const char* module : {"radiology", "anatomy", "pathology"}) {
    CHECK_MESSAGE(assign.text.find(module) != std::string::npos, module);
  }
  CHECK(assign.text.find("RATIONALE:") != std::string::npos);
  CHECK(assign.text.find("ACTIVATE:") != std::string::npos);
}

TEST_CASE("binding coverage must be exact") {
  auto reg = PromptRegistry::builtin();
  const std::string v = kBuiltinPromptVersion;

  SUBCASE("missing binding") {
    try {
      reg.render("guide", v, {{"module", "radiology"}});
      FAIL("missing binding accepted");
    } catch (const Error& e) {
      CHECK(e.cls() == ErrorClass::Contract);
      CHECK(std::string(e.what()).find("task") != std::string::npos);
    }
  }
  SUBCASE("extraneous binding") {
    CHECK_THROWS_AS(reg.render("guide", v,
                               {{"module", "radiology"},
                                {"task", "t"},
                                {"extra", "x"}}),
                    Error);
  }
  SUBCASE("unknown template") {
    try {
      reg.render("no_such_template", v, {});
      FAIL("unknown template rendered");
    } catch (const Error& e) {
      CHECK(e.cls() == ErrorClass::NotFound);
    }
  }
  SUBCASE("unknown version") {
    CHECK_THROWS_AS(reg.render("guide", "v999", {{"module", "m"}, {"task", "t"}}),
                    Error);
  }
}

TEST_CASE("rendering is a single pass over the body") {
  // A value that itself looks like a placeholder must come through verbatim.
  auto reg = PromptRegistry::builtin();
  auto rendered = reg.render("guide", kBuiltinPromptVersion,
                             {{"module", "{task}"}, {"task", "real task"}});
  CHECK(rendered.text.find("{task}") != std::string::npos);
  CHECK(rendered.text.find("real task") != std::string::npos);
}

TEST_CASE("bindings digest tracks the binding values") {
  auto reg = PromptRegistry::builtin();
  auto a = reg.render("caption", kBuiltinPromptVersion, {{"question", "one"}});
  auto b = reg.render("caption", kBuiltinPromptVersion, {{"question", "two"}});
  auto c = reg.render("caption", kBuiltinPromptVersion, {{"question", "one"}});
  CHECK(a.bindings_digest != b.bindings_digest);
  CHECK(a.bindings_digest == c.bindings_digest);
}

TEST_CASE("scan_placeholders preserves first-occurrence order and dedups") {
  auto found = scan_placeholders("{b} then {a} then {b} and {{not_one} {a}");
  REQUIRE(found.size() == 3);
  CHECK(found[0] == "b");
  CHECK(found[1] == "a");
  CHECK(found[2] == "not_one");  // inner braces still scan
  CHECK(scan_placeholders("no names here: { } {bad space}").empty());
  CHECK(scan_placeholders("plain text").empty());
  CHECK(scan_placeholders("{unclosed").empty());
}

TEST_CASE("add() rejects bodies whose placeholders disagree with the header") {
  auto reg = PromptRegistry::builtin();
  PromptTemplate tmpl;
  tmpl.template_id = "caption";
  tmpl.version = "test-v";
  tmpl.body = "only {question} here plus {stray}";
  tmpl.required_bindings = {"question"};
  try {
    reg.add(tmpl);
    FAIL("mismatched placeholders accepted");
  } catch (const Error& e) {
    CHECK(e.cls() == ErrorClass::Config);
  }

  tmpl.body = "only {question} here";
  CHECK_NOTHROW(reg.add(tmpl));
  CHECK(reg.has("caption", "test-v"));
  // The builtin version is untouched.
  CHECK(reg.has("caption", kBuiltinPromptVersion));
}

TEST_CASE("add() rejects ids outside the vocabulary") {
  auto reg = PromptRegistry::builtin();
  PromptTemplate tmpl;
  tmpl.template_id = "freeform_extra";
  tmpl.version = "v";
  tmpl.body = "text";
  try {
    reg.add(tmpl);
    FAIL("foreign id accepted");
  } catch (const Error& e) {
    CHECK(e.cls() == ErrorClass::Config);
    CHECK(std::string(e.what()).find("freeform_extra") != std::string::npos);
  }
}

TEST_CASE("template files parse, round-trip and reject malformed headers") {
  const std::string text =
      "template_id: caption\n"
      "version: file-v\n"
      "required_bindings: question\n"
      "---\n"
      "Ask about {question} please.\n";
  auto tmpl = parse_template_file(text, "test.prompt");
  CHECK(tmpl.template_id == "caption");
  CHECK(tmpl.version == "file-v");
  CHECK(tmpl.required_bindings == std::set<std::string>{"question"});
  CHECK(tmpl.body == "Ask about {question} please.\n");

  SUBCASE("missing separator") {
    try {
      parse_template_file("template_id: caption\nversion: v\n", "origin.prompt");
      FAIL("headerless file accepted");
    } catch (const Error& e) {
      CHECK(e.cls() == ErrorClass::Config);
      CHECK(std::string(e.what()).find("origin.prompt") != std::string::npos);
    }
  }
  SUBCASE("unknown header key") {
    CHECK_THROWS_AS(parse_template_file("template_id: caption\nversion: v\n"
                                        "author: me\n---\nbody {question}\n",
                                        "x.prompt"),
                    Error);
  }
  SUBCASE("missing template_id") {
    CHECK_THROWS_AS(parse_template_file("version: v\n---\nbody\n", "x.prompt"),
                    Error);
  }
  SUBCASE("missing version") {
    CHECK_THROWS_AS(
        parse_template_file("template_id: caption\n---\nbody\n", "x.prompt"),
        Error);
  }
}

TEST_CASE("load_directory overrides matching versions and adds new ones") {
  TempDir dir;
  testsupport::write_file(dir.path() / "caption.prompt",
                          "template_id: caption\n"
                          "version: override-v\n"
                          "required_bindings: question\n"
                          "---\n"
                          "Custom caption wording for {question}\n");
  auto reg = PromptRegistry::builtin();
  reg.load_directory(dir.str());
  CHECK(reg.has("caption", "override-v"));
  CHECK(reg.has("caption", kBuiltinPromptVersion));
  auto rendered = reg.render("caption", "override-v", {{"question", "Q"}});
  CHECK(rendered.text == "Custom caption wording for Q\n");

  CHECK_THROWS_AS(reg.load_directory((dir.path() / "absent").string()), Error);
}

TEST_CASE("catalog text is stable and lists every template") {
  auto reg = PromptRegistry::builtin();
  auto text = reg.catalog_text();
  CHECK(text == PromptRegistry::builtin().catalog_text());
  for (const auto& id : template_id_vocabulary()) {
    CHECK_MESSAGE(text.find(id) != std::string::npos, id);
  }
  CHECK(text.find(kBuiltinPromptVersion) != std::string::npos);
}

#ifdef MEDCOT_REPO_PROMPTS_DIR
TEST_CASE("shipped prompt files reproduce the builtins byte for byte") {
  namespace fs = std::filesystem;
  fs::path dir(MEDCOT_REPO_PROMPTS_DIR);
  REQUIRE_MESSAGE(fs::is_directory(dir), dir.string());

  auto builtins = PromptRegistry::builtin();
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".prompt") continue;
    ++files;
    auto tmpl = parse_template_file(testsupport::read_file(entry.path()),
                                    entry.path().string());
    const auto& builtin = builtins.get(tmpl.template_id, tmpl.version);
    CHECK_MESSAGE(tmpl.body == builtin.body, entry.path().filename().string());
    CHECK(tmpl.required_bindings == builtin.required_bindings);
  }
  CHECK(files == template_id_vocabulary().size());
}
#endif
