#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include "medcot/errors.hpp"
#include "medcot/output_parsing.hpp"

using namespace medcot;

namespace {

const std::vector<ModuleKind> kAll{ModuleKind::Radiology, ModuleKind::Anatomy,
                                   ModuleKind::Pathology};

/// Random printable strings (including marker-ish fragments) for the
/// never-crash / never-empty properties.
std::string random_output(std::mt19937& rng) {
  static const std::vector<std::string> pieces = {
      "RATIONALE:",  "ACTIVATE:",    "ANSWER:", "TASK:",   "|",
      "\n",          "radiology",    "anatomy", "unknown", "  ",
      "some text",   "score 3",      ":",       "ACTIVATE",
      "answer: yes", "RATIONALE",    "4",       "the", "lungs"};
  std::string out;
  int n = static_cast<int>(rng() % 12);
  for (int i = 0; i < n; ++i) {
    out += pieces[rng() % pieces.size()];
    out += (rng() % 3 == 0) ? "\n" : " ";
  }
  return out;
}

}  // namespace

TEST_CASE("task assignment parses the two-marker contract") {
  auto parsed = parse_task_assignment(
      "RATIONALE: modality first, then tissue state.\n"
      "ACTIVATE: radiology | TASK: identify the modality\n"
      "ACTIVATE: pathology | TASK: look for lesions\n",
      "Q?", kAll);
  CHECK(parsed.rationale == "modality first, then tissue state.");
  REQUIRE(parsed.activated.size() == 2);
  CHECK(parsed.activated[0] == ModuleKind::Radiology);
  CHECK(parsed.activated[1] == ModuleKind::Pathology);
  CHECK(parsed.tasks.at(ModuleKind::Radiology) == "identify the modality");
  CHECK(parsed.tasks.at(ModuleKind::Pathology) == "look for lesions");
  CHECK_FALSE(parsed.fallback_used);
}

TEST_CASE("task assignment markers are case-insensitive") {
  auto parsed = parse_task_assignment(
      "rationale: lower case works\n"
      "activate: Anatomy | task: find the organ\n",
      "Q?", kAll);
  CHECK(parsed.rationale == "lower case works");
  REQUIRE(parsed.activated.size() == 1);
  CHECK(parsed.activated[0] == ModuleKind::Anatomy);
  CHECK_FALSE(parsed.fallback_used);
}

TEST_CASE("activations are filtered to the enabled set") {
  std::vector<ModuleKind> only_rad{ModuleKind::Radiology};
  auto parsed = parse_task_assignment(
      "RATIONALE: r\n"
      "ACTIVATE: radiology | TASK: a\n"
      "ACTIVATE: anatomy | TASK: b\n",
      "Q?", only_rad);
  REQUIRE(parsed.activated.size() == 1);
  CHECK(parsed.activated[0] == ModuleKind::Radiology);
  CHECK(parsed.tasks.count(ModuleKind::Anatomy) == 0);
}

TEST_CASE("unusable assignment falls back to every enabled module") {
  for (const char* raw : {"", "free-form refusal", "ACTIVATE: nothing",
                          "ACTIVATE: radiology" /* missing | TASK: */}) {
    auto parsed = parse_task_assignment(raw, "the question", kAll);
    CHECK_MESSAGE(parsed.fallback_used, raw);
    REQUIRE(parsed.activated.size() == 3);
    for (auto module : parsed.activated) {
      CHECK(parsed.tasks.at(module) == "the question");
    }
  }
}

TEST_CASE("duplicate activations keep the first task") {
  auto parsed = parse_task_assignment(
      "RATIONALE: r\n"
      "ACTIVATE: anatomy | TASK: first\n"
      "ACTIVATE: anatomy | TASK: second\n",
      "Q?", kAll);
  REQUIRE(parsed.activated.size() == 1);
  CHECK(parsed.tasks.at(ModuleKind::Anatomy) == "first");
}

TEST_CASE("activated modules come out in canonical order") {
  auto parsed = parse_task_assignment(
      "RATIONALE: r\n"
      "ACTIVATE: pathology | TASK: c\n"
      "ACTIVATE: radiology | TASK: a\n",
      "Q?", kAll);
  REQUIRE(parsed.activated.size() == 2);
  CHECK(parsed.activated[0] == ModuleKind::Radiology);
  CHECK(parsed.activated[1] == ModuleKind::Pathology);
}

TEST_CASE("property: the activated set is never empty") {
  std::mt19937 rng(7);
  for (int i = 0; i < 300; ++i) {
    auto parsed = parse_task_assignment(random_output(rng), "Q?", kAll);
    CHECK(!parsed.activated.empty());
    // Tasks exist for exactly the activated modules.
    CHECK(parsed.tasks.size() == parsed.activated.size());
    for (auto module : parsed.activated) {
      CHECK(!parsed.tasks.at(module).empty());
    }
  }
}

TEST_CASE("final answer parses the rationale-then-answer contract") {
  auto parsed = parse_final_answer(
      "RATIONALE: the caption names the organ\nANSWER: the lungs\n");
  CHECK(parsed.rationale == "the caption names the organ");
  CHECK(parsed.answer == "the lungs");
  CHECK_FALSE(parsed.parse_fallback_used);
}

TEST_CASE("final answer keeps multi-line sections together") {
  auto parsed = parse_final_answer(
      "RATIONALE: first line\nsecond line\n"
      "ANSWER: the lungs\nand the heart\n");
  CHECK(parsed.rationale.find("first line") != std::string::npos);
  CHECK(parsed.rationale.find("second line") != std::string::npos);
  CHECK(parsed.answer.find("the lungs") != std::string::npos);
  CHECK(parsed.answer.find("and the heart") != std::string::npos);
}

TEST_CASE("missing ANSWER marker falls back to the last non-empty line") {
  auto parsed = parse_final_answer("Some reasoning.\nThe final verdict.\n\n");
  CHECK(parsed.answer == "The final verdict.");
  CHECK(parsed.parse_fallback_used);
}

TEST_CASE("whitespace-only output refuses to parse") {
  for (const char* raw : {"", "   \n\t  \n", "ANSWER:", "ANSWER:   \n"}) {
    try {
      parse_final_answer(raw);
      FAIL_CHECK("unusable output parsed: '" << raw << "'");
    } catch (const Error& e) {
      CHECK(e.cls() == ErrorClass::Parse);
    }
  }
}

TEST_CASE("property: any non-blank output yields a non-empty answer") {
  std::mt19937 rng(11);
  int parsed_count = 0;
  for (int i = 0; i < 300; ++i) {
    std::string raw = random_output(rng);
    try {
      auto parsed = parse_final_answer(raw);
      ++parsed_count;
      CHECK(!parsed.answer.empty());
      // The answer is trimmed.
      CHECK(parsed.answer.front() != ' ');
      CHECK(parsed.answer.back() != ' ');
      CHECK(parsed.answer.back() != '\n');
    } catch (const Error& e) {
      CHECK(e.cls() == ErrorClass::Parse);
    }
  }
  CHECK(parsed_count > 0);  // the generator does produce usable outputs
}

TEST_CASE("judge grades parse the first standalone integer in range") {
  CHECK(parse_judge_grade("Score: 4").raw == 4);
  CHECK_FALSE(parse_judge_grade("Score: 4").fallback_used);
  CHECK(parse_judge_grade("3").raw == 3);
  CHECK(parse_judge_grade("I would give this a 2 out of 4.").raw == 2);
  CHECK(parse_judge_grade("It could be 2 or 3, leaning 2.").raw == 2);
}

TEST_CASE("judge parsing treats maximal digit runs as one integer") {
  // "14" is fourteen, not a one then a four.
  auto fourteen = parse_judge_grade("14");
  CHECK(fourteen.raw == 1);
  CHECK(fourteen.fallback_used);
  // A later in-range run still counts.
  CHECK(parse_judge_grade("14 then 3").raw == 3);
  // Leading zeros are still the value 4.
  CHECK(parse_judge_grade("04").raw == 4);
  // Out-of-range runs are skipped entirely.
  CHECK(parse_judge_grade("0 5 9 2").raw == 2);
}

TEST_CASE("unparseable judge output grades 1 with the fallback flag") {
  for (const char* raw : {"", "excellent answer", "five", "0", "999"}) {
    auto parsed = parse_judge_grade(raw);
    CHECK_MESSAGE(parsed.raw == 1, raw);
    CHECK_MESSAGE(parsed.fallback_used, raw);
  }
}

TEST_CASE("property: judge grades always land in 1..4") {
  std::mt19937 rng(13);
  for (int i = 0; i < 300; ++i) {
    auto parsed = parse_judge_grade(random_output(rng));
    CHECK(parsed.raw >= 1);
    CHECK(parsed.raw <= 4);
  }
}
