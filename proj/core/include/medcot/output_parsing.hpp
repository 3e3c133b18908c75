#pragma once

#include <string>
#include <vector>

#include "medcot/pipeline_types.hpp"

namespace medcot {

/// Parses the line-oriented assignment contract
///   RATIONALE: <text>
///   ACTIVATE: <module> | TASK: <text>
/// with case-insensitive markers. Activations outside `enabled` are
/// dropped; when nothing usable remains, the fallback activates every
/// enabled module with `question` as its task and sets fallback_used, so
/// the activated set is never empty for any input string.
TaskAssignment parse_task_assignment(const std::string& raw,
                                     const std::string& question,
                                     const std::vector<ModuleKind>& enabled);

/// Parses RATIONALE:/ANSWER: sections (case-insensitive, line-anchored).
/// When the ANSWER marker is missing the answer is the last non-empty
/// line and parse_fallback_used is set. Throws Error{Parse} when no
/// usable answer text exists (output entirely whitespace, or markers
/// with nothing after them).
FinalAnswer parse_final_answer(const std::string& raw);

struct JudgeParse {
  int raw = 1;  // in {1..4}
  bool fallback_used = false;
};

/// First integer in {1..4} in the text (maximal digit runs; "14" is one
/// integer and does not count). Unparseable output grades 1 with the
/// fallback flag set.
JudgeParse parse_judge_grade(const std::string& raw);

}  // namespace medcot
