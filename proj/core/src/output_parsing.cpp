#include "medcot/output_parsing.hpp"

#include <algorithm>
#include <cctype>

#include "medcot/errors.hpp"

namespace medcot {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return s;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) {
      lines.push_back(text.substr(pos));
      break;
    }
    lines.push_back(text.substr(pos, eol - pos));
    pos = eol + 1;
  }
  return lines;
}

/// If (trimmed) line starts with `marker` (case-insensitive), returns the
/// text after it.
bool strip_marker(const std::string& line, const char* marker,
                  std::string* rest) {
  std::string t = trim(line);
  std::string lowered = lower(t);
  std::string m = lower(marker);
  if (!lowered.starts_with(m)) return false;
  *rest = trim(t.substr(m.size()));
  return true;
}

}  // namespace

TaskAssignment parse_task_assignment(const std::string& raw,
                                     const std::string& question,
                                     const std::vector<ModuleKind>& enabled) {
  TaskAssignment out;
  std::map<ModuleKind, std::string> tasks;

  for (const std::string& line : split_lines(raw)) {
    std::string rest;
    if (out.rationale.empty() && strip_marker(line, "rationale:", &rest)) {
      out.rationale = rest;
      continue;
    }
    if (!strip_marker(line, "activate:", &rest)) continue;

    std::size_t bar = rest.find('|');
    if (bar == std::string::npos) continue;
    std::string module_name = trim(rest.substr(0, bar));
    std::string task_part = trim(rest.substr(bar + 1));

    std::string task;
    if (!strip_marker(task_part, "task:", &task) || task.empty()) continue;

    ModuleKind module;
    if (!try_module_from_string(lower(module_name), module)) continue;
    if (std::find(enabled.begin(), enabled.end(), module) == enabled.end()) {
      continue;  // assignment to a disabled module is ignored
    }
    tasks.emplace(module, task);  // first task per module wins
  }

  if (tasks.empty()) {
    // Nothing usable: activate every enabled module on the raw question.
    for (ModuleKind module : kAllModules) {
      if (std::find(enabled.begin(), enabled.end(), module) != enabled.end()) {
        tasks.emplace(module, question);
      }
    }
    out.fallback_used = true;
  }
  if (out.rationale.empty()) out.fallback_used = true;

  for (ModuleKind module : kAllModules) {  // canonical order
    auto it = tasks.find(module);
    if (it != tasks.end()) out.activated.push_back(module);
  }
  out.tasks = std::move(tasks);
  return out;
}

FinalAnswer parse_final_answer(const std::string& raw) {
  if (trim(raw).empty()) {
    throw Error(ErrorClass::Parse, "final answer output is empty");
  }

  FinalAnswer out;
  const auto lines = split_lines(raw);

  bool in_rationale = false;
  bool saw_answer = false;
  std::string rationale;
  std::string answer;
  for (const std::string& line : lines) {
    std::string rest;
    if (strip_marker(line, "answer:", &rest)) {
      saw_answer = true;
      in_rationale = false;
      if (!answer.empty()) answer += '\n';
      answer += rest;
      continue;
    }
    if (strip_marker(line, "rationale:", &rest)) {
      in_rationale = true;
      rationale = rest;
      continue;
    }
    if (saw_answer) {
      if (!answer.empty()) answer += '\n';
      answer += line;
    } else if (in_rationale) {
      if (!rationale.empty()) rationale += '\n';
      rationale += line;
    }
  }
  out.rationale = trim(rationale);
  out.answer = trim(answer);

  if (out.answer.empty()) {
    // No marker (or an empty one): fall back to the last non-empty line
    // that is not itself a bare marker.
    for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
      std::string candidate = trim(*it);
      if (candidate.empty()) continue;
      std::string rest;
      if (strip_marker(candidate, "answer:", &rest) ||
          strip_marker(candidate, "rationale:", &rest)) {
        candidate = rest;
      }
      if (!candidate.empty()) {
        out.answer = candidate;
        break;
      }
    }
    out.parse_fallback_used = true;
  }
  if (out.answer.empty()) {
    throw Error(ErrorClass::Parse, "no usable answer text in model output");
  }
  return out;
}

JudgeParse parse_judge_grade(const std::string& raw) {
  JudgeParse out;
  std::size_t i = 0;
  while (i < raw.size()) {
    if (!std::isdigit(static_cast<unsigned char>(raw[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < raw.size() && std::isdigit(static_cast<unsigned char>(raw[j]))) {
      ++j;
    }
    // Maximal digit run: "14" is fourteen, not a grade.
    const std::string run = raw.substr(i, j - i);
    i = j;
    if (run.size() > 9) continue;
    long value = std::stol(run);
    if (value >= 1 && value <= 4) {
      out.raw = static_cast<int>(value);
      return out;
    }
  }
  out.raw = 1;
  out.fallback_used = true;
  return out;
}

}  // namespace medcot
