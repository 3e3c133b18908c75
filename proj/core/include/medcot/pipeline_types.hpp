#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "medcot/chat.hpp"

namespace medcot {

/// The three specialist feature-extraction charters.
enum class ModuleKind { Radiology, Anatomy, Pathology };

inline constexpr std::array<ModuleKind, 3> kAllModules = {
    ModuleKind::Radiology, ModuleKind::Anatomy, ModuleKind::Pathology};

const char* to_string(ModuleKind kind);
bool try_module_from_string(const std::string& s, ModuleKind& out);
ModuleKind module_from_string(const std::string& s);

struct PipelineInput {
  std::string question;
  std::optional<std::string> caption;  // absent only under the w/o-caption ablation
  ImageRef image;
};

struct TaskAssignment {
  std::string rationale;
  std::vector<ModuleKind> activated;  // non-empty, in canonical module order
  std::map<ModuleKind, std::string> tasks;  // defined exactly for activated modules
  bool fallback_used = false;
};

struct Guide {
  ModuleKind module;
  std::string text;
};

struct ModuleResponse {
  ModuleKind module;
  std::string text;
};

struct FinalAnswer {
  std::string rationale;
  std::string answer;  // non-empty, no "ANSWER:" marker residue
  bool parse_fallback_used = false;
};

enum class Summarizer { LLM, MLLM };
const char* to_string(Summarizer s);
Summarizer summarizer_from_string(const std::string& s);

struct McCotConfig {
  bool use_caption = true;
  bool use_guide = true;
  Summarizer summarizer = Summarizer::LLM;
  std::vector<ModuleKind> enabled_modules{kAllModules.begin(), kAllModules.end()};

  bool is_enabled(ModuleKind kind) const;
};

/// Per-stage sampling temperature: 0.0 for the judge, 0.2 elsewhere,
/// overridable by exact tag or by tag family (the part before ':').
struct StageTemperatures {
  std::map<std::string, double> overrides;

  double lookup(const std::string& tag) const;
};

}  // namespace medcot
