#pragma once

#include <vector>

#include "medcot/prompt_registry.hpp"

namespace medcot::detail {

/// The compiled-in template set; the shipped prompts/ directory carries the
/// same texts and a test holds the two byte-identical.
std::vector<PromptTemplate> builtin_prompt_templates();

}  // namespace medcot::detail
