#pragma once

#include "medcot/pipeline.hpp"

namespace medcot {

enum class FrameworkKind { McCot, Direct, IICot, FCCot, QdCaption };

const char* to_string(FrameworkKind kind);
FrameworkKind framework_from_string(const std::string& s);

/// Single MLLM call with image + question; the answer is the raw output.
Transcript run_direct(const VqaItem& item, const ImageRef& image,
                      const StageRuntime& rt);

/// LLM guidance from the question alone, then MLLM rationale, then MLLM
/// answer: three calls tagged iicot_guide, iicot_rationale, iicot_answer.
Transcript run_iicot(const VqaItem& item, const ImageRef& image,
                     const StageRuntime& rt);

/// MLLM analysis, MLLM fact check against the image, LLM logic check, MLLM
/// revision: four calls tagged fccot_analyze, fccot_fact_check,
/// fccot_logic_check, fccot_revise.
Transcript run_fccot(const VqaItem& item, const ImageRef& image,
                     const StageRuntime& rt);

/// MLLM caption, then the LLM answers from question + caption alone.
Transcript run_qd_caption(const VqaItem& item, const ImageRef& image,
                          const StageRuntime& rt);

Transcript run_framework(FrameworkKind kind, const VqaItem& item,
                         const ImageRef& image, const McCotConfig& config,
                         const StageRuntime& rt);

}  // namespace medcot
