#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "medcot/backend.hpp"
#include "medcot/dataset.hpp"
#include "medcot/pipeline_types.hpp"
#include "medcot/prompt_registry.hpp"
#include "medcot/transcript.hpp"

namespace medcot {

/// Everything a stage needs to issue one model call: the backend pair, the
/// prompt catalog, retry policy and sampling parameters. Shared by all
/// frameworks and the judge.
struct StageRuntime {
  std::shared_ptr<Backend> llm;
  std::shared_ptr<Backend> mllm;
  const PromptRegistry* prompts = nullptr;
  RetryPolicy retry;
  StageTemperatures temperatures;
  int max_tokens = 1024;
  std::string prompt_version = kBuiltinPromptVersion;

  Backend& backend_for(BackendRole role) const;
};

/// Issues one call through with_retry and records it in `sink` when one is
/// installed. The request carries the stage tag and the tag's temperature.
ChatResponse invoke_stage(const StageRuntime& rt, BackendRole role,
                          const std::string& tag, std::vector<Message> messages,
                          CallSink* sink);

/// Raised by stage operations so the orchestrator can mark the transcript
/// failed(stage) and move on to the next item.
class StageFailure : public Error {
 public:
  StageFailure(std::string stage, const Error& cause)
      : Error(cause.cls(), cause.what(), cause.attempts()),
        stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

// --- MC-CoT stage operations ---

/// Question-conditioned image description from the MLLM. Empty model
/// output yields an empty caption plus a transcript warning rather than an
/// abort.
std::string generate_caption(const StageRuntime& rt, const PipelineInput& input,
                             CallSink* sink, std::vector<std::string>* warnings = nullptr);

TaskAssignment assign_tasks(const StageRuntime& rt, const PipelineInput& input,
                            const McCotConfig& config, CallSink* sink);

Guide generate_guide(const StageRuntime& rt, ModuleKind module,
                     const std::string& task, CallSink* sink);

ModuleResponse extract_features(const StageRuntime& rt, const ImageRef& image,
                                ModuleKind module, const std::string& task,
                                const std::optional<Guide>& guide, CallSink* sink);

FinalAnswer synthesize_answer(const StageRuntime& rt, const PipelineInput& input,
                              const std::vector<ModuleResponse>& responses,
                              const McCotConfig& config, CallSink* sink);

/// The full three-stage pipeline for one item: caption (unless ablated),
/// task assignment, then per activated module a guide (unless ablated) and
/// an extraction, and finally answer synthesis. Guides and extractions for
/// distinct modules run concurrently within their phase; records land in
/// canonical module order. Any stage abort produces a transcript with
/// status failed(stage).
Transcript run_mc_cot(const VqaItem& item, const ImageRef& image,
                      const McCotConfig& config, const StageRuntime& rt);

}  // namespace medcot
