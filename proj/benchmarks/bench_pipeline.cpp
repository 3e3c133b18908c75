#include <benchmark/benchmark.h>

#include <map>
#include <string>

#include "medcot/pipeline.hpp"
#include "medcot/prompt_registry.hpp"
#include "medcot/transcript.hpp"
#include "support.hpp"

namespace {

void BM_RenderSynthesizePrompt(benchmark::State& state) {
  auto registry = medcot::PromptRegistry::builtin();
  std::map<std::string, std::string> bindings = {
      {"question", "What organ is shown in this image?"},
      {"caption_section",
       "Image description: A frontal chest X-ray with clear lung fields."},
      {"responses",
       "- radiology: The image is a chest X-ray in frontal view.\n"
       "- anatomy: The lungs and the heart are visible.\n"
       "- pathology: No lesions are apparent."},
  };
  for (auto _ : state) {
    benchmark::DoNotOptimize(registry.render(
        "synthesize", medcot::kBuiltinPromptVersion, bindings));
  }
}
BENCHMARK(BM_RenderSynthesizePrompt);

// One full pipeline item against scripted backends: nine calls, two
// concurrent fan-out phases, transcript assembly. Dominated by orchestration
// overhead, which is what this measures.
void BM_McCotItemMockBackends(benchmark::State& state) {
  testsupport::PipelineFixture fx;
  medcot::McCotConfig config;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        medcot::run_mc_cot(fx.item, fx.image, config, fx.rt));
  }
}
BENCHMARK(BM_McCotItemMockBackends);

void BM_TranscriptJsonRoundTrip(benchmark::State& state) {
  testsupport::PipelineFixture fx;
  auto transcript = medcot::run_mc_cot(fx.item, fx.image, {}, fx.rt);
  transcript.run_id = "bench-run";
  for (auto _ : state) {
    auto line = medcot::to_json_line(transcript);
    benchmark::DoNotOptimize(medcot::transcript_from_json_line(line));
  }
}
BENCHMARK(BM_TranscriptJsonRoundTrip);

}  // namespace
