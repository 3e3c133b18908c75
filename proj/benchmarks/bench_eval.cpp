#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "medcot/chat.hpp"
#include "medcot/evaluation.hpp"

namespace {

const std::string kAnswer =
    "The image is a frontal chest X-ray; the lungs are clear with no focal "
    "consolidation, the cardiac silhouette is within normal limits, and "
    "there is no pleural effusion or pneumothorax on either side.";

void BM_NormalizeText(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(medcot::normalize_text(kAnswer));
  }
}
BENCHMARK(BM_NormalizeText);

void BM_RecallScore(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(medcot::recall_score(
        "pleural effusion", kAnswer, medcot::RecallMode::TokenFraction));
  }
}
BENCHMARK(BM_RecallScore);

void BM_CacheKey(benchmark::State& state) {
  medcot::ChatRequest request;
  request.backend_role = medcot::BackendRole::MLLM;
  request.model_id = "bench-model";
  request.request_tag = "extract:anatomy";
  medcot::ImageRef image;
  image.path = "img.png";
  image.digest = std::string(64, 'a');
  image.size_bytes = 1 << 20;
  request.messages = {
      {medcot::ChatRole::System, "You are a careful clinical assistant.", {}},
      {medcot::ChatRole::User, kAnswer, {image}},
  };
  for (auto _ : state) {
    benchmark::DoNotOptimize(medcot::cache_key(request));
  }
}
BENCHMARK(BM_CacheKey);

void BM_Aggregate1k(benchmark::State& state) {
  std::vector<medcot::ItemEvaluation> items(1000);
  for (std::size_t i = 0; i < items.size(); ++i) {
    items[i].item_id = "item-" + std::to_string(i);
    items[i].recall = (i % 5) / 4.0;
    items[i].graded = true;
    items[i].raw_grade = static_cast<int>(i % 4) + 1;
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(medcot::aggregate(
        "slake", "mc_cot", items, 7, medcot::RecallMode::TokenFraction,
        medcot::AccuracyScaling::MeanOver4));
  }
}
BENCHMARK(BM_Aggregate1k);

}  // namespace

BENCHMARK_MAIN();
