#pragma once

// Shared fixtures for the test binaries: throwaway directories, stand-in
// image files, synthetic dataset trees and the scripted rule tables that
// drive the full pipeline without a network.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "medcot/dataset.hpp"
#include "medcot/mock_backend.hpp"
#include "medcot/pipeline.hpp"

namespace testsupport {

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("medcot-test-" + std::to_string(rd() % 100000) + "-" +
             std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string str() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path,
                       const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

/// A few bytes standing in for an image; only existence, size and digest
/// matter to the offline backends.
inline std::string write_image(const std::filesystem::path& dir,
                               const std::string& name,
                               const std::string& seed = "pixel-data") {
  auto path = dir / name;
  write_file(path, "\x89PNG" + seed);
  return path.string();
}

/// Scripted responses covering every stage tag of every framework, so one
/// table can back both the LLM and MLLM roles of any test.
inline std::vector<medcot::MockRule> standard_rules() {
  using medcot::MockRule;
  return {
      {"caption", "", "A frontal chest X-ray with clear lung fields."},
      {"assign_tasks", "",
       "RATIONALE: Modality, organs and lesions each need a specialist look.\n"
       "ACTIVATE: radiology | TASK: Identify the imaging modality and view.\n"
       "ACTIVATE: anatomy | TASK: Name the organs visible in the image.\n"
       "ACTIVATE: pathology | TASK: Describe any lesions or abnormalities."},
      {"guide:radiology", "",
       "Check the grayscale pattern and bone shadows to decide the modality."},
      {"guide:anatomy", "", "Trace organ outlines outward from the midline."},
      {"guide:pathology", "",
       "Compare the left and right fields for asymmetric opacities."},
      {"extract:radiology", "", "The image is a chest X-ray in frontal view."},
      {"extract:anatomy", "", "The lungs and the heart are visible."},
      {"extract:pathology", "", "No lesions are apparent."},
      {"synthesize", "",
       "RATIONALE: All modules agree the image shows healthy lungs.\n"
       "ANSWER: the lungs"},
      {"direct", "", "the lungs"},
      {"iicot_guide", "", "Focus on the organ outlines."},
      {"iicot_rationale", "", "The silhouette matches the lungs."},
      {"iicot_answer", "",
       "RATIONALE: The silhouette matches the lungs.\nANSWER: the lungs"},
      {"fccot_analyze", "", "The image shows the lungs; likely healthy."},
      {"fccot_fact_check", "", "The claims match the image."},
      {"fccot_logic_check", "", "The reasoning is internally consistent."},
      {"fccot_revise", "",
       "RATIONALE: Both checks passed.\nANSWER: the lungs"},
      {"qdcap_answer", "",
       "RATIONALE: The description mentions lung fields.\nANSWER: the lungs"},
      {"judge", "", "4"},
  };
}

/// Same table but the assignment activates only radiology and anatomy.
inline std::vector<medcot::MockRule> two_module_rules() {
  auto rules = standard_rules();
  for (auto& rule : rules) {
    if (rule.tag == "assign_tasks") {
      rule.response =
          "RATIONALE: Only modality and anatomy matter here.\n"
          "ACTIVATE: radiology | TASK: Identify the imaging modality.\n"
          "ACTIVATE: anatomy | TASK: Name the organs visible.";
    }
  }
  return rules;
}

/// Owns everything a StageRuntime points at, plus one resolvable item.
struct PipelineFixture {
  medcot::PromptRegistry prompts = medcot::PromptRegistry::builtin();
  std::shared_ptr<medcot::MockBackend> llm;
  std::shared_ptr<medcot::MockBackend> mllm;
  medcot::StageRuntime rt;
  TempDir dir;
  medcot::VqaItem item;
  medcot::ImageRef image;

  explicit PipelineFixture(
      std::vector<medcot::MockRule> rules = standard_rules()) {
    llm = std::make_shared<medcot::MockBackend>(rules, "mock-llm");
    mllm = std::make_shared<medcot::MockBackend>(std::move(rules), "mock-mllm");
    rt.llm = llm;
    rt.mllm = mllm;
    rt.prompts = &prompts;
    rt.retry.base_delay_ms = 1;  // keep retry tests fast

    image = medcot::ImageRef::from_file(write_image(dir.path(), "img.png"));
    item.item_id = "item-000001";
    item.question = "What organ is shown in this image?";
    item.ground_truth = "lungs";
    item.image_ref = "img.png";
  }

  int total_calls() const { return llm->call_count() + mllm->call_count(); }
};

/// Tags of the recorded calls, in order.
inline std::vector<std::string> call_tags(const medcot::Transcript& t) {
  std::vector<std::string> tags;
  tags.reserve(t.calls.size());
  for (const auto& call : t.calls) tags.push_back(call.tag);
  return tags;
}

// --- synthetic dataset trees ---

/// SLAKE-shaped tree: <root>/test.json + <root>/imgs/... Every item is
/// open-ended English unless the caller says otherwise.
inline void write_slake_fixture(const std::filesystem::path& root, int n,
                                const std::string& split = "test") {
  std::string records = "[";
  for (int i = 0; i < n; ++i) {
    std::string img = "xmlab" + std::to_string(i) + "/source.jpg";
    write_image(root / "imgs" / ("xmlab" + std::to_string(i)), "source.jpg",
                "slake-" + std::to_string(i));
    if (i) records += ",";
    records += "{\"qid\": " + std::to_string(i + 1) +
               ", \"img_name\": \"" + img +
               "\", \"question\": \"What organ is shown in image " +
               std::to_string(i) +
               "?\", \"answer\": \"lungs\", \"answer_type\": \"OPEN\", "
               "\"q_lang\": \"en\"}";
  }
  records += "]";
  std::string file = split == "val" ? "validate.json" : split + ".json";
  write_file(root / file, records);
}

inline void write_vqa_rad_fixture(const std::filesystem::path& root, int n) {
  std::string records = "[";
  for (int i = 0; i < n; ++i) {
    std::string img = "synpic" + std::to_string(i) + ".jpg";
    write_image(root / "VQA_RAD Image Folder", img, "rad-" + std::to_string(i));
    if (i) records += ",";
    // Even indices are test_freeform, odd are the train split.
    records += "{\"qid\": " + std::to_string(i + 1) +
               ", \"image_name\": \"" + img +
               "\", \"question\": \"Is there a fracture?\", "
               "\"answer\": \"no\", \"answer_type\": \"CLOSED\", "
               "\"phrase_type\": \"" +
               (i % 2 == 0 ? "test_freeform" : "freeform") + "\"}";
  }
  records += "]";
  write_file(root / "VQA_RAD Dataset Public.json", records);
}

inline void write_path_vqa_fixture(const std::filesystem::path& root, int n) {
  std::string records = "[";
  for (int i = 0; i < n; ++i) {
    std::string stem = "test_" + std::to_string(i);
    write_image(root / "images" / "test", stem + ".jpg",
                "path-" + std::to_string(i));
    if (i) records += ",";
    // Alternate open ("tissue") and closed ("yes") answers.
    records += "{\"image\": \"" + stem +
               "\", \"question\": \"What tissue is this?\", \"answer\": \"" +
               (i % 2 == 0 ? "epithelial tissue" : "yes") + "\"}";
  }
  records += "]";
  write_file(root / "test.json", records);
}

}  // namespace testsupport
