#include "medcot/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "medcot/errors.hpp"

namespace fs = std::filesystem;

namespace medcot {

namespace {

using nlohmann::json;

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return s;
}

std::string format_id(const char* prefix, long value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s-%06ld", prefix, value);
  return buf;
}

json load_json_array(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorClass::Dataset,
                "annotation file not found: " + path.string());
  }
  std::stringstream buf;
  buf << in.rdbuf();
  json j = json::parse(buf.str(), nullptr, false);
  if (j.is_discarded()) {
    throw Error(ErrorClass::Dataset,
                "annotation file is not valid JSON: " + path.string());
  }
  if (!j.is_array()) {
    throw Error(ErrorClass::Dataset,
                "annotation file is not a JSON array: " + path.string());
  }
  return j;
}

std::string require_string(const json& record, const std::string& key,
                           std::size_t index) {
  if (!record.contains(key)) {
    throw Error(ErrorClass::Dataset, "record " + std::to_string(index) +
                                         ": missing key '" + key + "'");
  }
  const json& value = record[key];
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) {
    return std::to_string(value.get<std::int64_t>());
  }
  if (value.is_number_float()) {
    return std::to_string(value.get<double>());
  }
  throw Error(ErrorClass::Dataset, "record " + std::to_string(index) +
                                       ": key '" + key +
                                       "' is neither string nor number");
}

long require_int(const json& record, const std::string& key, std::size_t index) {
  if (!record.contains(key)) {
    throw Error(ErrorClass::Dataset, "record " + std::to_string(index) +
                                         ": missing key '" + key + "'");
  }
  const json& value = record[key];
  if (value.is_number_integer()) return value.get<long>();
  if (value.is_string()) {
    try {
      return std::stol(value.get<std::string>());
    } catch (...) {
    }
  }
  throw Error(ErrorClass::Dataset, "record " + std::to_string(index) +
                                       ": key '" + key + "' is not an integer");
}

AnswerType parse_answer_type(const std::string& value, std::size_t index) {
  std::string lowered = lower(value);
  if (lowered == "open") return AnswerType::Open;
  if (lowered == "closed") return AnswerType::Closed;
  throw Error(ErrorClass::Dataset, "record " + std::to_string(index) +
                                       ": unknown answer type '" + value + "'");
}

fs::path first_existing(const fs::path& root,
                        const std::vector<std::string>& candidates) {
  for (const auto& candidate : candidates) {
    if (fs::exists(root / candidate)) return root / candidate;
  }
  return {};
}

const char* slake_split_file(Split split) {
  switch (split) {
    case Split::Train: return "train.json";
    case Split::Val: return "validate.json";
    case Split::Test: return "test.json";
  }
  return "test.json";
}

std::vector<VqaItem> load_slake(const fs::path& root, const DatasetFilter& filter,
                                const FieldMap& fm) {
  fs::path file = fm.annotation_file.empty()
                      ? root / slake_split_file(filter.split)
                      : root / fm.annotation_file;
  json records = load_json_array(file);
  std::string images_dir = fm.images_dir.empty() ? "imgs" : fm.images_dir;

  std::vector<VqaItem> items;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const json& rec = records[i];
    std::string language = rec.contains(fm.language)
                               ? require_string(rec, fm.language, i)
                               : "en";
    if (!filter.language.empty() && language != filter.language) continue;

    AnswerType type = parse_answer_type(require_string(rec, fm.answer_type, i), i);
    if (!filter.answer_types.count(type)) continue;

    VqaItem item;
    item.dataset = DatasetKind::Slake;
    item.item_id = format_id("slake", require_int(rec, fm.id, i));
    item.question = require_string(rec, fm.question, i);
    item.ground_truth = require_string(rec, fm.answer, i);
    item.answer_type = type;
    item.language = language;
    item.image_ref =
        (fs::path(images_dir) / require_string(rec, fm.image, i)).string();
    items.push_back(std::move(item));
  }
  return items;
}

std::vector<VqaItem> load_vqa_rad(const fs::path& root,
                                  const DatasetFilter& filter,
                                  const FieldMap& fm) {
  fs::path file;
  if (!fm.annotation_file.empty()) {
    file = root / fm.annotation_file;
  } else {
    file = first_existing(root, {"VQA_RAD Dataset Public.json",
                                 "VQA_RAD_Dataset_Public.json", "vqa_rad.json"});
    if (file.empty()) {
      throw Error(ErrorClass::Dataset,
                  "no VQA-RAD annotation file under " + root.string());
    }
  }
  json records = load_json_array(file);

  std::string images_dir = fm.images_dir;
  if (images_dir.empty()) {
    fs::path found =
        first_existing(root, {"VQA_RAD Image Folder", "images", "imgs"});
    images_dir = found.empty() ? "images" : found.filename().string();
  }

  std::vector<VqaItem> items;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const json& rec = records[i];
    // phrase_type "test_freeform"/"test_para" marks the test split.
    std::string phrase = lower(require_string(rec, fm.split, i));
    Split split = phrase.starts_with("test") ? Split::Test : Split::Train;
    if (split != filter.split) continue;

    AnswerType type = parse_answer_type(require_string(rec, fm.answer_type, i), i);
    if (!filter.answer_types.count(type)) continue;

    VqaItem item;
    item.dataset = DatasetKind::VqaRad;
    item.item_id = format_id("vqarad", require_int(rec, fm.id, i));
    item.question = require_string(rec, fm.question, i);
    item.ground_truth = require_string(rec, fm.answer, i);
    item.answer_type = type;
    item.image_ref =
        (fs::path(images_dir) / require_string(rec, fm.image, i)).string();
    items.push_back(std::move(item));
  }
  return items;
}

std::vector<VqaItem> load_path_vqa(const fs::path& root,
                                   const DatasetFilter& filter,
                                   const FieldMap& fm) {
  const std::string split_name = filter.split == Split::Train ? "train"
                                 : filter.split == Split::Val ? "val"
                                                              : "test";
  fs::path file;
  if (!fm.annotation_file.empty()) {
    file = root / fm.annotation_file;
  } else {
    file = first_existing(root, {split_name + ".json", split_name + "_qa.json",
                                 "qas/" + split_name + ".json",
                                 "qas/" + split_name + "_qa.json"});
    if (file.empty()) {
      throw Error(ErrorClass::Dataset, "no PATH-VQA annotation file for split '" +
                                           split_name + "' under " +
                                           root.string());
    }
  }
  json records = load_json_array(file);
  std::string images_dir = fm.images_dir.empty() ? "images" : fm.images_dir;

  std::vector<VqaItem> items;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const json& rec = records[i];
    std::string answer = require_string(rec, fm.answer, i);
    // PATH-VQA carries no answer-type field; yes/no answers are the
    // closed-ended questions.
    std::string lowered = lower(answer);
    AnswerType type = (lowered == "yes" || lowered == "no") ? AnswerType::Closed
                                                            : AnswerType::Open;
    if (!filter.answer_types.count(type)) continue;

    VqaItem item;
    item.dataset = DatasetKind::PathVqa;
    item.item_id = format_id(("pathvqa-" + split_name).c_str(),
                             static_cast<long>(i));
    item.question = require_string(rec, fm.question, i);
    item.ground_truth = std::move(answer);
    item.answer_type = type;
    std::string stem = require_string(rec, fm.image, i);
    item.image_ref =
        (fs::path(images_dir) / split_name / (stem + ".jpg")).string();
    items.push_back(std::move(item));
  }
  return items;
}

}  // namespace

const char* to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::Slake: return "slake";
    case DatasetKind::VqaRad: return "vqa_rad";
    case DatasetKind::PathVqa: return "path_vqa";
  }
  return "slake";
}

const char* to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "test";
}

const char* to_string(AnswerType type) {
  return type == AnswerType::Open ? "open" : "closed";
}

DatasetKind dataset_kind_from_string(const std::string& s) {
  if (s == "slake") return DatasetKind::Slake;
  if (s == "vqa_rad") return DatasetKind::VqaRad;
  if (s == "path_vqa") return DatasetKind::PathVqa;
  throw Error(ErrorClass::Config, "unknown dataset: '" + s + "'");
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "val") return Split::Val;
  if (s == "test") return Split::Test;
  throw Error(ErrorClass::Config, "unknown split: '" + s + "'");
}

AnswerType answer_type_from_string(const std::string& s) {
  if (s == "open") return AnswerType::Open;
  if (s == "closed") return AnswerType::Closed;
  throw Error(ErrorClass::Config, "unknown answer type: '" + s + "'");
}

FieldMap default_field_map(DatasetKind kind) {
  FieldMap fm;
  switch (kind) {
    case DatasetKind::Slake:
      fm.image = "img_name";
      fm.images_dir = "imgs";
      break;
    case DatasetKind::VqaRad:
      fm.image = "image_name";
      break;
    case DatasetKind::PathVqa:
      fm.image = "image";
      fm.images_dir = "images";
      break;
  }
  return fm;
}

std::vector<VqaItem> load_dataset(DatasetKind kind, const std::string& root_dir,
                                  const DatasetFilter& filter,
                                  const FieldMap* field_map) {
  fs::path root(root_dir);
  if (!fs::is_directory(root)) {
    throw Error(ErrorClass::Dataset, "dataset root not found: " + root_dir);
  }
  FieldMap fm = field_map ? *field_map : default_field_map(kind);

  std::vector<VqaItem> items;
  switch (kind) {
    case DatasetKind::Slake: items = load_slake(root, filter, fm); break;
    case DatasetKind::VqaRad: items = load_vqa_rad(root, filter, fm); break;
    case DatasetKind::PathVqa: items = load_path_vqa(root, filter, fm); break;
  }

  std::sort(items.begin(), items.end(),
            [](const VqaItem& a, const VqaItem& b) { return a.item_id < b.item_id; });
  if (filter.limit && items.size() > *filter.limit) {
    items.resize(*filter.limit);
  }
  return items;
}

ImageRef resolve_image(const VqaItem& item, const std::string& root_dir,
                       const FieldMap* /*field_map*/) {
  fs::path path = fs::path(root_dir) / item.image_ref;
  return ImageRef::from_file(path.string());
}

}  // namespace medcot
