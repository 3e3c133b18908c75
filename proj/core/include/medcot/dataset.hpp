#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "medcot/chat.hpp"

namespace medcot {

enum class DatasetKind { Slake, VqaRad, PathVqa };
enum class Split { Train, Val, Test };
enum class AnswerType { Open, Closed };

const char* to_string(DatasetKind kind);
const char* to_string(Split split);
const char* to_string(AnswerType type);
DatasetKind dataset_kind_from_string(const std::string& s);
Split split_from_string(const std::string& s);
AnswerType answer_type_from_string(const std::string& s);

struct VqaItem {
  std::string item_id;
  DatasetKind dataset = DatasetKind::Slake;
  std::string image_ref;  // path relative to the dataset root
  std::string question;
  std::string ground_truth;
  AnswerType answer_type = AnswerType::Open;
  std::string language = "en";
};

struct DatasetFilter {
  Split split = Split::Test;
  std::set<AnswerType> answer_types{AnswerType::Open};
  std::string language = "en";  // applies to SLAKE only
  std::optional<std::size_t> limit;  // truncates by item_id order
};

/// Declarative key-name mapping, overridable in config because published
/// annotation schemas differ across mirrors.
struct FieldMap {
  std::string question = "question";
  std::string answer = "answer";
  std::string image = "image";
  std::string answer_type = "answer_type";
  std::string id = "qid";
  std::string language = "q_lang";
  std::string split = "phrase_type";      // VQA-RAD only
  std::string annotation_file;            // explicit path override
  std::string images_dir;                 // explicit images dir override
};

FieldMap default_field_map(DatasetKind kind);

/// Loads and filters one dataset. Items are stably sorted by item_id;
/// SLAKE is filtered to the requested language. Throws Error{Dataset} on a
/// missing annotation file or an unrecognized record shape (reported with
/// the record index).
std::vector<VqaItem> load_dataset(DatasetKind kind, const std::string& root_dir,
                                  const DatasetFilter& filter,
                                  const FieldMap* field_map = nullptr);

/// Verifies existence and non-zero size, then returns the digested
/// reference. Throws Error{Image} naming the path.
ImageRef resolve_image(const VqaItem& item, const std::string& root_dir,
                       const FieldMap* field_map = nullptr);

}  // namespace medcot
