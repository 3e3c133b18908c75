#include "medcot/prompt_registry.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "medcot/digest.hpp"
#include "medcot/errors.hpp"
#include "prompt_builtin.hpp"

namespace fs = std::filesystem;

namespace medcot {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool is_placeholder_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

std::string set_to_list(const std::set<std::string>& values) {
  std::string out;
  for (const auto& v : values) {
    if (!out.empty()) out += ", ";
    out += v;
  }
  return out;
}

}  // namespace

const std::vector<std::string>& template_id_vocabulary() {
  static const std::vector<std::string> ids = {
      "assign_tasks",    "caption",          "extract",
      "fccot_analyze",   "fccot_fact_check", "fccot_logic_check",
      "fccot_revise",    "guide",            "iicot_answer",
      "iicot_guide",     "iicot_rationale",  "judge",
      "qdcap_answer",    "synthesize",
  };
  return ids;
}

std::vector<std::string> scan_placeholders(const std::string& body) {
  std::vector<std::string> found;
  std::size_t i = 0;
  while (i < body.size()) {
    if (body[i] != '{') {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < body.size() && is_placeholder_char(body[j])) ++j;
    if (j > i + 1 && j < body.size() && body[j] == '}') {
      std::string name = body.substr(i + 1, j - i - 1);
      if (std::find(found.begin(), found.end(), name) == found.end()) {
        found.push_back(std::move(name));
      }
      i = j + 1;
    } else {
      ++i;
    }
  }
  return found;
}

PromptTemplate parse_template_file(const std::string& text,
                                   const std::string& origin) {
  PromptTemplate tmpl;
  std::size_t pos = 0;
  bool saw_separator = false;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string line = eol == std::string::npos ? text.substr(pos)
                                                : text.substr(pos, eol - pos);
    pos = eol == std::string::npos ? text.size() + 1 : eol + 1;
    if (trim(line) == "---") {
      saw_separator = true;
      break;
    }
    if (trim(line).empty()) continue;
    std::size_t colon = line.find(':');
    if (colon == std::string::npos) {
      throw Error(ErrorClass::Config,
                  origin + ": header line has no key: '" + line + "'");
    }
    std::string key = trim(line.substr(0, colon));
    std::string value = trim(line.substr(colon + 1));
    if (key == "template_id") {
      tmpl.template_id = value;
    } else if (key == "version") {
      tmpl.version = value;
    } else if (key == "required_bindings") {
      std::stringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ',')) {
        std::string name = trim(item);
        if (!name.empty()) tmpl.required_bindings.insert(name);
      }
    } else {
      throw Error(ErrorClass::Config,
                  origin + ": unknown header key '" + key + "'");
    }
  }
  if (!saw_separator) {
    throw Error(ErrorClass::Config, origin + ": missing '---' separator");
  }
  if (tmpl.template_id.empty()) {
    throw Error(ErrorClass::Config, origin + ": missing template_id");
  }
  if (tmpl.version.empty()) {
    throw Error(ErrorClass::Config, origin + ": missing version");
  }
  tmpl.body = pos <= text.size() ? text.substr(pos) : "";
  return tmpl;
}

PromptRegistry PromptRegistry::builtin() {
  PromptRegistry registry;
  for (auto& tmpl : detail::builtin_prompt_templates()) {
    registry.add(std::move(tmpl));
  }
  return registry;
}

void PromptRegistry::add(PromptTemplate tmpl) {
  const auto& vocab = template_id_vocabulary();
  if (std::find(vocab.begin(), vocab.end(), tmpl.template_id) == vocab.end()) {
    throw Error(ErrorClass::Config,
                "template id outside the closed vocabulary: '" +
                    tmpl.template_id + "'");
  }
  auto placeholders = scan_placeholders(tmpl.body);
  std::set<std::string> found(placeholders.begin(), placeholders.end());
  if (found != tmpl.required_bindings) {
    throw Error(ErrorClass::Config,
                "template '" + tmpl.template_id +
                    "': body placeholders {" + set_to_list(found) +
                    "} do not match required_bindings {" +
                    set_to_list(tmpl.required_bindings) + "}");
  }
  auto key = std::make_pair(tmpl.template_id, tmpl.version);
  templates_.insert_or_assign(std::move(key), std::move(tmpl));
}

void PromptRegistry::load_directory(const std::string& dir) {
  if (!fs::is_directory(dir)) {
    throw Error(ErrorClass::Config, "prompt directory not found: " + dir);
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".prompt") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    std::ifstream in(file);
    std::stringstream buf;
    buf << in.rdbuf();
    add(parse_template_file(buf.str(), file.string()));
  }
}

const PromptTemplate& PromptRegistry::get(const std::string& template_id,
                                          const std::string& version) const {
  auto it = templates_.find(std::make_pair(template_id, version));
  if (it == templates_.end()) {
    throw Error(ErrorClass::NotFound,
                "no template '" + template_id + "' at version '" + version + "'");
  }
  return it->second;
}

bool PromptRegistry::has(const std::string& template_id,
                         const std::string& version) const {
  return templates_.count(std::make_pair(template_id, version)) > 0;
}

RenderedPrompt PromptRegistry::render(
    const std::string& template_id, const std::string& version,
    const std::map<std::string, std::string>& bindings) const {
  const PromptTemplate& tmpl = get(template_id, version);

  std::set<std::string> provided;
  for (const auto& [name, _] : bindings) provided.insert(name);
  if (provided != tmpl.required_bindings) {
    throw Error(ErrorClass::Contract,
                "render('" + template_id + "'): bindings {" +
                    set_to_list(provided) + "} must match required {" +
                    set_to_list(tmpl.required_bindings) + "} exactly");
  }

  // Single pass over the body: binding values are never re-scanned, so a
  // value containing "{name}" cannot trigger a second substitution.
  std::string text;
  text.reserve(tmpl.body.size());
  std::size_t i = 0;
  const std::string& body = tmpl.body;
  while (i < body.size()) {
    if (body[i] != '{') {
      text.push_back(body[i++]);
      continue;
    }
    std::size_t j = i + 1;
    while (j < body.size() && is_placeholder_char(body[j])) ++j;
    if (j > i + 1 && j < body.size() && body[j] == '}') {
      auto it = bindings.find(body.substr(i + 1, j - i - 1));
      if (it != bindings.end()) {
        text += it->second;
        i = j + 1;
        continue;
      }
    }
    text.push_back(body[i++]);
  }

  RenderedPrompt out;
  out.template_id = template_id;
  out.version = version;
  out.text = std::move(text);
  out.bindings_digest = sha256_hex(nlohmann::json(bindings).dump());
  return out;
}

std::vector<TemplateListing> PromptRegistry::list_templates() const {
  std::vector<TemplateListing> out;
  out.reserve(templates_.size());
  for (const auto& [key, tmpl] : templates_) {
    out.push_back({tmpl.template_id, tmpl.version, tmpl.required_bindings});
  }
  return out;  // map order is already (id, version) sorted
}

std::string PromptRegistry::catalog_text() const {
  std::string out;
  for (const auto& listing : list_templates()) {
    out += listing.template_id;
    out += ' ';
    out += listing.version;
    out += " [";
    out += set_to_list(listing.required_bindings);
    out += "]\n";
  }
  return out;
}

}  // namespace medcot
