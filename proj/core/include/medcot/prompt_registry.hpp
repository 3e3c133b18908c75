#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace medcot {

struct PromptTemplate {
  std::string template_id;
  std::string version;
  std::string body;  // text with {name} placeholders
  std::set<std::string> required_bindings;
};

struct RenderedPrompt {
  std::string template_id;
  std::string version;
  std::string text;
  std::string bindings_digest;
};

struct TemplateListing {
  std::string template_id;
  std::string version;
  std::set<std::string> required_bindings;
};

/// The closed template vocabulary, sorted.
const std::vector<std::string>& template_id_vocabulary();

/// Versioned catalog of every prompt template in the pipeline. Immutable
/// after load; freely shared across threads.
class PromptRegistry {
 public:
  /// The templates compiled into the binary, all at version
  /// kBuiltinPromptVersion.
  static PromptRegistry builtin();

  /// Loads every *.prompt file in the directory on top of this registry.
  /// Files carry a front-matter header (template_id, version,
  /// required_bindings) followed by the body. An (id, version) pair that
  /// already exists is replaced; unknown template_ids are rejected.
  void load_directory(const std::string& dir);

  /// Registers one template. Throws Error{Config} unless the placeholders
  /// found in the body match required_bindings exactly and the id is in
  /// the closed vocabulary.
  void add(PromptTemplate tmpl);

  /// Substitutes every placeholder. Bindings must cover required_bindings
  /// exactly: a missing binding, an extraneous binding, or an unknown
  /// template is an error.
  RenderedPrompt render(const std::string& template_id,
                        const std::string& version,
                        const std::map<std::string, std::string>& bindings) const;

  const PromptTemplate& get(const std::string& template_id,
                            const std::string& version) const;
  bool has(const std::string& template_id, const std::string& version) const;

  /// All (template_id, version, required_bindings) triples, sorted.
  std::vector<TemplateListing> list_templates() const;

  /// list_templates() rendered one per line; byte-stable across invocations.
  std::string catalog_text() const;

 private:
  std::map<std::pair<std::string, std::string>, PromptTemplate> templates_;
};

/// Placeholders appearing in a template body, in order of first occurrence.
std::vector<std::string> scan_placeholders(const std::string& body);

/// Parses one front-matter template file.
PromptTemplate parse_template_file(const std::string& text,
                                   const std::string& origin);

inline constexpr const char* kBuiltinPromptVersion = "repro-1";

}  // namespace medcot
