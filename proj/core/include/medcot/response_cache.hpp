#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "medcot/backend.hpp"

namespace medcot {

/// Content-addressed directory of response files keyed by request digest.
/// Survives process restarts; concurrent writers are safe because entries
/// are written to a temp file and renamed into place (last write wins).
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  std::optional<ChatResponse> get(const std::string& digest) const;
  void put(const std::string& digest, const ChatResponse& response);

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path entry_path(const std::string& digest) const;
  std::filesystem::path dir_;
};

/// Wraps a backend with the cache: a hit returns the stored text with
/// from_cache=true and no inner call; a miss forwards and stores.
class CachingBackend : public Backend {
 public:
  CachingBackend(std::shared_ptr<Backend> inner,
                 std::shared_ptr<ResponseCache> cache);

  ChatResponse chat(const ChatRequest& request) override;
  std::string model_id() const override { return inner_->model_id(); }
  std::string kind() const override { return inner_->kind(); }

 private:
  std::shared_ptr<Backend> inner_;
  std::shared_ptr<ResponseCache> cache_;
};

}  // namespace medcot
