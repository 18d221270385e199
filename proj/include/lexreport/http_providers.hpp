#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "lexreport/providers.hpp"

namespace lexreport {

using HeaderList = std::vector<std::pair<std::string, std::string>>;

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// Minimal JSON POST transport. Connection-level failures surface as
/// TransientFailure; HTTP status codes are returned to the caller.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post_json(const std::string& path, const std::string& body,
                                 const HeaderList& headers) = 0;
};

/// cpp-httplib backed transport. `base_url` is "scheme://host[:port][/prefix]";
/// the prefix is prepended to every request path.
std::shared_ptr<HttpTransport> make_http_transport(const std::string& base_url,
                                                   std::chrono::seconds timeout);

/// Chat client for the widely deployed `/chat/completions` JSON shape.
class OpenAICompatibleChat : public ChatProvider {
 public:
  OpenAICompatibleChat(ProviderConfig config, std::shared_ptr<HttpTransport> transport,
                       RetryPolicy retry = {}, LogFn log = {});

  std::string chat(const ChatRequest& request) override;

 private:
  ProviderConfig config_;
  std::shared_ptr<HttpTransport> transport_;
  RetryPolicy retry_;
  LogFn log_;
  ConcurrencyLimiter limiter_;
  std::string api_key_;
};

/// Embedding client for the `/embeddings` JSON shape.
class OpenAICompatibleEmbedder : public Embedder {
 public:
  OpenAICompatibleEmbedder(ProviderConfig config, std::shared_ptr<HttpTransport> transport,
                           RetryPolicy retry = {}, LogFn log = {});

 protected:
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) override;

 private:
  ProviderConfig config_;
  std::shared_ptr<HttpTransport> transport_;
  RetryPolicy retry_;
  LogFn log_;
  ConcurrencyLimiter limiter_;
  std::string api_key_;
};

/// Reads the API key named by config.api_key_env_var (empty if unset).
std::string read_api_key(const ProviderConfig& config);

}  // namespace lexreport
