#include "lexreport/http_providers.hpp"

#include <algorithm>
#include <cstdlib>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "lexreport/error.hpp"
#include "lexreport/text.hpp"

namespace lexreport {

namespace {

class HttplibTransport : public HttpTransport {
 public:
  HttplibTransport(const std::string& base_url, std::chrono::seconds timeout) {
    const auto scheme_end = base_url.find("://");
    const auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    const auto path_start = base_url.find('/', host_start);
    origin_ = path_start == std::string::npos ? base_url : base_url.substr(0, path_start);
    prefix_ = path_start == std::string::npos ? "" : base_url.substr(path_start);
    while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
    timeout_ = timeout;
  }

  HttpResponse post_json(const std::string& path, const std::string& body,
                         const HeaderList& headers) override {
    // httplib::Client is not safe for concurrent use; one per request.
    httplib::Client client(origin_);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);
    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);
    auto res = client.Post(prefix_ + path, h, body, "application/json");
    if (!res) throw TransientFailure{"transport error: " + httplib::to_string(res.error())};
    return {res->status, res->body};
  }

 private:
  std::string origin_;
  std::string prefix_;
  std::chrono::seconds timeout_{60};
};

HeaderList auth_headers(const std::string& api_key) {
  HeaderList h;
  if (!api_key.empty()) h.emplace_back("Authorization", "Bearer " + api_key);
  return h;
}

std::string redact(const HeaderList& headers) {
  std::string out;
  for (const auto& [k, v] : headers) {
    out += k + ": " + (k == "Authorization" ? std::string("Bearer ***") : v) + "\n";
  }
  return out;
}

// Maps HTTP status to the retry contract: 429/5xx retry, other non-2xx fail fast.
void check_status(const HttpResponse& res, std::string_view what) {
  if (res.status == 429 || res.status >= 500) {
    throw TransientFailure{std::string(what) + " returned HTTP " + std::to_string(res.status)};
  }
  if (res.status < 200 || res.status >= 300) {
    throw Error(ErrorCode::ProviderUnavailable,
                std::string(what) + " returned HTTP " + std::to_string(res.status) + ": " + res.body);
  }
}

RetryPolicy with_config(RetryPolicy retry, const ProviderConfig& config) {
  retry.max_retries = config.max_retries;
  return retry;
}

}  // namespace

std::shared_ptr<HttpTransport> make_http_transport(const std::string& base_url,
                                                   std::chrono::seconds timeout) {
  return std::make_shared<HttplibTransport>(base_url, timeout);
}

std::string read_api_key(const ProviderConfig& config) {
  if (config.api_key_env_var.empty()) return {};
  const char* v = std::getenv(config.api_key_env_var.c_str());
  return v ? std::string(v) : std::string();
}

OpenAICompatibleChat::OpenAICompatibleChat(ProviderConfig config, std::shared_ptr<HttpTransport> transport,
                                           RetryPolicy retry, LogFn log)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      retry_(with_config(std::move(retry), config_)),
      log_(std::move(log)),
      limiter_(config_.max_in_flight),
      api_key_(read_api_key(config_)) {
  config_.validate();
}

std::string OpenAICompatibleChat::chat(const ChatRequest& request) {
  if (text::trim(request.user_prompt).empty()) {
    throw Error(ErrorCode::InvalidParams, "chat request has an empty user prompt");
  }
  nlohmann::json body;
  body["model"] = config_.model_id;
  auto messages = nlohmann::json::array();
  if (!request.system_prompt.empty()) {
    messages.push_back({{"role", "system"}, {"content", request.system_prompt}});
  }
  messages.push_back({{"role", "user"}, {"content", request.user_prompt}});
  body["messages"] = std::move(messages);
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_output_tokens;
  const auto payload = body.dump();
  const auto headers = auth_headers(api_key_);
  if (config_.verbose && log_) log_("POST /chat/completions\n" + redact(headers) + payload);

  auto permit = limiter_.acquire();
  auto raw = with_retry(
      retry_,
      [&] {
        auto res = transport_->post_json("/chat/completions", payload, headers);
        check_status(res, "chat endpoint");
        return res.body;
      },
      config_.verbose ? log_ : LogFn{});
  if (config_.verbose && log_) log_("response: " + raw);

  auto j = nlohmann::json::parse(raw, nullptr, false);
  if (j.is_discarded() || !j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
    throw Error(ErrorCode::ResponseEmpty, "chat response has no choices");
  }
  const auto& msg = j["choices"][0]["message"];
  if (!msg.is_object() || !msg.contains("content") || !msg["content"].is_string()) {
    throw Error(ErrorCode::ResponseEmpty, "chat response has no message content");
  }
  auto content = msg["content"].get<std::string>();
  if (text::trim(content).empty()) throw Error(ErrorCode::ResponseEmpty, "chat response content is empty");
  return content;
}

OpenAICompatibleEmbedder::OpenAICompatibleEmbedder(ProviderConfig config,
                                                   std::shared_ptr<HttpTransport> transport,
                                                   RetryPolicy retry, LogFn log)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      retry_(with_config(std::move(retry), config_)),
      log_(std::move(log)),
      limiter_(config_.max_in_flight),
      api_key_(read_api_key(config_)) {
  config_.validate();
}

std::vector<EmbeddingVector> OpenAICompatibleEmbedder::embed_batch(std::span<const std::string> texts) {
  nlohmann::json body;
  body["model"] = config_.model_id;
  body["input"] = std::vector<std::string>(texts.begin(), texts.end());
  const auto payload = body.dump();
  const auto headers = auth_headers(api_key_);
  if (config_.verbose && log_) log_("POST /embeddings\n" + redact(headers) + payload);

  auto permit = limiter_.acquire();
  auto raw = with_retry(
      retry_,
      [&] {
        auto res = transport_->post_json("/embeddings", payload, headers);
        check_status(res, "embedding endpoint");
        return res.body;
      },
      config_.verbose ? log_ : LogFn{});

  auto j = nlohmann::json::parse(raw, nullptr, false);
  if (j.is_discarded() || !j.contains("data") || !j["data"].is_array()) {
    throw Error(ErrorCode::ResponseEmpty, "embedding response has no data array");
  }
  std::vector<std::pair<std::size_t, EmbeddingVector>> indexed;
  try {
    for (std::size_t i = 0; i < j["data"].size(); ++i) {
      const auto& item = j["data"][i];
      const std::size_t idx = item.contains("index") ? item["index"].get<std::size_t>() : i;
      indexed.emplace_back(idx, item.at("embedding").get<EmbeddingVector>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ResponseEmpty, std::string("malformed embedding response: ") + e.what());
  }
  std::sort(indexed.begin(), indexed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<EmbeddingVector> out;
  out.reserve(indexed.size());
  for (auto& [idx, v] : indexed) out.push_back(std::move(v));
  return out;
}

}  // namespace lexreport
