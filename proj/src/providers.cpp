#include "lexreport/providers.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "lexreport/error.hpp"
#include "lexreport/text.hpp"

namespace lexreport {

std::string_view to_string(Stage stage) noexcept {
  switch (stage) {
    case Stage::None: return "none";
    case Stage::Keyphrase: return "keyphrase";
    case Stage::TopicLabel: return "topic_label";
    case Stage::Reorganize: return "reorganize";
    case Stage::Content: return "content";
    case Stage::Judge: return "judge";
  }
  return "none";
}

void l2_normalize(EmbeddingVector& v) {
  double sq = 0.0;
  for (float x : v) sq += static_cast<double>(x) * x;
  if (sq == 0.0 || !std::isfinite(sq)) {
    std::fill(v.begin(), v.end(), 0.0F);
    if (!v.empty()) v[0] = 1.0F;
    return;
  }
  const double inv = 1.0 / std::sqrt(sq);
  for (float& x : v) x = static_cast<float>(x * inv);
}

void ProviderConfig::validate() const {
  if (max_retries < 0) throw Error(ErrorCode::InvalidConfig, "max_retries must be >= 0");
  if (max_in_flight < 1) throw Error(ErrorCode::InvalidConfig, "max_in_flight must be >= 1");
  if (timeout.count() <= 0) throw Error(ErrorCode::InvalidConfig, "timeout must be positive");
}

std::chrono::milliseconds RetryPolicy::delay_for(int attempt) const {
  return std::chrono::milliseconds(
      static_cast<std::int64_t>(static_cast<double>(base.count()) * std::pow(factor, attempt)));
}

std::string with_retry(const RetryPolicy& policy, const std::function<std::string()>& fn,
                       const LogFn& log) {
  std::string last_error;
  for (int attempt = 0; attempt <= policy.max_retries; ++attempt) {
    if (log) log("attempt " + std::to_string(attempt + 1));
    try {
      return fn();
    } catch (const TransientFailure& f) {
      last_error = f.message;
      if (log) log("attempt " + std::to_string(attempt + 1) + " failed: " + f.message);
    }
    if (attempt < policy.max_retries) {
      const auto delay = policy.delay_for(attempt);
      if (policy.sleep) {
        policy.sleep(delay);
      } else {
        std::this_thread::sleep_for(delay);
      }
    }
  }
  throw Error(ErrorCode::ProviderUnavailable,
              "retries exhausted after " + std::to_string(policy.max_retries + 1) +
                  " attempts: " + last_error);
}

ConcurrencyLimiter::ConcurrencyLimiter(int max_in_flight)
    : max_(max_in_flight), sem_(max_in_flight) {
  if (max_in_flight < 1 || max_in_flight > 1024) {
    throw Error(ErrorCode::InvalidConfig, "max_in_flight must be in [1, 1024]");
  }
}

ConcurrencyLimiter::Permit::Permit(ConcurrencyLimiter& owner) : owner_(owner) {
  owner_.sem_.acquire();
}

ConcurrencyLimiter::Permit::~Permit() { owner_.sem_.release(); }

Embedder::Embedder(std::optional<std::size_t> dimension) : dimension_(dimension) {}

std::optional<std::size_t> Embedder::dimension() const {
  std::lock_guard lock(mu_);
  return dimension_;
}

std::vector<EmbeddingVector> Embedder::embed(std::span<const std::string> texts) {
  if (texts.empty()) throw Error(ErrorCode::InvalidParams, "embed requires at least one text");
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (text::trim(texts[i]).empty()) {
      throw Error(ErrorCode::InvalidParams, "embed input " + std::to_string(i) + " is empty");
    }
  }
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (std::size_t off = 0; off < texts.size(); off += kMaxBatch) {
    const auto chunk = texts.subspan(off, std::min(kMaxBatch, texts.size() - off));
    ++batch_calls_;
    auto vectors = embed_batch(chunk);
    if (vectors.size() != chunk.size()) {
      throw Error(ErrorCode::DimensionMismatch, "provider returned " + std::to_string(vectors.size()) +
                                                    " vectors for " + std::to_string(chunk.size()) + " inputs");
    }
    for (auto& v : vectors) {
      {
        std::lock_guard lock(mu_);
        if (!dimension_) dimension_ = v.size();
        if (v.size() != *dimension_ || v.empty()) {
          throw Error(ErrorCode::DimensionMismatch, "expected dimension " + std::to_string(*dimension_) +
                                                        ", got " + std::to_string(v.size()));
        }
      }
      l2_normalize(v);
      out.push_back(std::move(v));
    }
  }
  return out;
}

EmbeddingVector Embedder::embed_one(std::string_view text) {
  std::string owned(text);
  return std::move(embed(std::span<const std::string>(&owned, 1)).front());
}

void CallTrace::record(TraceEntry entry) {
  std::lock_guard lock(mu_);
  entries_.push_back(entry);
}

std::vector<TraceEntry> CallTrace::entries() const {
  std::lock_guard lock(mu_);
  return entries_;
}

std::size_t CallTrace::count(Stage stage) const {
  std::lock_guard lock(mu_);
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(), [&](const TraceEntry& e) { return e.stage == stage; }));
}

std::size_t CallTrace::total() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

void CallTrace::clear() {
  std::lock_guard lock(mu_);
  entries_.clear();
}

std::string TracingChatProvider::chat(const ChatRequest& request) {
  trace_->record({request.stage, request.user_prompt.size()});
  return inner_->chat(request);
}

}  // namespace lexreport
