#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lexreport {

/// Pipeline stage a chat call belongs to. Real backends ignore it; the mock
/// chat dispatches on it and call traces record it.
enum class Stage { None, Keyphrase, TopicLabel, Reorganize, Content, Judge };

std::string_view to_string(Stage stage) noexcept;

struct ChatRequest {
  std::string system_prompt;
  std::string user_prompt;
  double temperature = 0.0;
  int max_output_tokens = 2048;
  Stage stage = Stage::None;
};

using EmbeddingVector = std::vector<float>;

/// In-place L2 normalization. A zero vector becomes the basis vector e_0.
void l2_normalize(EmbeddingVector& v);

using LogFn = std::function<void(std::string_view)>;

struct ProviderConfig {
  std::string endpoint_url;      // base URL, e.g. "http://localhost:8000/v1"
  std::string model_id;
  std::string api_key_env_var;   // empty: send no Authorization header
  std::chrono::seconds timeout{60};
  int max_retries = 3;
  int max_in_flight = 4;
  bool verbose = false;

  /// Throws Error(InvalidConfig) when an invariant is violated.
  void validate() const;
};

/// Exponential backoff: attempt i (0-based) failing waits base * factor^i.
struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds base{1000};
  double factor = 2.0;
  std::function<void(std::chrono::milliseconds)> sleep;  // default: this_thread::sleep_for

  std::chrono::milliseconds delay_for(int attempt) const;
};

/// Thrown by transports for failures worth retrying (connection errors,
/// timeouts, HTTP 429 and 5xx).
struct TransientFailure {
  std::string message;
};

/// Calls fn() until it returns, retrying on TransientFailure. After
/// max_retries retries throws Error(ProviderUnavailable).
std::string with_retry(const RetryPolicy& policy, const std::function<std::string()>& fn,
                       const LogFn& log = {});

/// Counting semaphore bounding concurrent provider requests.
class ConcurrencyLimiter {
 public:
  explicit ConcurrencyLimiter(int max_in_flight);

  class Permit {
   public:
    explicit Permit(ConcurrencyLimiter& owner);
    ~Permit();
    Permit(const Permit&) = delete;
    Permit& operator=(const Permit&) = delete;

   private:
    ConcurrencyLimiter& owner_;
  };

  Permit acquire() { return Permit(*this); }
  int max_in_flight() const noexcept { return max_; }

 private:
  int max_;
  std::counting_semaphore<1024> sem_;
};

/// Chat-completion backend. Implementations must be safe to call from
/// several threads at once.
class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  virtual std::string chat(const ChatRequest& request) = 0;
};

/// Embedding backend with shared client-side batching and normalization.
///
/// embed() validates inputs, splits them into sub-batches of at most
/// kMaxBatch texts, checks the dimension of every returned vector and
/// L2-normalizes it. Subclasses only implement embed_batch().
class Embedder {
 public:
  static constexpr std::size_t kMaxBatch = 128;

  explicit Embedder(std::optional<std::size_t> dimension = std::nullopt);
  virtual ~Embedder() = default;

  std::vector<EmbeddingVector> embed(std::span<const std::string> texts);
  EmbeddingVector embed_one(std::string_view text);

  /// Known dimension: fixed at construction or learned from the first response.
  std::optional<std::size_t> dimension() const;
  /// Number of embed_batch() transport calls made so far.
  std::size_t batch_calls() const noexcept { return batch_calls_.load(); }

 protected:
  virtual std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) = 0;

 private:
  mutable std::mutex mu_;
  std::optional<std::size_t> dimension_;
  std::atomic<std::size_t> batch_calls_{0};
};

/// One recorded chat call.
struct TraceEntry {
  Stage stage = Stage::None;
  std::size_t prompt_bytes = 0;
};

/// Thread-safe record of chat calls, by stage.
class CallTrace {
 public:
  void record(TraceEntry entry);
  std::vector<TraceEntry> entries() const;
  std::size_t count(Stage stage) const;
  std::size_t total() const;
  void clear();

 private:
  mutable std::mutex mu_;
  std::vector<TraceEntry> entries_;
};

/// Decorator recording every call into a CallTrace before delegating.
class TracingChatProvider : public ChatProvider {
 public:
  TracingChatProvider(std::shared_ptr<ChatProvider> inner, std::shared_ptr<CallTrace> trace)
      : inner_(std::move(inner)), trace_(std::move(trace)) {}

  std::string chat(const ChatRequest& request) override;
  const std::shared_ptr<CallTrace>& trace() const noexcept { return trace_; }

 private:
  std::shared_ptr<ChatProvider> inner_;
  std::shared_ptr<CallTrace> trace_;
};

}  // namespace lexreport
