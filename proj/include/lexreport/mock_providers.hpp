#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lexreport/corpus.hpp"
#include "lexreport/providers.hpp"

namespace lexreport {

inline constexpr std::size_t kMockDimension = 256;

/// Signed feature hashing: each lowercase alphanumeric token adds +1 or -1
/// to bucket fnv1a64(token) % dimension, the sign taken from the hash's top
/// bit. The sum is L2-normalized; texts without tokens map to e_0.
EmbeddingVector mock_embed(std::string_view text, std::size_t dimension = kMockDimension);

class MockEmbedder : public Embedder {
 public:
  explicit MockEmbedder(std::size_t dimension = kMockDimension) : Embedder(dimension), dim_(dimension) {}

 protected:
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) override;

 private:
  std::size_t dim_;
};

/// Paragraph-level document frequencies over a corpus.
class TokenStats {
 public:
  TokenStats() = default;
  explicit TokenStats(const Corpus& corpus);

  std::size_t df(const std::string& token) const;
  /// Distinct tokens of `text` ordered by (df ascending, token ascending), first n.
  std::vector<std::string> rarest_tokens(std::string_view text, std::size_t n) const;

 private:
  std::unordered_map<std::string, std::size_t> df_;
};

/// Deterministic offline chat model. Output is a pure function of the prompt
/// and the corpus statistics:
///   keyphrase   - 5 rarest tokens per paragraph, ", "-joined, one line each
///   topic_label - "topic: " + the 3 most frequent keyphrase tokens of the
///                 representatives (ties by token)
///   reorganize  - the input topics sorted lexicographically per level,
///                 4-space indented
///   content     - previous content, then one sentence per new paragraph
///                 carrying its "(id#number)" citation
///   judge       - "4"
class MockChat : public ChatProvider {
 public:
  explicit MockChat(TokenStats stats = {}) : stats_(std::move(stats)) {}

  std::string chat(const ChatRequest& request) override;

 private:
  std::string keyphrases(std::string_view prompt) const;
  std::string topic_label(std::string_view prompt) const;
  std::string reorganize(std::string_view prompt) const;
  std::string content(std::string_view prompt) const;

  TokenStats stats_;
};

}  // namespace lexreport
