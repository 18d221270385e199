#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lexreport/corpus.hpp"
#include "lexreport/providers.hpp"

namespace lexreport {

enum class IndexMode : std::uint8_t { Keyphrase = 0, Paragraph = 1 };

std::string_view to_string(IndexMode mode) noexcept;
IndexMode parse_index_mode(std::string_view s);

struct KeyphraseSet {
  ParagraphRef ref;
  std::vector<std::string> phrases;
};

struct VectorRecord {
  ParagraphRef ref;
  EmbeddingVector vector;
  std::string indexed_text;

  bool operator==(const VectorRecord&) const = default;
};

/// Immutable flat index: one unit-norm vector per corpus paragraph.
struct VectorIndex {
  std::uint32_t dimension = 0;
  IndexMode mode = IndexMode::Keyphrase;
  std::vector<VectorRecord> records;
  Sha256Digest corpus_fingerprint{};

  bool operator==(const VectorIndex&) const = default;

  /// Record for `ref`, or nullptr. Linear scan; callers needing many
  /// lookups should build their own map.
  const VectorRecord* find(const ParagraphRef& ref) const noexcept;
};

inline constexpr std::size_t kDefaultKeyphraseBatch = 10;
inline constexpr std::size_t kFallbackTokenCount = 8;

/// Splits one model output line into keyphrases: comma-separated, trimmed,
/// trailing periods and quotes removed, de-duplicated case-insensitively.
std::vector<std::string> parse_keyphrase_line(std::string_view line);

/// Batched keyphrase generation for one judgment. Paragraphs are sent in
/// consecutive groups of at most `batch_size`; a response whose line count
/// differs from the group size is retried once, then each paragraph of the
/// group is prompted on its own (as is any paragraph whose line parsed to no
/// phrases). A paragraph whose keyphrases still come back empty gets its
/// first eight tokens.
std::vector<KeyphraseSet> generate_keyphrases(const Judgment& judgment, std::size_t batch_size,
                                              ChatProvider& chat);

struct IndexBuildOptions {
  IndexMode mode = IndexMode::Keyphrase;
  std::size_t batch_size = kDefaultKeyphraseBatch;
  std::size_t workers = 4;  // judgments processed concurrently
};

VectorIndex build_index(const Corpus& corpus, const IndexBuildOptions& options, ChatProvider& chat,
                        Embedder& embedder);

/// Binary little-endian format:
///   "LXIX" | version u32 | D u32 | mode u8 | count u64 | fingerprint[32]
///   per record: u32 len + judgment id | u32 number | D x f32 | u32 len + text
///   trailing CRC-32 (u32) over every preceding byte.
std::string serialize_index(const VectorIndex& index);
VectorIndex deserialize_index(std::string_view bytes);
void save_index(const VectorIndex& index, const std::filesystem::path& path);
VectorIndex load_index(const std::filesystem::path& path);

inline constexpr std::uint32_t kIndexVersion = 1;

/// A human-readable warning when the index was built from different corpus bytes.
std::optional<std::string> fingerprint_warning(const VectorIndex& index, const Corpus& corpus);

}  // namespace lexreport
