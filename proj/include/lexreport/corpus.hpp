#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "lexreport/hashing.hpp"

namespace lexreport {

/// Address of one numbered paragraph inside a judgment, e.g. ("001-57574", 12).
struct ParagraphRef {
  std::string judgment_id;
  std::uint32_t number = 0;

  auto operator<=>(const ParagraphRef&) const = default;
  bool operator==(const ParagraphRef&) const = default;

  /// Citation token body: "judgment_id#number".
  std::string token() const { return judgment_id + "#" + std::to_string(number); }
};

struct Paragraph {
  std::string judgment_id;
  std::uint32_t number = 0;
  std::string text;

  ParagraphRef ref() const { return {judgment_id, number}; }
};

struct Judgment {
  std::string item_id;
  std::string case_name;
  std::string date;
  std::vector<Paragraph> paragraphs;
};

struct RejectedRecord {
  std::size_t line = 0;
  std::string reason;

  bool operator==(const RejectedRecord&) const = default;
};

struct CorpusStats {
  std::size_t judgment_count = 0;
  std::size_t paragraph_count = 0;
  std::vector<RejectedRecord> rejected_records;

  bool operator==(const CorpusStats&) const = default;
};

struct FuzzyMatch {
  ParagraphRef ref;
  double score = 0.0;
};

/// Immutable, paragraph-segmented case-law collection.
///
/// Loaded from line-delimited JSON, one judgment per line:
///   {"item_id": "...", "case_name": "...", "date": "YYYY-MM-DD",
///    "paragraphs": [{"number": 1, "text": "..."}, ...]}
/// Malformed lines are skipped and reported in stats().rejected_records.
/// All accessors are const and safe to call from any number of threads.
class Corpus {
 public:
  static Corpus ingest(const std::filesystem::path& path);
  static Corpus from_jsonl(std::string_view content);

  const CorpusStats& stats() const noexcept { return stats_; }
  const std::vector<Judgment>& judgments() const noexcept { return judgments_; }
  /// SHA-256 of the raw bytes the corpus was loaded from.
  const Sha256Digest& fingerprint() const noexcept { return fingerprint_; }

  const Judgment& judgment(std::string_view item_id) const;
  const Paragraph& get_paragraph(const ParagraphRef& ref) const;
  bool contains(const ParagraphRef& ref) const noexcept;
  /// Every paragraph ref, judgments in file order, paragraphs ascending.
  std::vector<ParagraphRef> refs() const;

  /// Character-trigram Jaccard search over case name and paragraph prefix.
  /// Score of a paragraph = max(J(query, case_name),
  ///                            J(query, case_name + " " + first 500 chars)).
  /// Sorted by score descending, then ref ascending.
  std::vector<FuzzyMatch> fuzzy_search(std::string_view query, std::size_t limit) const;

  /// Serializes back to the ingest format (one judgment per line).
  std::string to_jsonl() const;
  void export_jsonl(const std::filesystem::path& path) const;

 private:
  struct SearchEntry {
    ParagraphRef ref;
    std::vector<std::uint64_t> name_grams;
    std::vector<std::uint64_t> field_grams;
  };

  std::vector<Judgment> judgments_;
  std::map<std::string, std::size_t, std::less<>> by_id_;
  std::vector<SearchEntry> search_;
  CorpusStats stats_;
  Sha256Digest fingerprint_{};
};

/// Sorted, de-duplicated code-point trigrams of the lowercased input.
/// Inputs shorter than three code points yield one gram (or none if empty).
std::vector<std::uint64_t> char_trigrams(std::string_view s);
double jaccard(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b);

}  // namespace lexreport
