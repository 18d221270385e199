#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lexreport/outline.hpp"
#include "lexreport/providers.hpp"

namespace lexreport {

enum class EvalDimension {
  StructureTopicalRelevance,
  SubtopicConsistency,
  ClusterDistinction,
  NarrativeFlow,
  ComprehensivenessTopics,
  ContentTopicalRelevance,
  ContentOrganization,
  CitationFaithfulness,
  Comprehensiveness,
};

inline constexpr std::array<EvalDimension, 5> kStructureDimensions = {
    EvalDimension::StructureTopicalRelevance, EvalDimension::SubtopicConsistency, EvalDimension::ClusterDistinction,
    EvalDimension::NarrativeFlow, EvalDimension::ComprehensivenessTopics};
inline constexpr std::array<EvalDimension, 4> kContentDimensions = {
    EvalDimension::ContentTopicalRelevance, EvalDimension::ContentOrganization, EvalDimension::CitationFaithfulness,
    EvalDimension::Comprehensiveness};

/// "structure.topical_relevance", ..., "content.comprehensiveness".
std::string_view to_string(EvalDimension d) noexcept;
EvalDimension parse_eval_dimension(std::string_view s);

struct EvalResult {
  EvalDimension dimension = EvalDimension::StructureTopicalRelevance;
  std::optional<int> score;  // 1..5; nullopt = not evaluable
  std::string rationale;     // raw judge reply, or the reason it could not be scored
  std::string inputs_fingerprint;
  bool low_evidence = false;
  std::string system;
  std::string item;  // query or heading the result belongs to

  bool operator==(const EvalResult&) const = default;
};

/// Integer score from a judge reply. If the reply contains "Score:", the
/// value after the last occurrence is used; otherwise the first number in
/// the text. The value must be a plain integer in 1..5 (no sign, no
/// decimals); anything else throws ScoreParseFailure.
int parse_score(std::string_view reply);

/// Judge prompt for one dimension: criterion, evaluation steps, subject.
ChatRequest judge_request(EvalDimension dimension, std::string_view subject, std::string_view evidence);

/// Structure evaluation: one judge call per dimension over the serialized
/// outline. comprehensiveness_topics needs `reference_toc`.
std::vector<EvalResult> eval_structure(std::string_view query, const Outline& outline,
                                       const std::optional<std::string>& reference_toc, ChatProvider& judge);

/// Content evaluation of one section. citation_faithfulness sees the cited
/// paragraph texts (flagged low_evidence when there are none);
/// comprehensiveness needs `reference_content`.
std::vector<EvalResult> eval_content(std::string_view heading, std::string_view content,
                                     std::span<const std::string> cited_paragraph_texts,
                                     const std::optional<std::string>& reference_content, ChatProvider& judge);

struct AggregateRow {
  std::string system;
  EvalDimension dimension = EvalDimension::StructureTopicalRelevance;
  std::optional<double> mean;  // nullopt when nothing was evaluable
  std::size_t evaluated = 0;
  std::size_t total = 0;
};

/// Mean per (system, dimension) over evaluable results. Rows are ordered
/// by system name, then dimension.
std::vector<AggregateRow> aggregate(std::span<const EvalResult> results);

/// Mean rounded to two decimals ("4.00"), or "n/a".
std::string format_mean(const std::optional<double>& mean);

/// "system,dimension,mean,n" rows.
std::string aggregate_csv(std::span<const AggregateRow> rows);
/// Plain-text grid: one row per system, one column per dimension present.
std::string aggregate_table(std::span<const AggregateRow> rows);

nlohmann::json result_to_json(const EvalResult& r);
std::string results_jsonl(std::span<const EvalResult> results);

}  // namespace lexreport
