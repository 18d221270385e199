#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "lexreport/corpus.hpp"
#include "lexreport/indexer.hpp"
#include "lexreport/providers.hpp"

namespace lexreport {

enum class RetrievalMode { Mmr, Relevance };

std::string_view to_string(RetrievalMode mode) noexcept;
RetrievalMode parse_retrieval_mode(std::string_view s);

struct RetrievalParams {
  std::size_t k = 100;        // paragraphs finally selected
  std::size_t fetch_k = 200;  // candidate pool size
  double lambda = 0.5;        // relevance/diversity trade-off
  double sim_threshold = 0.2;
  RetrievalMode mode = RetrievalMode::Mmr;

  /// Full range check (threshold in [-1, 1] included). Throws InvalidParams.
  void validate() const;
  bool operator==(const RetrievalParams&) const = default;
};

struct ParagraphHit {
  ParagraphRef ref;
  double query_similarity = 0.0;
  std::size_t rank = 0;

  bool operator==(const ParagraphHit&) const = default;
};

/// dot(a, b) / (|a| |b|), clamped to [-1, 1]; 0 when either norm is 0.
double cosine(std::span<const float> a, std::span<const float> b);

/// Greedy Maximal Marginal Relevance over precomputed similarities.
///
/// The first pick maximizes query_sims alone; every later pick maximizes
///   lambda * query_sims[d] - (1 - lambda) * max_{s selected} pair_sim(d, s).
/// Equal scores go to the candidate with the smaller ref. Returns
/// min(k, n) candidate positions in selection order.
std::vector<std::size_t> mmr_select_indices(std::span<const double> query_sims,
                                            const std::function<double(std::size_t, std::size_t)>& pair_sim,
                                            std::span<const ParagraphRef> refs, std::size_t k, double lambda);

struct MmrCandidate {
  ParagraphRef ref;
  std::span<const float> vector;
};

std::vector<ParagraphRef> mmr_select(std::span<const float> query, std::span<const MmrCandidate> candidates,
                                     std::size_t k, double lambda);

/// Cosine ranking of every record: similarity descending, ref ascending.
std::vector<ParagraphHit> rank_by_similarity(const VectorIndex& index, std::span<const float> query);

/// Query-time search with a precomputed query vector.
std::vector<ParagraphHit> search_vector(const VectorIndex& index, std::span<const float> query,
                                        const RetrievalParams& params);

/// Embeds the query, gathers candidates with cosine >= sim_threshold (top
/// fetch_k), then picks k by MMR or by plain relevance.
std::vector<ParagraphHit> search(const VectorIndex& index, Embedder& embedder, std::string_view query,
                                 const RetrievalParams& params);

/// ref -> position in index.records.
std::map<ParagraphRef, std::size_t> record_positions(const VectorIndex& index);

}  // namespace lexreport
