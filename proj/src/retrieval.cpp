#include "lexreport/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lexreport/error.hpp"
#include "lexreport/text.hpp"

namespace lexreport {

namespace {

void check_search_params(const RetrievalParams& p) {
  if (p.k == 0) throw Error(ErrorCode::InvalidParams, "k must be >= 1");
  if (p.fetch_k < p.k) throw Error(ErrorCode::InvalidParams, "fetch_k must be >= k");
  if (!(p.lambda >= 0.0 && p.lambda <= 1.0)) throw Error(ErrorCode::InvalidParams, "lambda must be in [0, 1]");
  if (std::isnan(p.sim_threshold)) throw Error(ErrorCode::InvalidParams, "sim_threshold is NaN");
}

}  // namespace

std::string_view to_string(RetrievalMode mode) noexcept {
  return mode == RetrievalMode::Mmr ? "mmr" : "relevance";
}

RetrievalMode parse_retrieval_mode(std::string_view s) {
  if (s == "mmr") return RetrievalMode::Mmr;
  if (s == "relevance") return RetrievalMode::Relevance;
  throw Error(ErrorCode::InvalidParams, "retrieval mode must be mmr|relevance, got '" + std::string(s) + "'");
}

void RetrievalParams::validate() const {
  check_search_params(*this);
  if (!(sim_threshold >= -1.0 && sim_threshold <= 1.0)) {
    throw Error(ErrorCode::InvalidParams, "sim_threshold must be in [-1, 1]");
  }
}

double cosine(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "cosine of vectors with dimensions " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

std::vector<std::size_t> mmr_select_indices(std::span<const double> query_sims,
                                            const std::function<double(std::size_t, std::size_t)>& pair_sim,
                                            std::span<const ParagraphRef> refs, std::size_t k, double lambda) {
  const std::size_t n = query_sims.size();
  if (refs.size() != n) throw Error(ErrorCode::InvalidParams, "mmr: refs and similarities differ in length");
  const std::size_t want = std::min(k, n);
  std::vector<std::size_t> selected;
  selected.reserve(want);
  std::vector<bool> taken(n, false);
  // Running max similarity of each candidate to the selected set.
  std::vector<double> redundancy(n, -std::numeric_limits<double>::infinity());

  while (selected.size() < want) {
    std::size_t best = n;
    double best_score = 0.0;
    for (std::size_t d = 0; d < n; ++d) {
      if (taken[d]) continue;
      const double score =
          selected.empty() ? query_sims[d] : lambda * query_sims[d] - (1.0 - lambda) * redundancy[d];
      if (best == n || score > best_score || (score == best_score && refs[d] < refs[best])) {
        best = d;
        best_score = score;
      }
    }
    taken[best] = true;
    selected.push_back(best);
    for (std::size_t d = 0; d < n; ++d) {
      if (!taken[d]) redundancy[d] = std::max(redundancy[d], pair_sim(d, best));
    }
  }
  return selected;
}

std::vector<ParagraphRef> mmr_select(std::span<const float> query, std::span<const MmrCandidate> candidates,
                                     std::size_t k, double lambda) {
  std::vector<double> sims;
  std::vector<ParagraphRef> refs;
  sims.reserve(candidates.size());
  refs.reserve(candidates.size());
  for (const auto& c : candidates) {
    sims.push_back(cosine(query, c.vector));
    refs.push_back(c.ref);
  }
  const auto picked = mmr_select_indices(
      sims, [&](std::size_t a, std::size_t b) { return cosine(candidates[a].vector, candidates[b].vector); }, refs,
      k, lambda);
  std::vector<ParagraphRef> out;
  out.reserve(picked.size());
  for (auto i : picked) out.push_back(refs[i]);
  return out;
}

std::vector<ParagraphHit> rank_by_similarity(const VectorIndex& index, std::span<const float> query) {
  if (index.records.empty()) throw Error(ErrorCode::EmptyIndex, "index has no records");
  if (query.size() != index.dimension) {
    throw Error(ErrorCode::DimensionMismatch, "query dimension " + std::to_string(query.size()) +
                                                  " != index dimension " + std::to_string(index.dimension));
  }
  std::vector<ParagraphHit> hits;
  hits.reserve(index.records.size());
  for (const auto& r : index.records) hits.push_back({r.ref, cosine(query, r.vector), 0});
  std::sort(hits.begin(), hits.end(), [](const ParagraphHit& a, const ParagraphHit& b) {
    if (a.query_similarity != b.query_similarity) return a.query_similarity > b.query_similarity;
    return a.ref < b.ref;
  });
  for (std::size_t i = 0; i < hits.size(); ++i) hits[i].rank = i;
  return hits;
}

std::vector<ParagraphHit> search_vector(const VectorIndex& index, std::span<const float> query,
                                        const RetrievalParams& params) {
  check_search_params(params);
  auto ranked = rank_by_similarity(index, query);
  std::vector<ParagraphHit> pool;
  for (auto& h : ranked) {
    if (pool.size() == params.fetch_k || h.query_similarity < params.sim_threshold) break;
    pool.push_back(std::move(h));
  }
  if (pool.empty()) {
    throw Error(ErrorCode::NoCandidates, "no paragraph reaches similarity threshold " +
                                             std::to_string(params.sim_threshold));
  }

  std::vector<ParagraphHit> out;
  if (params.mode == RetrievalMode::Relevance) {
    pool.resize(std::min(params.k, pool.size()));
    out = std::move(pool);
  } else {
    const auto positions = record_positions(index);
    std::vector<double> sims;
    std::vector<ParagraphRef> refs;
    std::vector<const EmbeddingVector*> vecs;
    for (const auto& h : pool) {
      sims.push_back(h.query_similarity);
      refs.push_back(h.ref);
      vecs.push_back(&index.records[positions.at(h.ref)].vector);
    }
    const auto picked = mmr_select_indices(
        sims, [&](std::size_t a, std::size_t b) { return cosine(*vecs[a], *vecs[b]); }, refs, params.k,
        params.lambda);
    for (auto i : picked) out.push_back(pool[i]);
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = i;
  return out;
}

std::vector<ParagraphHit> search(const VectorIndex& index, Embedder& embedder, std::string_view query,
                                 const RetrievalParams& params) {
  if (text::trim(query).empty()) throw Error(ErrorCode::EmptyQuery, "search query is empty");
  if (index.records.empty()) throw Error(ErrorCode::EmptyIndex, "index has no records");
  const auto qv = embedder.embed_one(query);
  return search_vector(index, qv, params);
}

std::map<ParagraphRef, std::size_t> record_positions(const VectorIndex& index) {
  std::map<ParagraphRef, std::size_t> out;
  for (std::size_t i = 0; i < index.records.size(); ++i) out.emplace(index.records[i].ref, i);
  return out;
}

}  // namespace lexreport
