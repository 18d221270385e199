#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lexreport/clustering.hpp"
#include "lexreport/contentgen.hpp"
#include "lexreport/corpus.hpp"
#include "lexreport/evalsuite.hpp"
#include "lexreport/indexer.hpp"
#include "lexreport/outline.hpp"
#include "lexreport/params.hpp"
#include "lexreport/providers.hpp"
#include "lexreport/report.hpp"
#include "lexreport/retrieval.hpp"

namespace lexreport {

/// Chat and embedding backends for one run. `chat` records every call
/// into `trace`.
struct Providers {
  std::shared_ptr<ChatProvider> chat;
  std::shared_ptr<Embedder> embedder;
  std::shared_ptr<CallTrace> trace;
};

/// Offline deterministic providers (MockChat seeded with the corpus' token statistics).
Providers make_mock_providers(const Corpus& corpus);

/// OpenAI-compatible HTTP providers.
Providers make_http_providers(const ProviderConfig& chat, const ProviderConfig& embedding, const LogFn& log = {});

/// Retrieval for a new report: validated params, search, hits.
Report start_report(std::string_view query, const PipelineParams& params, const VectorIndex& index,
                    Embedder& embedder);

struct OutlineBuild {
  Outline outline;
  ClusterResult clusters;
  std::vector<TitledCluster> titled;
  std::optional<std::string> raw_toc;   // reorganize reply, when that step ran
  bool single_cluster_fallback = false;  // clustering found no structure
};

/// Clusters the hit embeddings, labels headings (selected clusters) and
/// subheadings (their condensed-tree children), then reorganizes or
/// concatenates. Noise points do not contribute headings.
OutlineBuild build_outline(const Corpus& corpus, const VectorIndex& index, const std::vector<ParagraphHit>& hits,
                           const PipelineParams& params, ChatProvider& chat, std::size_t workers = 4);

/// Path query, section retrieval, incremental generation and citation
/// validation for one leaf.
SectionDraft generate_leaf(const Corpus& corpus, const VectorIndex& index, Embedder& embedder, ChatProvider& chat,
                           const Outline& outline, std::string_view leaf_id, const GenParams& params);

struct LeafFailure {
  std::string node_id;
  std::string error;
};

/// Generates every leaf (concurrently, up to `workers`). Successful drafts
/// are stored in report.sections; failures are returned per node.
std::vector<LeafFailure> generate_all(Report& report, const Corpus& corpus, const VectorIndex& index,
                                      Embedder& embedder, ChatProvider& chat, std::size_t workers = 4);

/// Structure evaluation of a finished report (system = system_name(params)).
std::vector<EvalResult> evaluate_structure(const Report& report, const std::optional<std::string>& reference_toc,
                                           ChatProvider& judge);

/// Content evaluation of every drafted section, cited paragraphs pulled from the corpus.
std::vector<EvalResult> evaluate_content(const Report& report, const Corpus& corpus,
                                         const std::optional<std::string>& reference_content, ChatProvider& judge);

}  // namespace lexreport
