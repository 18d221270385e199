#pragma once

#include <cstddef>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "lexreport/clustering.hpp"
#include "lexreport/contentgen.hpp"
#include "lexreport/indexer.hpp"
#include "lexreport/retrieval.hpp"

namespace lexreport {

inline constexpr const char* kDefaultLinkTemplate = "https://hudoc.echr.coe.int/eng?i={id}";

/// Every stage parameter of one pipeline run. Recorded in each report as
/// its params_snapshot, so ablations are visible in the output.
struct PipelineParams {
  IndexMode index_mode = IndexMode::Keyphrase;
  std::size_t keyphrase_batch = kDefaultKeyphraseBatch;
  RetrievalParams retrieval;
  ClusterParams cluster;
  bool reorganize = true;
  GenParams gen;
  std::size_t representatives = 5;

  void validate() const;
  bool operator==(const PipelineParams&) const = default;
};

/// Row label used in evaluation tables: "full", "paragraph-based",
/// "w/o-mmr", "w/o-reorganization", or a "+"-joined combination.
std::string system_name(const PipelineParams& params);

nlohmann::json params_to_json(const PipelineParams& params);
/// Missing keys keep their defaults. Throws InvalidParams on bad values.
PipelineParams params_from_json(const nlohmann::json& j);

}  // namespace lexreport
