#include "lexreport/params.hpp"

#include <type_traits>
#include <vector>

#include <nlohmann/json.hpp>

#include "lexreport/error.hpp"
#include "lexreport/text.hpp"

namespace lexreport {

namespace {

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key) || j[key].is_null()) return;
  if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
    if (!j[key].is_number_unsigned()) throw Error(ErrorCode::InvalidParams, std::string("'") + key + "' must be a non-negative integer");
  }
  try {
    out = j[key].get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::InvalidParams, std::string("bad value for '") + key + "'");
  }
}

}  // namespace

void PipelineParams::validate() const {
  if (keyphrase_batch == 0) throw Error(ErrorCode::InvalidParams, "keyphrase_batch must be >= 1");
  if (representatives == 0 || representatives > 5) throw Error(ErrorCode::InvalidParams, "representatives must be in 1..5");
  retrieval.validate();
  cluster.validate();
  gen.validate();
}

std::string system_name(const PipelineParams& params) {
  std::vector<std::string> parts;
  if (params.index_mode == IndexMode::Paragraph) parts.emplace_back("paragraph-based");
  if (params.retrieval.mode == RetrievalMode::Relevance) parts.emplace_back("w/o-mmr");
  if (!params.reorganize) parts.emplace_back("w/o-reorganization");
  return parts.empty() ? "full" : text::join(parts, "+");
}

nlohmann::json params_to_json(const PipelineParams& p) {
  nlohmann::json j;
  j["index_mode"] = std::string(to_string(p.index_mode));
  j["keyphrase_batch"] = p.keyphrase_batch;
  j["retrieval"] = {{"k", p.retrieval.k},
                    {"fetch_k", p.retrieval.fetch_k},
                    {"lambda", p.retrieval.lambda},
                    {"sim_threshold", p.retrieval.sim_threshold},
                    {"mode", std::string(to_string(p.retrieval.mode))}};
  j["cluster"] = {{"min_cluster_size", p.cluster.min_cluster_size},
                  {"min_samples", p.cluster.min_samples ? nlohmann::json(*p.cluster.min_samples)
                                                        : nlohmann::json(nullptr)}};
  j["reorganize"] = p.reorganize;
  j["gen"] = {{"per_section_m", p.gen.per_section_m},
              {"batch_size", p.gen.batch_size},
              {"max_iterations", p.gen.max_iterations}};
  j["representatives"] = p.representatives;
  return j;
}

PipelineParams params_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidParams, "params must be a JSON object");
  PipelineParams p;
  std::string s;
  if (j.contains("index_mode")) {
    read(j, "index_mode", s);
    p.index_mode = parse_index_mode(s);
  }
  read(j, "keyphrase_batch", p.keyphrase_batch);
  if (j.contains("retrieval")) {
    const auto& r = j["retrieval"];
    if (!r.is_object()) throw Error(ErrorCode::InvalidParams, "retrieval params must be an object");
    read(r, "k", p.retrieval.k);
    read(r, "fetch_k", p.retrieval.fetch_k);
    read(r, "lambda", p.retrieval.lambda);
    read(r, "sim_threshold", p.retrieval.sim_threshold);
    if (r.contains("mode")) {
      read(r, "mode", s);
      p.retrieval.mode = parse_retrieval_mode(s);
    }
  }
  if (j.contains("cluster")) {
    const auto& c = j["cluster"];
    if (!c.is_object()) throw Error(ErrorCode::InvalidParams, "cluster params must be an object");
    read(c, "min_cluster_size", p.cluster.min_cluster_size);
    if (c.contains("min_samples") && !c["min_samples"].is_null()) {
      std::size_t ms = 0;
      read(c, "min_samples", ms);
      p.cluster.min_samples = ms;
    }
  }
  read(j, "reorganize", p.reorganize);
  if (j.contains("gen")) {
    const auto& g = j["gen"];
    if (!g.is_object()) throw Error(ErrorCode::InvalidParams, "gen params must be an object");
    read(g, "per_section_m", p.gen.per_section_m);
    read(g, "batch_size", p.gen.batch_size);
    read(g, "max_iterations", p.gen.max_iterations);
  }
  read(j, "representatives", p.representatives);
  p.validate();
  return p;
}

}  // namespace lexreport
