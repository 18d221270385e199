#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lexreport/contentgen.hpp"
#include "lexreport/outline.hpp"
#include "lexreport/params.hpp"
#include "lexreport/retrieval.hpp"

namespace lexreport {

inline constexpr int kSessionVersion = 1;
inline constexpr const char* kFixedTimestamp = "1970-01-01T00:00:00Z";

/// Progress of one pipeline stage: "idle" | "running" | "done" | "failed".
struct StageStatus {
  std::string state = "idle";
  std::string error;

  bool operator==(const StageStatus&) const = default;
};

/// A report under construction; also the session file contents.
struct Report {
  std::string session_id;
  std::string query;
  PipelineParams params;  // params_snapshot
  std::string created_at;
  std::vector<ParagraphHit> hits;  // curated retrieval results
  std::optional<Outline> outline;
  std::map<std::string, SectionDraft> sections;  // leaf node_id -> draft
  std::map<std::string, StageStatus> stages;     // "retrieval", "outline", "generate"

  bool operator==(const Report&) const = default;

  /// Leaf ids without a draft.
  std::vector<std::string> missing_sections() const;
};

/// Builds a report from an outline and drafts. Throws UnknownLeafId for a
/// draft keyed by an id that is not a leaf of the outline.
Report assemble(const Outline& outline, std::map<std::string, SectionDraft> drafts);

/// Current UTC time, ISO 8601 with seconds.
std::string utc_timestamp();

/// Substitutes {id} and {para} in the link template. {id} is required;
/// BadTemplate otherwise.
std::string citation_link(std::string_view link_template, const ParagraphRef& ref);
void check_link_template(std::string_view link_template);

/// Markdown: headings by depth (#, ##, ###, deeper stays ###), resolved
/// citations as "[(id § n)](link)", unresolved ones as "⚠(id#n)", leaves
/// without a draft marked as not generated.
std::string render_markdown(const Report& report, std::string_view link_template = kDefaultLinkTemplate);

/// Standalone HTML5 document with a nav list mirroring the outline.
std::string render_html(const Report& report, std::string_view link_template = kDefaultLinkTemplate);

inline constexpr std::string_view kNotGeneratedMarker = "_[Section not generated]_";

nlohmann::json section_to_json(const SectionDraft& draft);
SectionDraft section_from_json(const nlohmann::json& j);
nlohmann::json hit_to_json(const ParagraphHit& hit);

nlohmann::json report_to_json(const Report& report);
/// Throws CorruptSession on schema violations or a wrong version.
Report report_from_json(const nlohmann::json& j);

/// Pretty-printed JSON, written via a temporary file and rename.
void save_session(const Report& report, const std::filesystem::path& path);
/// Throws FileNotFound or CorruptSession.
Report load_session(const std::filesystem::path& path);

/// "id#n" -> ParagraphRef (split at the last '#'). Throws InvalidParams.
ParagraphRef parse_ref_token(std::string_view token);

}  // namespace lexreport
