#include "lexreport/report.hpp"

#include <cctype>
#include <chrono>
#include <ctime>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lexreport/error.hpp"
#include "lexreport/text.hpp"

namespace lexreport {

namespace {

constexpr std::size_t kMaxHeadingLevel = 3;
constexpr std::string_view kPartialNote = "_[Generation stopped early; this section is incomplete]_";

std::string percent_encode(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(ch);
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xF]);
    }
  }
  return out;
}

std::string html_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string anchor_id(std::string_view node_id) {
  std::string out = "sec-";
  for (char c : node_id) {
    const auto u = static_cast<unsigned char>(c);
    out.push_back(std::isalnum(u) || c == '-' || c == '_' || c == '.' ? c : '_');
  }
  return out;
}

// Rewrites citation tokens of `text`; escape() is applied to the text between them.
std::string rewrite_citations(std::string_view text, const SectionDraft& draft,
                              const std::function<std::string(std::string_view)>& escape,
                              const std::function<std::string(const ParagraphRef&)>& resolved,
                              const std::function<std::string(const ParagraphRef&)>& unresolved) {
  const std::set<ParagraphRef> ok(draft.citations.begin(), draft.citations.end());
  std::string out;
  std::size_t pos = 0;
  for (const auto& span : find_citation_spans(text)) {
    out += escape(text.substr(pos, span.offset - pos));
    out += ok.count(span.ref) ? resolved(span.ref) : unresolved(span.ref);
    pos = span.offset + span.length;
  }
  out += escape(text.substr(pos));
  return out;
}

std::string citation_label(const ParagraphRef& ref) {
  return "(" + ref.judgment_id + " § " + std::to_string(ref.number) + ")";
}

std::vector<std::string> text_blocks(std::string_view text) {
  std::vector<std::string> blocks;
  std::string cur;
  for (const auto& line : text::split_lines(text)) {
    if (text::trim(line).empty()) {
      if (!cur.empty()) blocks.push_back(std::move(cur));
      cur.clear();
    } else {
      if (!cur.empty()) cur += '\n';
      cur += text::trim(line);
    }
  }
  if (!cur.empty()) blocks.push_back(std::move(cur));
  return blocks;
}

nlohmann::json refs_to_json(const std::vector<ParagraphRef>& refs) {
  auto arr = nlohmann::json::array();
  for (const auto& r : refs) arr.push_back(r.token());
  return arr;
}

std::vector<ParagraphRef> refs_from_json(const nlohmann::json& j) {
  std::vector<ParagraphRef> out;
  for (const auto& t : j) out.push_back(parse_ref_token(t.get<std::string>()));
  return out;
}

void mark_leaves(const std::vector<OutlineNode>& nodes, std::set<std::string>& leaves) {
  for (const auto& n : nodes) {
    if (n.is_leaf()) leaves.insert(n.node_id);
    mark_leaves(n.children, leaves);
  }
}

}  // namespace

std::vector<std::string> Report::missing_sections() const {
  std::vector<std::string> out;
  if (!outline) return out;
  for (const auto* leaf : outline->leaves()) {
    if (!sections.count(leaf->node_id)) out.push_back(leaf->node_id);
  }
  return out;
}

Report assemble(const Outline& outline, std::map<std::string, SectionDraft> drafts) {
  std::set<std::string> leaves;
  mark_leaves(outline.roots, leaves);
  for (const auto& [id, draft] : drafts) {
    if (!leaves.count(id)) throw Error(ErrorCode::UnknownLeafId, "draft for '" + id + "', which is not an outline leaf");
  }
  Report r;
  r.outline = outline;
  r.sections = std::move(drafts);
  return r;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void check_link_template(std::string_view link_template) {
  if (link_template.find("{id}") == std::string_view::npos) {
    throw Error(ErrorCode::BadTemplate, "link template must contain {id}: '" + std::string(link_template) + "'");
  }
}

std::string citation_link(std::string_view link_template, const ParagraphRef& ref) {
  check_link_template(link_template);
  std::string out;
  for (std::size_t i = 0; i < link_template.size();) {
    if (link_template.substr(i, 4) == "{id}") {
      out += percent_encode(ref.judgment_id);
      i += 4;
    } else if (link_template.substr(i, 6) == "{para}") {
      out += std::to_string(ref.number);
      i += 6;
    } else {
      out.push_back(link_template[i++]);
    }
  }
  return out;
}

std::string render_markdown(const Report& report, std::string_view link_template) {
  check_link_template(link_template);
  std::string out = "**Query:** " + text::collapse_whitespace(report.query) + "\n";
  if (!report.outline) return out + "\n_[No outline]_\n";

  std::function<void(const std::vector<OutlineNode>&, std::size_t)> walk = [&](const std::vector<OutlineNode>& nodes,
                                                                             std::size_t depth) {
    for (const auto& n : nodes) {
      out += "\n" + std::string(std::min(depth, kMaxHeadingLevel), '#') + " " + n.title + "\n";
      if (n.is_leaf()) {
        const auto it = report.sections.find(n.node_id);
        if (it == report.sections.end()) {
          out += "\n" + std::string(kNotGeneratedMarker) + "\n";
        } else {
          const auto body = rewrite_citations(
              text::trim(it->second.text), it->second, [](std::string_view s) { return std::string(s); },
              [&](const ParagraphRef& r) { return "[" + citation_label(r) + "](" + citation_link(link_template, r) + ")"; },
              [](const ParagraphRef& r) { return "⚠(" + r.token() + ")"; });
          if (!body.empty()) out += "\n" + body + "\n";
          if (it->second.partial) out += "\n" + std::string(kPartialNote) + "\n";
        }
      }
      walk(n.children, depth + 1);
    }
  };
  walk(report.outline->roots, 1);
  return out;
}

std::string render_html(const Report& report, std::string_view link_template) {
  check_link_template(link_template);
  std::ostringstream out;
  const auto query = text::collapse_whitespace(report.query);
  out << "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>" << html_escape(query)
      << "</title>\n<style>\n"
      << "body{font-family:Georgia,serif;max-width:50em;margin:2em auto;line-height:1.5}\n"
      << "nav ul{list-style:none;padding-left:1.2em}\n"
      << ".unresolved{color:#b00020}\n.not-generated,.partial{color:#777;font-style:italic}\n"
      << "@media print{nav{display:none}}\n"
      << "</style>\n</head>\n<body>\n";
  out << "<p class=\"query\"><strong>Query:</strong> " << html_escape(query) << "</p>\n";
  if (!report.outline) {
    out << "<p class=\"not-generated\">No outline</p>\n</body>\n</html>\n";
    return out.str();
  }

  std::function<void(const std::vector<OutlineNode>&)> nav = [&](const std::vector<OutlineNode>& nodes) {
    out << "<ul>\n";
    for (const auto& n : nodes) {
      out << "<li><a href=\"#" << anchor_id(n.node_id) << "\">" << html_escape(n.title) << "</a>";
      if (!n.children.empty()) {
        out << "\n";
        nav(n.children);
      }
      out << "</li>\n";
    }
    out << "</ul>\n";
  };
  out << "<nav>\n";
  nav(report.outline->roots);
  out << "</nav>\n<main>\n";

  std::function<void(const std::vector<OutlineNode>&, std::size_t)> walk = [&](const std::vector<OutlineNode>& nodes,
                                                                             std::size_t depth) {
    for (const auto& n : nodes) {
      const auto level = std::to_string(std::min(depth, kMaxHeadingLevel));
      out << "<section id=\"" << anchor_id(n.node_id) << "\">\n<h" << level << ">" << html_escape(n.title) << "</h"
          << level << ">\n";
      if (n.is_leaf()) {
        const auto it = report.sections.find(n.node_id);
        if (it == report.sections.end()) {
          out << "<p class=\"not-generated\">Section not generated</p>\n";
        } else {
          for (const auto& block : text_blocks(it->second.text)) {
            out << "<p>"
                << rewrite_citations(
                       block, it->second, [](std::string_view s) { return html_escape(s); },
                       [&](const ParagraphRef& r) {
                         return "<a href=\"" + html_escape(citation_link(link_template, r)) + "\">" +
                                html_escape(citation_label(r)) + "</a>";
                       },
                       [](const ParagraphRef& r) {
                         return "<span class=\"unresolved\">⚠(" + html_escape(r.token()) + ")</span>";
                       })
                << "</p>\n";
          }
          if (it->second.partial) out << "<p class=\"partial\">Generation stopped early; this section is incomplete</p>\n";
        }
      }
      walk(n.children, depth + 1);
      out << "</section>\n";
    }
  };
  walk(report.outline->roots, 1);
  out << "</main>\n</body>\n</html>\n";
  return out.str();
}

ParagraphRef parse_ref_token(std::string_view token) {
  const auto hash = token.rfind('#');
  if (hash == std::string_view::npos || hash == 0 || hash + 1 == token.size()) {
    throw Error(ErrorCode::InvalidParams, "paragraph ref must look like id#number: '" + std::string(token) + "'");
  }
  std::uint64_t n = 0;
  for (char c : token.substr(hash + 1)) {
    if (c < '0' || c > '9' || n > 0xFFFFFFFFULL) throw Error(ErrorCode::InvalidParams, "bad paragraph number in '" + std::string(token) + "'");
    n = n * 10 + static_cast<std::uint64_t>(c - '0');
  }
  if (n > 0xFFFFFFFFULL) throw Error(ErrorCode::InvalidParams, "bad paragraph number in '" + std::string(token) + "'");
  return {std::string(token.substr(0, hash)), static_cast<std::uint32_t>(n)};
}

nlohmann::json section_to_json(const SectionDraft& d) {
  return {{"node_id", d.node_id},       {"text", d.text},
          {"citations", refs_to_json(d.citations)}, {"unresolved", refs_to_json(d.unresolved)},
          {"provided", refs_to_json(d.provided)},   {"iterations", d.iterations},
          {"partial", d.partial},       {"truncated", d.truncated},
          {"error", d.error}};
}

SectionDraft section_from_json(const nlohmann::json& j) {
  SectionDraft d;
  d.node_id = j.at("node_id").get<std::string>();
  d.text = j.at("text").get<std::string>();
  d.citations = refs_from_json(j.at("citations"));
  d.unresolved = refs_from_json(j.at("unresolved"));
  d.provided = refs_from_json(j.at("provided"));
  d.iterations = j.at("iterations").get<std::size_t>();
  d.partial = j.at("partial").get<bool>();
  d.truncated = j.at("truncated").get<bool>();
  d.error = j.at("error").get<std::string>();
  return d;
}

nlohmann::json hit_to_json(const ParagraphHit& h) {
  return {{"ref", h.ref.token()}, {"judgment_id", h.ref.judgment_id}, {"number", h.ref.number},
          {"similarity", h.query_similarity}, {"rank", h.rank}};
}

nlohmann::json report_to_json(const Report& r) {
  nlohmann::json j;
  j["version"] = kSessionVersion;
  j["session_id"] = r.session_id;
  j["query"] = r.query;
  j["params_snapshot"] = params_to_json(r.params);
  j["created_at"] = r.created_at;
  j["hits"] = nlohmann::json::array();
  for (const auto& h : r.hits) j["hits"].push_back(hit_to_json(h));
  j["outline"] = r.outline ? outline_to_json(*r.outline) : nlohmann::json(nullptr);
  j["sections"] = nlohmann::json::object();
  for (const auto& [id, d] : r.sections) j["sections"][id] = section_to_json(d);
  j["stages"] = nlohmann::json::object();
  for (const auto& [name, st] : r.stages) j["stages"][name] = {{"state", st.state}, {"error", st.error}};
  return j;
}

Report report_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object()) throw Error(ErrorCode::CorruptSession, "session must be a JSON object");
    if (j.at("version").get<int>() != kSessionVersion) {
      throw Error(ErrorCode::CorruptSession, "unsupported session version " + j.at("version").dump());
    }
    Report r;
    r.session_id = j.at("session_id").get<std::string>();
    r.query = j.at("query").get<std::string>();
    r.params = params_from_json(j.at("params_snapshot"));
    r.created_at = j.at("created_at").get<std::string>();
    for (const auto& h : j.at("hits")) {
      r.hits.push_back({parse_ref_token(h.at("ref").get<std::string>()), h.at("similarity").get<double>(),
                        h.at("rank").get<std::size_t>()});
    }
    if (!j.at("outline").is_null()) r.outline = outline_from_json(j.at("outline"));
    for (const auto& [id, d] : j.at("sections").items()) r.sections.emplace(id, section_from_json(d));
    for (const auto& [name, st] : j.at("stages").items()) {
      r.stages.emplace(name, StageStatus{st.at("state").get<std::string>(), st.at("error").get<std::string>()});
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptSession, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::CorruptSession) throw;
    throw Error(ErrorCode::CorruptSession, e.what());
  }
}

void save_session(const Report& report, const std::filesystem::path& path) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + tmp);
    f << report_to_json(report).dump(2) << '\n';
    if (!f) throw Error(ErrorCode::IoError, "write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot move session into place at " + path.string() + ": " + ec.message());
}

Report load_session(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::FileNotFound, "session file not found: " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptSession, path.string() + ": " + e.what());
  }
  return report_from_json(j);
}

}  // namespace lexreport
