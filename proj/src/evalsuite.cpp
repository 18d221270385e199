#include "lexreport/evalsuite.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "lexreport/error.hpp"
#include "lexreport/hashing.hpp"
#include "lexreport/text.hpp"

namespace lexreport {

namespace {

struct DimensionRubric {
  EvalDimension dimension;
  std::string_view name;
  std::string_view criterion;
  std::string_view steps;
};

constexpr DimensionRubric kRubrics[] = {
    {EvalDimension::StructureTopicalRelevance, "structure.topical_relevance",
     "Topical Relevance (1-5): every heading and subheading of the table of contents should bear on the "
     "research query. Headings unrelated to the query lower the score.",
     "1. Read the query and identify the legal issue it asks about.\n"
     "2. Check each heading against that issue.\n"
     "3. Assign a score from 1 to 5 based on the share of relevant headings."},
    {EvalDimension::SubtopicConsistency, "structure.subtopic_consistency",
     "Subtopic Consistency (1-5): subheadings should belong to the heading they are placed under and stay "
     "within its scope.",
     "1. For each heading, list its subheadings.\n"
     "2. Decide whether each subheading narrows its parent rather than drifting to another subject.\n"
     "3. Assign a score from 1 to 5."},
    {EvalDimension::ClusterDistinction, "structure.cluster_distinction",
     "Cluster Distinction (1-5): sections at the same level should cover distinct subjects with little "
     "overlap or repetition.",
     "1. Compare sibling headings pairwise.\n"
     "2. Note headings that repeat or largely overlap.\n"
     "3. Assign a score from 1 to 5; more overlap means a lower score."},
    {EvalDimension::NarrativeFlow, "structure.narrative_flow",
     "Narrative Flow (1-5): the order of sections should follow a logical progression a legal reader can "
     "follow, for example from general principles to specific applications.",
     "1. Read the headings in order.\n"
     "2. Judge whether each section follows sensibly from the previous one.\n"
     "3. Assign a score from 1 to 5."},
    {EvalDimension::ComprehensivenessTopics, "structure.comprehensiveness_topics",
     "Comprehensiveness of Topics (1-5): the table of contents should cover the topics of the reference "
     "structure written by experts.",
     "1. List the main topics of the reference structure.\n"
     "2. Check which of them the evaluated table of contents covers.\n"
     "3. Assign a score from 1 to 5 based on coverage."},
    {EvalDimension::ContentTopicalRelevance, "content.topical_relevance",
     "Topical Relevance (1-5): the section text should address the subject named by its heading.",
     "1. Identify the subject of the heading.\n"
     "2. Check whether each part of the text contributes to that subject.\n"
     "3. Assign a score from 1 to 5."},
    {EvalDimension::ContentOrganization, "content.content_organization",
     "Content Organization (1-5): the text should be coherent and well structured, with ideas presented "
     "in a sensible order and without needless repetition.",
     "1. Read the text and outline its argument.\n"
     "2. Look for jumps, contradictions and repetition.\n"
     "3. Assign a score from 1 to 5."},
    {EvalDimension::CitationFaithfulness, "content.citation_faithfulness",
     "Citation Faithfulness (1-5): every statement attributed to a cited paragraph should be supported by "
     "that paragraph's text.",
     "1. For each citation in the text, find the cited paragraph in the evidence.\n"
     "2. Decide whether the paragraph supports the statement it is attached to.\n"
     "3. Assign a score from 1 to 5 based on the share of supported citations."},
    {EvalDimension::Comprehensiveness, "content.comprehensiveness",
     "Comprehensiveness (1-5): the text should cover the principles and cases found in the reference "
     "content written by experts for the same heading.",
     "1. List the key points of the reference content.\n"
     "2. Check which of them the evaluated text covers.\n"
     "3. Assign a score from 1 to 5 based on coverage."},
};

const DimensionRubric& rubric_of(EvalDimension d) {
  for (const auto& s : kRubrics) {
    if (s.dimension == d) return s;
  }
  throw Error(ErrorCode::InvalidParams, "unknown evaluation dimension");
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Parses the numeric token starting at `pos` (digits, possibly with sign or
// decimals around them) and checks it is a plain integer in 1..5.
int integer_at(std::string_view s, std::size_t pos) {
  std::size_t end = pos;
  while (end < s.size() && std::isdigit(static_cast<unsigned char>(s[end]))) ++end;
  const bool negative = pos > 0 && s[pos - 1] == '-';
  const bool decimal = (end + 1 < s.size() && (s[end] == '.' || s[end] == ',') &&
                        std::isdigit(static_cast<unsigned char>(s[end + 1]))) ||
                       (pos > 0 && s[pos - 1] == '.');
  const auto digits = s.substr(pos, end - pos);
  if (negative || decimal || digits.size() != 1 || digits[0] < '1' || digits[0] > '5') {
    throw Error(ErrorCode::ScoreParseFailure, "score must be an integer from 1 to 5, got '" +
                                                  std::string(s.substr(negative ? pos - 1 : pos, end - pos + 3)) + "'");
  }
  return digits[0] - '0';
}

EvalResult judge_once(EvalDimension dim, std::string_view item, std::string_view subject, std::string_view evidence,
                      ChatProvider& judge) {
  EvalResult r;
  r.dimension = dim;
  r.item = std::string(item);
  const auto request = judge_request(dim, subject, evidence);
  r.inputs_fingerprint = to_hex(sha256(request.user_prompt));
  std::string last_error;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const auto reply = judge.chat(request);
    try {
      r.score = parse_score(reply);
      r.rationale = std::string(text::trim(reply));
      return r;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ScoreParseFailure) throw;
      last_error = e.what();
    }
  }
  r.rationale = "not evaluable: " + last_error;
  return r;
}

EvalResult not_evaluable(EvalDimension dim, std::string_view item, std::string reason) {
  EvalResult r;
  r.dimension = dim;
  r.item = std::string(item);
  r.rationale = "not evaluable: " + std::move(reason);
  return r;
}

}  // namespace

std::string_view to_string(EvalDimension d) noexcept {
  for (const auto& s : kRubrics) {
    if (s.dimension == d) return s.name;
  }
  return "unknown";
}

EvalDimension parse_eval_dimension(std::string_view s) {
  for (const auto& rubric : kRubrics) {
    if (rubric.name == s) return rubric.dimension;
  }
  throw Error(ErrorCode::InvalidParams, "unknown evaluation dimension '" + std::string(s) + "'");
}

int parse_score(std::string_view reply) {
  const auto lower = text::to_lower(reply);
  const auto marker = lower.rfind("score:");
  if (marker != std::string::npos) {
    std::size_t i = marker + 6;
    while (i < reply.size() && (reply[i] == ' ' || reply[i] == '*' || reply[i] == '\t')) ++i;
    if (i < reply.size() && reply[i] == '-' && i + 1 < reply.size() &&
        std::isdigit(static_cast<unsigned char>(reply[i + 1]))) {
      return integer_at(reply, i + 1);
    }
    if (i >= reply.size() || !std::isdigit(static_cast<unsigned char>(reply[i]))) {
      throw Error(ErrorCode::ScoreParseFailure, "no number after 'Score:'");
    }
    return integer_at(reply, i);
  }
  for (std::size_t i = 0; i < reply.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(reply[i]))) continue;
    if (i > 0 && is_word_char(reply[i - 1])) {
      while (i < reply.size() && std::isdigit(static_cast<unsigned char>(reply[i]))) ++i;
      continue;  // part of a word such as "A1"
    }
    return integer_at(reply, i);
  }
  throw Error(ErrorCode::ScoreParseFailure, "no score in judge reply");
}

ChatRequest judge_request(EvalDimension dimension, std::string_view subject, std::string_view evidence) {
  const auto& rubric = rubric_of(dimension);
  std::string p =
      "You will be given material produced for a case-law guide of the European Court of Human Rights. Your "
      "task is to rate it on one metric. Read these instructions carefully and refer back to them while "
      "evaluating.\n\nEvaluation Criteria:\n\n";
  p += rubric.criterion;
  p += "\n\nEvaluation Steps:\n\n";
  p += rubric.steps;
  p += "\n\n";
  p += subject;
  if (!evidence.empty()) {
    p += "\n\n";
    p += evidence;
  }
  p += "\n\nThink through the evaluation steps, then end your answer with a line of the form\nScore: N\nwhere N is "
       "an integer from 1 to 5.\n\nEvaluation Form:\n";
  ChatRequest req;
  req.user_prompt = std::move(p);
  req.stage = Stage::Judge;
  req.max_output_tokens = 512;
  return req;
}

std::vector<EvalResult> eval_structure(std::string_view query, const Outline& outline,
                                       const std::optional<std::string>& reference_toc, ChatProvider& judge) {
  if (outline.roots.empty()) throw Error(ErrorCode::InvalidParams, "cannot evaluate an empty outline");
  const std::string subject =
      "Query:\n" + std::string(query) + "\n\nTable of Contents:\n" + serialize_toc(outline, false);
  std::vector<EvalResult> out;
  for (auto dim : kStructureDimensions) {
    if (dim == EvalDimension::ComprehensivenessTopics) {
      if (!reference_toc || text::trim(*reference_toc).empty()) {
        out.push_back(not_evaluable(dim, query, "no reference table of contents"));
        continue;
      }
      out.push_back(judge_once(dim, query, subject, "Reference Table of Contents:\n" + *reference_toc, judge));
    } else {
      out.push_back(judge_once(dim, query, subject, "", judge));
    }
  }
  return out;
}

std::vector<EvalResult> eval_content(std::string_view heading, std::string_view content,
                                     std::span<const std::string> cited_paragraph_texts,
                                     const std::optional<std::string>& reference_content, ChatProvider& judge) {
  const std::string subject = "Heading:\n" + std::string(heading) + "\n\nContent:\n" + std::string(content);
  std::vector<EvalResult> out;
  for (auto dim : kContentDimensions) {
    if (dim == EvalDimension::CitationFaithfulness) {
      std::string evidence = "Cited Paragraphs:\n";
      for (const auto& t : cited_paragraph_texts) evidence += t + "\n";
      auto r = judge_once(dim, heading, subject, evidence, judge);
      r.low_evidence = cited_paragraph_texts.empty();
      out.push_back(std::move(r));
    } else if (dim == EvalDimension::Comprehensiveness) {
      if (!reference_content || text::trim(*reference_content).empty()) {
        out.push_back(not_evaluable(dim, heading, "no reference content"));
        continue;
      }
      out.push_back(judge_once(dim, heading, subject, "Reference Content:\n" + *reference_content, judge));
    } else {
      out.push_back(judge_once(dim, heading, subject, "", judge));
    }
  }
  return out;
}

std::vector<AggregateRow> aggregate(std::span<const EvalResult> results) {
  struct Acc {
    double sum = 0.0;
    std::size_t evaluated = 0;
    std::size_t total = 0;
  };
  std::map<std::pair<std::string, int>, Acc> cells;
  for (const auto& r : results) {
    auto& a = cells[{r.system, static_cast<int>(r.dimension)}];
    ++a.total;
    if (r.score) {
      a.sum += *r.score;
      ++a.evaluated;
    }
  }
  std::vector<AggregateRow> rows;
  for (const auto& [key, a] : cells) {
    AggregateRow row;
    row.system = key.first;
    row.dimension = static_cast<EvalDimension>(key.second);
    row.evaluated = a.evaluated;
    row.total = a.total;
    if (a.evaluated) row.mean = a.sum / static_cast<double>(a.evaluated);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_mean(const std::optional<double>& mean) {
  if (!mean) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *mean);
  return buf;
}

std::string aggregate_csv(std::span<const AggregateRow> rows) {
  std::string out = "system,dimension,mean,n\n";
  for (const auto& r : rows) {
    out += r.system + "," + std::string(to_string(r.dimension)) + "," + format_mean(r.mean) + "," +
           std::to_string(r.evaluated) + "\n";
  }
  return out;
}

std::string aggregate_table(std::span<const AggregateRow> rows) {
  std::vector<std::string> systems;
  std::set<int> dims;
  std::map<std::pair<std::string, int>, std::string> cell;
  for (const auto& r : rows) {
    if (std::find(systems.begin(), systems.end(), r.system) == systems.end()) systems.push_back(r.system);
    dims.insert(static_cast<int>(r.dimension));
    cell[{r.system, static_cast<int>(r.dimension)}] = format_mean(r.mean);
  }
  std::vector<std::vector<std::string>> grid;
  grid.push_back({"system"});
  for (int d : dims) grid.back().emplace_back(to_string(static_cast<EvalDimension>(d)));
  for (const auto& s : systems) {
    grid.push_back({s});
    for (int d : dims) {
      auto it = cell.find({s, d});
      grid.back().push_back(it == cell.end() ? "" : it->second);
    }
  }
  std::vector<std::size_t> width(grid.front().size(), 0);
  for (const auto& row : grid) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  for (const auto& row : grid) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += " | ";
      out += row[c];
      if (c + 1 < row.size()) out.append(width[c] - row[c].size(), ' ');
    }
    out += '\n';
  }
  return out;
}

nlohmann::json result_to_json(const EvalResult& r) {
  return {{"system", r.system},
          {"item", r.item},
          {"dimension", std::string(to_string(r.dimension))},
          {"score", r.score ? nlohmann::json(*r.score) : nlohmann::json(nullptr)},
          {"evaluable", r.score.has_value()},
          {"low_evidence", r.low_evidence},
          {"rationale", r.rationale},
          {"inputs_fingerprint", r.inputs_fingerprint}};
}

std::string results_jsonl(std::span<const EvalResult> results) {
  std::string out;
  for (const auto& r : results) out += result_to_json(r).dump() + "\n";
  return out;
}

}  // namespace lexreport
