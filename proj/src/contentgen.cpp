#include "lexreport/contentgen.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <set>

#include "lexreport/error.hpp"
#include "lexreport/prompts.hpp"
#include "lexreport/text.hpp"

namespace lexreport {

namespace {

bool is_id_char(char c) {
  return c != '#' && c != '(' && c != ')' && !std::isspace(static_cast<unsigned char>(c));
}

}  // namespace

void GenParams::validate() const {
  if (per_section_m == 0) throw Error(ErrorCode::InvalidParams, "per_section_m must be >= 1");
  if (batch_size == 0) throw Error(ErrorCode::InvalidParams, "batch_size must be >= 1");
  if (max_iterations == 0) throw Error(ErrorCode::InvalidParams, "max_iterations must be >= 1");
}

std::vector<ParagraphHit> retrieve_for_section(const VectorIndex& index, Embedder& embedder,
                                               std::string_view path_query_text, std::size_t m) {
  if (index.records.empty()) throw Error(ErrorCode::NoCandidates, "index has no records");
  if (m == 0) throw Error(ErrorCode::InvalidParams, "m must be >= 1");
  if (text::trim(path_query_text).empty()) throw Error(ErrorCode::EmptyQuery, "section query is empty");
  const auto qv = embedder.embed_one(path_query_text);
  auto ranked = rank_by_similarity(index, qv);
  if (ranked.size() > m) ranked.resize(m);
  return ranked;
}

std::string render_paragraph_line(const Paragraph& paragraph) {
  return paragraph.ref().token() + ": " + text::collapse_whitespace(paragraph.text);
}

SectionDraft generate_section(std::string_view heading_path, std::span<const Paragraph> paragraphs,
                              const GenParams& params, ChatProvider& chat, const BatchObserver& observer) {
  params.validate();
  if (paragraphs.empty()) throw Error(ErrorCode::EmptyRetrieval, "no paragraphs to generate from");
  SectionDraft draft;
  std::string previous;
  const std::size_t batches = (paragraphs.size() + params.batch_size - 1) / params.batch_size;
  const std::size_t calls = std::min(batches, params.max_iterations);
  draft.truncated = batches > params.max_iterations;

  for (std::size_t it = 0; it < calls; ++it) {
    const auto begin = it * params.batch_size;
    const auto batch = paragraphs.subspan(begin, std::min(params.batch_size, paragraphs.size() - begin));
    std::string lines;
    for (const auto& p : batch) {
      if (!lines.empty()) lines += '\n';
      lines += render_paragraph_line(p);
    }
    if (observer) observer(it, batch);
    try {
      auto reply = std::string(text::trim(chat.chat(prompts::content_request(heading_path, previous, lines))));
      if (reply.empty()) throw Error(ErrorCode::ResponseEmpty, "content reply is blank");
      previous = std::move(reply);
    } catch (const Error& e) {
      if (it == 0) throw;
      if (e.code() != ErrorCode::ProviderUnavailable && e.code() != ErrorCode::ResponseEmpty) throw;
      draft.partial = true;
      draft.error = e.what();
      break;
    }
    for (const auto& p : batch) draft.provided.push_back(p.ref());
    ++draft.iterations;
  }
  draft.text = std::move(previous);
  draft.citations = extract_citations(draft.text);
  return draft;
}

std::vector<CitationSpan> find_citation_spans(std::string_view s) {
  std::vector<CitationSpan> out;
  for (std::size_t open = s.find('('); open != std::string_view::npos; open = s.find('(', open + 1)) {
    std::size_t i = open + 1;
    while (i < s.size() && is_id_char(s[i])) ++i;
    if (i == open + 1 || i >= s.size() || s[i] != '#') continue;
    const auto id_end = i++;
    const auto digits_begin = i;
    std::uint64_t number = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])) && number <= std::numeric_limits<std::uint32_t>::max()) {
      number = number * 10 + static_cast<std::uint64_t>(s[i] - '0');
      ++i;
    }
    if (i == digits_begin || i >= s.size() || s[i] != ')' || number > std::numeric_limits<std::uint32_t>::max()) continue;
    out.push_back({open, i + 1 - open,
                   {std::string(s.substr(open + 1, id_end - open - 1)), static_cast<std::uint32_t>(number)}});
  }
  return out;
}

std::vector<ParagraphRef> extract_citations(std::string_view text) {
  std::vector<ParagraphRef> out;
  std::set<ParagraphRef> seen;
  for (auto& span : find_citation_spans(text)) {
    if (seen.insert(span.ref).second) out.push_back(std::move(span.ref));
  }
  return out;
}

SectionDraft validate_citations(SectionDraft draft, std::span<const ParagraphRef> provided_refs, const Corpus& corpus) {
  const std::set<ParagraphRef> provided(provided_refs.begin(), provided_refs.end());
  std::vector<ParagraphRef> resolved;
  std::set<ParagraphRef> flagged(draft.unresolved.begin(), draft.unresolved.end());
  for (auto& ref : extract_citations(draft.text)) {
    if (provided.count(ref) && corpus.contains(ref)) {
      resolved.push_back(std::move(ref));
    } else if (flagged.insert(ref).second) {
      draft.unresolved.push_back(std::move(ref));
    }
  }
  draft.citations = std::move(resolved);
  return draft;
}

}  // namespace lexreport
