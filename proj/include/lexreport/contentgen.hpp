#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lexreport/corpus.hpp"
#include "lexreport/indexer.hpp"
#include "lexreport/providers.hpp"
#include "lexreport/retrieval.hpp"

namespace lexreport {

struct GenParams {
  std::size_t per_section_m = 75;  // paragraphs retrieved per section
  std::size_t batch_size = 25;     // paragraphs per chat call
  std::size_t max_iterations = 10;

  void validate() const;
  bool operator==(const GenParams&) const = default;
};

struct SectionDraft {
  std::string node_id;
  std::string text;
  std::vector<ParagraphRef> citations;   // resolved, order of first appearance
  std::vector<ParagraphRef> unresolved;  // cited but not provided or not in the corpus
  std::vector<ParagraphRef> provided;    // paragraphs shown to the model, in order
  std::size_t iterations = 0;            // successful chat calls
  bool partial = false;                  // a later iteration failed; text is the last good one
  bool truncated = false;                // max_iterations stopped before all paragraphs were shown
  std::string error;                     // failure message when partial

  bool operator==(const SectionDraft&) const = default;
};

/// Top-m records by cosine to the section query (no threshold, no MMR).
/// Throws NoCandidates on an empty index.
std::vector<ParagraphHit> retrieve_for_section(const VectorIndex& index, Embedder& embedder,
                                               std::string_view path_query_text, std::size_t m);

/// Prompt rendering of one paragraph: "id#number: text" on a single line.
std::string render_paragraph_line(const Paragraph& paragraph);

/// Called before each chat call with (iteration, paragraphs in this batch).
using BatchObserver = std::function<void(std::size_t, std::span<const Paragraph>)>;

/// Incremental generation: paragraphs go to the model in batches of
/// batch_size, each call extending the text returned by the previous one.
/// A failure on the first call propagates; a later failure keeps the text
/// so far with `partial` set. Citations are extracted but not validated.
SectionDraft generate_section(std::string_view heading_path, std::span<const Paragraph> paragraphs,
                              const GenParams& params, ChatProvider& chat, const BatchObserver& observer = {});

/// "(id#number)" tokens in order of first appearance, de-duplicated. The id is
/// a non-empty run without whitespace, '#', '(' or ')'.
std::vector<ParagraphRef> extract_citations(std::string_view text);

/// Splits the draft's citations into resolved and unresolved. A citation is
/// unresolved when it was not provided or the corpus does not contain it.
SectionDraft validate_citations(SectionDraft draft, std::span<const ParagraphRef> provided_refs,
                                const Corpus& corpus);

/// One citation occurrence in text: byte offset, length and the ref.
struct CitationSpan {
  std::size_t offset = 0;
  std::size_t length = 0;
  ParagraphRef ref;
};

/// Every citation occurrence, in order (duplicates included).
std::vector<CitationSpan> find_citation_spans(std::string_view text);

}  // namespace lexreport
