#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "lexreport/providers.hpp"

/// Prompt catalog for every model call the pipeline makes. Block markers are
/// public so the mock chat can locate the inputs inside a rendered prompt.
namespace lexreport::prompts {

inline constexpr std::string_view kParagraphBlock = "[Paragraph]\n";
inline constexpr std::string_view kParagraphsBlock = "[Paragraphs]\n";
inline constexpr std::string_view kKeyphraseTail = "\n\nPlease return ONLY the keywords";

inline constexpr std::string_view kDocumentsHead = "Here is the list of paragraphs:\n\n";
inline constexpr std::string_view kDocumentsTail = "\n\nBased on the information above";
inline constexpr std::string_view kDocumentBullet = "- ";

inline constexpr std::string_view kTopicsBlock = "[Topics]\n";
inline constexpr std::string_view kTopicsTail = "\n\nPlease only return a well-structured ToC";

inline constexpr std::string_view kHeadingBlock = "[Heading]\n";
inline constexpr std::string_view kPreviousBlock = "\n\n[Previous Content]\n";
inline constexpr std::string_view kContentParagraphsBlock = "\n\n[Paragraphs]\n";
inline constexpr std::string_view kContentTail = "\n\nReturn the generated content and nothing else.";

/// Keyphrase extraction. One text: the single-paragraph prompt. Several:
/// batch prompt with paragraphs numbered 1..n, one keyword line expected each.
ChatRequest keyphrase_request(std::span<const std::string> paragraph_texts);

/// Cluster topic label from representative paragraphs ("topic: <label>").
ChatRequest topic_label_request(std::span<const std::string> paragraph_texts);

/// Reorganization of all cluster titles into a table of contents. `topics`
/// is the indented two-level topic list.
ChatRequest reorganize_request(std::string_view topics);

/// One incremental content-generation step. `paragraphs` holds lines of
/// the form "id#number: text".
ChatRequest content_request(std::string_view heading, std::string_view previous_content,
                            std::string_view paragraphs);

/// Text strictly between the first `begin` marker and the following `end`
/// marker (or the end of input when `end` is empty).
std::optional<std::string_view> extract_block(std::string_view prompt, std::string_view begin,
                                              std::string_view end);

}  // namespace lexreport::prompts
