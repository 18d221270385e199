#include "lexreport/prompts.hpp"

#include "lexreport/error.hpp"
#include "lexreport/text.hpp"

namespace lexreport::prompts {

namespace {

constexpr std::string_view kKeyphraseIntroSingle =
    "You are an ECHR lawyer trying to create Legal Case-Law Guides that provide an in-depth overview of "
    "Convention ECHR case law on a particular Article or Transversal Theme. You will receive a paragraph "
    "extracted from case law; your task is to generate keywords that capture the essence of the paragraph "
    "so these keywords reflect the relevant Article or Transversal Theme and can be used to cluster cases, "
    "identify important cases, generate the table of contents and content for the Guides.";

constexpr std::string_view kKeyphraseIntroBatch =
    "You are an ECHR lawyer trying to create Legal Case-Law Guides that provide an in-depth overview of "
    "Convention ECHR case law on a particular Article or Transversal Theme. You will receive numbered "
    "paragraphs extracted from the same case law judgment; your task is to generate keywords that capture "
    "the essence of each paragraph so these keywords reflect the relevant Article or Transversal Theme and "
    "can be used to cluster cases, identify important cases, generate the table of contents and content "
    "for the Guides.";

constexpr std::string_view kKeyphraseInstructions =
    "[Instructions]\n"
    "1. Identify cross-references between paragraphs and reveal their connections;\n"
    "2. Make sure keywords reflect the overall context of the paragraph by linking the description of "
    "circumstances to the requirements provided as criteria for legal doctrines and norms;\n"
    "3. Map keywords like 'sometimes', 'exceptionally', 'in the present case' with the view to make sure "
    "that there is correspondence between legal standards and circumstances;\n"
    "4. Focus on keywords detailing the application of substantive or procedural limb/branch explaining "
    "the scope of application of the Article;\n"
    "5. Make sure to map accordingly keywords that detail the application of the Article to a variety of "
    "persons such as victims, state agents, witnesses, relatives, and similar;\n"
    "6. Make sure to map accordingly keywords that detail the application of the Article depending on the "
    "jurisdiction, material, or temporal and those which detail the repartition or just satisfaction;\n"
    "7. Distinguish conditions for the application of the Article in the context of violence/force from "
    "conditions that detail other events such as accidents or industrial activities;\n"
    "8. Carefully identify key phrases that describe risks and operational choices from keywords that "
    "describe the creation and application of regulatory framework and conditions for responsibility of "
    "and accountability of various actors;\n"
    "9. Highlight keywords that describe thresholds or conditions concerning intensity, frequency, and "
    "ordering in assessing each of the above.";

constexpr std::string_view kKeyphraseReturnSingle =
    " for the given paragraph in one line and nothing else. Make sure to keep keywords in arguments "
    "together so they make sense.";

constexpr std::string_view kKeyphraseReturnBatch =
    " for each given paragraph, one line per paragraph in the same order as the numbered paragraphs, and "
    "nothing else. Make sure to keep keywords in arguments together so they make sense.";

constexpr std::string_view kTopicIntro =
    "You are given a list of paragraphs extracted from the European Court of Human Rights case law, and "
    "your task is to generate a detailed topic label to represent these paragraphs in ECHR case law "
    "guidelines. ";

constexpr std::string_view kTopicFormat =
    ", generate a detailed topic label in the following format and nothing more:\n"
    "topic: <topic label>";

constexpr std::string_view kReorganizeIntro =
    "I have a list of topics related to European Court of Human Rights (ECHR) case law documents. I would "
    "like you to organize these topics into a coherent and structured Table of Contents (ToC) similar to a "
    "legal document ECHR guidelines. Please group related topics under appropriate sections and "
    "subsections, ensuring a logical flow. The ToC should include main headings, subheadings, and possibly "
    "further subdivisions where necessary with 4 spaces indentation and without general sections such as "
    "introduction and conclusion. The final structure should resemble an outline for comprehensive legal "
    "report guidelines that align with the topics from ECHR. Here is the list of topics:\n\n";

constexpr std::string_view kReorganizeReturn = " and nothing else.";

constexpr std::string_view kContentIntro =
    "You are a legal expert tasked with generating content for a Case Law Guidelines section based on the "
    "given section heading, current section content, and a set of paragraphs extracted from case law "
    "documents. Your goal is to synthesize the information from these paragraphs to extend and create "
    "clear and accurate content without sections like introductions or subsections. The content should be "
    "strictly related to the heading and logically coherent, and the relevant paragraphs from the case law "
    "documents should be cited by their IDs. Provide thorough explanations, elaborate on key points, and "
    "include examples where relevant. Follow the instructions below carefully to ensure the guidelines are "
    "precise and informative.\n\n"
    "[Instructions]\n"
    "1. Review the provided set of paragraphs extracted from case law documents;\n"
    "2. Consider only those paragraphs that are strictly related to the keywords in the heading;\n"
    "3. Develop content based on the information principles contained in the paragraphs and ensure the "
    "content is clear and concise;\n"
    "5. Citations: whenever a guideline is influenced by or derived from a specific paragraph, cite that "
    "paragraph by its id and number in parentheses as (id#paragraph_number);\n"
    "6. Maintain a professional and formal tone throughout;\n"
    "7. Only generate the content in relation to the keywords in the heading and focus on the specific "
    "standards implied by those keywords;\n"
    "8. Return a coherent answer comprising general observations and standards from the Convention and "
    "specific observations and standards implied by the keywords in the heading;\n"
    "9. Extend the previously generated content with the new content, revising and integrating it "
    "smoothly to form a coherent narrative;\n\n";

constexpr std::string_view kContentReturnRest =
    " Make sure to use only the related paragraphs to the heading.\n[Your response]";

}  // namespace

ChatRequest keyphrase_request(std::span<const std::string> paragraph_texts) {
  if (paragraph_texts.empty()) throw Error(ErrorCode::InvalidParams, "keyphrase prompt needs a paragraph");
  const bool single = paragraph_texts.size() == 1;
  std::string p;
  p += single ? kKeyphraseIntroSingle : kKeyphraseIntroBatch;
  p += "\n\n";
  p += kKeyphraseInstructions;
  p += "\n\n";
  if (single) {
    p += kParagraphBlock;
    p += text::collapse_whitespace(paragraph_texts.front());
  } else {
    p += kParagraphsBlock;
    for (std::size_t i = 0; i < paragraph_texts.size(); ++i) {
      if (i) p += '\n';
      p += std::to_string(i + 1) + ". " + text::collapse_whitespace(paragraph_texts[i]);
    }
  }
  p += kKeyphraseTail;
  p += single ? kKeyphraseReturnSingle : kKeyphraseReturnBatch;
  ChatRequest req;
  req.user_prompt = std::move(p);
  req.stage = Stage::Keyphrase;
  return req;
}

ChatRequest topic_label_request(std::span<const std::string> paragraph_texts) {
  if (paragraph_texts.empty()) throw Error(ErrorCode::InvalidParams, "topic prompt needs a paragraph");
  std::string p(kTopicIntro);
  p += kDocumentsHead;
  for (std::size_t i = 0; i < paragraph_texts.size(); ++i) {
    if (i) p += '\n';
    p += kDocumentBullet;
    p += text::collapse_whitespace(paragraph_texts[i]);
  }
  p += kDocumentsTail;
  p += kTopicFormat;
  ChatRequest req;
  req.user_prompt = std::move(p);
  req.stage = Stage::TopicLabel;
  req.max_output_tokens = 128;
  return req;
}

ChatRequest reorganize_request(std::string_view topics) {
  std::string p(kReorganizeIntro);
  p += kTopicsBlock;
  p += topics;
  p += kTopicsTail;
  p += kReorganizeReturn;
  ChatRequest req;
  req.user_prompt = std::move(p);
  req.stage = Stage::Reorganize;
  return req;
}

ChatRequest content_request(std::string_view heading, std::string_view previous_content,
                            std::string_view paragraphs) {
  std::string p(kContentIntro);
  p += kHeadingBlock;
  p += heading;
  p += kPreviousBlock;
  p += previous_content;
  p += kContentParagraphsBlock;
  p += paragraphs;
  p += kContentTail;
  p += kContentReturnRest;
  ChatRequest req;
  req.user_prompt = std::move(p);
  req.stage = Stage::Content;
  req.max_output_tokens = 4096;
  return req;
}

std::optional<std::string_view> extract_block(std::string_view prompt, std::string_view begin,
                                              std::string_view end) {
  const auto b = prompt.find(begin);
  if (b == std::string_view::npos) return std::nullopt;
  const auto start = b + begin.size();
  if (end.empty()) return prompt.substr(start);
  const auto e = prompt.find(end, start);
  if (e == std::string_view::npos) return std::nullopt;
  return prompt.substr(start, e - start);
}

}  // namespace lexreport::prompts
