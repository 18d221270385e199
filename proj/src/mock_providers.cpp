#include "lexreport/mock_providers.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "lexreport/error.hpp"
#include "lexreport/hashing.hpp"
#include "lexreport/prompts.hpp"
#include "lexreport/text.hpp"

namespace lexreport {

namespace {

struct TopicNode {
  std::string title;
  std::vector<TopicNode> children;
};

void sort_topics(std::vector<TopicNode>& nodes) {
  std::sort(nodes.begin(), nodes.end(), [](const TopicNode& a, const TopicNode& b) { return a.title < b.title; });
  for (auto& n : nodes) sort_topics(n.children);
}

void render_topics(const std::vector<TopicNode>& nodes, int depth, std::vector<std::string>& lines) {
  for (const auto& n : nodes) {
    lines.push_back(std::string(static_cast<std::size_t>(depth) * 4, ' ') + n.title);
    render_topics(n.children, depth + 1, lines);
  }
}

std::string strip_number_prefix(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && line[i] >= '0' && line[i] <= '9') ++i;
  if (i > 0 && i + 1 < line.size() && line[i] == '.' && line[i + 1] == ' ') return std::string(line.substr(i + 2));
  return std::string(line);
}

}  // namespace

EmbeddingVector mock_embed(std::string_view text, std::size_t dimension) {
  EmbeddingVector v(dimension, 0.0F);
  for (const auto& tok : text::tokenize(text)) {
    const auto h = fnv1a64(tok);
    v[h % dimension] += (h >> 63) ? -1.0F : 1.0F;
  }
  l2_normalize(v);
  return v;
}

std::vector<EmbeddingVector> MockEmbedder::embed_batch(std::span<const std::string> texts) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(mock_embed(t, dim_));
  return out;
}

TokenStats::TokenStats(const Corpus& corpus) {
  for (const auto& j : corpus.judgments()) {
    for (const auto& p : j.paragraphs) {
      auto toks = text::tokenize(p.text);
      std::sort(toks.begin(), toks.end());
      toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
      for (auto& t : toks) ++df_[std::move(t)];
    }
  }
}

std::size_t TokenStats::df(const std::string& token) const {
  auto it = df_.find(token);
  return it == df_.end() ? 0 : it->second;
}

std::vector<std::string> TokenStats::rarest_tokens(std::string_view text, std::size_t n) const {
  auto toks = text::tokenize(text);
  std::sort(toks.begin(), toks.end());
  toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
  std::stable_sort(toks.begin(), toks.end(),
                   [&](const std::string& a, const std::string& b) { return df(a) < df(b); });
  if (toks.size() > n) toks.resize(n);
  return toks;
}

std::string MockChat::chat(const ChatRequest& request) {
  switch (request.stage) {
    case Stage::Keyphrase: return keyphrases(request.user_prompt);
    case Stage::TopicLabel: return topic_label(request.user_prompt);
    case Stage::Reorganize: return reorganize(request.user_prompt);
    case Stage::Content: return content(request.user_prompt);
    case Stage::Judge: return "4";
    case Stage::None: break;
  }
  throw Error(ErrorCode::UnknownStage, "mock chat needs a pipeline stage tag");
}

std::string MockChat::keyphrases(std::string_view prompt) const {
  std::vector<std::string> paragraphs;
  if (auto single = prompts::extract_block(prompt, prompts::kParagraphBlock, prompts::kKeyphraseTail)) {
    paragraphs.emplace_back(*single);
  } else if (auto batch = prompts::extract_block(prompt, prompts::kParagraphsBlock, prompts::kKeyphraseTail)) {
    for (const auto& line : text::split_lines(*batch)) {
      if (!text::trim(line).empty()) paragraphs.push_back(strip_number_prefix(line));
    }
  } else {
    throw Error(ErrorCode::InvalidParams, "keyphrase prompt has no paragraph block");
  }
  std::vector<std::string> lines;
  for (const auto& p : paragraphs) lines.push_back(text::join(stats_.rarest_tokens(p, 5), ", "));
  return text::join(lines, "\n");
}

std::string MockChat::topic_label(std::string_view prompt) const {
  auto block = prompts::extract_block(prompt, prompts::kDocumentsHead, prompts::kDocumentsTail);
  if (!block) throw Error(ErrorCode::InvalidParams, "topic prompt has no document list");
  std::map<std::string, std::size_t> counts;
  for (const auto& line : text::split_lines(*block)) {
    std::string_view l = line;
    if (l.substr(0, prompts::kDocumentBullet.size()) != prompts::kDocumentBullet) continue;
    for (auto& tok : stats_.rarest_tokens(l.substr(prompts::kDocumentBullet.size()), 5)) ++counts[tok];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> top;
  for (std::size_t i = 0; i < ranked.size() && i < 3; ++i) top.push_back(ranked[i].first);
  if (top.empty()) top.push_back("untitled");
  return "topic: " + text::join(top, " ");
}

std::string MockChat::reorganize(std::string_view prompt) const {
  auto block = prompts::extract_block(prompt, prompts::kTopicsBlock, prompts::kTopicsTail);
  if (!block) throw Error(ErrorCode::InvalidParams, "reorganize prompt has no topic list");
  std::vector<TopicNode> roots;
  std::vector<std::vector<TopicNode>*> stack{&roots};
  for (const auto& line : text::split_lines(*block)) {
    const auto title = text::trim(line);
    if (title.empty()) continue;
    const std::size_t spaces = line.find_first_not_of(' ');
    const std::size_t depth = std::min(spaces / 4, stack.size() - 1);
    stack.resize(depth + 1);
    stack.back()->push_back({std::string(title), {}});
    stack.push_back(&stack.back()->back().children);
  }
  sort_topics(roots);
  std::vector<std::string> lines;
  render_topics(roots, 0, lines);
  return text::join(lines, "\n");
}

std::string MockChat::content(std::string_view prompt) const {
  auto previous = prompts::extract_block(prompt, prompts::kPreviousBlock, prompts::kContentParagraphsBlock);
  auto block = prompts::extract_block(prompt, prompts::kContentParagraphsBlock, prompts::kContentTail);
  if (!previous || !block) throw Error(ErrorCode::InvalidParams, "content prompt is missing blocks");
  std::vector<std::string> sentences;
  for (const auto& line : text::split_lines(*block)) {
    std::string_view l = line;
    const auto hash = l.find('#');
    const auto colon = l.find(": ", hash == std::string_view::npos ? 0 : hash);
    if (hash == std::string_view::npos || colon == std::string_view::npos) continue;
    const auto ref = l.substr(0, colon);
    const auto topics = stats_.rarest_tokens(l.substr(colon + 2), 3);
    sentences.push_back("Paragraph (" + std::string(ref) + ") addresses " + text::join(topics, ", ") + ".");
  }
  std::string out(text::trim(*previous));
  if (!sentences.empty()) {
    if (!out.empty()) out += "\n\n";
    out += text::join(sentences, " ");
  }
  return out;
}

}  // namespace lexreport
