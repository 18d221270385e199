#include <gtest/gtest.h>

#include <nlohmann/json.hpp>
#include <random>
#include <set>

#include "lexreport/mock_providers.hpp"
#include "lexreport/outline.hpp"
#include "lexreport/prompts.hpp"
#include "test_support.hpp"

namespace lexreport {
namespace {

using testing::code_of;
using testing::ScriptedChat;

std::vector<std::string> titles(const std::vector<OutlineNode>& nodes) {
  std::vector<std::string> out;
  for (const auto& n : nodes) out.push_back(n.title);
  return out;
}

std::size_t max_jump(const std::vector<OutlineNode>& nodes, std::size_t depth = 0) {
  std::size_t worst = depth;
  for (const auto& n : nodes) worst = std::max(worst, max_jump(n.children, depth + 1));
  return worst;
}

TEST(ParseToc, RomanAndLetterMarkers) {
  const auto o = parse_toc("I. Scope\n    A. Jurisdiction\nII. Merits");
  ASSERT_EQ(titles(o.roots), (std::vector<std::string>{"Scope", "Merits"}));
  ASSERT_EQ(titles(o.roots[0].children), (std::vector<std::string>{"Jurisdiction"}));
  EXPECT_TRUE(o.roots[1].children.empty());
  EXPECT_EQ(o.roots[0].marker, "I.");
  EXPECT_EQ(o.roots[0].children[0].marker, "A.");
  EXPECT_EQ(o.roots[1].marker, "II.");
  EXPECT_EQ(o.node_ids(), (std::vector<std::string>{"1", "1.1", "2"}));
}

TEST(ParseToc, EmptyInput) {
  EXPECT_EQ(code_of([] { parse_toc(""); }), ErrorCode::EmptyToc);
  EXPECT_EQ(code_of([] { parse_toc(" \n\t\n"); }), ErrorCode::EmptyToc);
}

TEST(ParseToc, DepthJumpsAreClamped) {
  const auto o = parse_toc("Root\n            Deep\n        Mid\nNext");
  ASSERT_EQ(o.roots.size(), 2U);
  ASSERT_EQ(o.roots[0].children.size(), 1U);
  EXPECT_EQ(o.roots[0].children[0].title, "Deep");
  ASSERT_EQ(o.roots[0].children[0].children.size(), 1U);
  EXPECT_EQ(o.roots[0].children[0].children[0].title, "Mid");
  // First line indented still becomes a root.
  EXPECT_EQ(parse_toc("        Indented").roots[0].title, "Indented");
}

TEST(ParseToc, MarkersBlanksTabsAndIds) {
  const auto o = parse_toc("## Heading\n\n\t- Bullet {#b1}\n\t* Star\n1.2) Numbered\nIII Not a marker\n3. \n");
  ASSERT_EQ(o.roots.size(), 4U);
  EXPECT_EQ(o.roots[0].title, "Heading");
  EXPECT_EQ(o.roots[0].marker, "##");
  EXPECT_EQ(titles(o.roots[0].children), (std::vector<std::string>{"Bullet", "Star"}));
  EXPECT_EQ(o.roots[0].children[0].node_id, "b1");
  EXPECT_EQ(o.roots[0].children[1].node_id, "1.2");
  EXPECT_EQ(o.roots[1].title, "Numbered");
  EXPECT_EQ(o.roots[1].marker, "1.2)");
  EXPECT_EQ(o.roots[2].title, "III Not a marker");
  EXPECT_EQ(o.roots[3].title, "3.");
}

TEST(ParseToc, AnnotatedIdCollisionsGetSuffix) {
  const auto o = parse_toc("A {#2}\nB\nC {#2}");
  EXPECT_EQ(o.node_ids(), (std::vector<std::string>{"2", "2~2", "3"}));
}

TEST(ParseToc, RecordedReplyParses) {
  const auto o = parse_toc(testing::read_file(testing::data_path("reorganize_reply.txt")));
  ASSERT_EQ(o.roots.size(), 4U);  // preamble line becomes its own root
  EXPECT_EQ(o.roots[1].title, "Conditions of Detention");
  EXPECT_EQ(o.roots[1].children[1].children[0].title, "Access to natural light");
  EXPECT_EQ(titles(o.roots[3].children),
            (std::vector<std::string>{"Delays Attributable to the Authorities", "Conduct of the Applicant"}));
  EXPECT_EQ(o.leaves().size(), 7U);
  EXPECT_EQ(o.depth(), 3U);
}

std::string random_toc(std::mt19937& rng) {
  static const std::vector<std::string> words{"Article", "8", "privacy", "Détention", "(a)", "review", "État",
                                              "search", "X.", "A.", "-", "{#z}", "1.", "ii)", "#", "*"};
  static const std::vector<std::string> indents{"", "    ", "        ", "\t", "  ", "            ", "      "};
  std::string out;
  const int lines = 1 + static_cast<int>(rng() % 12);
  for (int i = 0; i < lines; ++i) {
    if (rng() % 8 == 0) out += "   \n";
    out += indents[rng() % indents.size()];
    const int n = 1 + static_cast<int>(rng() % 4);
    for (int w = 0; w < n; ++w) out += (w ? " " : "") + words[rng() % words.size()];
    if (rng() % 5 == 0) out += " {#k" + std::to_string(rng() % 4) + "}";
    out += "\n";
  }
  return out;
}

TEST(ParseToc, SerializeParseIsIdempotent) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto text = random_toc(rng);
    Outline o;
    try {
      o = parse_toc(text);
    } catch (const Error& e) {
      ASSERT_EQ(e.code(), ErrorCode::EmptyToc);
      continue;
    }
    EXPECT_EQ(parse_toc(serialize_toc(o)), o) << text;
    const auto plain = serialize_toc(o, false);
    if (plain.find("{#") == std::string::npos) {
      EXPECT_EQ(titles(parse_toc(plain).roots), titles(o.roots)) << text;
    }
    const auto ids = o.node_ids();
    EXPECT_EQ(std::set<std::string>(ids.begin(), ids.end()).size(), ids.size()) << text;
    EXPECT_LE(max_jump(o.roots), o.depth());
    for (const auto* leaf : o.leaves()) EXPECT_FALSE(leaf->title.empty());
  }
}

TEST(PathQuery, JoinsTitles) {
  const auto o = parse_toc("Article 8\n    Private Life\n        Data Protection\nStandalone");
  EXPECT_EQ(path_query(o, "1.1.1"), "Article 8 - Private Life - Data Protection");
  EXPECT_EQ(path_query(o, "2"), "Standalone");
  EXPECT_EQ(code_of([&] { path_query(o, "1.1"); }), ErrorCode::NotALeaf);
  EXPECT_EQ(code_of([&] { path_query(o, "9"); }), ErrorCode::UnknownNode);
}

TEST(Edit, AddRenameRemoveMoveKeepIds) {
  auto o = parse_toc("A\n    A1\nB");
  const auto n1 = o.add_node(std::string("2"), "B1");
  EXPECT_EQ(n1, "n1");
  const auto n2 = o.add_node(std::nullopt, "  Zero  ", 0);
  EXPECT_EQ(n2, "n2");
  EXPECT_EQ(o.roots[0].title, "Zero");
  o.rename_node("1.1", "A-one");
  EXPECT_EQ(o.find("1.1")->title, "A-one");
  o.move_node("1.1", std::string("2"), 0);
  EXPECT_EQ(titles(o.find("2")->children), (std::vector<std::string>{"A-one", "B1"}));
  EXPECT_TRUE(o.find("1")->is_leaf());
  o.remove_node("n2");
  EXPECT_EQ(o.node_ids(), (std::vector<std::string>{"1", "2", "1.1", "n1"}));
  o.move_node("2", std::nullopt, 0);
  EXPECT_EQ(titles(o.roots), (std::vector<std::string>{"B", "A"}));
  EXPECT_EQ(parse_toc(serialize_toc(o)).node_ids(), o.node_ids());

  EXPECT_EQ(code_of([&] { o.move_node("2", std::string("1.1")); }), ErrorCode::InvalidParams);
  EXPECT_EQ(code_of([&] { o.move_node("2", std::string("2")); }), ErrorCode::InvalidParams);
  EXPECT_EQ(code_of([&] { o.rename_node("zz", "x"); }), ErrorCode::UnknownNode);
  EXPECT_EQ(code_of([&] { o.remove_node("zz"); }), ErrorCode::UnknownNode);
  EXPECT_EQ(code_of([&] { o.add_node(std::string("zz"), "x"); }), ErrorCode::UnknownNode);
  EXPECT_EQ(code_of([&] { o.rename_node("2", " \n "); }), ErrorCode::InvalidParams);
  EXPECT_EQ(o.add_node(std::nullopt, "again"), "n2");
}

TEST(TopicLabel, Parse) {
  EXPECT_EQ(parse_topic_label("topic: Forced medical interventions and consent"),
            "Forced medical interventions and consent");
  EXPECT_EQ(parse_topic_label("Sure! Here is the label.\n\n**Topic:** \"Prison overcrowding\"\nThanks"),
            "Prison overcrowding");
  EXPECT_EQ(code_of([] { parse_topic_label("no label here"); }), ErrorCode::FormatViolation);
  EXPECT_EQ(code_of([] { parse_topic_label("topic:   "); }), ErrorCode::FormatViolation);
}

TEST(TopicLabel, RetryThenFallback) {
  const std::vector<std::string> reps{"The applicant was detained in a cell with no ventilation.", "Second."};
  ScriptedChat good_second([](const ChatRequest&, std::size_t call) {
    return call == 0 ? std::string("I cannot comply") : std::string("topic: Cell ventilation");
  });
  EXPECT_EQ(label_cluster(reps, good_second), "Cell ventilation");
  EXPECT_EQ(good_second.calls(), 2U);
  EXPECT_EQ(good_second.requests()[0].stage, Stage::TopicLabel);

  ScriptedChat always_bad([](const ChatRequest&, std::size_t) { return std::string("nothing useful"); });
  EXPECT_EQ(label_cluster(reps, always_bad), "The applicant was detained in a");
  EXPECT_EQ(always_bad.calls(), 2U);

  ScriptedChat down([](const ChatRequest&, std::size_t) -> std::string {
    throw Error(ErrorCode::ProviderUnavailable, "down");
  });
  EXPECT_EQ(code_of([&] { label_cluster(reps, down); }), ErrorCode::ProviderUnavailable);
  EXPECT_EQ(code_of([&] { label_cluster(std::vector<std::string>{}, down); }), ErrorCode::InvalidParams);
}

TEST(TopicLabel, MockTitleCarriesSharedKeyphraseTokens) {
  const auto& corpus = testing::fixture_corpus();
  MockChat chat{TokenStats(corpus)};
  std::vector<std::string> reps;
  for (const auto& ref : testing::near_duplicate_refs()) reps.push_back(corpus.get_paragraph(ref).text);
  const auto title = label_cluster(reps, chat);
  EXPECT_NE(title.find("complained"), std::string::npos) << title;
  EXPECT_NE(title.find("discrimination"), std::string::npos) << title;
}

std::vector<TitledCluster> sample_clusters() {
  return {
      {3, "Low", 0.5, {}},
      {1, "High", 2.0, {{5, "High child b", 0.1, {}}, {4, "High child a", 0.9, {}}}},
      {2, "Mid", 1.0, {}},
  };
}

TEST(Concat, StabilityOrderAndNesting) {
  const auto o = concat_fallback(sample_clusters());
  EXPECT_EQ(titles(o.roots), (std::vector<std::string>{"High", "Mid", "Low"}));
  EXPECT_EQ(titles(o.roots[0].children), (std::vector<std::string>{"High child a", "High child b"}));
  EXPECT_EQ(o.roots[0].source_cluster, 1);
  EXPECT_EQ(o.roots[0].children[0].source_cluster, 4);
  EXPECT_EQ(o.node_ids(), (std::vector<std::string>{"1", "1.1", "1.2", "2", "3"}));

  const std::vector<TitledCluster> flat{{1, "A", 1, {}}, {2, "B", 1, {}}, {0, "C", 1, {}}};
  const auto f = concat_fallback(flat);
  EXPECT_EQ(titles(f.roots), (std::vector<std::string>{"C", "A", "B"}));
  EXPECT_EQ(f.depth(), 1U);
  EXPECT_EQ(code_of([] { concat_fallback({}); }), ErrorCode::InvalidParams);
}

TEST(Reorganize, MockSortsTopics) {
  MockChat chat;
  const std::vector<TitledCluster> two{{0, "B", 1, {}}, {1, "A", 0.5, {}}};
  EXPECT_EQ(reorganize(two, chat), "A\nB");
  const std::vector<TitledCluster> one{{0, "Only topic", 1, {}}};
  const auto reply = reorganize(one, chat);
  EXPECT_EQ(parse_toc(reply).roots.size(), 1U);
  EXPECT_EQ(parse_toc(reply).roots[0].title, "Only topic");
}

TEST(Reorganize, PromptShowsIndentedTopics) {
  ScriptedChat chat([](const ChatRequest&, std::size_t) { return std::string("x"); });
  reorganize(sample_clusters(), chat);
  ASSERT_EQ(chat.calls(), 1U);
  const auto& req = chat.requests()[0];
  EXPECT_EQ(req.stage, Stage::Reorganize);
  const auto block = prompts::extract_block(req.user_prompt, prompts::kTopicsBlock, prompts::kTopicsTail);
  ASSERT_TRUE(block);
  EXPECT_EQ(*block, "High\n    High child a\n    High child b\nMid\nLow");
  EXPECT_NE(req.user_prompt.find("introduction and conclusion"), std::string::npos);
}

TEST(Reorganize, SourceClustersRestoredByTitle) {
  const auto o = outline_from_reorganized("Mid\n    High child a\nHigh\nUnknown\nMid", sample_clusters());
  EXPECT_EQ(o.roots[0].source_cluster, 2);
  EXPECT_EQ(o.roots[0].children[0].source_cluster, 4);
  EXPECT_EQ(o.roots[1].source_cluster, 1);
  EXPECT_FALSE(o.roots[2].source_cluster);
  EXPECT_FALSE(o.roots[3].source_cluster);
}

TEST(Json, RoundTripAndValidation) {
  auto o = outline_from_reorganized("I. A\n    B\nC", sample_clusters());
  o.add_node(std::string("1"), "New");
  const auto j = outline_to_json(o);
  EXPECT_EQ(outline_from_json(j), o);
  EXPECT_EQ(j[0]["marker"], "I.");
  EXPECT_TRUE(j[1]["source_cluster"].is_null());
  EXPECT_EQ(code_of([] { outline_from_json(nlohmann::json::object()); }), ErrorCode::InvalidParams);
  EXPECT_EQ(code_of([] {
              outline_from_json(nlohmann::json::parse(R"([{"id":"a","title":"x"},{"id":"a","title":"y"}])"));
            }),
            ErrorCode::InvalidParams);
  EXPECT_EQ(code_of([] { outline_from_json(nlohmann::json::parse(R"([{"id":"a","title":" "}])")); }),
            ErrorCode::InvalidParams);
}

}  // namespace
}  // namespace lexreport
