#include <gtest/gtest.h>

#include <nlohmann/json.hpp>
#include <regex>

#include "lexreport/report.hpp"
#include "test_support.hpp"

namespace lexreport {
namespace {

using testing::code_of;

SectionDraft draft(const std::string& id, const std::string& text, std::vector<ParagraphRef> cited,
                   std::vector<ParagraphRef> unresolved = {}) {
  SectionDraft d;
  d.node_id = id;
  d.text = text;
  d.citations = std::move(cited);
  d.unresolved = std::move(unresolved);
  d.provided = d.citations;
  d.iterations = 1;
  return d;
}

Report sample_report() {
  auto outline = parse_toc("Article 8\n    Private Life\n        Data Protection\n    Family Life\nArticle 3");
  std::map<std::string, SectionDraft> drafts;
  drafts["1.1.1"] = draft("1.1.1", "Stored data (001-4567#12). Invented (zzz#9).", {{"001-4567", 12}}, {{"zzz", 9}});
  drafts["2"] = draft("2", "Ill-treatment <b>&</b> \"forced\" (001-1#3)\n\nSecond block (001-1#3).", {{"001-1", 3}});
  auto r = assemble(outline, std::move(drafts));
  r.session_id = "s1";
  r.query = "privacy and ill-treatment";
  r.created_at = kFixedTimestamp;
  r.hits = {{{"001-4567", 12}, 0.75, 0}, {{"001-1", 3}, 0.5, 1}};
  r.stages["retrieval"] = {"done", ""};
  r.stages["generate"] = {"failed", "leaf 1.2: provider down"};
  return r;
}

TEST(Assemble, MissingSectionsAndUnknownLeaves) {
  const auto r = sample_report();
  EXPECT_EQ(r.missing_sections(), (std::vector<std::string>{"1.2"}));
  const auto md = render_markdown(r);
  std::size_t markers = 0;
  for (auto p = md.find(kNotGeneratedMarker); p != std::string::npos; p = md.find(kNotGeneratedMarker, p + 1)) ++markers;
  EXPECT_EQ(markers, 1U);

  const auto outline = parse_toc("A\nB\nC");
  std::map<std::string, SectionDraft> one{{"2", draft("2", "x", {})}};
  EXPECT_EQ(assemble(outline, one).missing_sections(), (std::vector<std::string>{"1", "3"}));
  std::map<std::string, SectionDraft> all{{"1", draft("1", "x", {})}, {"2", draft("2", "y", {})}, {"3", draft("3", "z", {})}};
  EXPECT_TRUE(assemble(outline, all).missing_sections().empty());
  EXPECT_EQ(render_markdown(assemble(outline, all)).find(kNotGeneratedMarker), std::string::npos);
  std::map<std::string, SectionDraft> bad{{"9", draft("9", "x", {})}};
  EXPECT_EQ(code_of([&] { assemble(outline, bad); }), ErrorCode::UnknownLeafId);
  const auto nested = parse_toc("A\n    A1");
  std::map<std::string, SectionDraft> internal{{"1", draft("1", "x", {})}};
  EXPECT_EQ(code_of([&] { assemble(nested, internal); }), ErrorCode::UnknownLeafId);
}

TEST(Links, TemplateSubstitution) {
  EXPECT_EQ(citation_link("https://hudoc.echr.coe.int/eng?i={id}", {"001-4567", 12}),
            "https://hudoc.echr.coe.int/eng?i=001-4567");
  EXPECT_EQ(citation_link("https://x/{id}#p{para}", {"a b", 3}), "https://x/a%20b#p3");
  EXPECT_EQ(code_of([] { check_link_template("https://x/{para}"); }), ErrorCode::BadTemplate);
  EXPECT_EQ(code_of([] { render_markdown(Report{}, "no placeholders"); }), ErrorCode::BadTemplate);
  EXPECT_EQ(code_of([] { render_html(Report{}, "nope"); }), ErrorCode::BadTemplate);
}

TEST(Markdown, HeadingsCitationsAndMarkers) {
  const auto md = render_markdown(sample_report());
  EXPECT_EQ(md.rfind("**Query:** privacy and ill-treatment\n", 0), 0U);
  EXPECT_NE(md.find("\n# Article 8\n"), std::string::npos);
  EXPECT_NE(md.find("\n## Private Life\n"), std::string::npos);
  EXPECT_NE(md.find("\n### Data Protection\n"), std::string::npos);
  EXPECT_NE(md.find("[(001-4567 § 12)](https://hudoc.echr.coe.int/eng?i=001-4567)"), std::string::npos);
  EXPECT_NE(md.find("⚠(zzz#9)"), std::string::npos);
  EXPECT_EQ(md.find("(zzz#9)]"), std::string::npos);
  EXPECT_EQ(md, render_markdown(sample_report()));

  auto deep = sample_report();
  deep.outline = parse_toc("a\n    b\n        c\n            d");
  deep.sections.clear();
  EXPECT_NE(render_markdown(deep).find("\n### d\n"), std::string::npos);
}

TEST(Markdown, CitationCountPreserved) {
  const auto r = sample_report();
  const auto md = render_markdown(r);
  std::size_t links = 0;
  std::size_t flagged = 0;
  for (auto p = md.find("](https://"); p != std::string::npos; p = md.find("](https://", p + 1)) ++links;
  for (auto p = md.find("⚠("); p != std::string::npos; p = md.find("⚠(", p + 1)) ++flagged;
  std::size_t in_drafts = 0;
  for (const auto& [id, d] : r.sections) in_drafts += find_citation_spans(d.text).size();
  EXPECT_EQ(links + flagged, in_drafts);
  EXPECT_EQ(flagged, 1U);
}

TEST(Markdown, PartialNote) {
  auto r = sample_report();
  r.sections["2"].partial = true;
  EXPECT_NE(render_markdown(r).find("incomplete"), std::string::npos);
}

/// True when every non-void tag is closed in order.
bool well_formed(const std::string& html) {
  static const std::set<std::string> kVoid{"meta", "br", "hr", "img", "link", "input"};
  std::vector<std::string> stack;
  std::regex tag(R"(<(/?)([a-zA-Z][a-zA-Z0-9]*)[^>]*>)");
  for (auto it = std::sregex_iterator(html.begin(), html.end(), tag); it != std::sregex_iterator(); ++it) {
    const std::string name = (*it)[2];
    if (kVoid.count(name)) continue;
    if ((*it)[1].length() == 0) {
      stack.push_back(name);
    } else {
      if (stack.empty() || stack.back() != name) return false;
      stack.pop_back();
    }
  }
  return stack.empty();
}

TEST(Html, NavAndWellFormed) {
  const auto r = sample_report();
  const auto html = render_html(r);
  EXPECT_EQ(html.rfind("<!DOCTYPE html>", 0), 0U);
  EXPECT_TRUE(well_formed(html));
  const auto nav_start = html.find("<nav>");
  const auto nav_end = html.find("</nav>");
  ASSERT_NE(nav_start, std::string::npos);
  const auto nav = html.substr(nav_start, nav_end - nav_start);
  // Two roots: the outermost list has exactly two items.
  int depth = 0;
  int top_items = 0;
  for (std::size_t i = 0; i < nav.size(); ++i) {
    if (nav.compare(i, 4, "<ul>") == 0) ++depth;
    if (nav.compare(i, 5, "</ul>") == 0) --depth;
    if (nav.compare(i, 4, "<li>") == 0 && depth == 1) ++top_items;
  }
  EXPECT_EQ(top_items, 2);
  EXPECT_NE(html.find("<section id=\"sec-1.1.1\">"), std::string::npos);
  EXPECT_NE(html.find("&lt;b&gt;&amp;&lt;/b&gt; &quot;forced&quot;"), std::string::npos);
  EXPECT_EQ(html.find("<b>&</b>"), std::string::npos);
  EXPECT_NE(html.find("<span class=\"unresolved\">⚠(zzz#9)</span>"), std::string::npos);
  EXPECT_NE(html.find("<a href=\"https://hudoc.echr.coe.int/eng?i=001-4567\">(001-4567 § 12)</a>"), std::string::npos);
  EXPECT_EQ(html, render_html(r));
  EXPECT_TRUE(well_formed(render_html(Report{})));
}

TEST(Session, RoundTrip) {
  testing::TempDir dir;
  auto r = sample_report();
  r.sections["2"].partial = true;
  r.sections["2"].truncated = true;
  r.sections["2"].error = "boom";
  r.params.reorganize = false;
  r.params.retrieval.lambda = 0.25;
  save_session(r, dir / "s.json");
  const auto back = load_session(dir / "s.json");
  EXPECT_EQ(back, r);
  EXPECT_EQ(back.sections.at("1.1.1").unresolved, (std::vector<ParagraphRef>{{"zzz", 9}}));
  const auto j = nlohmann::json::parse(testing::read_file(dir / "s.json"));
  EXPECT_EQ(j["version"], 1);
  for (const char* key : {"session_id", "query", "params_snapshot", "created_at", "hits", "outline", "sections", "stages"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_FALSE(std::filesystem::exists(dir / "s.json.tmp"));
}

TEST(Session, CorruptFiles) {
  testing::TempDir dir;
  save_session(sample_report(), dir / "s.json");
  const auto text = testing::read_file(dir / "s.json");
  testing::write_file(dir / "t.json", text.substr(0, text.size() / 2));
  EXPECT_EQ(code_of([&] { load_session(dir / "t.json"); }), ErrorCode::CorruptSession);
  auto j = nlohmann::json::parse(text);
  j["version"] = 2;
  testing::write_file(dir / "v.json", j.dump());
  EXPECT_EQ(code_of([&] { load_session(dir / "v.json"); }), ErrorCode::CorruptSession);
  j = nlohmann::json::parse(text);
  j["sections"]["1.1.1"]["citations"] = {"no-hash"};
  testing::write_file(dir / "c.json", j.dump());
  EXPECT_EQ(code_of([&] { load_session(dir / "c.json"); }), ErrorCode::CorruptSession);
  j = nlohmann::json::parse(text);
  j.erase("query");
  testing::write_file(dir / "q.json", j.dump());
  EXPECT_EQ(code_of([&] { load_session(dir / "q.json"); }), ErrorCode::CorruptSession);
  EXPECT_EQ(code_of([&] { load_session(dir / "missing.json"); }), ErrorCode::FileNotFound);
}

TEST(Session, NoOutlineRoundTrip) {
  Report r;
  r.session_id = "s9";
  r.query = "q";
  r.created_at = kFixedTimestamp;
  EXPECT_EQ(report_from_json(report_to_json(r)), r);
}

TEST(RefToken, Parse) {
  EXPECT_EQ(parse_ref_token("001-57574#12"), (ParagraphRef{"001-57574", 12}));
  EXPECT_EQ(parse_ref_token("a#b#3"), (ParagraphRef{"a#b", 3}));
  for (const char* bad : {"x", "#3", "a#", "a#1x", "a#99999999999"}) {
    EXPECT_EQ(code_of([&] { parse_ref_token(bad); }), ErrorCode::InvalidParams) << bad;
  }
}

TEST(Timestamp, Format) {
  EXPECT_TRUE(std::regex_match(utc_timestamp(), std::regex(R"(\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z)")));
}

}  // namespace
}  // namespace lexreport
