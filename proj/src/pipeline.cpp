#include "lexreport/pipeline.hpp"

#include "lexreport/error.hpp"
#include "lexreport/http_providers.hpp"
#include "lexreport/mock_providers.hpp"
#include "lexreport/parallel.hpp"

namespace lexreport {

namespace {

struct LabelTask {
  const ClusterNode* node;
  std::string title;
};

std::vector<std::string> member_texts(const Corpus& corpus, const std::vector<ParagraphHit>& hits,
                                      std::span<const std::size_t> members) {
  std::vector<std::string> out;
  for (auto m : members) out.push_back(corpus.get_paragraph(hits[m].ref).text);
  return out;
}

}  // namespace

Providers make_mock_providers(const Corpus& corpus) {
  Providers p;
  p.trace = std::make_shared<CallTrace>();
  p.chat = std::make_shared<TracingChatProvider>(std::make_shared<MockChat>(TokenStats(corpus)), p.trace);
  p.embedder = std::make_shared<MockEmbedder>();
  return p;
}

Providers make_http_providers(const ProviderConfig& chat, const ProviderConfig& embedding, const LogFn& log) {
  chat.validate();
  embedding.validate();
  RetryPolicy chat_retry;
  chat_retry.max_retries = chat.max_retries;
  RetryPolicy embed_retry;
  embed_retry.max_retries = embedding.max_retries;
  Providers p;
  p.trace = std::make_shared<CallTrace>();
  auto inner = std::make_shared<OpenAICompatibleChat>(chat, make_http_transport(chat.endpoint_url, chat.timeout),
                                                      chat_retry, log);
  p.chat = std::make_shared<TracingChatProvider>(inner, p.trace);
  p.embedder = std::make_shared<OpenAICompatibleEmbedder>(
      embedding, make_http_transport(embedding.endpoint_url, embedding.timeout), embed_retry, log);
  return p;
}

Report start_report(std::string_view query, const PipelineParams& params, const VectorIndex& index,
                    Embedder& embedder) {
  params.validate();
  Report r;
  r.query = std::string(query);
  r.params = params;
  r.hits = search(index, embedder, query, params.retrieval);
  r.stages["retrieval"] = {"done", ""};
  return r;
}

OutlineBuild build_outline(const Corpus& corpus, const VectorIndex& index, const std::vector<ParagraphHit>& hits,
                           const PipelineParams& params, ChatProvider& chat, std::size_t workers) {
  if (hits.empty()) throw Error(ErrorCode::InvalidParams, "outline needs at least one retrieved paragraph");
  const auto positions = record_positions(index);
  std::vector<EmbeddingVector> points;
  points.reserve(hits.size());
  for (const auto& h : hits) {
    const auto it = positions.find(h.ref);
    if (it == positions.end()) throw Error(ErrorCode::NotFound, "paragraph " + h.ref.token() + " is not in the index");
    points.push_back(index.records[it->second].vector);
  }

  OutlineBuild out;
  bool structured = false;
  try {
    out.clusters = cluster(points, params.cluster);
    structured = out.clusters.assignment.cluster_count() > 0;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::TooFewPoints) throw;
  }
  if (!structured) {
    // One heading over everything.
    out.single_cluster_fallback = true;
    out.clusters.assignment.labels.assign(points.size(), 0);
    if (out.clusters.tree.nodes.empty()) {
      ClusterNode root;
      root.members.resize(points.size());
      for (std::size_t i = 0; i < points.size(); ++i) root.members[i] = i;
      out.clusters.tree.nodes.push_back(std::move(root));
    }
    for (auto& n : out.clusters.tree.nodes) n.is_selected = false;
    out.clusters.tree.nodes[0].is_selected = true;
  }

  const auto& tree = out.clusters.tree;
  auto selected = tree.selected();
  std::sort(selected.begin(), selected.end(),
            [&](int a, int b) { return tree.nodes[a].members.front() < tree.nodes[b].members.front(); });

  // Headings, then the condensed-tree children of each heading.
  std::vector<LabelTask> tasks;
  std::vector<std::pair<std::size_t, std::vector<std::size_t>>> layout;  // heading task -> child tasks
  for (int id : selected) {
    const auto& node = tree.nodes[id];
    layout.emplace_back(tasks.size(), std::vector<std::size_t>{});
    tasks.push_back({&node, ""});
    if (out.single_cluster_fallback) continue;
    for (int c : node.children) {
      layout.back().second.push_back(tasks.size());
      tasks.push_back({&tree.nodes[c], ""});
    }
  }
  parallel_for(tasks.size(), workers, [&](std::size_t i) {
    const auto reps = representatives(points, tasks[i].node->members, params.representatives);
    tasks[i].title = label_cluster(member_texts(corpus, hits, reps), chat);
  });

  for (const auto& [head, kids] : layout) {
    TitledCluster tc{tasks[head].node->node_id, tasks[head].title, tasks[head].node->stability, {}};
    for (auto k : kids) tc.children.push_back({tasks[k].node->node_id, tasks[k].title, tasks[k].node->stability, {}});
    out.titled.push_back(std::move(tc));
  }

  if (params.reorganize) {
    out.raw_toc = reorganize(out.titled, chat);
    try {
      out.outline = outline_from_reorganized(*out.raw_toc, out.titled);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyToc) throw;
      out.outline = concat_fallback(out.titled);
    }
  } else {
    out.outline = concat_fallback(out.titled);
  }
  return out;
}

SectionDraft generate_leaf(const Corpus& corpus, const VectorIndex& index, Embedder& embedder, ChatProvider& chat,
                           const Outline& outline, std::string_view leaf_id, const GenParams& params) {
  const auto query = path_query(outline, leaf_id);
  const auto hits = retrieve_for_section(index, embedder, query, params.per_section_m);
  std::vector<Paragraph> paragraphs;
  paragraphs.reserve(hits.size());
  for (const auto& h : hits) paragraphs.push_back(corpus.get_paragraph(h.ref));
  auto draft = generate_section(query, paragraphs, params, chat);
  draft.node_id = std::string(leaf_id);
  const auto provided = draft.provided;
  return validate_citations(std::move(draft), provided, corpus);
}

std::vector<LeafFailure> generate_all(Report& report, const Corpus& corpus, const VectorIndex& index,
                                      Embedder& embedder, ChatProvider& chat, std::size_t workers) {
  if (!report.outline) throw Error(ErrorCode::InvalidParams, "report has no outline");
  const auto leaves = report.outline->leaves();
  std::vector<std::optional<SectionDraft>> drafts(leaves.size());
  std::vector<std::string> errors(leaves.size());
  parallel_for(leaves.size(), workers, [&](std::size_t i) {
    try {
      drafts[i] = generate_leaf(corpus, index, embedder, chat, *report.outline, leaves[i]->node_id, report.params.gen);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });
  std::vector<LeafFailure> failures;
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    if (drafts[i]) {
      report.sections[leaves[i]->node_id] = std::move(*drafts[i]);
    } else {
      failures.push_back({leaves[i]->node_id, errors[i]});
    }
  }
  return failures;
}

std::vector<EvalResult> evaluate_structure(const Report& report, const std::optional<std::string>& reference_toc,
                                           ChatProvider& judge) {
  if (!report.outline) throw Error(ErrorCode::InvalidParams, "report has no outline to evaluate");
  auto results = eval_structure(report.query, *report.outline, reference_toc, judge);
  for (auto& r : results) r.system = system_name(report.params);
  return results;
}

std::vector<EvalResult> evaluate_content(const Report& report, const Corpus& corpus,
                                         const std::optional<std::string>& reference_content, ChatProvider& judge) {
  if (!report.outline) throw Error(ErrorCode::InvalidParams, "report has no outline to evaluate");
  std::vector<EvalResult> out;
  for (const auto* leaf : report.outline->leaves()) {
    const auto it = report.sections.find(leaf->node_id);
    if (it == report.sections.end()) continue;
    std::vector<std::string> cited;
    for (const auto& ref : it->second.citations) {
      cited.push_back(ref.token() + ": " + corpus.get_paragraph(ref).text);
    }
    auto results = eval_content(path_query(*report.outline, leaf->node_id), it->second.text, cited,
                                reference_content, judge);
    for (auto& r : results) {
      r.system = system_name(report.params);
      out.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace lexreport
