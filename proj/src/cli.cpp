#include "lexreport/cli.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lexreport/config.hpp"
#include "lexreport/error.hpp"
#include "lexreport/pipeline.hpp"
#include "lexreport/service.hpp"

namespace lexreport {

namespace {

namespace fs = std::filesystem;

/// Bad flag values or missing inputs the user can fix by changing the command.
struct UsageError {
  std::string message;
};

struct Globals {
  std::string config_path;
  bool seed_mock = false;
  std::string trace_path;
  std::string corpus_path;
  std::string index_path;
};

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << content;
  if (!out.flush()) throw Error(ErrorCode::IoError, "cannot write " + path.string());
}

template <typename Fn>
void as_usage(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    throw UsageError{e.what()};
  }
}

class Runner {
 public:
  Runner(Globals g, std::ostream& out, std::ostream& err) : g_(std::move(g)), out_(out), err_(err) {}

  const AppConfig& config() {
    if (!config_) {
      AppConfig cfg;
      if (!g_.config_path.empty()) {
        try {
          cfg = load_config(g_.config_path);
        } catch (const Error& e) {
          throw UsageError{e.what()};
        }
      }
      if (g_.seed_mock) cfg.mock = true;
      if (!g_.corpus_path.empty()) cfg.corpus_path = g_.corpus_path;
      if (!g_.index_path.empty()) cfg.index_path = g_.index_path;
      config_ = std::move(cfg);
    }
    return *config_;
  }

  const Corpus& corpus() {
    if (!corpus_) {
      const auto& path = config().corpus_path;
      if (path.empty()) throw UsageError{"no corpus given; pass --corpus FILE or set corpus= in --config"};
      corpus_ = std::make_shared<Corpus>(Corpus::ingest(path));
      for (const auto& r : corpus_->stats().rejected_records) {
        err_ << "warning: corpus line " << r.line << " skipped: " << r.reason << "\n";
      }
    }
    return *corpus_;
  }

  std::shared_ptr<const Corpus> corpus_ptr() {
    corpus();
    return corpus_;
  }

  std::shared_ptr<const VectorIndex> index() {
    if (!index_) {
      const auto& path = config().index_path;
      if (path.empty()) throw UsageError{"no index given; pass --index FILE or set index= in --config"};
      index_ = std::make_shared<VectorIndex>(load_index(path));
      if (const auto w = fingerprint_warning(*index_, corpus())) err_ << "warning: " << *w << "\n";
    }
    return index_;
  }

  Providers& providers() {
    if (!providers_) {
      const auto& cfg = config();
      if (cfg.mock) {
        providers_ = make_mock_providers(corpus());
      } else {
        if (cfg.chat.endpoint_url.empty() || cfg.embedding.endpoint_url.empty()) {
          throw UsageError{
              "no provider configured; pass --seed-mock or set chat.endpoint and embedding.endpoint in --config"};
        }
        auto log = [this, verbose = cfg.chat.verbose](std::string_view line) {
          if (verbose) err_ << line << "\n";
        };
        try {
          providers_ = make_http_providers(cfg.chat, cfg.embedding, log);
        } catch (const Error& e) {
          throw UsageError{e.what()};
        }
      }
    }
    return *providers_;
  }

  std::string timestamp() { return config().mock ? kFixedTimestamp : utc_timestamp(); }

  void write_trace(const std::string& command) {
    if (g_.trace_path.empty() || !providers_) return;
    nlohmann::json calls = nlohmann::json::object();
    for (auto s : {Stage::Keyphrase, Stage::TopicLabel, Stage::Reorganize, Stage::Content, Stage::Judge}) {
      calls[std::string(to_string(s))] = providers_->trace->count(s);
    }
    nlohmann::json j{{"command", command}, {"chat_calls", calls}, {"embed_batches", providers_->embedder->batch_calls()}};
    write_text(g_.trace_path, j.dump(2) + "\n");
  }

  std::ostream& out() { return out_; }
  std::ostream& err() { return err_; }

 private:
  Globals g_;
  std::ostream& out_;
  std::ostream& err_;
  std::optional<AppConfig> config_;
  std::shared_ptr<Corpus> corpus_;
  std::shared_ptr<VectorIndex> index_;
  std::optional<Providers> providers_;
};

Service* g_serving = nullptr;

void on_signal(int) {
  if (g_serving) g_serving->stop();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Case-law report builder: retrieval, outline, grounded section drafts, evaluation."};
  app.name("lexreport");
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config_path, "key=value config file");
  app.add_flag("--seed-mock", g.seed_mock, "offline deterministic mock providers");
  app.add_option("--trace", g.trace_path, "write per-stage provider call counts to FILE");
  app.add_option("--corpus", g.corpus_path, "corpus JSONL file");
  app.add_option("--index", g.index_path, "vector index file");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "validate a corpus file and print its statistics");

  // index
  auto* index = app.add_subcommand("index", "build the paragraph vector index");
  std::string index_mode = "keyphrase";
  std::size_t keyphrase_batch = kDefaultKeyphraseBatch;
  std::string index_out;
  index->add_option("--mode", index_mode, "keyphrase | paragraph")->check(CLI::IsMember({"keyphrase", "paragraph"}));
  index->add_option("--batch-size", keyphrase_batch, "paragraphs per keyphrase prompt")->check(CLI::PositiveNumber);
  index->add_option("--out", index_out, "index file to write")->required();

  // query
  auto* query = app.add_subcommand("query", "retrieve paragraphs for a query and start a session file");
  std::string q;
  std::optional<std::size_t> k, fetch_k;
  std::optional<double> lambda, threshold;
  std::optional<std::string> retrieval_mode;
  std::string query_out;
  query->add_option("--q", q, "query text")->required();
  query->add_option("--k", k, "paragraphs selected");
  query->add_option("--fetch-k", fetch_k, "candidate pool size");
  query->add_option("--lambda", lambda, "MMR relevance/diversity trade-off in [0, 1]");
  query->add_option("--threshold", threshold, "minimum cosine similarity in [-1, 1]");
  query->add_option("--mode", retrieval_mode, "mmr | relevance")->check(CLI::IsMember({"mmr", "relevance"}));
  query->add_option("--out", query_out, "session file to write");

  // outline
  auto* outline = app.add_subcommand("outline", "cluster the session's hits into a table of contents");
  std::string session_path;
  std::string session_out;
  bool no_reorganize = false;
  std::optional<std::size_t> min_cluster_size, min_samples;
  outline->add_option("--session", session_path, "session file")->required();
  outline->add_flag("--no-reorganize", no_reorganize, "concatenate cluster topics instead of reorganizing");
  outline->add_option("--min-cluster-size", min_cluster_size, "HDBSCAN minimum cluster size");
  outline->add_option("--min-samples", min_samples, "HDBSCAN core-distance neighbour count");
  outline->add_option("--out", session_out, "write the session here instead of in place");

  // generate
  auto* generate = app.add_subcommand("generate", "draft section content for the outline's leaves");
  std::string node;
  std::optional<std::size_t> per_section_m, gen_batch;
  generate->add_option("--session", session_path, "session file")->required();
  generate->add_option("--node", node, "only this leaf");
  generate->add_option("--per-section-m", per_section_m, "paragraphs retrieved per section");
  generate->add_option("--batch-size", gen_batch, "paragraphs per generation call");
  generate->add_option("--out", session_out, "write the session here instead of in place");

  // report
  auto* report = app.add_subcommand("report", "render a session as Markdown or HTML");
  std::string format = "md";
  std::string report_out;
  std::optional<std::string> link_template;
  report->add_option("--session", session_path, "session file")->required();
  report->add_option("--format", format, "md | html")->check(CLI::IsMember({"md", "html"}));
  report->add_option("--out", report_out, "output file (default stdout)");
  report->add_option("--link-template", link_template, "citation URL template with {id} and optional {para}");

  // eval
  auto* eval = app.add_subcommand("eval", "LLM-judge evaluation of session outlines or contents");
  std::string eval_kind;
  std::vector<std::string> eval_sessions;
  std::string reference_path, results_path, csv_path;
  eval->add_option("kind", eval_kind, "structure | content")->required()->check(CLI::IsMember({"structure", "content"}));
  eval->add_option("--session", eval_sessions, "session file (repeatable)")->required();
  eval->add_option("--reference", reference_path, "reference ToC (structure) or reference content (content)");
  eval->add_option("--results", results_path, "write per-item results as JSON lines");
  eval->add_option("--csv", csv_path, "write the aggregate as CSV");

  // serve
  auto* serve = app.add_subcommand("serve", "run the HTTP API");
  std::optional<int> port;
  std::optional<std::string> sessions_dir;
  serve->add_option("--port", port, "listening port")->check(CLI::Range(0, 65535));
  serve->add_option("--sessions-dir", sessions_dir, "directory for session files");

  for (auto* sub : app.get_subcommands([](const CLI::App*) { return true; })) sub->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << " (run 'lexreport --help' for usage)\n";
    return 1;
  }

  Runner run(g, out, err);
  std::string command;
  try {
    auto load = [&] { return load_session(session_path); };
    auto save = [&](const Report& r) { save_session(r, session_out.empty() ? fs::path(session_path) : fs::path(session_out)); };

    if (ingest->parsed()) {
      command = "ingest";
      const auto& c = run.corpus();
      nlohmann::json j{{"judgments", c.stats().judgment_count},
                       {"paragraphs", c.stats().paragraph_count},
                       {"rejected", c.stats().rejected_records.size()},
                       {"fingerprint", to_hex(c.fingerprint())}};
      out << j.dump() << "\n";
    } else if (index->parsed()) {
      command = "index";
      IndexBuildOptions opts;
      opts.mode = parse_index_mode(index_mode);
      opts.batch_size = keyphrase_batch;
      opts.workers = run.config().workers;
      auto& p = run.providers();
      const auto built = build_index(run.corpus(), opts, *p.chat, *p.embedder);
      save_index(built, index_out);
      out << "indexed " << built.records.size() << " paragraphs (" << to_string(built.mode) << ", D=" << built.dimension
          << ") -> " << index_out << "\n";
    } else if (query->parsed()) {
      command = "query";
      PipelineParams params = run.config().defaults;
      if (k) params.retrieval.k = *k;
      if (fetch_k) params.retrieval.fetch_k = *fetch_k;
      if (lambda) params.retrieval.lambda = *lambda;
      if (threshold) params.retrieval.sim_threshold = *threshold;
      if (retrieval_mode) params.retrieval.mode = parse_retrieval_mode(*retrieval_mode);
      // A pool smaller than k only caps the result size.
      if (k && !fetch_k && params.retrieval.fetch_k < *k) params.retrieval.fetch_k = *k;
      as_usage([&] { params.validate(); });
      const auto idx = run.index();
      params.index_mode = idx->mode;
      auto& p = run.providers();
      auto r = start_report(q, params, *idx, *p.embedder);
      r.created_at = run.timestamp();
      for (const auto& h : r.hits) out << h.rank << "\t" << h.ref.token() << "\t" << h.query_similarity << "\n";
      if (!query_out.empty()) {
        r.session_id = fs::path(query_out).stem().string();
        save_session(r, query_out);
      }
    } else if (outline->parsed()) {
      command = "outline";
      auto r = load();
      if (no_reorganize) r.params.reorganize = false;
      if (min_cluster_size) r.params.cluster.min_cluster_size = *min_cluster_size;
      if (min_samples) r.params.cluster.min_samples = *min_samples;
      as_usage([&] { r.params.validate(); });
      auto& p = run.providers();
      auto built = build_outline(run.corpus(), *run.index(), r.hits, r.params, *p.chat, run.config().workers);
      r.outline = std::move(built.outline);
      r.sections.clear();
      r.stages["outline"] = {"done", ""};
      r.stages.erase("generate");
      save(r);
      out << serialize_toc(*r.outline);
    } else if (generate->parsed()) {
      command = "generate";
      auto r = load();
      if (per_section_m) r.params.gen.per_section_m = *per_section_m;
      if (gen_batch) r.params.gen.batch_size = *gen_batch;
      as_usage([&] { r.params.validate(); });
      if (!r.outline) throw UsageError{"the session has no outline; run 'lexreport outline' first"};
      auto& p = run.providers();
      std::vector<LeafFailure> failures;
      if (!node.empty()) {
        const auto* n = r.outline->find(node);
        if (!n) throw Error(ErrorCode::UnknownNode, "no node '" + node + "'");
        if (!n->is_leaf()) throw Error(ErrorCode::NotALeaf, "node '" + node + "' has children");
        try {
          r.sections[node] =
              generate_leaf(run.corpus(), *run.index(), *p.embedder, *p.chat, *r.outline, node, r.params.gen);
        } catch (const Error& e) {
          failures.push_back({node, e.what()});
        }
      } else {
        failures = generate_all(r, run.corpus(), *run.index(), *p.embedder, *p.chat, run.config().workers);
      }
      std::string summary;
      for (const auto& f : failures) summary += (summary.empty() ? "" : "; ") + f.node_id + ": " + f.error;
      r.stages["generate"] = failures.empty() ? StageStatus{"done", ""} : StageStatus{"failed", "generate: " + summary};
      save(r);
      std::size_t unresolved = 0;
      for (const auto& [id, d] : r.sections) unresolved += d.unresolved.size();
      out << "sections " << r.sections.size() << "/" << r.outline->leaves().size() << ", unresolved citations "
          << unresolved << "\n";
      for (const auto& f : failures) err << "error: section " << f.node_id << ": " << f.error << "\n";
      if (!failures.empty()) {
        run.write_trace(command);
        return 2;
      }
    } else if (report->parsed()) {
      command = "report";
      const auto tmpl = link_template.value_or(run.config().link_template);
      as_usage([&] { check_link_template(tmpl); });
      const auto r = load();
      const auto rendered = format == "html" ? render_html(r, tmpl) : render_markdown(r, tmpl);
      if (report_out.empty()) {
        out << rendered;
      } else {
        write_text(report_out, rendered);
      }
    } else if (eval->parsed()) {
      command = "eval";
      std::optional<std::string> reference;
      if (!reference_path.empty()) reference = read_text(reference_path);
      auto& p = run.providers();
      std::vector<EvalResult> results;
      for (const auto& path : eval_sessions) {
        const auto r = load_session(path);
        auto rs = eval_kind == "structure" ? evaluate_structure(r, reference, *p.chat)
                                           : evaluate_content(r, run.corpus(), reference, *p.chat);
        results.insert(results.end(), rs.begin(), rs.end());
      }
      const auto rows = aggregate(results);
      if (!results_path.empty()) write_text(results_path, results_jsonl(results));
      if (!csv_path.empty()) write_text(csv_path, aggregate_csv(rows));
      out << aggregate_table(rows);
    } else if (serve->parsed()) {
      command = "serve";
      const auto& cfg = run.config();
      ServiceOptions opts;
      opts.sessions_dir = sessions_dir.value_or(cfg.sessions_dir.string());
      opts.link_template = cfg.link_template;
      opts.workers = cfg.workers;
      opts.fixed_timestamps = cfg.mock;
      opts.defaults = cfg.defaults;
      Service service(run.corpus_ptr(), run.index(), run.providers(), opts);
      const int bound = service.bind(cfg.host, port.value_or(cfg.port));
      err << "listening on http://" << cfg.host << ":" << bound << "\n";
      g_serving = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      service.listen();
      g_serving = nullptr;
    }
    run.write_trace(command);
    return 0;
  } catch (const UsageError& e) {
    err << "error: " << e.message << "\n";
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace lexreport
