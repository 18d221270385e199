#include "lexreport/service.hpp"

#include <httplib.h>

#include <atomic>
#include <condition_variable>
#include <list>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "lexreport/text.hpp"

namespace lexreport {

namespace {

using json = nlohmann::json;

struct Job {
  std::string id;
  std::string kind;  // "outline" | "generate" | "generate_all"
  std::string node_id;
  std::string state = "running";
  std::string error;
  std::vector<LeafFailure> failures;
};

json job_to_json(const Job& job) {
  json j{{"job_id", job.id}, {"kind", job.kind}, {"state", job.state}, {"error", job.error}};
  if (!job.node_id.empty()) j["node_id"] = job.node_id;
  j["failures"] = json::array();
  for (const auto& f : job.failures) j["failures"].push_back({{"node_id", f.node_id}, {"error", f.error}});
  return j;
}

struct SessionState {
  std::mutex mu;
  Report report;
  std::map<std::string, Job> jobs;
  bool outline_running = false;
  bool generate_all_running = false;
  std::set<std::string> generating;               // leaves with a job in flight
  std::map<std::string, std::string> gen_errors;  // leaf -> last failure
};

struct Reply {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
  std::string location;
};

Reply json_reply(int status, const json& j) { return {status, j.dump(), "application/json", ""}; }

Reply error_reply(int status, std::string_view code, std::string_view message) {
  return json_reply(status, {{"error", code}, {"message", message}});
}

json parse_object(const std::string& body) {
  auto j = json::parse(body.empty() ? std::string("{}") : body);
  if (!j.is_object()) throw Error(ErrorCode::InvalidParams, "request body must be a JSON object");
  return j;
}

std::string string_field(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) {
    throw Error(ErrorCode::InvalidParams, std::string("'") + key + "' must be a string");
  }
  return j[key].get<std::string>();
}

void rerank(std::vector<ParagraphHit>& hits) {
  for (std::size_t i = 0; i < hits.size(); ++i) hits[i].rank = i;
}

}  // namespace

int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyQuery:
    case ErrorCode::InvalidParams:
    case ErrorCode::EmptyToc:
    case ErrorCode::BadTemplate:
    case ErrorCode::FormatViolation:
    case ErrorCode::InvalidConfig:
      return 400;
    case ErrorCode::NotFound:
    case ErrorCode::UnknownNode:
    case ErrorCode::FileNotFound:
      return 404;
    case ErrorCode::NotALeaf:
      return 409;
    case ErrorCode::NoCandidates:
      return 422;
    case ErrorCode::ProviderUnavailable:
    case ErrorCode::ResponseEmpty:
      return 502;
    default:
      return 500;
  }
}

struct Service::Impl {
  std::shared_ptr<const Corpus> corpus;
  std::shared_ptr<const VectorIndex> index;
  Providers providers;
  ServiceOptions opts;
  httplib::Server server;

  std::mutex sessions_mu;
  std::map<std::string, std::shared_ptr<SessionState>> sessions;
  std::size_t next_session = 1;
  std::atomic<std::size_t> next_job{1};

  std::mutex idem_mu;
  std::map<std::string, Reply> idem;

  std::mutex jobs_mu;
  std::condition_variable jobs_cv;
  std::size_t running_jobs = 0;
  std::list<std::jthread> threads;

  Impl(std::shared_ptr<const Corpus> c, std::shared_ptr<const VectorIndex> i, Providers p, ServiceOptions o)
      : corpus(std::move(c)), index(std::move(i)), providers(std::move(p)), opts(std::move(o)) {
    check_link_template(opts.link_template);
    std::filesystem::create_directories(opts.sessions_dir);
    load_existing();
    routes();
  }

  ~Impl() {
    server.stop();
    wait_idle();
    threads.clear();
  }

  // ---- persistence ----

  std::filesystem::path session_path(const std::string& id) const { return opts.sessions_dir / (id + ".json"); }

  void persist(const SessionState& s) { save_session(s.report, session_path(s.report.session_id)); }

  void load_existing() {
    for (const auto& entry : std::filesystem::directory_iterator(opts.sessions_dir)) {
      if (entry.path().extension() != ".json") continue;
      const auto stem = entry.path().stem().string();
      if (stem.size() < 2 || stem[0] != 's') continue;
      auto state = std::make_shared<SessionState>();
      state->report = load_session(entry.path());
      // Jobs do not survive a restart.
      for (auto& [name, st] : state->report.stages) {
        if (st.state == "running") st = {"failed", name + ": interrupted by service restart"};
      }
      try {
        next_session = std::max(next_session, std::stoul(stem.substr(1)) + 1);
      } catch (const std::exception&) {
      }
      sessions[state->report.session_id] = std::move(state);
    }
  }

  std::shared_ptr<SessionState> session(const std::string& id) {
    std::lock_guard lock(sessions_mu);
    const auto it = sessions.find(id);
    if (it == sessions.end()) throw Error(ErrorCode::NotFound, "no session '" + id + "'");
    return it->second;
  }

  json session_json(const SessionState& s) const {
    auto j = report_to_json(s.report);
    json groups = json::array();
    std::map<std::string, std::size_t> slot;
    for (const auto& h : s.report.hits) {
      auto [it, fresh] = slot.emplace(h.ref.judgment_id, groups.size());
      if (fresh) {
        groups.push_back({{"judgment_id", h.ref.judgment_id},
                          {"case_name", corpus->judgment(h.ref.judgment_id).case_name},
                          {"hits", json::array()}});
      }
      groups[it->second]["hits"].push_back(hit_to_json(h));
    }
    j["hits_by_judgment"] = std::move(groups);
    j["jobs"] = json::array();
    for (const auto& [id, job] : s.jobs) j["jobs"].push_back(job_to_json(job));
    return j;
  }

  // ---- jobs ----

  template <typename Fn>
  void launch(Fn&& fn) {
    std::lock_guard lock(jobs_mu);
    ++running_jobs;
    threads.emplace_back([this, fn = std::forward<Fn>(fn)]() mutable {
      fn();
      std::lock_guard done(jobs_mu);
      --running_jobs;
      jobs_cv.notify_all();
    });
  }

  void wait_idle() {
    std::unique_lock lock(jobs_mu);
    jobs_cv.wait(lock, [&] { return running_jobs == 0; });
  }

  std::string new_job(SessionState& s, std::string kind, std::string node = {}) {
    Job job;
    job.id = "j" + std::to_string(next_job++);
    job.kind = std::move(kind);
    job.node_id = std::move(node);
    const auto id = job.id;
    s.jobs[id] = std::move(job);
    return id;
  }

  static void refresh_generate_stage(SessionState& s) {
    auto& st = s.report.stages["generate"];
    if (s.generate_all_running || !s.generating.empty()) {
      st = {"running", ""};
    } else if (!s.gen_errors.empty()) {
      std::vector<std::string> parts;
      for (const auto& [node, err] : s.gen_errors) parts.push_back(node + ": " + err);
      st = {"failed", "generate: " + text::join(parts, "; ")};
    } else {
      st = {"done", ""};
    }
  }

  Reply accepted(const SessionState& s, const std::string& job_id) const {
    auto r = json_reply(202, {{"job_id", job_id}, {"session_id", s.report.session_id}});
    r.location = "/sessions/" + s.report.session_id + "/jobs/" + job_id;
    return r;
  }

  // ---- handlers ----

  Reply create_session(const httplib::Request& req) {
    const auto body = parse_object(req.body);
    if (!body.contains("query") || !body["query"].is_string()) {
      throw Error(ErrorCode::EmptyQuery, "'query' must be a non-empty string");
    }
    auto pj = params_to_json(opts.defaults);
    pj["index_mode"] = std::string(to_string(index->mode));
    if (body.contains("params")) {
      const auto& given = body["params"];
      if (!given.is_object()) throw Error(ErrorCode::InvalidParams, "'params' must be an object");
      if (given.contains("index_mode") && given["index_mode"] != pj["index_mode"]) {
        throw Error(ErrorCode::InvalidParams, "the loaded index is in " + pj["index_mode"].get<std::string>() + " mode");
      }
      pj.merge_patch(given);
    }
    const auto params = params_from_json(pj);
    auto report = start_report(body["query"].get<std::string>(), params, *index, *providers.embedder);
    report.created_at = opts.fixed_timestamps ? kFixedTimestamp : utc_timestamp();

    auto state = std::make_shared<SessionState>();
    {
      std::lock_guard lock(sessions_mu);
      report.session_id = "s" + std::to_string(next_session++);
      state->report = std::move(report);
      sessions[state->report.session_id] = state;
    }
    std::lock_guard lock(state->mu);
    persist(*state);
    auto r = json_reply(201, session_json(*state));
    r.location = "/sessions/" + state->report.session_id;
    return r;
  }

  Reply get_session(const std::string& id) {
    auto s = session(id);
    std::lock_guard lock(s->mu);
    return json_reply(200, session_json(*s));
  }

  Reply patch_hits(const std::string& id, const httplib::Request& req) {
    auto s = session(id);
    const auto body = parse_object(req.body);
    const auto op = string_field(body, "op");
    std::lock_guard lock(s->mu);
    auto& hits = s->report.hits;
    auto find = [&](const ParagraphRef& ref) {
      return std::find_if(hits.begin(), hits.end(), [&](const ParagraphHit& h) { return h.ref == ref; });
    };
    if (op == "remove") {
      const auto ref = parse_ref_token(string_field(body, "ref"));
      const auto it = find(ref);
      if (it == hits.end()) return error_reply(409, "UnknownRef", ref.token() + " is not in the hit list");
      hits.erase(it);
    } else if (op == "add") {
      const auto ref = parse_ref_token(string_field(body, "ref"));
      if (!corpus->contains(ref)) return error_reply(409, "UnknownRef", ref.token() + " is not in the corpus");
      if (find(ref) != hits.end()) return error_reply(409, "DuplicateRef", ref.token() + " is already in the hit list");
      const auto* record = index->find(ref);
      if (!record) return error_reply(409, "UnknownRef", ref.token() + " is not in the index");
      const auto q = providers.embedder->embed_one(s->report.query);
      std::size_t position = hits.size();
      if (body.contains("position")) {
        if (!body["position"].is_number_unsigned()) throw Error(ErrorCode::InvalidParams, "'position' must be an index");
        position = std::min(body["position"].get<std::size_t>(), hits.size());
      }
      hits.insert(hits.begin() + static_cast<std::ptrdiff_t>(position), ParagraphHit{ref, cosine(q, record->vector), 0});
    } else if (op == "reorder") {
      if (!body.contains("order") || !body["order"].is_array()) {
        throw Error(ErrorCode::InvalidParams, "'order' must be an array of refs");
      }
      std::vector<ParagraphHit> reordered;
      std::set<ParagraphRef> seen;
      for (const auto& t : body["order"]) {
        if (!t.is_string()) throw Error(ErrorCode::InvalidParams, "'order' entries must be ref strings");
        const auto ref = parse_ref_token(t.get<std::string>());
        const auto it = find(ref);
        if (it == hits.end() || !seen.insert(ref).second) {
          throw Error(ErrorCode::InvalidParams, "order is not a permutation of the hit list (" + ref.token() + ")");
        }
        reordered.push_back(*it);
      }
      if (reordered.size() != hits.size()) {
        throw Error(ErrorCode::InvalidParams, "order lists " + std::to_string(reordered.size()) + " of " +
                                                  std::to_string(hits.size()) + " hits");
      }
      hits = std::move(reordered);
    } else {
      throw Error(ErrorCode::InvalidParams, "op must be remove, add or reorder");
    }
    rerank(hits);
    persist(*s);
    json out = json::array();
    for (const auto& h : hits) out.push_back(hit_to_json(h));
    return json_reply(200, {{"hits", out}});
  }

  Reply corpus_search(const httplib::Request& req) {
    const auto q = req.get_param_value("q");
    if (text::trim(q).empty()) throw Error(ErrorCode::EmptyQuery, "'q' is required");
    std::size_t limit = 10;
    if (req.has_param("limit")) {
      try {
        const auto v = std::stol(req.get_param_value("limit"));
        if (v < 1 || v > 1000) throw std::out_of_range("limit");
        limit = static_cast<std::size_t>(v);
      } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidParams, "'limit' must be an integer in 1..1000");
      }
    }
    json out = json::array();
    for (const auto& m : corpus->fuzzy_search(q, limit)) {
      const auto& p = corpus->get_paragraph(m.ref);
      out.push_back({{"ref", m.ref.token()},
                     {"judgment_id", m.ref.judgment_id},
                     {"number", m.ref.number},
                     {"case_name", corpus->judgment(m.ref.judgment_id).case_name},
                     {"score", m.score},
                     {"snippet", text::first_words(p.text, 30)}});
    }
    return json_reply(200, {{"matches", out}});
  }

  Reply start_outline(const std::string& id) {
    auto s = session(id);
    std::lock_guard lock(s->mu);
    if (s->report.hits.empty()) return error_reply(409, "NoHits", "the session has no retrieved paragraphs");
    if (s->outline_running) return error_reply(409, "Busy", "an outline job is already running");
    if (s->generate_all_running || !s->generating.empty()) {
      return error_reply(409, "Busy", "section generation is running");
    }
    s->outline_running = true;
    s->report.stages["outline"] = {"running", ""};
    const auto job_id = new_job(*s, "outline");
    persist(*s);
    launch([this, s, job_id, hits = s->report.hits, params = s->report.params] {
      std::optional<OutlineBuild> built;
      std::string error;
      try {
        built = build_outline(*corpus, *index, hits, params, *providers.chat, opts.workers);
      } catch (const std::exception& e) {
        error = e.what();
      }
      std::lock_guard lock(s->mu);
      auto& job = s->jobs[job_id];
      if (built) {
        s->report.outline = std::move(built->outline);
        s->report.sections.clear();
        s->gen_errors.clear();
        s->report.stages["outline"] = {"done", ""};
        s->report.stages.erase("generate");
        job.state = "done";
      } else {
        s->report.stages["outline"] = {"failed", "outline: " + error};
        job.state = "failed";
        job.error = "outline: " + error;
      }
      s->outline_running = false;
      persist(*s);
    });
    return accepted(*s, job_id);
  }

  Reply get_outline(const std::string& id) {
    auto s = session(id);
    std::lock_guard lock(s->mu);
    const auto st_it = s->report.stages.find("outline");
    const StageStatus st = st_it == s->report.stages.end() ? StageStatus{} : st_it->second;
    json j{{"state", st.state}, {"error", st.error}};
    j["outline"] = s->report.outline ? outline_to_json(*s->report.outline) : json(nullptr);
    j["toc_text"] = s->report.outline ? json(serialize_toc(*s->report.outline)) : json(nullptr);
    return json_reply(st.state == "failed" ? 500 : 200, j);
  }

  Reply put_outline(const std::string& id, const httplib::Request& req) {
    auto s = session(id);
    const auto body = parse_object(req.body);
    auto outline = parse_toc(string_field(body, "toc_text"));
    std::lock_guard lock(s->mu);
    if (s->outline_running) return error_reply(409, "Busy", "an outline job is running");
    if (s->generate_all_running || !s->generating.empty()) {
      return error_reply(409, "Busy", "section generation is running");
    }
    if (s->report.outline) {
      // Keep cluster provenance for nodes whose id survived the edit.
      const auto& old = *s->report.outline;
      std::function<void(std::vector<OutlineNode>&)> carry = [&](std::vector<OutlineNode>& nodes) {
        for (auto& n : nodes) {
          if (const auto* o = old.find(n.node_id)) n.source_cluster = o->source_cluster;
          carry(n.children);
        }
      };
      carry(outline.roots);
    }
    std::set<std::string> leaves;
    for (const auto* leaf : outline.leaves()) leaves.insert(leaf->node_id);
    std::erase_if(s->report.sections, [&](const auto& kv) { return !leaves.count(kv.first); });
    std::erase_if(s->gen_errors, [&](const auto& kv) { return !leaves.count(kv.first); });
    s->report.outline = std::move(outline);
    s->report.stages["outline"] = {"done", ""};
    if (s->report.stages.count("generate")) refresh_generate_stage(*s);
    persist(*s);
    return json_reply(200, {{"outline", outline_to_json(*s->report.outline)},
                            {"toc_text", serialize_toc(*s->report.outline)}});
  }

  void store_draft(SessionState& s, const std::string& leaf, std::optional<SectionDraft> draft,
                   const std::string& error) {
    const auto* node = s.report.outline ? s.report.outline->find(leaf) : nullptr;
    if (!node || !node->is_leaf()) {
      s.gen_errors[leaf] = "section was removed while generating";
      return;
    }
    if (draft) {
      s.report.sections[leaf] = std::move(*draft);
      s.gen_errors.erase(leaf);
    } else {
      s.gen_errors[leaf] = error;
    }
  }

  Reply generate_one(const std::string& id, const std::string& node_id) {
    auto s = session(id);
    std::lock_guard lock(s->mu);
    if (!s->report.outline) return error_reply(409, "NoOutline", "the session has no outline");
    if (s->outline_running) return error_reply(409, "Busy", "an outline job is running");
    const auto* node = s->report.outline->find(node_id);
    if (!node) throw Error(ErrorCode::UnknownNode, "no node '" + node_id + "'");
    if (!node->is_leaf()) throw Error(ErrorCode::NotALeaf, "node '" + node_id + "' has children");
    if (s->generate_all_running || s->generating.count(node_id)) {
      return error_reply(409, "Busy", "section '" + node_id + "' is already being generated");
    }
    s->generating.insert(node_id);
    refresh_generate_stage(*s);
    const auto job_id = new_job(*s, "generate", node_id);
    persist(*s);
    launch([this, s, job_id, node_id, outline = *s->report.outline, gen = s->report.params.gen] {
      std::optional<SectionDraft> draft;
      std::string error;
      try {
        draft = generate_leaf(*corpus, *index, *providers.embedder, *providers.chat, outline, node_id, gen);
      } catch (const std::exception& e) {
        error = e.what();
      }
      std::lock_guard lock(s->mu);
      store_draft(*s, node_id, std::move(draft), error);
      auto& job = s->jobs[job_id];
      const auto failed = s->gen_errors.find(node_id);
      if (failed == s->gen_errors.end()) {
        job.state = "done";
      } else {
        job.state = "failed";
        job.error = failed->second;
        job.failures.push_back({node_id, failed->second});
      }
      s->generating.erase(node_id);
      refresh_generate_stage(*s);
      persist(*s);
    });
    return accepted(*s, job_id);
  }

  Reply generate_every(const std::string& id) {
    auto s = session(id);
    std::lock_guard lock(s->mu);
    if (!s->report.outline) return error_reply(409, "NoOutline", "the session has no outline");
    if (s->outline_running) return error_reply(409, "Busy", "an outline job is running");
    if (s->generate_all_running || !s->generating.empty()) {
      return error_reply(409, "Busy", "section generation is already running");
    }
    s->generate_all_running = true;
    refresh_generate_stage(*s);
    const auto job_id = new_job(*s, "generate_all");
    persist(*s);
    Report snapshot;
    snapshot.outline = s->report.outline;
    snapshot.params = s->report.params;
    launch([this, s, job_id, snapshot = std::move(snapshot)]() mutable {
      std::vector<LeafFailure> failures;
      std::string error;
      try {
        failures = generate_all(snapshot, *corpus, *index, *providers.embedder, *providers.chat, opts.workers);
      } catch (const std::exception& e) {
        error = e.what();
      }
      std::lock_guard lock(s->mu);
      auto& job = s->jobs[job_id];
      for (auto& [leaf, draft] : snapshot.sections) store_draft(*s, leaf, std::move(draft), "");
      for (const auto& f : failures) store_draft(*s, f.node_id, std::nullopt, f.error);
      for (const auto* leaf : snapshot.outline->leaves()) {
        if (auto it = s->gen_errors.find(leaf->node_id); it != s->gen_errors.end() && !snapshot.sections.count(leaf->node_id)) {
          job.failures.push_back({leaf->node_id, it->second});
        }
      }
      if (!error.empty()) {
        job.state = "failed";
        job.error = "generate: " + error;
      } else {
        job.state = job.failures.empty() ? "done" : "failed";
        if (!job.failures.empty()) job.error = std::to_string(job.failures.size()) + " section(s) failed";
      }
      s->generate_all_running = false;
      refresh_generate_stage(*s);
      persist(*s);
    });
    return accepted(*s, job_id);
  }

  Reply get_job(const std::string& id, const std::string& job_id) {
    auto s = session(id);
    std::lock_guard lock(s->mu);
    const auto it = s->jobs.find(job_id);
    if (it == s->jobs.end()) throw Error(ErrorCode::NotFound, "no job '" + job_id + "'");
    return json_reply(200, job_to_json(it->second));
  }

  Reply get_report(const std::string& id, bool html) {
    auto s = session(id);
    std::lock_guard lock(s->mu);
    if (html) return {200, render_html(s->report, opts.link_template), "text/html; charset=utf-8", ""};
    return {200, render_markdown(s->report, opts.link_template), "text/markdown; charset=utf-8", ""};
  }

  // ---- plumbing ----

  template <typename Fn>
  void respond(const httplib::Request& req, httplib::Response& res, Fn&& fn) {
    Reply out;
    auto run = [&] {
      try {
        out = fn();
      } catch (const Error& e) {
        out = error_reply(http_status(e.code()), to_string(e.code()), e.what());
      } catch (const json::exception& e) {
        out = error_reply(400, "BadRequest", e.what());
      } catch (const std::exception& e) {
        out = error_reply(500, "Internal", e.what());
      }
    };
    const auto key = req.get_header_value("Idempotency-Key");
    if (!key.empty() && req.method != "GET") {
      std::lock_guard lock(idem_mu);
      const auto full = req.method + " " + req.path + " " + key;
      if (const auto it = idem.find(full); it != idem.end()) {
        out = it->second;
        res.set_header("Idempotent-Replayed", "true");
      } else {
        run();
        idem[full] = out;
      }
    } else {
      run();
    }
    res.status = out.status;
    if (!out.location.empty()) res.set_header("Location", out.location);
    res.set_content(out.body, out.content_type);
  }

  void routes() {
    using Req = const httplib::Request&;
    using Res = httplib::Response&;
    auto p = [](Req req, const char* name) { return req.path_params.at(name); };
    server.Post("/sessions", [this](Req req, Res res) { respond(req, res, [&] { return create_session(req); }); });
    server.Get("/sessions/:id", [=, this](Req req, Res res) { respond(req, res, [&] { return get_session(p(req, "id")); }); });
    server.Patch("/sessions/:id/hits",
                 [=, this](Req req, Res res) { respond(req, res, [&] { return patch_hits(p(req, "id"), req); }); });
    server.Get("/corpus/search", [this](Req req, Res res) { respond(req, res, [&] { return corpus_search(req); }); });
    server.Post("/sessions/:id/outline",
                [=, this](Req req, Res res) { respond(req, res, [&] { return start_outline(p(req, "id")); }); });
    server.Get("/sessions/:id/outline",
               [=, this](Req req, Res res) { respond(req, res, [&] { return get_outline(p(req, "id")); }); });
    server.Put("/sessions/:id/outline",
               [=, this](Req req, Res res) { respond(req, res, [&] { return put_outline(p(req, "id"), req); }); });
    server.Post("/sessions/:id/sections/:node/generate", [=, this](Req req, Res res) {
      respond(req, res, [&] { return generate_one(p(req, "id"), p(req, "node")); });
    });
    server.Post("/sessions/:id/generate_all",
                [=, this](Req req, Res res) { respond(req, res, [&] { return generate_every(p(req, "id")); }); });
    server.Get("/sessions/:id/jobs/:job",
               [=, this](Req req, Res res) { respond(req, res, [&] { return get_job(p(req, "id"), p(req, "job")); }); });
    server.Get("/sessions/:id/report.md",
               [=, this](Req req, Res res) { respond(req, res, [&] { return get_report(p(req, "id"), false); }); });
    server.Get("/sessions/:id/report.html",
               [=, this](Req req, Res res) { respond(req, res, [&] { return get_report(p(req, "id"), true); }); });
  }
};

Service::Service(std::shared_ptr<const Corpus> corpus, std::shared_ptr<const VectorIndex> index, Providers providers,
                 ServiceOptions options)
    : impl_(std::make_unique<Impl>(std::move(corpus), std::move(index), std::move(providers), std::move(options))) {}

Service::~Service() = default;

int Service::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  if (!impl_->server.bind_to_port(host, port)) throw Error(ErrorCode::IoError, "cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void Service::listen() { impl_->server.listen_after_bind(); }

void Service::stop() { impl_->server.stop(); }

void Service::wait_idle() { impl_->wait_idle(); }

}  // namespace lexreport
