#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "lexreport/corpus.hpp"
#include "lexreport/error.hpp"
#include "lexreport/indexer.hpp"
#include "lexreport/params.hpp"
#include "lexreport/pipeline.hpp"

namespace lexreport {

struct ServiceOptions {
  std::filesystem::path sessions_dir = "sessions";
  std::string link_template = kDefaultLinkTemplate;
  std::size_t workers = 4;         // per-job parallelism (labels, leaves)
  bool fixed_timestamps = false;   // created_at = kFixedTimestamp (mock runs)
  PipelineParams defaults;         // base for POST /sessions params
};

/// HTTP status for an engine error.
int http_status(ErrorCode code) noexcept;

/// JSON/HTTP API over the pipeline.
///
///   POST   /sessions                              {query, params?}      201
///   GET    /sessions/:id                                                200
///   PATCH  /sessions/:id/hits                     {op, ref | order}     200
///   GET    /corpus/search?q=&limit=                                     200
///   POST   /sessions/:id/outline                                        202 job
///   GET    /sessions/:id/outline                                        200
///   PUT    /sessions/:id/outline                  {toc_text}            200
///   POST   /sessions/:id/sections/:node/generate                        202 job
///   POST   /sessions/:id/generate_all                                   202 job
///   GET    /sessions/:id/jobs/:job                                      200
///   GET    /sessions/:id/report.md | report.html                        200
///
/// Mutations of one session are serialized by a per-session lock; stage
/// jobs run on background threads. Every state change is persisted to
/// `<sessions_dir>/<id>.json`, and existing session files are loaded at
/// startup. A POST/PUT/PATCH carrying an Idempotency-Key header that was
/// already seen gets the stored response without being re-executed.
class Service {
 public:
  Service(std::shared_ptr<const Corpus> corpus, std::shared_ptr<const VectorIndex> index, Providers providers,
          ServiceOptions options);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop(). Call after bind().
  void listen();
  void stop();

  /// Blocks until no background job is running.
  void wait_idle();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace lexreport
