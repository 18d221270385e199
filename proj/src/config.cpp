#include "lexreport/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "lexreport/error.hpp"
#include "lexreport/text.hpp"

namespace lexreport {

namespace {

template <typename T>
T to_number(const std::string& key, const std::string& value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end) throw Error(ErrorCode::InvalidConfig, "'" + key + "' needs a number, got '" + value + "'");
  return out;
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double d = std::stod(value, &used);
    if (used == value.size()) return d;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::InvalidConfig, "'" + key + "' needs a number, got '" + value + "'");
}

bool to_bool(const std::string& key, const std::string& value) {
  const auto v = text::to_lower(value);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error(ErrorCode::InvalidConfig, "'" + key + "' needs true or false, got '" + value + "'");
}

std::filesystem::path resolve(const std::filesystem::path& base_dir, const std::string& value) {
  std::filesystem::path p(value);
  return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
}

bool apply_provider(ProviderConfig& cfg, const std::string& field, const std::string& key, const std::string& value) {
  if (field == "endpoint") {
    cfg.endpoint_url = value;
  } else if (field == "model") {
    cfg.model_id = value;
  } else if (field == "api_key_env") {
    cfg.api_key_env_var = value;
  } else if (field == "timeout_s") {
    cfg.timeout = std::chrono::seconds(to_number<long>(key, value));
  } else if (field == "max_retries") {
    cfg.max_retries = to_number<int>(key, value);
  } else if (field == "max_in_flight") {
    cfg.max_in_flight = to_number<int>(key, value);
  } else if (field == "verbose") {
    cfg.verbose = to_bool(key, value);
  } else {
    return false;
  }
  return true;
}

bool apply_default(PipelineParams& p, const std::string& field, const std::string& key, const std::string& value) {
  try {
    if (field == "index_mode") {
      p.index_mode = parse_index_mode(value);
    } else if (field == "keyphrase_batch") {
      p.keyphrase_batch = to_number<std::size_t>(key, value);
    } else if (field == "k") {
      p.retrieval.k = to_number<std::size_t>(key, value);
    } else if (field == "fetch_k") {
      p.retrieval.fetch_k = to_number<std::size_t>(key, value);
    } else if (field == "lambda") {
      p.retrieval.lambda = to_double(key, value);
    } else if (field == "sim_threshold") {
      p.retrieval.sim_threshold = to_double(key, value);
    } else if (field == "retrieval_mode") {
      p.retrieval.mode = parse_retrieval_mode(value);
    } else if (field == "min_cluster_size") {
      p.cluster.min_cluster_size = to_number<std::size_t>(key, value);
    } else if (field == "min_samples") {
      p.cluster.min_samples = to_number<std::size_t>(key, value);
    } else if (field == "reorganize") {
      p.reorganize = to_bool(key, value);
    } else if (field == "per_section_m") {
      p.gen.per_section_m = to_number<std::size_t>(key, value);
    } else if (field == "batch_size") {
      p.gen.batch_size = to_number<std::size_t>(key, value);
    } else if (field == "max_iterations") {
      p.gen.max_iterations = to_number<std::size_t>(key, value);
    } else if (field == "representatives") {
      p.representatives = to_number<std::size_t>(key, value);
    } else {
      return false;
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidConfig) throw;
    throw Error(ErrorCode::InvalidConfig, "'" + key + "': " + e.what());
  }
  return true;
}

}  // namespace

std::map<std::string, std::string> parse_key_values(std::string_view text) {
  std::map<std::string, std::string> out;
  std::string section;
  std::size_t line_no = 0;
  for (const auto& raw : text::split_lines(text)) {
    ++line_no;
    const auto line = text::trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(line_no) + ": bad section header");
      }
      section = std::string(text::trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = std::string(text::trim(line.substr(0, eq)));
    if (key.empty()) throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(line_no) + ": empty key");
    auto value = std::string(text::trim(line.substr(eq + 1)));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    out[section.empty() ? key : section + "." + key] = std::move(value);
  }
  return out;
}

AppConfig apply_config(const std::map<std::string, std::string>& values, AppConfig cfg,
                       const std::filesystem::path& base_dir) {
  for (const auto& [key, value] : values) {
    const auto dot = key.find('.');
    const auto group = dot == std::string::npos ? std::string() : key.substr(0, dot);
    const auto field = dot == std::string::npos ? key : key.substr(dot + 1);
    bool known = true;
    if (group.empty()) {
      if (field == "corpus") {
        cfg.corpus_path = resolve(base_dir, value);
      } else if (field == "index") {
        cfg.index_path = resolve(base_dir, value);
      } else if (field == "sessions_dir") {
        cfg.sessions_dir = resolve(base_dir, value);
      } else if (field == "link_template") {
        cfg.link_template = value;
      } else if (field == "mock") {
        cfg.mock = to_bool(key, value);
      } else if (field == "port") {
        cfg.port = to_number<int>(key, value);
      } else if (field == "host") {
        cfg.host = value;
      } else if (field == "workers") {
        cfg.workers = to_number<std::size_t>(key, value);
      } else {
        known = false;
      }
    } else if (group == "chat") {
      known = apply_provider(cfg.chat, field, key, value);
    } else if (group == "embedding") {
      known = apply_provider(cfg.embedding, field, key, value);
    } else if (group == "defaults") {
      known = apply_default(cfg.defaults, field, key, value);
    } else {
      known = false;
    }
    if (!known) throw Error(ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
  }
  if (cfg.port < 0 || cfg.port > 65535) throw Error(ErrorCode::InvalidConfig, "port out of range");
  if (cfg.workers == 0) throw Error(ErrorCode::InvalidConfig, "workers must be >= 1");
  try {
    cfg.defaults.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("defaults: ") + e.what());
  }
  return cfg;
}

AppConfig load_config(const std::filesystem::path& path, AppConfig base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return apply_config(parse_key_values(ss.str()), std::move(base), path.parent_path());
}

}  // namespace lexreport
