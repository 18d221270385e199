#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "lexreport/params.hpp"
#include "lexreport/providers.hpp"

namespace lexreport {

/// Settings shared by the CLI and the service.
///
/// File format: one `key = value` per line, `#` or `;` comments, optional
/// `[section]` headers that prefix the keys below them ("[chat]" then
/// "model = x" is "chat.model = x"). Relative paths are resolved against
/// the config file's directory. Secrets never appear here; providers read
/// their API key from the environment variable named by `*.api_key_env`.
struct AppConfig {
  std::filesystem::path corpus_path;
  std::filesystem::path index_path;
  std::filesystem::path sessions_dir = "sessions";
  std::string link_template = kDefaultLinkTemplate;
  bool mock = false;
  int port = 8080;
  std::string host = "127.0.0.1";
  std::size_t workers = 4;
  ProviderConfig chat;
  ProviderConfig embedding;
  PipelineParams defaults;
};

/// Flattened "section.key" -> value. Throws InvalidConfig naming the line.
std::map<std::string, std::string> parse_key_values(std::string_view text);

/// Applies recognized keys onto `base`. Unknown keys and bad values throw
/// InvalidConfig. Relative paths are joined onto `base_dir`.
AppConfig apply_config(const std::map<std::string, std::string>& values, AppConfig base = {},
                       const std::filesystem::path& base_dir = {});

/// Reads and applies a config file. Throws FileNotFound or InvalidConfig.
AppConfig load_config(const std::filesystem::path& path, AppConfig base = {});

}  // namespace lexreport
