#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace lexreport::text {

std::string_view trim(std::string_view s) noexcept;
std::string to_lower(std::string_view s);

/// Lowercased tokens split on ASCII non-alphanumerics. Bytes >= 0x80 are
/// kept inside tokens so UTF-8 words survive intact.
std::vector<std::string> tokenize(std::string_view s);

std::vector<std::string> split_lines(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Collapses every run of whitespace (including newlines) to one space.
std::string collapse_whitespace(std::string_view s);

bool starts_with_ci(std::string_view s, std::string_view prefix) noexcept;

/// First `n` whitespace-separated words of `s`, joined by single spaces.
std::string first_words(std::string_view s, std::size_t n);

}  // namespace lexreport::text
