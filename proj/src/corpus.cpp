#include "lexreport/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lexreport/error.hpp"
#include "lexreport/text.hpp"

namespace lexreport {

namespace {

constexpr std::size_t kFuzzyPrefixChars = 500;

std::vector<std::uint32_t> decode_utf8_lower(std::string_view s) {
  std::vector<std::uint32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    std::uint32_t cp = b0;
    std::size_t len = 1;
    if (b0 >= 0xF0) {
      len = 4;
    } else if (b0 >= 0xE0) {
      len = 3;
    } else if (b0 >= 0xC0) {
      len = 2;
    }
    if (len > 1 && i + len <= s.size()) {
      cp = b0 & (0xFF >> (len + 1));
      bool ok = true;
      for (std::size_t k = 1; k < len; ++k) {
        const auto bk = static_cast<unsigned char>(s[i + k]);
        if ((bk & 0xC0) != 0x80) {
          ok = false;
          break;
        }
        cp = (cp << 6) | (bk & 0x3F);
      }
      if (!ok) {
        cp = b0;
        len = 1;
      }
    } else {
      len = 1;
    }
    if (cp >= 'A' && cp <= 'Z') cp += 'a' - 'A';
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string prefix_chars(std::string_view s, std::size_t n) {
  std::size_t i = 0;
  std::size_t count = 0;
  while (i < s.size() && count < n) {
    const auto b = static_cast<unsigned char>(s[i]);
    std::size_t len = b >= 0xF0 ? 4 : b >= 0xE0 ? 3 : b >= 0xC0 ? 2 : 1;
    i = std::min(s.size(), i + len);
    ++count;
  }
  return std::string(s.substr(0, i));
}

bool is_iso_date(std::string_view d) {
  if (d.size() < 10) return false;
  for (std::size_t i = 0; i < 10; ++i) {
    if (i == 4 || i == 7) {
      if (d[i] != '-') return false;
    } else if (d[i] < '0' || d[i] > '9') {
      return false;
    }
  }
  const int month = (d[5] - '0') * 10 + (d[6] - '0');
  const int day = (d[8] - '0') * 10 + (d[9] - '0');
  if (month < 1 || month > 12 || day < 1 || day > 31) return false;
  return d.size() == 10 || d[10] == 'T';
}

// Returns an empty string on success, else the rejection reason.
std::string parse_judgment(const nlohmann::json& j, Judgment& out) {
  if (!j.is_object()) return "record is not a JSON object";
  for (const char* key : {"item_id", "case_name", "date"}) {
    if (!j.contains(key) || !j[key].is_string()) return std::string("missing string field '") + key + "'";
  }
  out.item_id = j["item_id"].get<std::string>();
  if (text::trim(out.item_id).empty()) return "empty item_id";
  out.case_name = j["case_name"].get<std::string>();
  out.date = j["date"].get<std::string>();
  if (!is_iso_date(out.date)) return "date is not ISO-8601: '" + out.date + "'";
  if (!j.contains("paragraphs") || !j["paragraphs"].is_array()) return "missing array field 'paragraphs'";
  const auto& paras = j["paragraphs"];
  if (paras.empty()) return "judgment has no paragraphs";
  std::int64_t last = 0;
  for (const auto& p : paras) {
    if (!p.is_object() || !p.contains("number") || !p.contains("text")) return "paragraph lacks number/text";
    if (!p["number"].is_number_integer() || !p["text"].is_string()) return "paragraph number/text has wrong type";
    const auto number = p["number"].get<std::int64_t>();
    if (number <= 0 || number > static_cast<std::int64_t>(UINT32_MAX)) return "paragraph number must be positive";
    if (number <= last) return "paragraph numbers not strictly increasing at " + std::to_string(number);
    last = number;
    auto t = p["text"].get<std::string>();
    if (text::trim(t).empty()) return "empty text in paragraph " + std::to_string(number);
    out.paragraphs.push_back({out.item_id, static_cast<std::uint32_t>(number), std::move(t)});
  }
  return {};
}

}  // namespace

std::vector<std::uint64_t> char_trigrams(std::string_view s) {
  const auto cps = decode_utf8_lower(s);
  std::vector<std::uint64_t> grams;
  auto pack = [](std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return (a << 42) | (b << 21) | c;
  };
  if (cps.empty()) return grams;
  if (cps.size() < 3) {
    // Short strings: one gram padded with a sentinel outside the code-point range.
    constexpr std::uint64_t kPad = 0x1FFFFF;
    grams.push_back(pack(cps[0], cps.size() > 1 ? cps[1] : kPad, kPad));
    return grams;
  }
  grams.reserve(cps.size() - 2);
  for (std::size_t i = 0; i + 2 < cps.size(); ++i) grams.push_back(pack(cps[i], cps[i + 1], cps[i + 2]));
  std::sort(grams.begin(), grams.end());
  grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
  return grams;
}

double jaccard(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t inter = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++inter;
      ++ia;
      ++ib;
    }
  }
  const std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

Corpus Corpus::ingest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open corpus file " + path.string());
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_jsonl(content);
}

Corpus Corpus::from_jsonl(std::string_view content) {
  Corpus c;
  c.fingerprint_ = sha256(content);
  const auto lines = text::split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& line = lines[i];
    if (text::trim(line).empty()) continue;
    const std::size_t line_no = i + 1;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) {
      c.stats_.rejected_records.push_back({line_no, "invalid JSON"});
      continue;
    }
    Judgment judgment;
    auto reason = parse_judgment(j, judgment);
    if (reason.empty() && c.by_id_.count(judgment.item_id)) reason = "duplicate item_id '" + judgment.item_id + "'";
    if (!reason.empty()) {
      c.stats_.rejected_records.push_back({line_no, std::move(reason)});
      continue;
    }
    c.by_id_.emplace(judgment.item_id, c.judgments_.size());
    c.stats_.paragraph_count += judgment.paragraphs.size();
    c.judgments_.push_back(std::move(judgment));
  }
  c.stats_.judgment_count = c.judgments_.size();
  if (c.judgments_.empty()) throw Error(ErrorCode::EmptyCorpus, "no valid judgments in corpus");

  for (const auto& j : c.judgments_) {
    auto name_grams = char_trigrams(j.case_name);
    for (const auto& p : j.paragraphs) {
      c.search_.push_back({p.ref(), name_grams,
                           char_trigrams(j.case_name + " " + prefix_chars(p.text, kFuzzyPrefixChars))});
    }
  }
  return c;
}

const Judgment& Corpus::judgment(std::string_view item_id) const {
  auto it = by_id_.find(item_id);
  if (it == by_id_.end()) throw Error(ErrorCode::NotFound, "unknown judgment " + std::string(item_id));
  return judgments_[it->second];
}

const Paragraph& Corpus::get_paragraph(const ParagraphRef& ref) const {
  auto it = by_id_.find(ref.judgment_id);
  if (it != by_id_.end()) {
    const auto& paras = judgments_[it->second].paragraphs;
    auto p = std::lower_bound(paras.begin(), paras.end(), ref.number,
                              [](const Paragraph& x, std::uint32_t n) { return x.number < n; });
    if (p != paras.end() && p->number == ref.number) return *p;
  }
  throw Error(ErrorCode::NotFound, "no paragraph " + ref.token());
}

bool Corpus::contains(const ParagraphRef& ref) const noexcept {
  auto it = by_id_.find(ref.judgment_id);
  if (it == by_id_.end()) return false;
  const auto& paras = judgments_[it->second].paragraphs;
  auto p = std::lower_bound(paras.begin(), paras.end(), ref.number,
                            [](const Paragraph& x, std::uint32_t n) { return x.number < n; });
  return p != paras.end() && p->number == ref.number;
}

std::vector<ParagraphRef> Corpus::refs() const {
  std::vector<ParagraphRef> out;
  out.reserve(stats_.paragraph_count);
  for (const auto& j : judgments_) {
    for (const auto& p : j.paragraphs) out.push_back(p.ref());
  }
  return out;
}

std::vector<FuzzyMatch> Corpus::fuzzy_search(std::string_view query, std::size_t limit) const {
  const auto q = text::trim(query);
  if (q.empty()) throw Error(ErrorCode::EmptyQuery, "fuzzy search query is empty");
  if (limit == 0) throw Error(ErrorCode::InvalidParams, "limit must be >= 1");
  const auto grams = char_trigrams(q);
  std::vector<FuzzyMatch> scored;
  scored.reserve(search_.size());
  for (const auto& e : search_) {
    scored.push_back({e.ref, std::max(jaccard(grams, e.name_grams), jaccard(grams, e.field_grams))});
  }
  auto by_rank = [](const FuzzyMatch& a, const FuzzyMatch& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.ref < b.ref;
  };
  const auto n = std::min(limit, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(), by_rank);
  scored.resize(n);
  return scored;
}

std::string Corpus::to_jsonl() const {
  std::string out;
  for (const auto& j : judgments_) {
    nlohmann::ordered_json rec;
    rec["item_id"] = j.item_id;
    rec["case_name"] = j.case_name;
    rec["date"] = j.date;
    auto paras = nlohmann::ordered_json::array();
    for (const auto& p : j.paragraphs) {
      nlohmann::ordered_json pj;
      pj["number"] = p.number;
      pj["text"] = p.text;
      paras.push_back(std::move(pj));
    }
    rec["paragraphs"] = std::move(paras);
    out += rec.dump();
    out += '\n';
  }
  return out;
}

void Corpus::export_jsonl(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << to_jsonl();
}

}  // namespace lexreport
