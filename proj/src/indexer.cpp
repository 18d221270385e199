#include "lexreport/indexer.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>

#include "lexreport/error.hpp"
#include "lexreport/parallel.hpp"
#include "lexreport/prompts.hpp"
#include "lexreport/text.hpp"

namespace lexreport {

static_assert(std::endian::native == std::endian::little, "index I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'L', 'X', 'I', 'X'};
constexpr std::size_t kHeaderSize = 4 + 4 + 4 + 1 + 8 + 32;

std::string strip_list_prefix(std::string_view line) {
  line = text::trim(line);
  std::size_t i = 0;
  while (i < line.size() && line[i] >= '0' && line[i] <= '9') ++i;
  if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')')) {
    line = text::trim(line.substr(i + 1));
  } else if (!line.empty() && (line[0] == '-' || line[0] == '*')) {
    line = text::trim(line.substr(1));
  }
  if (text::starts_with_ci(line, "keywords:")) line = text::trim(line.substr(9));
  return std::string(line);
}

std::vector<std::string> response_lines(std::string_view response) {
  std::vector<std::string> out;
  for (const auto& line : text::split_lines(response)) {
    if (!text::trim(line).empty()) out.push_back(strip_list_prefix(line));
  }
  return out;
}

std::vector<std::string> fallback_phrases(std::string_view paragraph) {
  auto toks = text::tokenize(paragraph);
  if (toks.size() > kFallbackTokenCount) toks.resize(kFallbackTokenCount);
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (auto& t : toks) {
    if (seen.insert(t).second) out.push_back(std::move(t));
  }
  if (out.empty()) out.push_back(std::string(text::trim(paragraph)));
  return out;
}

// Returns the response lines, or nullopt when the line count is wrong or the
// model returned nothing usable.
std::optional<std::vector<std::string>> try_batch(std::span<const std::string> texts, ChatProvider& chat) {
  try {
    auto lines = response_lines(chat.chat(prompts::keyphrase_request(texts)));
    if (lines.size() != texts.size()) return std::nullopt;
    return lines;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ResponseEmpty) return std::nullopt;
    throw;
  }
}

std::vector<std::string> single_paragraph_phrases(const std::string& text, ChatProvider& chat) {
  std::vector<std::string> phrases;
  try {
    const auto lines = response_lines(chat.chat(prompts::keyphrase_request(std::span(&text, 1))));
    if (!lines.empty()) phrases = parse_keyphrase_line(lines.front());
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ResponseEmpty) throw;
  }
  return phrases.empty() ? fallback_phrases(text) : phrases;
}

class Writer {
 public:
  void bytes(const void* p, std::size_t n) { out_.append(static_cast<const char*>(p), n); }
  void u8(std::uint8_t v) { bytes(&v, 1); }
  void u32(std::uint32_t v) { bytes(&v, 4); }
  void u64(std::uint64_t v) { bytes(&v, 8); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  std::string& buffer() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  void bytes(void* p, std::size_t n) {
    if (in_.size() - pos_ < n) throw Error(ErrorCode::CorruptIndex, "index file truncated");
    std::memcpy(p, in_.data() + pos_, n);
    pos_ += n;
  }
  std::uint8_t u8() { std::uint8_t v; bytes(&v, 1); return v; }
  std::uint32_t u32() { std::uint32_t v; bytes(&v, 4); return v; }
  std::uint64_t u64() { std::uint64_t v; bytes(&v, 8); return v; }
  std::string str() {
    const auto n = u32();
    if (in_.size() - pos_ < n) throw Error(ErrorCode::CorruptIndex, "index string runs past end");
    std::string s(in_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::size_t remaining() const noexcept { return in_.size() - pos_; }

 private:
  std::string_view in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string_view to_string(IndexMode mode) noexcept {
  return mode == IndexMode::Keyphrase ? "keyphrase" : "paragraph";
}

IndexMode parse_index_mode(std::string_view s) {
  if (s == "keyphrase") return IndexMode::Keyphrase;
  if (s == "paragraph") return IndexMode::Paragraph;
  throw Error(ErrorCode::InvalidParams, "index mode must be keyphrase|paragraph, got '" + std::string(s) + "'");
}

const VectorRecord* VectorIndex::find(const ParagraphRef& ref) const noexcept {
  for (const auto& r : records) {
    if (r.ref == ref) return &r;
  }
  return nullptr;
}

std::vector<std::string> parse_keyphrase_line(std::string_view line) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& raw : text::split(line, ',')) {
    std::string_view p = text::trim(raw);
    while (!p.empty() && (p.back() == '.' || p.back() == ';')) p.remove_suffix(1);
    while (!p.empty() && (p.front() == '"' || p.front() == '\'')) p.remove_prefix(1);
    while (!p.empty() && (p.back() == '"' || p.back() == '\'')) p.remove_suffix(1);
    p = text::trim(p);
    if (p.empty()) continue;
    if (seen.insert(text::to_lower(p)).second) out.emplace_back(p);
  }
  return out;
}

std::vector<KeyphraseSet> generate_keyphrases(const Judgment& judgment, std::size_t batch_size,
                                              ChatProvider& chat) {
  if (batch_size == 0) throw Error(ErrorCode::InvalidParams, "batch_size must be >= 1");
  if (judgment.paragraphs.empty()) throw Error(ErrorCode::InvalidParams, "judgment has no paragraphs");
  std::vector<KeyphraseSet> out;
  out.reserve(judgment.paragraphs.size());
  const auto& paras = judgment.paragraphs;
  for (std::size_t off = 0; off < paras.size(); off += batch_size) {
    const std::size_t n = std::min(batch_size, paras.size() - off);
    std::vector<std::string> texts;
    texts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) texts.push_back(paras[off + i].text);

    auto lines = try_batch(texts, chat);
    if (!lines) lines = try_batch(texts, chat);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::string> phrases;
      if (lines) phrases = parse_keyphrase_line((*lines)[i]);
      if (phrases.empty()) phrases = single_paragraph_phrases(texts[i], chat);
      out.push_back({paras[off + i].ref(), std::move(phrases)});
    }
  }
  return out;
}

VectorIndex build_index(const Corpus& corpus, const IndexBuildOptions& options, ChatProvider& chat,
                        Embedder& embedder) {
  if (corpus.judgments().empty()) throw Error(ErrorCode::EmptyCorpus, "cannot index an empty corpus");
  const auto& judgments = corpus.judgments();

  std::vector<std::vector<std::string>> per_judgment(judgments.size());
  if (options.mode == IndexMode::Keyphrase) {
    parallel_for(judgments.size(), options.workers, [&](std::size_t j) {
      for (auto& set : generate_keyphrases(judgments[j], options.batch_size, chat)) {
        per_judgment[j].push_back(text::join(set.phrases, ", "));
      }
    });
  } else {
    for (std::size_t j = 0; j < judgments.size(); ++j) {
      for (const auto& p : judgments[j].paragraphs) per_judgment[j].push_back(p.text);
    }
  }

  std::vector<std::string> texts;
  std::vector<ParagraphRef> refs;
  for (std::size_t j = 0; j < judgments.size(); ++j) {
    for (std::size_t i = 0; i < judgments[j].paragraphs.size(); ++i) {
      refs.push_back(judgments[j].paragraphs[i].ref());
      texts.push_back(std::move(per_judgment[j][i]));
    }
  }
  auto vectors = embedder.embed(texts);

  VectorIndex index;
  index.mode = options.mode;
  index.dimension = static_cast<std::uint32_t>(vectors.front().size());
  index.corpus_fingerprint = corpus.fingerprint();
  index.records.reserve(refs.size());
  for (std::size_t i = 0; i < refs.size(); ++i) {
    index.records.push_back({std::move(refs[i]), std::move(vectors[i]), std::move(texts[i])});
  }
  return index;
}

std::string serialize_index(const VectorIndex& index) {
  Writer w;
  w.bytes(kMagic, 4);
  w.u32(kIndexVersion);
  w.u32(index.dimension);
  w.u8(static_cast<std::uint8_t>(index.mode));
  w.u64(index.records.size());
  w.bytes(index.corpus_fingerprint.data(), index.corpus_fingerprint.size());
  for (const auto& r : index.records) {
    if (r.vector.size() != index.dimension) {
      throw Error(ErrorCode::DimensionMismatch, "record " + r.ref.token() + " has wrong dimension");
    }
    w.str(r.ref.judgment_id);
    w.u32(r.ref.number);
    w.bytes(r.vector.data(), r.vector.size() * sizeof(float));
    w.str(r.indexed_text);
  }
  auto& buf = w.buffer();
  const auto crc = crc32(std::span(reinterpret_cast<const std::uint8_t*>(buf.data()), buf.size()));
  w.u32(crc);
  return std::move(buf);
}

VectorIndex deserialize_index(std::string_view bytes) {
  if (bytes.size() < kHeaderSize + 4) throw Error(ErrorCode::CorruptIndex, "index file too short");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw Error(ErrorCode::CorruptIndex, "bad magic");
  Reader r(bytes.substr(0, bytes.size() - 4));
  char magic[4];
  r.bytes(magic, 4);
  const auto version = r.u32();
  if (version != kIndexVersion) {
    throw Error(ErrorCode::VersionMismatch, "index version " + std::to_string(version) + ", expected " +
                                                std::to_string(kIndexVersion));
  }
  std::uint32_t stored_crc;
  std::memcpy(&stored_crc, bytes.data() + bytes.size() - 4, 4);
  const auto body = bytes.substr(0, bytes.size() - 4);
  if (crc32(std::span(reinterpret_cast<const std::uint8_t*>(body.data()), body.size())) != stored_crc) {
    throw Error(ErrorCode::CorruptIndex, "checksum mismatch");
  }

  VectorIndex index;
  index.dimension = r.u32();
  const auto mode = r.u8();
  if (mode > 1) throw Error(ErrorCode::CorruptIndex, "unknown index mode " + std::to_string(mode));
  index.mode = static_cast<IndexMode>(mode);
  const auto count = r.u64();
  r.bytes(index.corpus_fingerprint.data(), index.corpus_fingerprint.size());
  if (index.dimension == 0 && count > 0) throw Error(ErrorCode::CorruptIndex, "zero dimension");
  // Each record needs at least 12 bytes + the vector; reject absurd counts early.
  if (count > r.remaining() / (12 + std::size_t{index.dimension} * 4 + 1) + 1) {
    throw Error(ErrorCode::CorruptIndex, "record count exceeds file size");
  }
  std::set<ParagraphRef> seen;
  index.records.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    VectorRecord rec;
    rec.ref.judgment_id = r.str();
    rec.ref.number = r.u32();
    rec.vector.resize(index.dimension);
    r.bytes(rec.vector.data(), rec.vector.size() * sizeof(float));
    rec.indexed_text = r.str();
    if (!seen.insert(rec.ref).second) throw Error(ErrorCode::CorruptIndex, "duplicate ref " + rec.ref.token());
    index.records.push_back(std::move(rec));
  }
  if (r.remaining() != 0) throw Error(ErrorCode::CorruptIndex, "trailing bytes after records");
  return index;
}

void save_index(const VectorIndex& index, const std::filesystem::path& path) {
  const auto bytes = serialize_index(index);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

VectorIndex load_index(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open index " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_index(bytes);
}

std::optional<std::string> fingerprint_warning(const VectorIndex& index, const Corpus& corpus) {
  if (index.corpus_fingerprint == corpus.fingerprint()) return std::nullopt;
  return "index was built from a different corpus (fingerprint " + to_hex(index.corpus_fingerprint) +
         ", loaded corpus " + to_hex(corpus.fingerprint()) + ")";
}

}  // namespace lexreport
