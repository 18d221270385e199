#pragma once

// Shared helpers for the unit and acceptance tests: fixture paths, the
// adjusted Rand index, and brute-force reference implementations used as
// oracles for MMR and HDBSCAN.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <queue>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lexreport/corpus.hpp"
#include "lexreport/error.hpp"
#include "lexreport/providers.hpp"

namespace lexreport::testing {

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(LEXREPORT_TEST_DATA) / name;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  f << content;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() / ("lexreport-test-" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Error code thrown by fn, or nullopt when it returns normally.
template <typename Fn>
std::optional<ErrorCode> code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

/// Chat provider answering from a caller-supplied function; records requests.
class ScriptedChat : public ChatProvider {
 public:
  using Handler = std::function<std::string(const ChatRequest&, std::size_t call)>;
  explicit ScriptedChat(Handler handler) : handler_(std::move(handler)) {}

  std::string chat(const ChatRequest& request) override {
    std::size_t call = 0;
    {
      std::lock_guard lock(mu_);
      call = requests_.size();
      requests_.push_back(request);
    }
    return handler_(request, call);
  }

  std::vector<ChatRequest> requests() const {
    std::lock_guard lock(mu_);
    return requests_;
  }
  std::size_t calls() const {
    std::lock_guard lock(mu_);
    return requests_.size();
  }

 private:
  Handler handler_;
  mutable std::mutex mu_;
  std::vector<ChatRequest> requests_;
};

inline const Corpus& fixture_corpus() {
  static const Corpus corpus = Corpus::ingest(data_path("fixture_corpus.jsonl"));
  return corpus;
}

// Fixture layout (see tests/oracles/make_fixture.py).
inline std::string fixture_judgment_id(int j) { return "001-" + std::to_string(57574 + 113 * j); }
inline std::uint32_t fixture_first_number(int j) { return 5 + static_cast<std::uint32_t>(j % 4); }
inline ParagraphRef fixture_ref(int j, int position) {
  return {fixture_judgment_id(j), fixture_first_number(j) + static_cast<std::uint32_t>(position)};
}
inline std::vector<std::string> fixture_queries() {
  std::ifstream in(data_path("fixture_queries.txt"));
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

inline std::vector<ParagraphRef> near_duplicate_refs() {
  std::vector<ParagraphRef> out;
  for (int j : {1, 5, 9, 13, 17}) out.push_back(fixture_ref(j, 9));
  return out;
}

// ---------------------------------------------------------------- ARI

inline double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  const std::size_t n = a.size();
  std::map<std::pair<int, int>, double> table;
  std::map<int, double> rows;
  std::map<int, double> cols;
  for (std::size_t i = 0; i < n; ++i) {
    table[{a[i], b[i]}] += 1;
    rows[a[i]] += 1;
    cols[b[i]] += 1;
  }
  auto c2 = [](double x) { return x * (x - 1) / 2; };
  double index = 0;
  for (const auto& [k, v] : table) index += c2(v);
  double sa = 0;
  double sb = 0;
  for (const auto& [k, v] : rows) sa += c2(v);
  for (const auto& [k, v] : cols) sb += c2(v);
  const double expected = sa * sb / c2(static_cast<double>(n));
  const double max_index = (sa + sb) / 2;
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

/// Relabels clusters in order of first appearance; -1 stays -1.
inline std::vector<int> canonical_labels(const std::vector<int>& labels) {
  std::map<int, int> remap;
  std::vector<int> out;
  for (int l : labels) {
    if (l < 0) {
      out.push_back(-1);
      continue;
    }
    auto it = remap.find(l);
    if (it == remap.end()) it = remap.emplace(l, static_cast<int>(remap.size())).first;
    out.push_back(it->second);
  }
  return out;
}

// ---------------------------------------------------------------- random data

inline EmbeddingVector random_unit_vector(std::mt19937& rng, std::size_t dim) {
  std::normal_distribution<float> g(0.0F, 1.0F);
  EmbeddingVector v(dim);
  double norm = 0;
  for (auto& x : v) {
    x = g(rng);
    norm += static_cast<double>(x) * x;
  }
  norm = std::sqrt(norm);
  for (auto& x : v) x = static_cast<float>(x / norm);
  return v;
}

// ---------------------------------------------------------------- MMR oracle

inline double oracle_cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  double dot = 0;
  double na = 0;
  double nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0 || nb == 0) return 0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

/// Greedy MMR recomputing every score from scratch at every step.
inline std::vector<ParagraphRef> mmr_oracle(const EmbeddingVector& query, const std::vector<ParagraphRef>& refs,
                                            const std::vector<EmbeddingVector>& vecs, std::size_t k, double lambda) {
  std::vector<std::size_t> remaining(refs.size());
  for (std::size_t i = 0; i < refs.size(); ++i) remaining[i] = i;
  std::vector<std::size_t> chosen;
  while (chosen.size() < k && !remaining.empty()) {
    std::size_t best_pos = 0;
    double best = 0;
    for (std::size_t pos = 0; pos < remaining.size(); ++pos) {
      const auto d = remaining[pos];
      double score = oracle_cosine(query, vecs[d]);
      if (!chosen.empty()) {
        double redundancy = -std::numeric_limits<double>::infinity();
        for (auto s : chosen) redundancy = std::max(redundancy, oracle_cosine(vecs[d], vecs[s]));
        score = lambda * score - (1 - lambda) * redundancy;
      }
      if (pos == 0 || score > best || (score == best && refs[d] < refs[remaining[best_pos]])) {
        best = score;
        best_pos = pos;
      }
    }
    chosen.push_back(remaining[best_pos]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best_pos));
  }
  std::vector<ParagraphRef> out;
  for (auto c : chosen) out.push_back(refs[c]);
  return out;
}

// ---------------------------------------------------------------- HDBSCAN oracle

/// Reference HDBSCAN on a full mutual-reachability matrix. Clusters are
/// split by connectivity of threshold graphs (BFS), never through an MST.
/// Same rules as the engine: all edges at the split distance are cut
/// together, components below min_cluster_size fall out, excess-of-mass
/// selection treats depth-2 nodes as leaves, and the root is never selected.
class HdbscanOracle {
 public:
  HdbscanOracle(const std::vector<EmbeddingVector>& points, std::size_t min_cluster_size, std::size_t min_samples)
      : n_(points.size()), mcs_(min_cluster_size) {
    std::vector<std::vector<double>> dist(n_, std::vector<double>(n_, 0));
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        double s = 0;
        for (std::size_t d = 0; d < points[i].size(); ++d) {
          const double diff = static_cast<double>(points[i][d]) - points[j][d];
          s += diff * diff;
        }
        dist[i][j] = std::sqrt(s);
      }
    }
    std::vector<double> core(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      std::vector<double> others;
      for (std::size_t j = 0; j < n_; ++j) {
        if (j != i) others.push_back(dist[i][j]);
      }
      std::sort(others.begin(), others.end());
      core[i] = others[min_samples - 1];
    }
    mreach_.assign(n_, std::vector<double>(n_, 0));
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        mreach_[i][j] = i == j ? 0 : std::max({core[i], core[j], dist[i][j]});
      }
    }
  }

  std::vector<int> labels() {
    nodes_.clear();
    std::vector<std::size_t> all(n_);
    for (std::size_t i = 0; i < n_; ++i) all[i] = i;
    condense(all, std::numeric_limits<double>::infinity(), 0, -1);
    select();
    std::vector<int> out(n_, -1);
    std::vector<std::size_t> chosen;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (nodes_[i].selected) chosen.push_back(i);
    }
    std::sort(chosen.begin(), chosen.end(),
              [&](std::size_t a, std::size_t b) { return nodes_[a].members.front() < nodes_[b].members.front(); });
    for (std::size_t l = 0; l < chosen.size(); ++l) {
      for (auto p : nodes_[chosen[l]].members) out[p] = static_cast<int>(l);
    }
    return out;
  }

 private:
  struct Node {
    std::vector<std::size_t> members;
    int depth = 0;
    int parent = -1;
    std::vector<std::size_t> children;
    double stability = 0;
    bool selected = false;
  };

  static double lambda(double d) {
    if (std::isinf(d)) return 0;
    return 1.0 / std::max(d, 1e-12);
  }

  // Connected components of `set` using only pairs with mreach < limit.
  std::vector<std::vector<std::size_t>> components(const std::vector<std::size_t>& set, double limit) const {
    std::vector<int> comp(n_, -2);
    for (auto p : set) comp[p] = -1;
    std::vector<std::vector<std::size_t>> out;
    for (auto start : set) {
      if (comp[start] != -1) continue;
      const int id = static_cast<int>(out.size());
      out.emplace_back();
      std::queue<std::size_t> q;
      q.push(start);
      comp[start] = id;
      while (!q.empty()) {
        const auto u = q.front();
        q.pop();
        out.back().push_back(u);
        for (auto v : set) {
          if (comp[v] == -1 && mreach_[u][v] < limit) {
            comp[v] = id;
            q.push(v);
          }
        }
      }
      std::sort(out.back().begin(), out.back().end());
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return out;
  }

  // Smallest distance at which `set` is connected (its single-linkage height).
  double connect_height(const std::vector<std::size_t>& set) const {
    std::vector<double> values;
    for (auto a : set) {
      for (auto b : set) {
        if (a < b) values.push_back(mreach_[a][b]);
      }
    }
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (double v : values) {
      if (components(set, std::nextafter(v, std::numeric_limits<double>::infinity())).size() == 1) return v;
    }
    return 0;
  }

  void condense(std::vector<std::size_t> set, double birth, int depth, int parent) {
    const std::size_t id = nodes_.size();
    nodes_.push_back({set, depth, parent, {}, 0, false});
    if (parent >= 0) nodes_[static_cast<std::size_t>(parent)].children.push_back(id);
    const double lb = lambda(birth);
    // Per-point exit lambdas.
    std::vector<std::vector<std::size_t>> born;
    while (true) {
      if (set.size() < 2) {
        nodes_[id].stability += static_cast<double>(set.size()) * (lambda(0) - lb);
        break;
      }
      const double d = connect_height(set);
      const double ld = lambda(d);
      std::vector<std::vector<std::size_t>> large;
      for (auto& c : components(set, d)) {
        if (c.size() >= mcs_) {
          large.push_back(c);
        } else {
          for (std::size_t p = 0; p < c.size(); ++p) nodes_[id].stability += ld - lb;
        }
      }
      if (large.size() == 1) {
        set = large.front();
        continue;
      }
      for (const auto& c : large) {
        for (std::size_t p = 0; p < c.size(); ++p) nodes_[id].stability += ld - lb;
      }
      born = large;
      for (const auto& c : born) condense(c, d, depth + 1, static_cast<int>(id));
      break;
    }
  }

  double value(std::size_t id) {
    auto& node = nodes_[id];
    if (node.children.empty() || node.depth == 2) {
      node.selected = true;
      clear_below(id);
      return node.stability;
    }
    double sum = 0;
    for (auto c : node.children) sum += value(c);
    if (nodes_[id].stability >= sum) {
      nodes_[id].selected = true;
      clear_below(id);
      return nodes_[id].stability;
    }
    return sum;
  }

  void clear_below(std::size_t id) {
    for (auto c : nodes_[id].children) {
      nodes_[c].selected = false;
      clear_below(c);
    }
  }

  void select() {
    for (auto c : nodes_[0].children) value(c);
  }

  std::size_t n_;
  std::size_t mcs_;
  std::vector<std::vector<double>> mreach_;
  std::vector<Node> nodes_;
};

}  // namespace lexreport::testing
