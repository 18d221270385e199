#include "lexreport/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

#include <nlohmann/json.hpp>

#include "lexreport/error.hpp"
#include "lexreport/retrieval.hpp"

namespace lexreport {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Zero-length edges would give lambda = inf; clamp so stabilities stay finite.
constexpr double kMinDistance = 1e-12;

double lambda_of(double distance) {
  if (distance == kInf) return 0.0;
  return 1.0 / std::max(distance, kMinDistance);
}

class DisjointSet {
 public:
  explicit DisjointSet(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

// Components of `points` under MST edges strictly lighter than `cut`,
// each sorted, ordered by smallest member.
std::vector<std::vector<std::size_t>> split_components(std::size_t n_points, const std::vector<std::size_t>& points,
                                                       std::span<const MstEdge> mst, double cut) {
  std::vector<char> in(n_points, 0);
  for (auto p : points) in[p] = 1;
  DisjointSet ds(n_points);
  for (const auto& e : mst) {
    if (in[e.a] && in[e.b] && e.weight < cut) ds.unite(e.a, e.b);
  }
  std::vector<std::vector<std::size_t>> comps;
  std::vector<long> comp_of(n_points, -1);
  for (auto p : points) {
    const auto root = ds.find(p);
    if (comp_of[root] < 0) {
      comp_of[root] = static_cast<long>(comps.size());
      comps.emplace_back();
    }
    comps[static_cast<std::size_t>(comp_of[root])].push_back(p);
  }
  for (auto& c : comps) std::sort(c.begin(), c.end());
  std::sort(comps.begin(), comps.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return comps;
}

double max_internal_edge(const std::vector<std::size_t>& points, std::size_t n_points, std::span<const MstEdge> mst,
                         bool& has_edge) {
  std::vector<char> in(n_points, 0);
  for (auto p : points) in[p] = 1;
  double d = 0.0;
  has_edge = false;
  for (const auto& e : mst) {
    if (in[e.a] && in[e.b]) {
      d = has_edge ? std::max(d, e.weight) : e.weight;
      has_edge = true;
    }
  }
  return d;
}

}  // namespace

void ClusterParams::validate() const {
  if (min_cluster_size < 2) throw Error(ErrorCode::InvalidParams, "min_cluster_size must be >= 2");
  if (min_samples && *min_samples < 1) throw Error(ErrorCode::InvalidParams, "min_samples must be >= 1");
}

int ClusterAssignment::cluster_count() const noexcept {
  int m = -1;
  for (int l : labels) m = std::max(m, l);
  return m + 1;
}

std::size_t ClusterAssignment::noise_count() const noexcept {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), -1));
}

std::vector<int> ClusterTree::selected() const {
  std::vector<int> out;
  for (const auto& n : nodes) {
    if (n.is_selected) out.push_back(n.node_id);
  }
  return out;
}

double euclidean(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::DimensionMismatch, "points differ in dimension");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    s += d * d;
  }
  return std::sqrt(s);
}

std::vector<double> core_distances(std::span<const EmbeddingVector> points, std::size_t min_samples) {
  const std::size_t n = points.size();
  if (min_samples < 1) throw Error(ErrorCode::InvalidParams, "min_samples must be >= 1");
  if (n < min_samples + 1) {
    throw Error(ErrorCode::TooFewPoints, "need at least " + std::to_string(min_samples + 1) + " points, got " +
                                             std::to_string(n));
  }
  std::vector<double> cores(n);
  std::vector<double> dists(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t k = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) dists[k++] = euclidean(points[i], points[j]);
    }
    std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(min_samples - 1), dists.end());
    cores[i] = dists[min_samples - 1];
  }
  return cores;
}

MutualReachability::MutualReachability(std::span<const EmbeddingVector> points, std::vector<double> cores)
    : points_(points), cores_(std::move(cores)) {
  if (cores_.size() != points_.size()) throw Error(ErrorCode::InvalidParams, "one core distance per point required");
}

double MutualReachability::operator()(std::size_t a, std::size_t b) const {
  if (a == b) return 0.0;
  return std::max({cores_[a], cores_[b], euclidean(points_[a], points_[b])});
}

std::vector<MstEdge> build_mst(const MutualReachability& mreach) {
  const std::size_t n = mreach.size();
  std::vector<MstEdge> edges;
  if (n < 2) return edges;
  edges.reserve(n - 1);
  std::vector<char> in_tree(n, 0);
  std::vector<double> best(n, kInf);
  std::vector<std::size_t> from(n, 0);
  auto key = [&](std::size_t j) {
    return std::tuple(best[j], std::min(from[j], j), std::max(from[j], j));
  };
  std::size_t current = 0;
  in_tree[0] = 1;
  for (std::size_t step = 1; step < n; ++step) {
    for (std::size_t j = 0; j < n; ++j) {
      if (in_tree[j]) continue;
      const double w = mreach(current, j);
      const auto candidate = std::tuple(w, std::min(current, j), std::max(current, j));
      if (candidate < key(j)) {
        best[j] = w;
        from[j] = current;
      }
    }
    std::size_t next = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (!in_tree[j] && (next == n || key(j) < key(next))) next = j;
    }
    in_tree[next] = 1;
    edges.push_back({std::min(from[next], next), std::max(from[next], next), best[next]});
    current = next;
  }
  return edges;
}

ClusterTree condense_tree(std::size_t n_points, std::span<const MstEdge> mst, std::size_t min_cluster_size) {
  ClusterTree tree;
  ClusterNode root;
  root.node_id = 0;
  root.members.resize(n_points);
  std::iota(root.members.begin(), root.members.end(), 0);
  root.birth_distance = kInf;
  tree.nodes.push_back(root);

  std::vector<int> work{0};
  while (!work.empty()) {
    const int id = work.back();
    work.pop_back();
    const double birth_lambda = lambda_of(tree.nodes[id].birth_distance);
    std::vector<std::size_t> points = tree.nodes[id].members;
    double stability = 0.0;
    double death = 0.0;
    std::vector<std::vector<std::size_t>> spawned;

    for (;;) {
      bool has_edge = false;
      const double d = max_internal_edge(points, n_points, mst, has_edge);
      if (!has_edge) {
        // Single point left (only reachable with min_cluster_size < 2).
        death = 0.0;
        stability += static_cast<double>(points.size()) * (lambda_of(0.0) - birth_lambda);
        break;
      }
      const double lambda = lambda_of(d);
      auto comps = split_components(n_points, points, mst, d);
      std::vector<std::vector<std::size_t>> large;
      std::size_t leaving = 0;
      for (auto& c : comps) {
        if (c.size() >= min_cluster_size) {
          large.push_back(std::move(c));
        } else {
          leaving += c.size();
        }
      }
      if (large.size() == 1) {
        stability += static_cast<double>(leaving) * (lambda - birth_lambda);
        points = std::move(large.front());
        continue;
      }
      for (const auto& c : large) leaving += c.size();
      stability += static_cast<double>(leaving) * (lambda - birth_lambda);
      death = d;
      spawned = std::move(large);
      break;
    }

    tree.nodes[id].stability = stability;
    tree.nodes[id].death_distance = death;
    const int depth = tree.nodes[id].depth;
    for (auto& members : spawned) {
      ClusterNode child;
      child.node_id = static_cast<int>(tree.nodes.size());
      child.parent_id = id;
      child.members = std::move(members);
      child.birth_distance = death;
      child.depth = depth + 1;
      tree.nodes[id].children.push_back(child.node_id);
      tree.nodes.push_back(std::move(child));
    }
    // Reverse so the child with the smallest member is processed first.
    const auto& kids = tree.nodes[id].children;
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) work.push_back(*it);
  }
  return tree;
}

ClusterAssignment extract_clusters(ClusterTree& tree) {
  const std::size_t n_nodes = tree.nodes.size();
  std::vector<double> value(n_nodes, 0.0);
  for (auto& node : tree.nodes) node.is_selected = false;

  auto deselect_subtree = [&](int id) {
    std::vector<int> stack(tree.nodes[id].children.begin(), tree.nodes[id].children.end());
    while (!stack.empty()) {
      const int c = stack.back();
      stack.pop_back();
      tree.nodes[c].is_selected = false;
      stack.insert(stack.end(), tree.nodes[c].children.begin(), tree.nodes[c].children.end());
    }
  };

  // Children have larger ids than parents, so a reverse sweep is bottom-up.
  for (std::size_t i = n_nodes; i-- > 1;) {
    auto& node = tree.nodes[i];
    if (node.depth > kMaxSelectedDepth) continue;
    if (node.children.empty() || node.depth == kMaxSelectedDepth) {
      node.is_selected = true;
      value[i] = node.stability;
      deselect_subtree(node.node_id);
      continue;
    }
    double children_sum = 0.0;
    for (int c : node.children) children_sum += value[static_cast<std::size_t>(c)];
    if (node.stability >= children_sum) {
      node.is_selected = true;
      value[i] = node.stability;
      deselect_subtree(node.node_id);
    } else {
      value[i] = children_sum;
    }
  }

  std::size_t n_points = tree.nodes.empty() ? 0 : tree.nodes[0].members.size();
  ClusterAssignment out;
  out.labels.assign(n_points, -1);
  auto selected = tree.selected();
  std::sort(selected.begin(), selected.end(), [&](int a, int b) {
    return tree.nodes[a].members.front() < tree.nodes[b].members.front();
  });
  for (std::size_t label = 0; label < selected.size(); ++label) {
    for (auto p : tree.nodes[selected[label]].members) out.labels[p] = static_cast<int>(label);
  }
  return out;
}

ClusterResult cluster(std::span<const EmbeddingVector> points, const ClusterParams& params) {
  params.validate();
  const std::size_t n = points.size();
  if (n < params.min_cluster_size) {
    throw Error(ErrorCode::TooFewPoints, "need at least " + std::to_string(params.min_cluster_size) +
                                             " points, got " + std::to_string(n));
  }
  const std::size_t min_samples = std::min(params.effective_min_samples(), n - 1);
  MutualReachability mreach(points, core_distances(points, min_samples));
  const auto mst = build_mst(mreach);
  ClusterResult result;
  result.tree = condense_tree(n, mst, params.min_cluster_size);

  const bool all_identical = std::all_of(points.begin(), points.end(), [&](const EmbeddingVector& p) {
    return euclidean(p, points.front()) == 0.0;
  });
  if (all_identical) {
    // No density structure at all: one cluster rather than all noise.
    for (auto& node : result.tree.nodes) node.is_selected = false;
    result.tree.nodes[0].is_selected = true;
    result.assignment.labels.assign(n, 0);
    return result;
  }
  result.assignment = extract_clusters(result.tree);
  return result;
}

std::vector<std::size_t> representatives(std::span<const EmbeddingVector> points,
                                         std::span<const std::size_t> members, std::size_t n) {
  if (members.empty()) throw Error(ErrorCode::InvalidParams, "representatives of an empty cluster");
  const std::size_t dim = points[members.front()].size();
  std::vector<double> mean(dim, 0.0);
  for (auto m : members) {
    for (std::size_t i = 0; i < dim; ++i) mean[i] += points[m][i];
  }
  EmbeddingVector centroid(dim);
  for (std::size_t i = 0; i < dim; ++i) centroid[i] = static_cast<float>(mean[i] / static_cast<double>(members.size()));

  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(members.size());
  for (auto m : members) scored.emplace_back(cosine(points[m], centroid), m);
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < scored.size() && i < n; ++i) out.push_back(scored[i].second);
  return out;
}

nlohmann::json tree_to_json(const ClusterTree& tree) {
  auto out = nlohmann::json::array();
  auto num = [](double d) -> nlohmann::json {
    if (std::isinf(d)) return "inf";
    return d;
  };
  for (const auto& n : tree.nodes) {
    nlohmann::json j;
    j["node_id"] = n.node_id;
    j["parent"] = n.parent_id ? nlohmann::json(*n.parent_id) : nlohmann::json(nullptr);
    j["birth"] = num(n.birth_distance);
    j["death"] = num(n.death_distance);
    j["stability"] = n.stability;
    j["selected"] = n.is_selected;
    j["members"] = n.members;
    out.push_back(std::move(j));
  }
  return out;
}

}  // namespace lexreport
