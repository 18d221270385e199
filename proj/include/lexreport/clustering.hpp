#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lexreport/providers.hpp"

namespace lexreport {

struct ClusterParams {
  std::size_t min_cluster_size = 5;
  std::optional<std::size_t> min_samples;  // defaults to min_cluster_size

  std::size_t effective_min_samples() const noexcept { return min_samples.value_or(min_cluster_size); }
  void validate() const;
  bool operator==(const ClusterParams&) const = default;
};

/// Per-point labels: -1 for noise, 0..C-1 for clusters.
struct ClusterAssignment {
  std::vector<int> labels;

  int cluster_count() const noexcept;
  std::size_t noise_count() const noexcept;
};

struct ClusterNode {
  int node_id = 0;
  std::optional<int> parent_id;
  std::vector<int> children;
  std::vector<std::size_t> members;  // every point in the component at birth, ascending
  double birth_distance = 0.0;       // +inf for the root
  double death_distance = 0.0;
  double stability = 0.0;
  bool is_selected = false;
  int depth = 0;                     // root = 0
};

/// Condensed HDBSCAN hierarchy. nodes[0] is the root; a node's id equals its
/// position and children always have larger ids than their parent.
struct ClusterTree {
  std::vector<ClusterNode> nodes;

  std::vector<int> selected() const;
};

struct MstEdge {
  std::size_t a = 0;  // a < b
  std::size_t b = 0;
  double weight = 0.0;

  bool operator==(const MstEdge&) const = default;
};

/// Selected clusters never sit deeper than this below the root.
inline constexpr int kMaxSelectedDepth = 2;

double euclidean(std::span<const float> a, std::span<const float> b);

/// Distance from each point to its min_samples-th nearest neighbour
/// (self excluded). Requires n >= min_samples + 1.
std::vector<double> core_distances(std::span<const EmbeddingVector> points, std::size_t min_samples);

/// d_mreach(a, b) = max(core(a), core(b), d(a, b)); d_mreach(a, a) = 0.
class MutualReachability {
 public:
  MutualReachability(std::span<const EmbeddingVector> points, std::vector<double> cores);

  double operator()(std::size_t a, std::size_t b) const;
  std::size_t size() const noexcept { return points_.size(); }

 private:
  std::span<const EmbeddingVector> points_;
  std::vector<double> cores_;
};

/// Prim's algorithm from vertex 0 over the complete mutual-reachability
/// graph. Among equal-weight choices the edge with the smaller (a, b) wins.
std::vector<MstEdge> build_mst(const MutualReachability& mreach);

/// Top-down condensation of the single-linkage hierarchy.
///
/// Within a cluster, all MST edges of the current maximum weight d are cut at
/// once. Components smaller than min_cluster_size fall out (their points
/// leave at lambda = 1/d). Two or more large components end the cluster and
/// become children born at d; exactly one lets the cluster continue. Stability
/// is sum over member points of (lambda_leave - lambda_birth).
ClusterTree condense_tree(std::size_t n_points, std::span<const MstEdge> mst, std::size_t min_cluster_size);

/// Excess-of-mass selection. A non-root node is selected when its stability
/// is >= the summed value of its children; nodes at depth kMaxSelectedDepth
/// are treated as leaves. Points outside every selected node are noise.
/// Cluster ids follow the smallest member index of each selected node.
ClusterAssignment extract_clusters(ClusterTree& tree);

struct ClusterResult {
  ClusterAssignment assignment;
  ClusterTree tree;
};

/// Full HDBSCAN: core distances, mutual reachability, MST, condensation,
/// selection. Throws TooFewPoints when n < min_cluster_size. min_samples is
/// clamped to n - 1. Inputs whose points are all identical form one cluster.
ClusterResult cluster(std::span<const EmbeddingVector> points, const ClusterParams& params);

/// The min(n, |members|) members with highest cosine to the member mean,
/// ties by point index.
std::vector<std::size_t> representatives(std::span<const EmbeddingVector> points,
                                         std::span<const std::size_t> members, std::size_t n = 5);

/// Debug dump: [{node_id, parent, birth, death, stability, selected, members}].
nlohmann::json tree_to_json(const ClusterTree& tree);

}  // namespace lexreport
