#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lexreport/providers.hpp"

namespace lexreport {

struct OutlineNode {
  std::string node_id;
  std::string title;
  std::vector<OutlineNode> children;
  std::optional<int> source_cluster;  // ClusterNode id the heading came from
  std::string marker;                 // list marker stripped by parse_toc, e.g. "II." or "-"

  bool is_leaf() const noexcept { return children.empty(); }
  bool operator==(const OutlineNode&) const = default;
};

/// Table of contents. Leaves are the content-generation targets.
class Outline {
 public:
  std::vector<OutlineNode> roots;

  bool operator==(const Outline&) const = default;

  const OutlineNode* find(std::string_view node_id) const noexcept;
  OutlineNode* find(std::string_view node_id) noexcept;
  /// Leaves in pre-order.
  std::vector<const OutlineNode*> leaves() const;
  /// Every node id in pre-order.
  std::vector<std::string> node_ids() const;
  std::size_t depth() const noexcept;  // 0 for an empty outline, 1 for roots only

  /// Returns the new node's id ("n1", "n2", ... first unused).
  std::string add_node(const std::optional<std::string>& parent_id, std::string_view title,
                       std::optional<std::size_t> position = std::nullopt);
  void rename_node(std::string_view node_id, std::string_view title);
  void remove_node(std::string_view node_id);
  /// Re-parents a node (nullopt parent = root level). Moving a node below
  /// itself throws InvalidParams.
  void move_node(std::string_view node_id, const std::optional<std::string>& new_parent,
                 std::optional<std::size_t> position = std::nullopt);

 private:
  std::string fresh_id() const;
};

/// Parses the 4-space indentation grammar. Each non-blank line is a node at
/// depth floor(spaces / 4) (tabs count as 4), clamped to parent depth + 1.
/// Leading list markers (roman/letter/number followed by "." or ")", "-",
/// "*", "#") are stripped into OutlineNode::marker. A trailing "{#id}" sets
/// the node id; otherwise ids are positional ("1", "1.2", ...).
/// Throws EmptyToc for blank input.
Outline parse_toc(std::string_view text);

/// Inverse of parse_toc. With `with_ids`, each line ends in "{#id}" so ids
/// survive a round trip.
std::string serialize_toc(const Outline& outline, bool with_ids = true);

/// Titles from root to leaf joined with " - ". Throws UnknownNode / NotALeaf.
std::string path_query(const Outline& outline, std::string_view leaf_id);

/// Extracts the label from a "topic: <label>" line. Throws FormatViolation.
std::string parse_topic_label(std::string_view response);

/// Chat-labels a cluster from its representative paragraph texts (1-5).
/// A malformed reply is retried once; after that the title falls back to the
/// first six words of the first representative.
std::string label_cluster(std::span<const std::string> representative_texts, ChatProvider& chat);

/// One labelled cluster of the hierarchy handed to outline construction.
struct TitledCluster {
  int cluster_node = 0;
  std::string title;
  double stability = 0.0;
  std::vector<TitledCluster> children;
};

/// Indented two-level topic list, siblings in stability order.
std::string topics_text(std::span<const TitledCluster> clusters);

/// Single chat call asking the model to organize the topics; returns raw ToC text.
std::string reorganize(std::span<const TitledCluster> clusters, ChatProvider& chat);

/// Outline without a model call: clusters by stability descending (ties by
/// cluster node id), children nested likewise.
Outline concat_fallback(std::span<const TitledCluster> clusters);

/// Parses the reorganized ToC and restores source_cluster where a title
/// matches a cluster title exactly (each cluster used once).
Outline outline_from_reorganized(std::string_view toc_text, std::span<const TitledCluster> clusters);

nlohmann::json outline_to_json(const Outline& outline);
/// Throws InvalidParams on malformed input or duplicate ids.
Outline outline_from_json(const nlohmann::json& j);

}  // namespace lexreport
