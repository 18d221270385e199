#include "lexreport/outline.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <set>
#include <utility>

#include <nlohmann/json.hpp>

#include "lexreport/error.hpp"
#include "lexreport/prompts.hpp"
#include "lexreport/text.hpp"

namespace lexreport {

namespace {

constexpr std::size_t kIndentWidth = 4;
constexpr std::size_t kFallbackTitleWords = 6;

bool is_roman(std::string_view s) {
  if (s.empty()) return false;
  const bool upper = std::all_of(s.begin(), s.end(), [](char c) { return std::string_view("IVXLCDM").find(c) != std::string_view::npos; });
  const bool lower = std::all_of(s.begin(), s.end(), [](char c) { return std::string_view("ivxlcdm").find(c) != std::string_view::npos; });
  return upper || lower;
}

bool is_dotted_number(std::string_view s) {
  if (s.empty() || s.front() == '.' || s.back() == '.') return false;
  bool prev_dot = false;
  for (char c : s) {
    if (c == '.') {
      if (prev_dot) return false;
      prev_dot = true;
    } else if (c >= '0' && c <= '9') {
      prev_dot = false;
    } else {
      return false;
    }
  }
  return true;
}

// Splits "II. Title" into {"II.", "Title"}. Returns an empty marker when the
// line has none or when stripping would leave no title.
std::pair<std::string, std::string> split_marker(std::string_view line) {
  const auto space = line.find(' ');
  if (space == std::string_view::npos) return {"", std::string(line)};
  const auto head = line.substr(0, space);
  const auto rest = text::trim(line.substr(space + 1));
  if (rest.empty()) return {"", std::string(line)};

  bool marker = false;
  if (head == "-" || head == "*" || head == "+" || std::all_of(head.begin(), head.end(), [](char c) { return c == '#'; })) {
    marker = true;
  } else if (head.size() >= 2 && (head.back() == '.' || head.back() == ')')) {
    const auto body = head.substr(0, head.size() - 1);
    const bool letter = body.size() == 1 && std::isalpha(static_cast<unsigned char>(body[0]));
    marker = letter || is_roman(body) || is_dotted_number(body);
  }
  if (!marker) return {"", std::string(line)};
  return {std::string(head), std::string(rest)};
}

// Splits a trailing "{#id}" annotation off a title.
std::optional<std::string> take_id_annotation(std::string& title) {
  if (title.size() < 4 || title.back() != '}') return std::nullopt;
  const auto open = title.rfind("{#");
  if (open == std::string::npos) return std::nullopt;
  const std::string id = title.substr(open + 2, title.size() - open - 3);
  if (id.empty()) return std::nullopt;
  for (char c : id) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == '{' || c == '}') return std::nullopt;
  }
  const auto rest = text::trim(std::string_view(title).substr(0, open));
  if (rest.empty()) return std::nullopt;
  title = std::string(rest);
  return id;
}

void collect_ids(const std::vector<OutlineNode>& nodes, std::vector<std::string>& out) {
  for (const auto& n : nodes) {
    out.push_back(n.node_id);
    collect_ids(n.children, out);
  }
}

const OutlineNode* find_in(const std::vector<OutlineNode>& nodes, std::string_view id) {
  for (const auto& n : nodes) {
    if (n.node_id == id) return &n;
    if (const auto* hit = find_in(n.children, id)) return hit;
  }
  return nullptr;
}

// Locates the sibling vector holding `id` and the node's position in it.
std::pair<std::vector<OutlineNode>*, std::size_t> locate(std::vector<OutlineNode>& nodes, std::string_view id) {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].node_id == id) return {&nodes, i};
    auto hit = locate(nodes[i].children, id);
    if (hit.first) return hit;
  }
  return {nullptr, 0};
}

std::string clean_title(std::string_view title) {
  auto t = text::collapse_whitespace(title);
  if (t.empty()) throw Error(ErrorCode::InvalidParams, "outline title must not be empty");
  return t;
}

void serialize_nodes(const std::vector<OutlineNode>& nodes, std::size_t depth, bool with_ids, std::string& out) {
  for (const auto& n : nodes) {
    out.append(depth * kIndentWidth, ' ');
    if (!n.marker.empty()) {
      out += n.marker;
      out += ' ';
    }
    out += n.title;
    if (with_ids) out += " {#" + n.node_id + "}";
    out += '\n';
    serialize_nodes(n.children, depth + 1, with_ids, out);
  }
}

std::vector<const TitledCluster*> stability_order(std::span<const TitledCluster> clusters) {
  std::vector<const TitledCluster*> order;
  for (const auto& c : clusters) order.push_back(&c);
  std::stable_sort(order.begin(), order.end(), [](const TitledCluster* a, const TitledCluster* b) {
    if (a->stability != b->stability) return a->stability > b->stability;
    return a->cluster_node < b->cluster_node;
  });
  return order;
}

OutlineNode fallback_node(const TitledCluster& c, const std::string& id) {
  OutlineNode node;
  node.node_id = id;
  node.title = clean_title(c.title);
  node.source_cluster = c.cluster_node;
  const auto kids = stability_order(c.children);
  for (std::size_t i = 0; i < kids.size(); ++i) node.children.push_back(fallback_node(*kids[i], id + "." + std::to_string(i + 1)));
  return node;
}

nlohmann::json node_to_json(const OutlineNode& n) {
  nlohmann::json j;
  j["id"] = n.node_id;
  j["title"] = n.title;
  if (!n.marker.empty()) j["marker"] = n.marker;
  j["source_cluster"] = n.source_cluster ? nlohmann::json(*n.source_cluster) : nlohmann::json(nullptr);
  j["children"] = nlohmann::json::array();
  for (const auto& c : n.children) j["children"].push_back(node_to_json(c));
  return j;
}

OutlineNode node_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("id") || !j.contains("title") || !j["id"].is_string() || !j["title"].is_string()) {
    throw Error(ErrorCode::InvalidParams, "outline node needs string id and title");
  }
  OutlineNode n;
  n.node_id = j["id"].get<std::string>();
  if (n.node_id.empty()) throw Error(ErrorCode::InvalidParams, "outline node id is empty");
  n.title = clean_title(j["title"].get<std::string>());
  if (j.contains("marker") && j["marker"].is_string()) n.marker = j["marker"].get<std::string>();
  if (j.contains("source_cluster") && j["source_cluster"].is_number_integer()) n.source_cluster = j["source_cluster"].get<int>();
  if (j.contains("children")) {
    if (!j["children"].is_array()) throw Error(ErrorCode::InvalidParams, "outline children must be an array");
    for (const auto& c : j["children"]) n.children.push_back(node_from_json(c));
  }
  return n;
}

}  // namespace

const OutlineNode* Outline::find(std::string_view node_id) const noexcept {
  return find_in(roots, node_id);
}

OutlineNode* Outline::find(std::string_view node_id) noexcept {
  return const_cast<OutlineNode*>(std::as_const(*this).find(node_id));
}

std::vector<const OutlineNode*> Outline::leaves() const {
  std::vector<const OutlineNode*> out;
  std::function<void(const std::vector<OutlineNode>&)> walk = [&](const std::vector<OutlineNode>& nodes) {
    for (const auto& n : nodes) {
      if (n.is_leaf()) {
        out.push_back(&n);
      } else {
        walk(n.children);
      }
    }
  };
  walk(roots);
  return out;
}

std::vector<std::string> Outline::node_ids() const {
  std::vector<std::string> out;
  collect_ids(roots, out);
  return out;
}

std::size_t Outline::depth() const noexcept {
  std::function<std::size_t(const std::vector<OutlineNode>&)> d = [&](const std::vector<OutlineNode>& nodes) {
    std::size_t best = 0;
    for (const auto& n : nodes) best = std::max(best, 1 + d(n.children));
    return best;
  };
  return d(roots);
}

std::string Outline::fresh_id() const {
  const auto ids = node_ids();
  const std::set<std::string> used(ids.begin(), ids.end());
  for (std::size_t k = 1;; ++k) {
    auto id = "n" + std::to_string(k);
    if (!used.count(id)) return id;
  }
}

std::string Outline::add_node(const std::optional<std::string>& parent_id, std::string_view title,
                              std::optional<std::size_t> position) {
  OutlineNode node;
  node.title = clean_title(title);
  node.node_id = fresh_id();
  std::vector<OutlineNode>* siblings = &roots;
  if (parent_id) {
    auto* parent = find(*parent_id);
    if (!parent) throw Error(ErrorCode::UnknownNode, "no outline node '" + *parent_id + "'");
    siblings = &parent->children;
  }
  const auto pos = std::min(position.value_or(siblings->size()), siblings->size());
  siblings->insert(siblings->begin() + static_cast<std::ptrdiff_t>(pos), node);
  return node.node_id;
}

void Outline::rename_node(std::string_view node_id, std::string_view title) {
  auto* node = find(node_id);
  if (!node) throw Error(ErrorCode::UnknownNode, "no outline node '" + std::string(node_id) + "'");
  node->title = clean_title(title);
}

void Outline::remove_node(std::string_view node_id) {
  auto [siblings, pos] = locate(roots, node_id);
  if (!siblings) throw Error(ErrorCode::UnknownNode, "no outline node '" + std::string(node_id) + "'");
  siblings->erase(siblings->begin() + static_cast<std::ptrdiff_t>(pos));
}

void Outline::move_node(std::string_view node_id, const std::optional<std::string>& new_parent,
                        std::optional<std::size_t> position) {
  const auto* node = find(node_id);
  if (!node) throw Error(ErrorCode::UnknownNode, "no outline node '" + std::string(node_id) + "'");
  if (new_parent) {
    if (!find(*new_parent)) throw Error(ErrorCode::UnknownNode, "no outline node '" + *new_parent + "'");
    std::vector<std::string> below;
    collect_ids({*node}, below);
    if (std::find(below.begin(), below.end(), *new_parent) != below.end()) {
      throw Error(ErrorCode::InvalidParams, "cannot move a node below itself");
    }
  }
  auto [siblings, pos] = locate(roots, node_id);
  OutlineNode moved = std::move((*siblings)[pos]);
  siblings->erase(siblings->begin() + static_cast<std::ptrdiff_t>(pos));
  std::vector<OutlineNode>* target = new_parent ? &find(*new_parent)->children : &roots;
  const auto at = std::min(position.value_or(target->size()), target->size());
  target->insert(target->begin() + static_cast<std::ptrdiff_t>(at), std::move(moved));
}

Outline parse_toc(std::string_view toc) {
  struct Line {
    std::size_t depth;
    std::string title;
    std::string marker;
    std::optional<std::string> id;
  };
  std::vector<Line> lines;
  for (const auto& raw : text::split_lines(toc)) {
    if (text::trim(raw).empty()) continue;
    std::size_t spaces = 0;
    std::size_t i = 0;
    for (; i < raw.size() && (raw[i] == ' ' || raw[i] == '\t'); ++i) spaces += raw[i] == '\t' ? kIndentWidth : 1;
    auto body = text::collapse_whitespace(raw.substr(i));
    Line line;
    line.depth = spaces / kIndentWidth;
    line.id = take_id_annotation(body);
    auto [marker, title] = split_marker(body);
    line.marker = std::move(marker);
    line.title = std::move(title);
    lines.push_back(std::move(line));
  }
  if (lines.empty()) throw Error(ErrorCode::EmptyToc, "table of contents is empty");

  std::set<std::string> used;
  for (const auto& l : lines) {
    if (l.id) used.insert(*l.id);
  }

  Outline out;
  // Path of nodes from the root to the most recent line.
  std::vector<OutlineNode*> stack;
  std::vector<std::size_t> counters;  // child counters per depth, for positional ids
  std::set<std::string> assigned;
  for (auto& l : lines) {
    const std::size_t depth = std::min(l.depth, stack.size());
    stack.resize(depth);
    counters.resize(depth + 1, 0);
    ++counters[depth];
    std::string positional;
    for (std::size_t d = 0; d <= depth; ++d) {
      if (d) positional += '.';
      positional += std::to_string(counters[d]);
    }

    OutlineNode node;
    node.title = std::move(l.title);
    node.marker = std::move(l.marker);
    if (l.id && !assigned.count(*l.id)) {
      node.node_id = *l.id;
    } else {
      node.node_id = positional;
      for (std::size_t k = 2; used.count(node.node_id) || assigned.count(node.node_id); ++k) {
        node.node_id = positional + "~" + std::to_string(k);
      }
    }
    assigned.insert(node.node_id);

    auto& siblings = stack.empty() ? out.roots : stack.back()->children;
    siblings.push_back(std::move(node));
    stack.push_back(&siblings.back());
    counters.resize(depth + 1);
  }
  return out;
}

std::string serialize_toc(const Outline& outline, bool with_ids) {
  std::string out;
  serialize_nodes(outline.roots, 0, with_ids, out);
  return out;
}

std::string path_query(const Outline& outline, std::string_view leaf_id) {
  std::vector<const OutlineNode*> path;
  std::function<bool(const std::vector<OutlineNode>&)> walk = [&](const std::vector<OutlineNode>& nodes) {
    for (const auto& n : nodes) {
      path.push_back(&n);
      if (n.node_id == leaf_id || walk(n.children)) return true;
      path.pop_back();
    }
    return false;
  };
  if (!walk(outline.roots)) throw Error(ErrorCode::UnknownNode, "no outline node '" + std::string(leaf_id) + "'");
  if (!path.back()->is_leaf()) throw Error(ErrorCode::NotALeaf, "outline node '" + std::string(leaf_id) + "' has children");
  std::vector<std::string> titles;
  for (const auto* n : path) titles.push_back(n->title);
  return text::join(titles, " - ");
}

std::string parse_topic_label(std::string_view response) {
  for (const auto& raw : text::split_lines(response)) {
    auto line = text::trim(raw);
    while (!line.empty() && (line.front() == '*' || line.front() == '#')) line.remove_prefix(1);
    line = text::trim(line);
    if (!text::starts_with_ci(line, "topic:")) continue;
    std::string_view label = line.substr(6);
    while (!label.empty() && (label.front() == '*' || label.front() == ' ')) label.remove_prefix(1);
    while (!label.empty() && (label.back() == '*' || label.back() == ' ')) label.remove_suffix(1);
    if (label.size() >= 2 && label.front() == '"' && label.back() == '"') label = label.substr(1, label.size() - 2);
    auto title = text::collapse_whitespace(label);
    if (!title.empty()) return title;
  }
  throw Error(ErrorCode::FormatViolation, "response has no 'topic:' line");
}

std::string label_cluster(std::span<const std::string> representative_texts, ChatProvider& chat) {
  if (representative_texts.empty() || representative_texts.size() > 5) {
    throw Error(ErrorCode::InvalidParams, "label_cluster takes 1-5 representative paragraphs");
  }
  const auto request = prompts::topic_label_request(representative_texts);
  for (int attempt = 0; attempt < 2; ++attempt) {
    try {
      return parse_topic_label(chat.chat(request));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::FormatViolation && e.code() != ErrorCode::ResponseEmpty) throw;
    }
  }
  auto title = text::first_words(representative_texts.front(), kFallbackTitleWords);
  return title.empty() ? std::string("Untitled topic") : title;
}

std::string topics_text(std::span<const TitledCluster> clusters) {
  std::string out;
  for (const auto* c : stability_order(clusters)) {
    out += text::collapse_whitespace(c->title) + "\n";
    for (const auto* child : stability_order(c->children)) {
      out.append(kIndentWidth, ' ');
      out += text::collapse_whitespace(child->title) + "\n";
    }
  }
  if (!out.empty()) out.pop_back();
  return out;
}

std::string reorganize(std::span<const TitledCluster> clusters, ChatProvider& chat) {
  if (clusters.empty()) throw Error(ErrorCode::InvalidParams, "reorganize needs at least one topic");
  return chat.chat(prompts::reorganize_request(topics_text(clusters)));
}

Outline concat_fallback(std::span<const TitledCluster> clusters) {
  if (clusters.empty()) throw Error(ErrorCode::InvalidParams, "concat_fallback needs at least one topic");
  Outline out;
  const auto order = stability_order(clusters);
  for (std::size_t i = 0; i < order.size(); ++i) out.roots.push_back(fallback_node(*order[i], std::to_string(i + 1)));
  return out;
}

Outline outline_from_reorganized(std::string_view toc_text, std::span<const TitledCluster> clusters) {
  auto outline = parse_toc(toc_text);
  std::vector<std::pair<std::string, int>> pool;
  std::function<void(std::span<const TitledCluster>)> gather = [&](std::span<const TitledCluster> cs) {
    for (const auto* c : stability_order(cs)) {
      pool.emplace_back(text::collapse_whitespace(c->title), c->cluster_node);
      gather(c->children);
    }
  };
  gather(clusters);
  std::vector<bool> used(pool.size(), false);
  std::function<void(std::vector<OutlineNode>&)> assign = [&](std::vector<OutlineNode>& nodes) {
    for (auto& n : nodes) {
      for (std::size_t i = 0; i < pool.size(); ++i) {
        if (!used[i] && pool[i].first == n.title) {
          used[i] = true;
          n.source_cluster = pool[i].second;
          break;
        }
      }
      assign(n.children);
    }
  };
  assign(outline.roots);
  return outline;
}

nlohmann::json outline_to_json(const Outline& outline) {
  auto roots = nlohmann::json::array();
  for (const auto& r : outline.roots) roots.push_back(node_to_json(r));
  return roots;
}

Outline outline_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw Error(ErrorCode::InvalidParams, "outline must be an array of root nodes");
  Outline out;
  for (const auto& r : j) out.roots.push_back(node_from_json(r));
  const auto ids = out.node_ids();
  const std::set<std::string> unique(ids.begin(), ids.end());
  if (unique.size() != ids.size()) throw Error(ErrorCode::InvalidParams, "outline node ids are not unique");
  return out;
}

}  // namespace lexreport
