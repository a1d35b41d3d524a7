#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace reco {

struct ConceptNode {
  std::string id;
  std::string name;
  bool is_class = false;
  long long image_count = 0;
  bool offensive = false;
  bool non_visual = false;
};

using Edge = std::pair<std::string, std::string>;  // parent, child

/// Validated, single-rooted hypernym DAG. Immutable after construction.
///
/// Nodes are addressed by dense indices in node-file order; the string-id
/// overloads resolve through `index_of` and throw on unknown ids. The depth of
/// a node is the length of its shortest directed path from the root, which is
/// the minimum over parents for multi-parent nodes.
class Taxonomy {
 public:
  /// Validates and indexes the graph. Throws `Error(data)` on duplicate ids,
  /// dangling edge endpoints, cycles (including self-loops), or anything other
  /// than exactly one root.
  static Taxonomy build(std::vector<ConceptNode> nodes, const std::vector<Edge>& edges);

  /// Reads the tab-separated edge and node files.
  static Taxonomy load(const std::filesystem::path& edge_file,
                       const std::filesystem::path& node_file);

  std::size_t size() const noexcept { return nodes_.size(); }
  const ConceptNode& node(std::size_t i) const { return nodes_.at(i); }
  const std::vector<ConceptNode>& nodes() const noexcept { return nodes_; }

  std::optional<std::size_t> find(std::string_view id) const;
  std::size_t index_of(std::string_view id) const;

  std::size_t root() const noexcept { return root_; }
  int depth(std::size_t i) const { return depth_.at(i); }
  int depth(std::string_view id) const { return depth(index_of(id)); }
  int max_depth() const noexcept;

  const std::vector<std::size_t>& children(std::size_t i) const { return children_.at(i); }
  const std::vector<std::size_t>& parents(std::size_t i) const { return parents_.at(i); }
  bool is_leaf(std::size_t i) const { return children_.at(i).empty(); }
  std::vector<std::size_t> leaves() const;
  std::vector<Edge> edges() const;

  /// Fewest edges between `m` and `n`, ignoring edge direction.
  int shortest_path(std::size_t m, std::size_t n) const;
  int shortest_path(std::string_view m, std::string_view n) const;

  /// Undirected BFS distances from `source` to every node.
  std::vector<int> distances_from(std::size_t source) const;

  /// `i` plus everything reachable from it along parent->child edges,
  /// in ascending index order.
  std::vector<std::size_t> subtree(std::size_t i) const;
  bool reaches(std::size_t ancestor, std::size_t descendant) const;

  /// Parent on a minimum-depth path from the root (lowest index on ties).
  /// The root has none.
  std::optional<std::size_t> primary_parent(std::size_t i) const;

  /// Ancestor of `i` at depth 1 along primary parents; the root maps to itself.
  std::size_t top_level_ancestor(std::size_t i) const;

 private:
  std::vector<ConceptNode> nodes_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<std::vector<std::size_t>> parents_;
  std::vector<int> depth_;
  std::size_t root_ = 0;
};

enum class LogBase { natural, base10 };

/// Similarity from a path length and the two depths.
double raw_similarity_from(int d_min, int depth_m, int depth_n, LogBase base = LogBase::natural);

/// s(m,n) = -log((d_min(m,n) + 1) / (2 max(depth m, depth n) + 1)).
/// Nonnegative on any single-rooted taxonomy.
double raw_similarity(const Taxonomy& tax, std::size_t m, std::size_t n,
                      LogBase base = LogBase::natural);
double raw_similarity(const Taxonomy& tax, std::string_view m, std::string_view n,
                      LogBase base = LogBase::natural);

}  // namespace reco
