#include "reco/taxonomy.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

#include "reco/error.hpp"
#include "reco/io.hpp"

namespace reco {

namespace {

bool skip_line(std::string_view line) {
  auto t = io::trim(line);
  return t.empty() || t.front() == '#';
}

std::string where(const std::filesystem::path& file, std::size_t line_no) {
  return file.string() + ":" + std::to_string(line_no);
}

}  // namespace

Taxonomy Taxonomy::build(std::vector<ConceptNode> nodes, const std::vector<Edge>& edges) {
  Taxonomy t;
  t.nodes_ = std::move(nodes);
  if (t.nodes_.empty()) fail_data("taxonomy has no nodes");
  for (std::size_t i = 0; i < t.nodes_.size(); ++i) {
    const auto& n = t.nodes_[i];
    if (n.id.empty()) fail_data("empty concept id");
    if (n.image_count < 0) fail_data("negative image_count for '" + n.id + "'");
    if (!t.index_.emplace(n.id, i).second) fail_data("duplicate concept id '" + n.id + "'");
  }

  const std::size_t count = t.nodes_.size();
  t.children_.assign(count, {});
  t.parents_.assign(count, {});
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& [parent, child] : edges) {
    auto p = t.find(parent);
    auto c = t.find(child);
    if (!p) fail_data("dangling edge endpoint '" + parent + "' in edge " + parent + "->" + child);
    if (!c) fail_data("dangling edge endpoint '" + child + "' in edge " + parent + "->" + child);
    if (*p == *c) fail_data("cycle detected: self-loop on '" + parent + "'");
    if (!seen.emplace(*p, *c).second) continue;
    t.children_[*p].push_back(*c);
    t.parents_[*c].push_back(*p);
  }
  for (auto& ch : t.children_) std::sort(ch.begin(), ch.end());
  for (auto& pa : t.parents_) std::sort(pa.begin(), pa.end());

  // Kahn's algorithm: anything left unvisited sits on a cycle.
  std::vector<std::size_t> indegree(count);
  std::vector<std::size_t> roots;
  for (std::size_t i = 0; i < count; ++i) {
    indegree[i] = t.parents_[i].size();
    if (indegree[i] == 0) roots.push_back(i);
  }
  std::deque<std::size_t> queue(roots.begin(), roots.end());
  std::size_t visited = 0;
  while (!queue.empty()) {
    auto u = queue.front();
    queue.pop_front();
    ++visited;
    for (auto v : t.children_[u]) {
      if (--indegree[v] == 0) queue.push_back(v);
    }
  }
  if (visited != count) {
    for (std::size_t i = 0; i < count; ++i) {
      if (indegree[i] != 0) fail_data("cycle detected through '" + t.nodes_[i].id + "'");
    }
  }
  if (roots.size() != 1) {
    std::string msg = "taxonomy must have exactly one root, found " + std::to_string(roots.size());
    for (std::size_t k = 0; k < roots.size() && k < 5; ++k) msg += (k ? ", " : ": ") + t.nodes_[roots[k]].id;
    fail_data(msg);
  }
  t.root_ = roots.front();

  t.depth_.assign(count, -1);
  t.depth_[t.root_] = 0;
  std::deque<std::size_t> bfs{t.root_};
  while (!bfs.empty()) {
    auto u = bfs.front();
    bfs.pop_front();
    for (auto v : t.children_[u]) {
      if (t.depth_[v] < 0) {
        t.depth_[v] = t.depth_[u] + 1;
        bfs.push_back(v);
      }
    }
  }
  return t;
}

Taxonomy Taxonomy::load(const std::filesystem::path& edge_file,
                        const std::filesystem::path& node_file) {
  std::vector<ConceptNode> nodes;
  auto node_lines = io::read_lines(node_file);
  for (std::size_t ln = 0; ln < node_lines.size(); ++ln) {
    const auto& line = node_lines[ln];
    if (skip_line(line)) continue;
    auto f = io::split(line, '\t');
    if (f.size() != 5) {
      fail_data(where(node_file, ln + 1) + ": expected 5 tab-separated fields, got " +
                std::to_string(f.size()));
    }
    ConceptNode n;
    n.id = std::string(io::trim(f[0]));
    n.name = f[1];
    auto cls = io::trim(f[2]);
    if (cls != "0" && cls != "1") fail_data(where(node_file, ln + 1) + ": is_class must be 0 or 1");
    n.is_class = cls == "1";
    n.image_count = io::parse_int(f[3], where(node_file, ln + 1) + " image_count");
    auto flags = io::trim(f[4]);
    if (flags != "-") {
      for (const auto& flag : io::split(flags, ',')) {
        auto name = io::trim(flag);
        if (name == "offensive") {
          n.offensive = true;
        } else if (name == "non_visual") {
          n.non_visual = true;
        } else {
          fail_data(where(node_file, ln + 1) + ": unknown flag '" + std::string(name) + "'");
        }
      }
    }
    nodes.push_back(std::move(n));
  }

  std::vector<Edge> edges;
  auto edge_lines = io::read_lines(edge_file);
  for (std::size_t ln = 0; ln < edge_lines.size(); ++ln) {
    const auto& line = edge_lines[ln];
    if (skip_line(line)) continue;
    auto f = io::split(line, '\t');
    if (f.size() != 2) {
      fail_data(where(edge_file, ln + 1) + ": expected parent<TAB>child");
    }
    edges.emplace_back(std::string(io::trim(f[0])), std::string(io::trim(f[1])));
  }
  return build(std::move(nodes), edges);
}

std::optional<std::size_t> Taxonomy::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Taxonomy::index_of(std::string_view id) const {
  auto i = find(id);
  if (!i) fail_data("unknown concept id '" + std::string(id) + "'");
  return *i;
}

int Taxonomy::max_depth() const noexcept {
  return depth_.empty() ? 0 : *std::max_element(depth_.begin(), depth_.end());
}

std::vector<std::size_t> Taxonomy::leaves() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < size(); ++i) {
    if (is_leaf(i)) out.push_back(i);
  }
  return out;
}

std::vector<Edge> Taxonomy::edges() const {
  std::vector<Edge> out;
  for (std::size_t p = 0; p < size(); ++p) {
    for (auto c : children_[p]) out.emplace_back(nodes_[p].id, nodes_[c].id);
  }
  return out;
}

std::vector<int> Taxonomy::distances_from(std::size_t source) const {
  std::vector<int> dist(size(), -1);
  dist.at(source) = 0;
  std::deque<std::size_t> queue{source};
  while (!queue.empty()) {
    auto u = queue.front();
    queue.pop_front();
    auto relax = [&](std::size_t v) {
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    };
    for (auto v : parents_[u]) relax(v);
    for (auto v : children_[u]) relax(v);
  }
  return dist;
}

int Taxonomy::shortest_path(std::size_t m, std::size_t n) const {
  if (m >= size() || n >= size()) fail_data("node index out of range");
  if (m == n) return 0;
  return distances_from(m)[n];
}

int Taxonomy::shortest_path(std::string_view m, std::string_view n) const {
  return shortest_path(index_of(m), index_of(n));
}

std::vector<std::size_t> Taxonomy::subtree(std::size_t i) const {
  std::vector<char> mark(size(), 0);
  std::vector<std::size_t> stack{i};
  mark.at(i) = 1;
  while (!stack.empty()) {
    auto u = stack.back();
    stack.pop_back();
    for (auto v : children_[u]) {
      if (!mark[v]) {
        mark[v] = 1;
        stack.push_back(v);
      }
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < size(); ++k) {
    if (mark[k]) out.push_back(k);
  }
  return out;
}

bool Taxonomy::reaches(std::size_t ancestor, std::size_t descendant) const {
  auto sub = subtree(ancestor);
  return std::binary_search(sub.begin(), sub.end(), descendant);
}

std::optional<std::size_t> Taxonomy::primary_parent(std::size_t i) const {
  for (auto p : parents_.at(i)) {
    if (depth_[p] + 1 == depth_[i]) return p;
  }
  return std::nullopt;
}

std::size_t Taxonomy::top_level_ancestor(std::size_t i) const {
  while (depth_.at(i) > 1) i = *primary_parent(i);
  return i;
}

double raw_similarity_from(int d_min, int depth_m, int depth_n, LogBase base) {
  const double ratio = (d_min + 1.0) / (2.0 * std::max(depth_m, depth_n) + 1.0);
  return base == LogBase::natural ? -std::log(ratio) : -std::log10(ratio);
}

double raw_similarity(const Taxonomy& tax, std::size_t m, std::size_t n, LogBase base) {
  return raw_similarity_from(tax.shortest_path(m, n), tax.depth(m), tax.depth(n), base);
}

double raw_similarity(const Taxonomy& tax, std::string_view m, std::string_view n, LogBase base) {
  return raw_similarity(tax, tax.index_of(m), tax.index_of(n), base);
}

}  // namespace reco
