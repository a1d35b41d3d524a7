#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "reco/curation.hpp"
#include "reco/dedup.hpp"
#include "reco/io.hpp"
#include "reco/linalg.hpp"
#include "reco/taxonomy.hpp"

namespace reco::testkit {

// Single-rooted DAG on n nodes. Node i > 0 hangs under a random earlier node,
// and with probability extra_parent under a second earlier node as well.
inline Taxonomy random_taxonomy(std::mt19937_64& rng, int n, double extra_parent = 0.2) {
  std::vector<ConceptNode> nodes;
  std::vector<Edge> edges;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<long long> images(0, 400);
  for (int i = 0; i < n; ++i) {
    ConceptNode c;
    c.id = "n" + std::to_string(i);
    c.name = c.id;
    c.image_count = images(rng);
    c.offensive = u(rng) < 0.1;
    c.non_visual = u(rng) < 0.1;
    nodes.push_back(c);
    if (i == 0) continue;
    std::uniform_int_distribution<int> earlier(0, i - 1);
    const int p = earlier(rng);
    edges.emplace_back("n" + std::to_string(p), c.id);
    if (i > 1 && u(rng) < extra_parent) {
      const int q = earlier(rng);
      if (q != p) edges.emplace_back("n" + std::to_string(q), c.id);
    }
  }
  // Leaves are the classes.
  std::vector<char> has_child(n, 0);
  for (const auto& e : edges) has_child[std::stoi(e.first.substr(1))] = 1;
  for (int i = 0; i < n; ++i) nodes[i].is_class = !has_child[i];
  return Taxonomy::build(nodes, edges);
}

// All-pairs undirected hop distance, Floyd-Warshall.
inline std::vector<std::vector<int>> floyd_warshall(const Taxonomy& tax) {
  const std::size_t n = tax.size();
  const int inf = 1 << 28;
  std::vector<std::vector<int>> d(n, std::vector<int>(n, inf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (auto c : tax.children(i)) d[i][c] = d[c][i] = 1;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

// Straight reading of the rules: first failing rule wins.
inline std::vector<std::pair<std::string, int>> filter_oracle(const Taxonomy& t, long long min_images) {
  std::vector<std::pair<std::string, int>> out;
  for (const auto& n : t.nodes()) {
    bool has_child = false;
    for (const auto& e : t.edges()) has_child = has_child || e.first == n.id;
    int rule = 0;
    if (n.offensive) rule = 1;
    else if (n.non_visual) rule = 2;
    else if (has_child) rule = 3;
    else if (n.image_count < min_images) rule = 4;
    out.emplace_back(n.id, rule);
  }
  return out;
}

inline bool descends(const Taxonomy& t, const std::string& from, const std::string& to) {
  if (from == to) return true;
  for (const auto& e : t.edges()) {
    if (e.first == from && descends(t, e.second, to)) return true;
  }
  return false;
}

inline std::map<std::string, RealmStatus> realms_oracle(const Taxonomy& t, const std::vector<std::string>& valid,
                                                 const std::vector<std::string>& cands,
                                                 const std::vector<std::string>& excluded, std::size_t min) {
  std::map<std::string, std::size_t> count;
  for (const auto& c : cands) {
    count[c] = 0;
    for (const auto& v : valid) count[c] += descends(t, c, v) ? 1 : 0;
  }
  std::map<std::string, RealmStatus> out;
  for (const auto& c : cands) {
    if (count[c] < min) {
      out[c] = RealmStatus::rejected_too_small;
      continue;
    }
    bool covered = false;
    for (const auto& o : cands) covered = covered || (o != c && count[o] >= min && descends(t, o, c));
    if (covered) out[c] = RealmStatus::rejected_covered;
    else if (std::find(excluded.begin(), excluded.end(), c) != excluded.end()) out[c] = RealmStatus::rejected_excluded;
    else out[c] = RealmStatus::selected;
  }
  return out;
}

struct PlantedCorpus {
  std::filesystem::path candidates;  // id,path manifest
  std::filesystem::path references;
  std::set<std::string> planted;
  std::size_t total = 0;
};

// 100 noise-image candidates, 7 of them byte-identical copies of references.
inline PlantedCorpus planted_corpus(const std::filesystem::path& dir, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  auto noise = [&](int channels) {
    Image img{24, 20, channels, std::vector<std::uint8_t>(24 * 20 * channels)};
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng() & 0xff);
    return img;
  };
  PlantedCorpus out;
  std::string refs = "id,path\n", cands = "id,path\n";
  std::vector<Image> ref_images;
  for (int i = 0; i < 30; ++i) {
    ref_images.push_back(noise(i % 2 ? 3 : 1));
    const auto id = "ref" + std::to_string(i);
    io::write_file_atomic(dir / (id + ".pnm"), encode_pnm(ref_images.back()));
    refs += id + "," + id + ".pnm\n";
  }
  for (int i = 0; i < 100; ++i) {
    const std::string id = "cand" + std::to_string(i);
    if (i % 14 == 3) {
      io::write_file_atomic(dir / (id + ".pnm"), encode_pnm(ref_images[i % 30]));
      out.planted.insert(id);
    } else {
      io::write_file_atomic(dir / (id + ".pnm"), encode_pnm(noise(1)));
    }
    cands += id + "," + id + ".pnm\n";
  }
  out.total = 100;
  out.candidates = dir / "candidates.csv";
  out.references = dir / "references.csv";
  io::write_file_atomic(out.candidates, cands);
  io::write_file_atomic(out.references, refs);
  return out;
}

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = g(rng);
  return m;
}

inline Matrix random_unit_rows(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix m = random_matrix(rng, rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) m.row(i).normalize();
  return m;
}

inline Matrix numeric_gradient(const std::function<double(const Matrix&)>& f, Matrix x, double h = 1e-5) {
  Matrix g(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double keep = x(i, j);
      x(i, j) = keep + h;
      const double up = f(x);
      x(i, j) = keep - h;
      const double down = f(x);
      x(i, j) = keep;
      g(i, j) = (up - down) / (2.0 * h);
    }
  }
  return g;
}

inline double relative_error(const Matrix& analytic, const Matrix& numeric) {
  const double scale = std::max({analytic.norm(), numeric.norm(), 1e-12});
  return (analytic - numeric).norm() / scale;
}

inline bool bitwise_equal(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return std::equal(a.data(), a.data() + a.size(), b.data());
}

}  // namespace reco::testkit
