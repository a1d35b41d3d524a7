#include "reco/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "reco/error.hpp"
#include "reco/io.hpp"

namespace reco {

void SynthSpec::validate() const {
  if (feature_dim < 2) fail_config("synth feature_dim must be >= 2");
  if (samples_per_class < 2) fail_config("synth samples_per_class must be >= 2 (train and test)");
  if (!(drift_scale > 0.0)) fail_config("synth drift_scale must be > 0");
  if (!(noise_scale > 0.0)) fail_config("synth noise_scale must be > 0");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) fail_config("synth test_fraction must be in (0,1)");
}

const char* to_string(Split s) noexcept { return s == Split::train ? "train" : "test"; }

std::vector<std::size_t> SynthDataset::indices(Split s) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < splits.size(); ++i) {
    if (splits[i] == s) out.push_back(i);
  }
  return out;
}

std::vector<std::string> SynthDataset::realm_ids() const {
  std::vector<std::string> out;
  for (const auto& r : realms) {
    if (std::find(out.begin(), out.end(), r) == out.end()) out.push_back(r);
  }
  return out;
}

std::string SynthDataset::to_csv() const {
  std::string out = "id,label,realm,split";
  for (int d = 0; d < feature_dim(); ++d) out += ",f" + std::to_string(d);
  out += '\n';
  for (std::size_t i = 0; i < size(); ++i) {
    out += sample_ids[i] + "," + class_ids[labels[i]] + "," + realms[i] + "," + to_string(splits[i]);
    for (int d = 0; d < feature_dim(); ++d) {
      out += ',';
      out += io::format_double(features(static_cast<Eigen::Index>(i), d));
    }
    out += '\n';
  }
  return out;
}

SynthDataset SynthDataset::read_csv(const std::filesystem::path& path) {
  auto lines = io::read_lines(path);
  if (lines.empty()) fail_data(path.string() + ": empty dataset file");
  auto header = io::split(lines[0], ',');
  if (header.size() < 5 || header[0] != "id" || header[1] != "label" || header[2] != "realm" ||
      header[3] != "split") {
    fail_data(path.string() + ":1: expected header id,label,realm,split,f0,...");
  }
  const auto dim = header.size() - 4;
  SynthDataset ds;
  std::vector<std::vector<double>> rows;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (io::trim(lines[ln]).empty()) continue;
    auto f = io::split(lines[ln], ',');
    const auto loc = path.string() + ":" + std::to_string(ln + 1);
    if (f.size() != header.size()) fail_data(loc + ": expected " + std::to_string(header.size()) + " fields");
    ds.sample_ids.push_back(f[0]);
    auto it = std::find(ds.class_ids.begin(), ds.class_ids.end(), f[1]);
    if (it == ds.class_ids.end()) {
      ds.class_ids.push_back(f[1]);
      it = ds.class_ids.end() - 1;
    }
    ds.labels.push_back(static_cast<int>(it - ds.class_ids.begin()));
    ds.realms.push_back(f[2]);
    if (f[3] == "train") {
      ds.splits.push_back(Split::train);
    } else if (f[3] == "test") {
      ds.splits.push_back(Split::test);
    } else {
      fail_data(loc + ": split must be train or test");
    }
    std::vector<double> row(dim);
    for (std::size_t d = 0; d < dim; ++d) row[d] = io::parse_double(f[4 + d], loc);
    rows.push_back(std::move(row));
  }
  ds.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t d = 0; d < dim; ++d) ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = rows[i][d];
  }
  return ds;
}

SynthDataset generate(const Taxonomy& tax, const SynthSpec& spec) {
  spec.validate();
  auto leaves = tax.leaves();
  if (leaves.size() < 2) fail_data("degenerate taxonomy: need at least 2 leaf classes, found " + std::to_string(leaves.size()));

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int dim = spec.feature_dim;

  // Walk means down the tree in (depth, index) order so every parent is
  // placed before its children.
  std::vector<std::size_t> order(tax.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return tax.depth(a) < tax.depth(b); });
  Matrix means = Matrix::Zero(static_cast<Eigen::Index>(tax.size()), dim);
  for (auto node : order) {
    auto parent = tax.primary_parent(node);
    if (!parent) continue;
    for (int d = 0; d < dim; ++d) {
      means(node, d) = means(*parent, d) + spec.drift_scale * gauss(rng);
    }
  }

  SynthDataset ds;
  const int per_class = spec.samples_per_class;
  const int n_test = std::clamp(static_cast<int>(std::lround(per_class * spec.test_fraction)), 1, per_class - 1);
  ds.class_means.resize(static_cast<Eigen::Index>(leaves.size()), dim);
  ds.features.resize(static_cast<Eigen::Index>(leaves.size()) * per_class, dim);
  Eigen::Index row = 0;
  for (std::size_t c = 0; c < leaves.size(); ++c) {
    const auto node = leaves[c];
    ds.class_ids.push_back(tax.node(node).id);
    ds.class_means.row(static_cast<Eigen::Index>(c)) = means.row(static_cast<Eigen::Index>(node));
    const auto realm = tax.node(tax.top_level_ancestor(node)).id;
    for (int s = 0; s < per_class; ++s, ++row) {
      for (int d = 0; d < dim; ++d) {
        ds.features(row, d) = means(node, d) + spec.noise_scale * gauss(rng);
      }
      ds.sample_ids.push_back(tax.node(node).id + "_" + std::to_string(s));
      ds.labels.push_back(static_cast<int>(c));
      ds.realms.push_back(realm);
      ds.splits.push_back(s < n_test ? Split::test : Split::train);
    }
  }
  return ds;
}

Matrix make_views(const Matrix& features, double jitter, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix views(features.rows() * 2, features.cols());
  for (Eigen::Index k = 0; k < features.rows(); ++k) {
    for (int v = 0; v < 2; ++v) {
      for (Eigen::Index d = 0; d < features.cols(); ++d) {
        views(2 * k + v, d) = features(k, d) + jitter * gauss(rng);
      }
    }
  }
  return views;
}

}  // namespace reco
