#include "reco/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "reco/error.hpp"
#include "reco/io.hpp"

namespace reco {

Normalization parse_normalization(std::string_view name) {
  if (name == "self_ratio") return Normalization::self_ratio;
  if (name == "min_max") return Normalization::min_max;
  fail_config("unknown normalization '" + std::string(name) + "' (expected self_ratio|min_max)");
}

const char* to_string(Normalization n) noexcept {
  return n == Normalization::self_ratio ? "self_ratio" : "min_max";
}

std::size_t SimilarityTable::index_of(std::string_view id) const {
  auto it = std::find(class_ids.begin(), class_ids.end(), id);
  if (it == class_ids.end()) fail_data("class '" + std::string(id) + "' is not in the similarity table");
  return static_cast<std::size_t>(it - class_ids.begin());
}

SimilarityTable build_similarity_table(const Taxonomy& tax,
                                       const std::vector<std::string>& class_ids,
                                       Normalization norm, LogBase base) {
  const auto k = class_ids.size();
  std::vector<std::size_t> idx;
  idx.reserve(k);
  std::unordered_set<std::string> seen;
  for (const auto& id : class_ids) {
    if (!seen.insert(id).second) fail_data("duplicate class id '" + id + "'");
    auto i = tax.index_of(id);
    if (tax.depth(i) == 0) {
      fail_data("degenerate anchor: class '" + id + "' is the root (depth 0, zero self-similarity)");
    }
    idx.push_back(i);
  }

  SimilarityTable t;
  t.class_ids = class_ids;
  t.raw.resize(k, k);
  for (std::size_t a = 0; a < k; ++a) {
    auto dist = tax.distances_from(idx[a]);
    for (std::size_t b = 0; b < k; ++b) {
      t.raw(a, b) = raw_similarity_from(dist[idx[b]], tax.depth(idx[a]), tax.depth(idx[b]), base);
    }
  }

  t.normalized.resize(k, k);
  for (std::size_t a = 0; a < k; ++a) {
    if (norm == Normalization::self_ratio) {
      const double self = t.raw(a, a);
      for (std::size_t b = 0; b < k; ++b) {
        t.normalized(a, b) = std::clamp(t.raw(a, b) / self, 0.0, 1.0);
      }
    } else {
      const double lo = t.raw.row(a).minCoeff();
      const double hi = t.raw.row(a).maxCoeff();
      for (std::size_t b = 0; b < k; ++b) {
        t.normalized(a, b) = hi > lo ? std::clamp((t.raw(a, b) - lo) / (hi - lo), 0.0, 1.0) : 1.0;
      }
    }
    t.normalized(a, a) = 1.0;
  }
  t.accept_prob = (1.0 - t.normalized.array()).matrix();
  return t;
}

std::string matrix_csv(const std::vector<std::string>& ids, const Matrix& values) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ',';
    out += ids[i];
  }
  out += '\n';
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      if (c) out += ',';
      out += io::format_double(values(r, c));
    }
    out += '\n';
  }
  return out;
}

}  // namespace reco
