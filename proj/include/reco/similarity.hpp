#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "reco/linalg.hpp"
#include "reco/taxonomy.hpp"

namespace reco {

enum class Normalization {
  /// normalized(m,n) = clamp(raw(m,n) / raw(m,m), 0, 1)
  self_ratio,
  /// Per-anchor min-max rescaling of raw(m,·) over the table's classes,
  /// with the diagonal pinned to 1.
  min_max,
};

Normalization parse_normalization(std::string_view name);
const char* to_string(Normalization n) noexcept;

/// Class-pair similarities over an ordered list of classes. Row m holds
/// anchor m; accept_prob = 1 - normalized is the chance that a candidate of
/// class n is kept as a negative for an anchor of class m.
struct SimilarityTable {
  std::vector<std::string> class_ids;
  Matrix raw;
  Matrix normalized;
  Matrix accept_prob;

  std::size_t size() const noexcept { return class_ids.size(); }
  std::size_t index_of(std::string_view id) const;
};

/// Throws `Error(data)` for unknown ids, duplicate ids, or a class at depth 0
/// (its self-similarity is zero, so it cannot anchor a normalization).
SimilarityTable build_similarity_table(const Taxonomy& tax,
                                       const std::vector<std::string>& class_ids,
                                       Normalization norm = Normalization::self_ratio,
                                       LogBase base = LogBase::natural);

/// Header row of class ids followed by one row of values per class.
std::string matrix_csv(const std::vector<std::string>& ids, const Matrix& values);

}  // namespace reco
