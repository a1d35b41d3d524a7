#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "reco/linalg.hpp"

namespace reco {

/// A 2N-view batch. Row i is the embedding of view i, `labels[i]` its class
/// index and `pair_index[i]` the other view of the same source sample.
///
/// The losses accept rows of any norm so their gradients can be checked by
/// finite differences; the encoder is what puts embeddings on the sphere.
struct EmbeddingBatch {
  Matrix z;
  std::vector<int> labels;
  std::vector<int> pair_index;

  /// Views 2k and 2k+1 come from sample k and share `sample_labels[k]`.
  static EmbeddingBatch from_view_pairs(Matrix z, const std::vector<int>& sample_labels);

  std::size_t size() const noexcept { return static_cast<std::size_t>(z.rows()); }

  /// Shape, label, and pairing checks. Throws `Error(data)`.
  void validate() const;
};

/// Per-anchor selection of negatives. `selected(i, k)` means candidate k
/// enters anchor i's denominator. The diagonal is always false.
class NegativeMask {
 public:
  NegativeMask() = default;
  explicit NegativeMask(std::size_t n, std::uint64_t seed = 0, std::uint64_t step = 0);

  /// Every off-diagonal entry selected.
  static NegativeMask all(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  bool selected(std::size_t i, std::size_t k) const { return bits_[i * n_ + k] != 0; }
  void set(std::size_t i, std::size_t k, bool on);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t step() const noexcept { return step_; }

  /// One line per anchor: `i: k1,k2,...`.
  std::string to_text() const;

  bool operator==(const NegativeMask& other) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> bits_;
  std::uint64_t seed_ = 0;
  std::uint64_t step_ = 0;
};

struct LossResult {
  double value = 0.0;
  std::vector<double> per_anchor;
  Matrix grad_z;
  /// Present only for objectives with class centers.
  Matrix grad_centers;
  bool has_centers = false;

  /// `anchor_index,value` rows.
  std::string per_anchor_csv() const;
};

/// InfoNCE: the sibling view is the only positive, every other view
/// is in the denominator.
LossResult info_nce(const EmbeddingBatch& batch, double temperature = 1.0);

/// Supervised contrastive loss. Plain sum over positives unless
/// `mean_over_positives`, which divides each anchor's sum by |P(i)|.
LossResult supcon(const EmbeddingBatch& batch, double temperature = 1.0,
                  bool mean_over_positives = false);

/// Parametric contrastive loss: the anchor's class center joins the positives
/// and all centers join the denominator. An empty `centers` matrix reduces to
/// supcon; otherwise it needs one row per class index used in the batch.
LossResult paco(const EmbeddingBatch& batch, const Matrix& centers, double temperature = 1.0,
                bool mean_over_positives = false);

/// Relational contrastive loss: supcon positives against the negatives the
/// mask selected. With `include_positive_in_denominator` the current
/// positive's own term is added to a denominator that lacks it, so every
/// log-ratio is a probability; without it the denominator is exactly the
/// selected set and must be non-empty.
LossResult reco_loss(const EmbeddingBatch& batch, const NegativeMask& mask,
                     double temperature = 1.0, bool include_positive_in_denominator = true,
                     bool mean_over_positives = false);

enum class BaseObjective { supcon, paco };

struct CombinedOptions {
  BaseObjective base = BaseObjective::supcon;
  double alpha = 1.0;
  double temperature = 1.0;
  bool include_positive_in_denominator = true;
  bool mean_over_positives = false;
};

/// base + alpha * reco, with gradients summed the same way.
LossResult combined(const EmbeddingBatch& batch, const Matrix& centers, const NegativeMask& mask,
                    const CombinedOptions& options);

}  // namespace reco
