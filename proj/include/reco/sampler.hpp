#pragma once

#include <cstdint>
#include <vector>

#include "reco/linalg.hpp"
#include "reco/losses.hpp"
#include "reco/similarity.hpp"

namespace reco {

struct SamplerConfig {
  std::uint64_t seed = 0;
  /// Redraw the mask every optimizer step; otherwise once per epoch.
  bool resample_every_step = true;
};

/// Entry (i,k) = 1 - normalized(label_i, label_k) for k != i, 0 on the diagonal.
/// `labels` index rows of `table`.
Matrix acceptance_matrix(const SimilarityTable& table, const std::vector<int>& labels);

/// Counter-based uniform draw in [0,1): a SplitMix64 finalizer chain over
/// (seed, step, i, k). Any entry can be drawn independently of the others.
double keyed_uniform(std::uint64_t seed, std::uint64_t step, std::uint64_t i, std::uint64_t k) noexcept;

/// One Bernoulli trial per off-diagonal entry: selected iff
/// keyed_uniform(seed, step, i, k) < probs(i,k). Deterministic in
/// (probs, seed, step). Throws `Error(data)` on probabilities outside [0,1].
NegativeMask draw_mask(const Matrix& probs, const SamplerConfig& config, std::uint64_t step);

}  // namespace reco
