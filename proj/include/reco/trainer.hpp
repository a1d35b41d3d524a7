#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "reco/encoder.hpp"
#include "reco/losses.hpp"
#include "reco/similarity.hpp"
#include "reco/synth.hpp"
#include "reco/taxonomy.hpp"

namespace reco {

enum class Objective { info_nce, supcon, paco, reco_supcon, reco_paco };

Objective parse_objective(std::string_view name);
const char* to_string(Objective o) noexcept;
bool uses_centers(Objective o) noexcept;
bool uses_mask(Objective o) noexcept;

struct TrainConfig {
  Objective objective = Objective::supcon;
  double alpha = 1.0;
  double lr_max = 0.1;
  double momentum = 0.9;
  double weight_decay = 0.0;
  double temperature = 0.1;
  int epochs = 50;
  int batch_size = 64;  // views per batch (two per sample), must be even
  int hidden_dim = 32;
  int embed_dim = 8;
  double view_noise = 0.25;  // std-dev of the per-view jitter
  std::uint64_t seed = 0;
  bool resample_every_step = true;
  bool include_positive_in_denominator = true;
  bool mean_over_positives = false;
  Normalization normalization = Normalization::self_ratio;

  void validate() const;
};

/// Cosine decay lr_max * (1 + cos(pi * step / total_steps)) / 2.
/// Throws `Error(config)` unless 0 <= step <= total_steps and total_steps > 0.
double lr_at(const TrainConfig& config, long long step, long long total_steps);

/// Momentum SGD: v <- mu v + g; theta <- theta - lr v.
void momentum_step(Vector& theta, Vector& velocity, const Vector& grad, double lr, double momentum);

/// Gradient w.r.t. the flattened encoder parameters and, for center-based
/// objectives, the centers.
struct BatchGradient {
  double loss = 0.0;
  Vector grad_params;
  Matrix grad_centers;
};

/// Loss of one batch of view pairs and its gradient. The summed loss is
/// divided by the number of anchor-positive terms (the view count for
/// info_nce or when positives are averaged per anchor).
BatchGradient batch_objective(const Encoder& encoder, const Matrix& views,
                              const std::vector<int>& sample_labels, const Matrix& centers,
                              const NegativeMask* mask, const TrainConfig& config);

struct TrainResult {
  Encoder initial;
  Encoder encoder;
  Matrix centers;
  std::vector<double> history;  // per-epoch mean of the normalized batch loss
  long long steps = 0;

  /// `epoch,loss` rows.
  std::string history_csv() const;
};

/// Trains on the dataset's train split. Labels index `dataset.class_ids`,
/// which must all exist in `tax` for the mask-based objectives. Throws
/// `Error(numeric)` naming the epoch if the loss stops being finite.
TrainResult train(const SynthDataset& dataset, const Taxonomy& tax, const TrainConfig& config);

}  // namespace reco
