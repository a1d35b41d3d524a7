#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "reco/linalg.hpp"
#include "reco/taxonomy.hpp"

namespace reco {

struct SynthSpec {
  int feature_dim = 16;
  int samples_per_class = 100;
  double drift_scale = 1.0;  // std-dev of each parent->child mean displacement
  double noise_scale = 0.5;  // within-class std-dev
  double test_fraction = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class Split { train, test };

const char* to_string(Split s) noexcept;

/// Samples drawn around taxonomy-shaped class means. Classes are the leaves of
/// the taxonomy in node order; `labels` index into `class_ids`.
struct SynthDataset {
  std::vector<std::string> class_ids;
  std::vector<std::string> sample_ids;
  std::vector<int> labels;
  std::vector<std::string> realms;
  std::vector<Split> splits;
  Matrix features;
  /// Generated class means (empty when the dataset was read from disk).
  Matrix class_means;

  std::size_t size() const noexcept { return labels.size(); }
  int feature_dim() const noexcept { return static_cast<int>(features.cols()); }

  std::vector<std::size_t> indices(Split s) const;
  /// Distinct realms in first-appearance order.
  std::vector<std::string> realm_ids() const;

  /// `id,label,realm,split,f0,...` with a one-line header.
  std::string to_csv() const;
  static SynthDataset read_csv(const std::filesystem::path& path);
};

/// Class means follow a Gaussian random walk down the taxonomy (child mean =
/// primary-parent mean + N(0, drift^2 I), root at the origin); samples add
/// N(0, noise^2 I). The first `test_fraction` share of each class's samples
/// (at least one, at most all but one) is the test split. Each sample's realm
/// is its class's depth-1 ancestor. Deterministic per seed.
SynthDataset generate(const Taxonomy& tax, const SynthSpec& spec);

/// Two augmented views per row of `features`, rows 2k and 2k+1 for row k,
/// each with independent N(0, jitter^2 I) noise.
Matrix make_views(const Matrix& features, double jitter, std::mt19937_64& rng);

}  // namespace reco
