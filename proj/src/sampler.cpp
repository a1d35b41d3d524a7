#include "reco/sampler.hpp"

#include <cmath>

#include "reco/error.hpp"
#include "reco/io.hpp"

namespace reco {

namespace {

constexpr std::uint64_t mix(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Matrix acceptance_matrix(const SimilarityTable& table, const std::vector<int>& labels) {
  const auto n = static_cast<Eigen::Index>(labels.size());
  for (int l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= table.size()) {
      fail_data("label " + std::to_string(l) + " has no row in the similarity table");
    }
  }
  Matrix probs = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < n; ++k) {
      if (i != k) probs(i, k) = table.accept_prob(labels[i], labels[k]);
    }
  }
  return probs;
}

double keyed_uniform(std::uint64_t seed, std::uint64_t step, std::uint64_t i, std::uint64_t k) noexcept {
  std::uint64_t h = mix(seed);
  h = mix(h ^ step);
  h = mix(h ^ i);
  h = mix(h ^ k);
  // top 53 bits -> [0,1)
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

NegativeMask draw_mask(const Matrix& probs, const SamplerConfig& config, std::uint64_t step) {
  if (probs.rows() != probs.cols()) fail_data("acceptance matrix must be square");
  const auto n = static_cast<std::size_t>(probs.rows());
  NegativeMask mask(n, config.seed, step);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const double p = probs(i, k);
      if (!(p >= 0.0 && p <= 1.0)) {
        fail_data("acceptance probability " + io::format_double(p) + " outside [0,1] at (" +
                  std::to_string(i) + "," + std::to_string(k) + ")");
      }
      if (i != k && keyed_uniform(config.seed, step, i, k) < p) mask.set(i, k, true);
    }
  }
  return mask;
}

}  // namespace reco
