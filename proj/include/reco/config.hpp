#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "reco/probe.hpp"
#include "reco/synth.hpp"
#include "reco/trainer.hpp"

namespace reco {

struct CurateConfig {
  long long min_images = 200;
  std::size_t min_classes = 20;
  int max_hamming = 0;
};

/// Every tunable of a pipeline run. Text form:
///
///   # comment
///   seed = 7
///   [synth]
///   feature_dim = 16
///   [train]
///   objective = reco_supcon
///
/// Sections are synth, train, probe, curate. Every key has a default; unknown
/// sections or keys are rejected with file:line. `seed` is the single source
/// of randomness and feeds both data generation and training.
struct RunConfig {
  std::uint64_t seed = 0;
  SynthSpec synth;
  TrainConfig train;
  ProbeOptions probe;
  CurateConfig curate;

  static RunConfig parse(std::string_view text, const std::string& source = "<config>");
  static RunConfig load(const std::filesystem::path& path);

  void set_seed(std::uint64_t s);

  /// Effective configuration, every key written out; parse(to_text()) round-trips.
  std::string to_text() const;
};

}  // namespace reco
