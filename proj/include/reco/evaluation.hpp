#pragma once

#include <vector>

#include "reco/linalg.hpp"
#include "reco/probe.hpp"
#include "reco/similarity.hpp"
#include "reco/synth.hpp"

namespace reco {

/// Spearman rank correlation with average ranks for ties. Returns 0 when
/// either side is constant.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

/// Mean cosine similarity between samples of class m and class n:
/// entry (m,n) = mean_m . mean_n for unit-norm rows.
Matrix class_cosine_matrix(const Matrix& embeddings, const std::vector<int>& labels, int num_classes);

/// Spearman correlation, over unordered class pairs, between the symmetrized
/// normalized taxonomy similarity and the mean inter-class cosine.
double taxonomy_alignment(const SimilarityTable& table, const Matrix& class_cosines);

/// One linear probe per realm: fit on the realm's train rows of `features`,
/// score on its test rows. Realms with fewer than 2 classes are skipped.
std::vector<ProbeResult> probe_realms(const Matrix& features, const SynthDataset& dataset,
                                      const ProbeOptions& options = {});

}  // namespace reco
