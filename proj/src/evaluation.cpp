#include "reco/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "reco/error.hpp"

namespace reco {

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) fail_data("spearman: length mismatch");
  if (x.size() < 2) return 0.0;
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

Matrix class_cosine_matrix(const Matrix& embeddings, const std::vector<int>& labels, int num_classes) {
  Matrix means = Matrix::Zero(num_classes, embeddings.cols());
  std::vector<int> counts(num_classes, 0);
  for (std::size_t r = 0; r < labels.size(); ++r) {
    means.row(labels[r]) += embeddings.row(static_cast<Eigen::Index>(r));
    ++counts[labels[r]];
  }
  for (int c = 0; c < num_classes; ++c) {
    if (counts[c] == 0) fail_data("class " + std::to_string(c) + " has no samples");
    means.row(c) /= counts[c];
  }
  return means * means.transpose();
}

double taxonomy_alignment(const SimilarityTable& table, const Matrix& class_cosines) {
  const auto k = static_cast<Eigen::Index>(table.size());
  if (class_cosines.rows() != k || class_cosines.cols() != k) fail_data("cosine matrix does not match the table");
  std::vector<double> tax, emb;
  for (Eigen::Index m = 0; m < k; ++m) {
    for (Eigen::Index n = m + 1; n < k; ++n) {
      tax.push_back(0.5 * (table.normalized(m, n) + table.normalized(n, m)));
      emb.push_back(class_cosines(m, n));
    }
  }
  return spearman(tax, emb);
}

std::vector<ProbeResult> probe_realms(const Matrix& features, const SynthDataset& dataset,
                                      const ProbeOptions& options) {
  if (static_cast<std::size_t>(features.rows()) != dataset.size()) fail_data("feature rows do not match the dataset");
  std::vector<ProbeResult> out;
  for (const auto& realm : dataset.realm_ids()) {
    std::map<int, int> local;  // global label -> realm-local label
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      if (dataset.realms[i] == realm) local.emplace(dataset.labels[i], 0);
    }
    if (local.size() < 2) continue;
    int next = 0;
    for (auto& [global, l] : local) l = next++;

    auto gather = [&](Split split, Matrix& x, std::vector<int>& y) {
      std::vector<std::size_t> rows;
      for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (dataset.realms[i] == realm && dataset.splits[i] == split) rows.push_back(i);
      }
      x.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
      y.resize(rows.size());
      for (std::size_t r = 0; r < rows.size(); ++r) {
        x.row(static_cast<Eigen::Index>(r)) = features.row(static_cast<Eigen::Index>(rows[r]));
        y[r] = local.at(dataset.labels[rows[r]]);
      }
    };
    Matrix xtr, xte;
    std::vector<int> ytr, yte;
    gather(Split::train, xtr, ytr);
    gather(Split::test, xte, yte);
    if (xtr.rows() == 0) fail_data("realm '" + realm + "' has no training samples");
    auto clf = fit_linear_probe(xtr, ytr, static_cast<int>(local.size()), options);
    out.push_back(evaluate(clf, xte, yte, realm));
  }
  return out;
}

}  // namespace reco
