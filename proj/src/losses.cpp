#include "reco/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "reco/error.hpp"
#include "reco/io.hpp"

namespace reco {

EmbeddingBatch EmbeddingBatch::from_view_pairs(Matrix z, const std::vector<int>& sample_labels) {
  if (static_cast<std::size_t>(z.rows()) != 2 * sample_labels.size()) {
    fail_data("from_view_pairs: expected " + std::to_string(2 * sample_labels.size()) +
              " rows, got " + std::to_string(z.rows()));
  }
  EmbeddingBatch b;
  b.z = std::move(z);
  for (std::size_t k = 0; k < sample_labels.size(); ++k) {
    b.labels.push_back(sample_labels[k]);
    b.labels.push_back(sample_labels[k]);
    b.pair_index.push_back(static_cast<int>(2 * k + 1));
    b.pair_index.push_back(static_cast<int>(2 * k));
  }
  return b;
}

void EmbeddingBatch::validate() const {
  const auto n = size();
  if (labels.size() != n || pair_index.size() != n) {
    fail_data("batch has " + std::to_string(n) + " rows but " + std::to_string(labels.size()) +
              " labels and " + std::to_string(pair_index.size()) + " pair indices");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const int j = pair_index[i];
    if (j < 0 || static_cast<std::size_t>(j) >= n) fail_data("pair_index out of range at " + std::to_string(i));
    if (static_cast<std::size_t>(j) == i) fail_data("pair_index has a fixed point at " + std::to_string(i));
    if (static_cast<std::size_t>(pair_index[j]) != i) fail_data("pair_index is not an involution at " + std::to_string(i));
    if (labels[j] != labels[i]) fail_data("view pair " + std::to_string(i) + "/" + std::to_string(j) + " has different labels");
    if (labels[i] < 0) fail_data("negative class label at " + std::to_string(i));
  }
}

NegativeMask::NegativeMask(std::size_t n, std::uint64_t seed, std::uint64_t step)
    : n_(n), bits_(n * n, 0), seed_(seed), step_(step) {}

NegativeMask NegativeMask::all(std::size_t n) {
  NegativeMask m(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) m.bits_[i * n + k] = i != k;
  }
  return m;
}

void NegativeMask::set(std::size_t i, std::size_t k, bool on) {
  if (i >= n_ || k >= n_) fail_data("mask index out of range");
  bits_[i * n_ + k] = (on && i != k) ? 1 : 0;
}

std::string NegativeMask::to_text() const {
  std::string out;
  for (std::size_t i = 0; i < n_; ++i) {
    out += std::to_string(i) + ":";
    bool first = true;
    for (std::size_t k = 0; k < n_; ++k) {
      if (!selected(i, k)) continue;
      out += first ? " " : ",";
      out += std::to_string(k);
      first = false;
    }
    out += '\n';
  }
  return out;
}

std::string LossResult::per_anchor_csv() const {
  std::string out = "anchor_index,value\n";
  for (std::size_t i = 0; i < per_anchor.size(); ++i) {
    out += std::to_string(i) + "," + io::format_double(per_anchor[i]) + "\n";
  }
  return out;
}

namespace {

// Candidates are the batch rows 0..B-1 followed by the class centers. For each
// anchor the caller lists positives and marks which candidates sit in the
// denominator; every positive contributes
//   lse_{k in D_p}(s_ik) - s_ip,  s_ik = z_i . x_k / tau,
// where D_p is the marked set, plus p itself when `add_positive` is set.
struct AnchorPlan {
  std::vector<int> positives;
  std::vector<std::uint8_t> in_denominator;
  bool add_positive = false;
};

class ContrastEngine {
 public:
  ContrastEngine(const EmbeddingBatch& batch, const Matrix* centers, double temperature,
                 bool mean_over_positives)
      : batch_(batch),
        centers_(centers),
        tau_(temperature),
        mean_(mean_over_positives),
        rows_(static_cast<int>(batch.size())),
        total_(rows_ + (centers ? static_cast<int>(centers->rows()) : 0)) {
    result_.grad_z = Matrix::Zero(batch.z.rows(), batch.z.cols());
    result_.per_anchor.assign(batch.size(), 0.0);
    if (centers) {
      result_.has_centers = true;
      result_.grad_centers = Matrix::Zero(centers->rows(), centers->cols());
    }
    scores_.resize(total_);
    weights_.resize(total_);
  }

  int candidate_count() const { return total_; }

  void anchor(int i, const AnchorPlan& plan) {
    if (plan.positives.empty()) fail_data("anchor " + std::to_string(i) + " has no positive in the batch");
    const auto zi = batch_.z.row(i);
    for (int k = 0; k < total_; ++k) scores_[k] = row(k).dot(zi) / tau_;

    const double w = mean_ ? 1.0 / static_cast<double>(plan.positives.size()) : 1.0;
    std::fill(weights_.begin(), weights_.end(), 0.0);
    double value = 0.0;
    for (int p : plan.positives) {
      auto included = [&](int k) { return plan.in_denominator[k] || (plan.add_positive && k == p); };
      double top = -std::numeric_limits<double>::infinity();
      bool any = false;
      for (int k = 0; k < total_; ++k) {
        if (included(k)) {
          top = std::max(top, scores_[k]);
          any = true;
        }
      }
      if (!any) fail_data("anchor " + std::to_string(i) + " has an empty denominator");
      double sum = 0.0;
      for (int k = 0; k < total_; ++k) {
        if (included(k)) sum += std::exp(scores_[k] - top);
      }
      const double lse = top + std::log(sum);
      value += w * (lse - scores_[p]);
      for (int k = 0; k < total_; ++k) {
        if (included(k)) weights_[k] += w * std::exp(scores_[k] - lse);
      }
      weights_[p] -= w;
    }
    result_.per_anchor[i] = value;

    auto gi = result_.grad_z.row(i);
    for (int k = 0; k < total_; ++k) {
      if (weights_[k] == 0.0) continue;
      const double c = weights_[k] / tau_;
      gi += c * row(k);
      if (k < rows_) {
        result_.grad_z.row(k) += c * zi;
      } else {
        result_.grad_centers.row(k - rows_) += c * zi;
      }
    }
  }

  LossResult finish() {
    double total = 0.0;
    for (double v : result_.per_anchor) total += v;
    result_.value = total;
    return std::move(result_);
  }

 private:
  Eigen::Ref<const Eigen::RowVectorXd> row(int k) const {
    if (k < rows_) return batch_.z.row(k);
    return centers_->row(k - rows_);
  }

  const EmbeddingBatch& batch_;
  const Matrix* centers_;
  double tau_;
  bool mean_;
  int rows_;
  int total_;
  std::vector<double> scores_;
  std::vector<double> weights_;
  LossResult result_;
};

void check_temperature(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) fail_data("temperature must be positive, got " + io::format_double(t));
}

std::vector<int> same_class(const EmbeddingBatch& b, int i) {
  std::vector<int> out;
  for (int k = 0; k < static_cast<int>(b.size()); ++k) {
    if (k != i && b.labels[k] == b.labels[i]) out.push_back(k);
  }
  return out;
}

AnchorPlan all_others(const ContrastEngine& engine, int rows, int i) {
  AnchorPlan plan;
  plan.in_denominator.assign(engine.candidate_count(), 0);
  for (int k = 0; k < rows; ++k) plan.in_denominator[k] = k != i;
  return plan;
}

LossResult supervised(const EmbeddingBatch& batch, const Matrix* centers, double temperature,
                      bool mean_over_positives) {
  batch.validate();
  check_temperature(temperature);
  const int rows = static_cast<int>(batch.size());
  if (centers && centers->rows() > 0) {
    if (centers->cols() != batch.z.cols()) fail_data("center width does not match embedding width");
    for (int l : batch.labels) {
      if (l >= centers->rows()) fail_data("missing class center for label " + std::to_string(l));
    }
  }
  const bool use_centers = centers && centers->rows() > 0;
  ContrastEngine engine(batch, use_centers ? centers : nullptr, temperature, mean_over_positives);
  for (int i = 0; i < rows; ++i) {
    auto plan = all_others(engine, rows, i);
    plan.positives = same_class(batch, i);
    if (use_centers) {
      for (int c = rows; c < engine.candidate_count(); ++c) plan.in_denominator[c] = 1;
      plan.positives.push_back(rows + batch.labels[i]);
    }
    engine.anchor(i, plan);
  }
  auto result = engine.finish();
  if (centers && !use_centers) {
    result.has_centers = true;
    result.grad_centers = Matrix::Zero(0, batch.z.cols());
  }
  return result;
}

}  // namespace

LossResult info_nce(const EmbeddingBatch& batch, double temperature) {
  batch.validate();
  check_temperature(temperature);
  const int rows = static_cast<int>(batch.size());
  if (rows < 4) fail_data("info_nce needs at least 4 views, got " + std::to_string(rows));
  ContrastEngine engine(batch, nullptr, temperature, false);
  for (int i = 0; i < rows; ++i) {
    auto plan = all_others(engine, rows, i);
    plan.positives = {batch.pair_index[i]};
    engine.anchor(i, plan);
  }
  return engine.finish();
}

LossResult supcon(const EmbeddingBatch& batch, double temperature, bool mean_over_positives) {
  return supervised(batch, nullptr, temperature, mean_over_positives);
}

LossResult paco(const EmbeddingBatch& batch, const Matrix& centers, double temperature,
                bool mean_over_positives) {
  return supervised(batch, &centers, temperature, mean_over_positives);
}

LossResult reco_loss(const EmbeddingBatch& batch, const NegativeMask& mask, double temperature,
                     bool include_positive_in_denominator, bool mean_over_positives) {
  batch.validate();
  check_temperature(temperature);
  const int rows = static_cast<int>(batch.size());
  if (mask.size() != batch.size()) {
    fail_data("mask is " + std::to_string(mask.size()) + "x" + std::to_string(mask.size()) +
              " but the batch has " + std::to_string(rows) + " views");
  }
  ContrastEngine engine(batch, nullptr, temperature, mean_over_positives);
  for (int i = 0; i < rows; ++i) {
    AnchorPlan plan;
    plan.in_denominator.assign(rows, 0);
    for (int k = 0; k < rows; ++k) plan.in_denominator[k] = mask.selected(i, k);
    plan.positives = same_class(batch, i);
    plan.add_positive = include_positive_in_denominator;
    engine.anchor(i, plan);
  }
  return engine.finish();
}

LossResult combined(const EmbeddingBatch& batch, const Matrix& centers, const NegativeMask& mask,
                    const CombinedOptions& options) {
  LossResult base = options.base == BaseObjective::supcon
                        ? supcon(batch, options.temperature, options.mean_over_positives)
                        : paco(batch, centers, options.temperature, options.mean_over_positives);
  const LossResult rel = reco_loss(batch, mask, options.temperature,
                                   options.include_positive_in_denominator,
                                   options.mean_over_positives);
  const double a = options.alpha;
  base.value += a * rel.value;
  for (std::size_t i = 0; i < base.per_anchor.size(); ++i) base.per_anchor[i] += a * rel.per_anchor[i];
  base.grad_z += a * rel.grad_z;
  return base;
}

}  // namespace reco
