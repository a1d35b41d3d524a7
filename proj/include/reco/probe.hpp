#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "reco/linalg.hpp"

namespace reco {

/// Multinomial logistic regression: logits = W x + b.
struct LinearClassifier {
  Matrix weights;  // classes x features
  Vector bias;
  double objective = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  /// Set when every training row is identical, so the features carry no class signal.
  bool degenerate = false;

  int num_classes() const noexcept { return static_cast<int>(weights.rows()); }
  Matrix logits(const Matrix& features) const;
  /// Arg-max per row; ties go to the lowest class index.
  std::vector<int> predict(const Matrix& features) const;
};

struct ProbeOptions {
  double l2 = 1e-4;
  int max_iter = 5000;
  double tolerance = 1e-6;
};

/// Mean cross-entropy plus (l2/2)|W|^2, minimized by full-batch gradient
/// descent with Barzilai-Borwein trial steps and Armijo backtracking.
/// `labels` take values in [0, num_classes). Starts from zero unless
/// `init` is given.
LinearClassifier fit_linear_probe(const Matrix& features, const std::vector<int>& labels,
                                  int num_classes, const ProbeOptions& options = {},
                                  const std::optional<LinearClassifier>& init = std::nullopt);

/// Value of the probe objective at the classifier's parameters.
double probe_objective(const LinearClassifier& clf, const Matrix& features,
                       const std::vector<int>& labels, double l2);

struct ProbeResult {
  std::string realm;
  double top1 = 0.0;
  long long n_test = 0;
  long long n_correct = 0;
};

/// Exact top-1 = correct / n_test. Throws `Error(data)` on an empty test set.
ProbeResult evaluate(const LinearClassifier& clf, const Matrix& test_features,
                     const std::vector<int>& test_labels, const std::string& realm = "");

struct RelativeReport {
  std::vector<std::string> realms;
  std::vector<double> delta_pp;  // candidate - baseline, percentage points
  double average = 0.0;
};

/// Per-realm top-1 difference in percentage points and its arithmetic mean.
/// Realm sets must match exactly (order may differ; the baseline's order is kept).
RelativeReport relative_report(const std::vector<ProbeResult>& candidate,
                               const std::vector<ProbeResult>& baseline);

/// `realm,top1,n_test`
std::string results_csv(const std::vector<ProbeResult>& results);
std::vector<ProbeResult> read_results_csv(const std::filesystem::path& path);

/// `realm,delta_pp` rows plus a closing `AVG` row.
std::string report_csv(const RelativeReport& report);

/// Horizontal bar chart of the per-realm deltas.
std::string report_svg(const RelativeReport& report, const std::string& title);

}  // namespace reco
