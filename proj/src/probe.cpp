#include "reco/probe.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "reco/error.hpp"
#include "reco/io.hpp"

namespace reco {

Matrix LinearClassifier::logits(const Matrix& features) const {
  if (features.cols() != weights.cols()) fail_data("feature width does not match the classifier");
  return (features * weights.transpose()).rowwise() + bias.transpose();
}

std::vector<int> LinearClassifier::predict(const Matrix& features) const {
  const Matrix s = logits(features);
  std::vector<int> out(static_cast<std::size_t>(s.rows()));
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    int best = 0;
    for (Eigen::Index c = 1; c < s.cols(); ++c) {
      if (s(r, c) > s(r, best)) best = static_cast<int>(c);
    }
    out[r] = best;
  }
  return out;
}

namespace {

struct Eval {
  double value;
  Matrix grad_w;
  Vector grad_b;
};

Eval evaluate_objective(const Matrix& w, const Vector& b, const Matrix& x, const std::vector<int>& y,
                        double l2, bool with_grad) {
  const auto n = x.rows();
  Matrix s = (x * w.transpose()).rowwise() + b.transpose();
  double loss = 0.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    const double top = s.row(r).maxCoeff();
    auto e = (s.row(r).array() - top).exp();
    const double sum = e.sum();
    loss += top + std::log(sum) - s(r, y[r]);
    if (with_grad) {
      s.row(r) = (e / sum).matrix();
      s(r, y[r]) -= 1.0;
    }
  }
  Eval out;
  out.value = loss / static_cast<double>(n) + 0.5 * l2 * w.squaredNorm();
  if (with_grad) {
    out.grad_w = s.transpose() * x / static_cast<double>(n) + l2 * w;
    out.grad_b = s.colwise().sum().transpose() / static_cast<double>(n);
  }
  return out;
}

double dot(const Matrix& a, const Vector& av, const Matrix& b, const Vector& bv) {
  return (a.array() * b.array()).sum() + av.dot(bv);
}

}  // namespace

double probe_objective(const LinearClassifier& clf, const Matrix& features,
                       const std::vector<int>& labels, double l2) {
  return evaluate_objective(clf.weights, clf.bias, features, labels, l2, false).value;
}

LinearClassifier fit_linear_probe(const Matrix& features, const std::vector<int>& labels,
                                  int num_classes, const ProbeOptions& options,
                                  const std::optional<LinearClassifier>& init) {
  const auto n = features.rows();
  const auto d = features.cols();
  if (num_classes < 2) fail_data("linear probe needs at least 2 classes");
  if (n == 0 || static_cast<std::size_t>(n) != labels.size()) fail_data("probe features and labels disagree in length");
  if (!features.allFinite()) fail_data("probe features contain non-finite values");
  for (int l : labels) {
    if (l < 0 || l >= num_classes) fail_data("probe label " + std::to_string(l) + " out of range");
  }

  LinearClassifier clf;
  clf.degenerate = true;
  for (Eigen::Index r = 1; r < n && clf.degenerate; ++r) {
    if (features.row(r) != features.row(0)) clf.degenerate = false;
  }
  if (init) {
    if (init->weights.rows() != num_classes || init->weights.cols() != d) fail_data("probe init has the wrong shape");
    clf.weights = init->weights;
    clf.bias = init->bias;
  } else {
    clf.weights = Matrix::Zero(num_classes, d);
    clf.bias = Vector::Zero(num_classes);
  }

  auto cur = evaluate_objective(clf.weights, clf.bias, features, labels, options.l2, true);
  double step = 1.0;
  int it = 0;
  for (; it < options.max_iter; ++it) {
    const double gnorm2 = dot(cur.grad_w, cur.grad_b, cur.grad_w, cur.grad_b);
    if (std::sqrt(gnorm2) < options.tolerance) break;
    double alpha = step;
    Matrix w_next;
    Vector b_next;
    Eval next;
    for (int tries = 0;; ++tries) {
      w_next = clf.weights - alpha * cur.grad_w;
      b_next = clf.bias - alpha * cur.grad_b;
      next = evaluate_objective(w_next, b_next, features, labels, options.l2, true);
      if (next.value <= cur.value - 1e-4 * alpha * gnorm2) break;
      // Near the optimum value differences fall below rounding; fall back to
      // requiring a smaller gradient at an essentially unchanged value.
      const double flat = 1e-14 * std::max(1.0, std::abs(cur.value));
      if (next.value <= cur.value + flat && dot(next.grad_w, next.grad_b, next.grad_w, next.grad_b) < gnorm2) break;
      alpha *= 0.5;
      if (tries > 60) {
        it = options.max_iter;
        break;
      }
    }
    if (it >= options.max_iter) break;
    // Barzilai-Borwein guess for the next trial step.
    const Matrix sw = w_next - clf.weights;
    const Vector sb = b_next - clf.bias;
    const Matrix yw = next.grad_w - cur.grad_w;
    const Vector yb = next.grad_b - cur.grad_b;
    const double sy = dot(sw, sb, yw, yb);
    const double ss = dot(sw, sb, sw, sb);
    step = sy > 0.0 ? std::clamp(ss / sy, 1e-10, 1e10) : 1.0;
    clf.weights = std::move(w_next);
    clf.bias = std::move(b_next);
    cur = std::move(next);
  }
  clf.iterations = std::min(it, options.max_iter);
  clf.objective = cur.value;
  clf.grad_norm = std::sqrt(dot(cur.grad_w, cur.grad_b, cur.grad_w, cur.grad_b));
  return clf;
}

ProbeResult evaluate(const LinearClassifier& clf, const Matrix& test_features,
                     const std::vector<int>& test_labels, const std::string& realm) {
  if (test_features.rows() == 0) fail_data("empty test set" + (realm.empty() ? "" : " for realm " + realm));
  if (static_cast<std::size_t>(test_features.rows()) != test_labels.size()) {
    fail_data("test features and labels disagree in length");
  }
  const auto pred = clf.predict(test_features);
  ProbeResult r;
  r.realm = realm;
  r.n_test = static_cast<long long>(test_labels.size());
  for (std::size_t i = 0; i < pred.size(); ++i) r.n_correct += pred[i] == test_labels[i];
  r.top1 = static_cast<double>(r.n_correct) / static_cast<double>(r.n_test);
  return r;
}

RelativeReport relative_report(const std::vector<ProbeResult>& candidate,
                               const std::vector<ProbeResult>& baseline) {
  if (candidate.size() != baseline.size()) fail_data("realm mismatch: candidate and baseline cover different realm sets");
  RelativeReport rep;
  double sum = 0.0;
  for (const auto& b : baseline) {
    auto it = std::find_if(candidate.begin(), candidate.end(), [&](const ProbeResult& c) { return c.realm == b.realm; });
    if (it == candidate.end()) fail_data("realm mismatch: '" + b.realm + "' missing from candidate");
    if (b.n_test <= 0 || it->n_test <= 0) fail_data("realm '" + b.realm + "' has no test samples");
    // One rounding: 100 (cc/nc - cb/nb) = 100 (cc nb - cb nc) / (nc nb).
    const double num = 100.0 * static_cast<double>(it->n_correct * b.n_test - b.n_correct * it->n_test);
    const double delta = num / static_cast<double>(it->n_test * b.n_test);
    rep.realms.push_back(b.realm);
    rep.delta_pp.push_back(delta);
    sum += delta;
  }
  rep.average = rep.realms.empty() ? 0.0 : sum / static_cast<double>(rep.realms.size());
  return rep;
}

std::string results_csv(const std::vector<ProbeResult>& results) {
  std::string out = "realm,top1,n_test\n";
  for (const auto& r : results) {
    out += r.realm + "," + io::format_double(r.top1) + "," + std::to_string(r.n_test) + "\n";
  }
  return out;
}

std::vector<ProbeResult> read_results_csv(const std::filesystem::path& path) {
  auto lines = io::read_lines(path);
  if (lines.empty() || io::trim(lines[0]) != "realm,top1,n_test") {
    fail_data(path.string() + ":1: expected header realm,top1,n_test");
  }
  std::vector<ProbeResult> out;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (io::trim(lines[ln]).empty()) continue;
    auto f = io::split(lines[ln], ',');
    const auto loc = path.string() + ":" + std::to_string(ln + 1);
    if (f.size() != 3) fail_data(loc + ": expected realm,top1,n_test");
    ProbeResult r;
    r.realm = f[0];
    r.top1 = io::parse_double(f[1], loc);
    r.n_test = io::parse_int(f[2], loc);
    if (r.n_test <= 0 || r.top1 < 0.0 || r.top1 > 1.0) fail_data(loc + ": top1 must be in [0,1] and n_test positive");
    r.n_correct = std::llround(r.top1 * static_cast<double>(r.n_test));
    out.push_back(std::move(r));
  }
  return out;
}

std::string report_csv(const RelativeReport& report) {
  std::string out = "realm,delta_pp\n";
  for (std::size_t i = 0; i < report.realms.size(); ++i) {
    out += report.realms[i] + "," + io::format_double(report.delta_pp[i]) + "\n";
  }
  out += "AVG," + io::format_double(report.average) + "\n";
  return out;
}

std::string report_svg(const RelativeReport& report, const std::string& title) {
  const int row_h = 22;
  const int label_w = 160;
  const int plot_w = 400;
  const int top = 40;
  const int n = static_cast<int>(report.realms.size()) + 1;
  const int height = top + n * row_h + 20;
  double span = 1.0;
  for (double d : report.delta_pp) span = std::max(span, std::abs(d));
  span = std::max(span, std::abs(report.average));
  const double zero_x = label_w + plot_w / 2.0;
  const double scale = (plot_w / 2.0 - 10.0) / span;

  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return std::string(buf);
  };
  auto esc = [](const std::string& s) {
    std::string o;
    for (char c : s) {
      if (c == '<') o += "&lt;";
      else if (c == '>') o += "&gt;";
      else if (c == '&') o += "&amp;";
      else o += c;
    }
    return o;
  };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(label_w + plot_w + 60) +
                    "\" height=\"" + std::to_string(height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<text x=\"10\" y=\"20\" font-size=\"14\">" + esc(title) + "</text>\n";
  svg += "<line x1=\"" + num(zero_x) + "\" y1=\"" + std::to_string(top - 5) + "\" x2=\"" + num(zero_x) + "\" y2=\"" +
         std::to_string(top + n * row_h) + "\" stroke=\"#333\"/>\n";
  for (int i = 0; i < n; ++i) {
    const bool avg = i == n - 1;
    const double v = avg ? report.average : report.delta_pp[i];
    const std::string label = avg ? "AVG" : report.realms[i];
    const int y = top + i * row_h;
    const double w = std::abs(v) * scale;
    const double x = v >= 0 ? zero_x : zero_x - w;
    svg += "<text x=\"" + std::to_string(label_w - 8) + "\" y=\"" + std::to_string(y + 14) +
           "\" text-anchor=\"end\">" + esc(label) + "</text>\n";
    svg += "<rect x=\"" + num(x) + "\" y=\"" + std::to_string(y + 3) + "\" width=\"" + num(w) +
           "\" height=\"" + std::to_string(row_h - 6) + "\" fill=\"" + (v >= 0 ? "#2b8cbe" : "#e34a33") + "\"/>\n";
    svg += "<text x=\"" + num(v >= 0 ? x + w + 4 : x - 4) + "\" y=\"" + std::to_string(y + 14) + "\" text-anchor=\"" +
           (v >= 0 ? "start" : "end") + "\">" + (v > 0 ? "+" : "") + num(v) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace reco
