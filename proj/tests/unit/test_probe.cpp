#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <random>

#include "reco/error.hpp"
#include "reco/evaluation.hpp"
#include "reco/io.hpp"
#include "reco/probe.hpp"
#include "support.hpp"

using namespace reco;

namespace {

const std::filesystem::path kFixtures = RECO_FIXTURE_DIR;

void two_blobs(std::mt19937_64& rng, int per_class, Matrix& x, std::vector<int>& y) {
  std::normal_distribution<double> g(0.0, 1.0);
  x.resize(2 * per_class, 2);
  y.resize(2 * per_class);
  for (int i = 0; i < 2 * per_class; ++i) {
    const int c = i % 2;
    y[i] = c;
    x(i, 0) = (c ? 6.0 : -6.0) + g(rng);
    x(i, 1) = g(rng);
  }
}

ProbeResult result(const std::string& realm, long long correct, long long n) {
  return {realm, static_cast<double>(correct) / static_cast<double>(n), n, correct};
}

}  // namespace

TEST(Probe, SeparableBlobsAreLearned) {
  std::mt19937_64 rng(1);
  Matrix x;
  std::vector<int> y;
  two_blobs(rng, 200, x, y);
  const auto clf = fit_linear_probe(x, y, 2);
  EXPECT_GE(evaluate(clf, x, y).top1, 0.99);
  EXPECT_LT(clf.grad_norm, 1e-6);
  EXPECT_FALSE(clf.degenerate);
}

TEST(Probe, ShuffledLabelsStayAtChance) {
  std::mt19937_64 rng(2);
  const int k = 4, n = 2000;
  const Matrix xtr = testkit::random_matrix(rng, n, 6);
  const Matrix xte = testkit::random_matrix(rng, n, 6);
  std::vector<int> ytr(n), yte(n);
  for (auto& l : ytr) l = static_cast<int>(rng() % k);
  for (auto& l : yte) l = static_cast<int>(rng() % k);
  const auto r = evaluate(fit_linear_probe(xtr, ytr, k), xte, yte);
  const double p = 1.0 / k;
  EXPECT_LE(std::abs(r.top1 - p), 4.0 * std::sqrt(p * (1 - p) / n));
}

TEST(Probe, DuplicatedDataGivesSameWeights) {
  std::mt19937_64 rng(3);
  const Matrix x = testkit::random_matrix(rng, 60, 3);
  std::vector<int> y(60);
  for (int i = 0; i < 60; ++i) y[i] = (x(i, 0) + 0.5 * x(i, 1) > 0 ? 1 : 0) + (x(i, 2) > 0.8 ? 1 : 0);
  Matrix x2(120, 3);
  x2 << x, x;
  std::vector<int> y2 = y;
  y2.insert(y2.end(), y.begin(), y.end());
  ProbeOptions opts;
  opts.tolerance = 1e-10;
  const auto a = fit_linear_probe(x, y, 3, opts);
  const auto b = fit_linear_probe(x2, y2, 3, opts);
  EXPECT_LT((a.weights - b.weights).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT((a.bias - b.bias).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Probe, IndependentOfStartingPoint) {
  std::mt19937_64 rng(4);
  const Matrix x = testkit::random_matrix(rng, 150, 4);
  std::vector<int> y(150);
  for (int i = 0; i < 150; ++i) y[i] = static_cast<int>((x(i, 0) > 0) + (x(i, 1) > 0.5));
  LinearClassifier start;
  start.weights = testkit::random_matrix(rng, 3, 4, 3.0);
  start.bias = testkit::random_matrix(rng, 3, 1, 3.0).col(0);
  const auto a = fit_linear_probe(x, y, 3);
  const auto b = fit_linear_probe(x, y, 3, {}, start);
  EXPECT_NEAR(a.objective, b.objective, 1e-8);
  const Matrix xt = testkit::random_matrix(rng, 500, 4);
  std::vector<int> yt(500);
  for (int i = 0; i < 500; ++i) yt[i] = static_cast<int>((xt(i, 0) > 0) + (xt(i, 1) > 0.5));
  EXPECT_LE(std::abs(evaluate(a, xt, yt).n_correct - evaluate(b, xt, yt).n_correct), 1);
}

TEST(Probe, DegenerateInputIsFlaggedNotFatal) {
  const Matrix x = Matrix::Ones(6, 2);
  const auto clf = fit_linear_probe(x, {0, 1, 0, 1, 0, 1}, 2);
  EXPECT_TRUE(clf.degenerate);
  EXPECT_THROW(fit_linear_probe(x, {0, 0, 0, 0, 0, 0}, 1), Error);
}

TEST(Evaluate, ConstantClassifierAndTieBreak) {
  LinearClassifier clf;
  clf.weights = Matrix::Zero(3, 2);
  clf.bias = Vector::Zero(3);
  clf.bias(0) = 1.0;
  const Matrix x = Matrix::Ones(4, 2);
  EXPECT_EQ(evaluate(clf, x, {0, 0, 0, 0}).top1, 1.0);
  EXPECT_EQ(evaluate(clf, x, {1, 2, 1, 2}).top1, 0.0);
  clf.bias << 0.0, 2.0, 2.0;
  EXPECT_EQ(clf.predict(x), (std::vector<int>{1, 1, 1, 1}));
  EXPECT_THROW(evaluate(clf, Matrix(0, 2), {}), Error);
}

TEST(Evaluate, InvariantToRowOrder) {
  std::mt19937_64 rng(5);
  Matrix x;
  std::vector<int> y;
  two_blobs(rng, 50, x, y);
  const auto clf = fit_linear_probe(x, y, 2);
  Matrix xr = x.colwise().reverse();
  std::vector<int> yr(y.rbegin(), y.rend());
  EXPECT_EQ(evaluate(clf, x, y).n_correct, evaluate(clf, xr, yr).n_correct);
}

TEST(Report, IdentityAntisymmetryAndMean) {
  const std::vector<ProbeResult> base{result("a", 50, 100), result("b", 30, 100), result("c", 10, 100)};
  const std::vector<ProbeResult> cand{result("c", 15, 100), result("a", 52, 100), result("b", 29, 100)};
  const auto self = relative_report(base, base);
  for (double d : self.delta_pp) EXPECT_EQ(d, 0.0);
  EXPECT_EQ(self.average, 0.0);
  const auto fwd = relative_report(cand, base);
  const auto back = relative_report(base, cand);
  EXPECT_EQ(fwd.realms, (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(fwd.delta_pp, (std::vector<double>{2.0, -1.0, 5.0}));
  EXPECT_EQ(fwd.average, 2.0);
  std::map<std::string, double> back_by;
  for (std::size_t i = 0; i < back.realms.size(); ++i) back_by[back.realms[i]] = back.delta_pp[i];
  for (std::size_t i = 0; i < fwd.realms.size(); ++i) EXPECT_EQ(fwd.delta_pp[i], -back_by[fwd.realms[i]]);
  EXPECT_THROW(relative_report({result("a", 1, 2)}, base), Error);
}

TEST(Report, FixtureDeltasAreExact) {
  const auto base = read_results_csv(kFixtures / "report" / "baseline_results.csv");
  for (std::string cand : {"dino", "reco"}) {
    const auto rep = relative_report(read_results_csv(kFixtures / "report" / (cand + "_results.csv")), base);
    const auto lines = io::read_lines(kFixtures / "report" / (cand + "_expected_deltas.csv"));
    ASSERT_EQ(lines.size(), rep.realms.size() + 1);
    for (std::size_t i = 0; i < rep.realms.size(); ++i) {
      const auto f = io::split(lines[i + 1], ',');
      EXPECT_EQ(rep.realms[i], f[0]);
      EXPECT_EQ(rep.delta_pp[i], static_cast<double>(io::parse_int(f[1], "tenths")) / 10.0) << f[0];
    }
  }
}

TEST(Report, CsvAndSvg) {
  const std::vector<ProbeResult> base{result("a", 50, 100), result("b", 30, 100)};
  const std::vector<ProbeResult> cand{result("a", 52, 100), result("b", 29, 100)};
  const auto rep = relative_report(cand, base);
  EXPECT_EQ(report_csv(rep), "realm,delta_pp\na,2\nb,-1\nAVG,0.5\n");
  const auto svg = report_svg(rep, "demo");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("demo"), std::string::npos);

  const auto path = std::filesystem::temp_directory_path() / "reco_results.csv";
  io::write_file_atomic(path, results_csv(cand));
  const auto back = read_results_csv(path);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].n_correct, 52);
}

TEST(Alignment, SpearmanBasics) {
  EXPECT_NEAR(spearman({1, 2, 3, 4}, {10, 20, 30, 40}), 1.0, 1e-15);
  EXPECT_NEAR(spearman({1, 2, 3, 4}, {4, 3, 2, 1}), -1.0, 1e-15);
  EXPECT_EQ(spearman({1, 1, 1}, {1, 2, 3}), 0.0);
  EXPECT_NEAR(spearman({1, 2, 2, 3}, {1, 2, 3, 4}), 0.9486832980505138, 1e-12);
}
