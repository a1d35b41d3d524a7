#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "reco/encoder.hpp"
#include "reco/error.hpp"
#include "reco/sampler.hpp"
#include "reco/synth.hpp"
#include "reco/trainer.hpp"
#include "support.hpp"

using namespace reco;

namespace {

ConceptNode node(const std::string& id) {
  ConceptNode n;
  n.id = id;
  n.name = id;
  return n;
}

// r -> {a, b}, each with two leaves.
Taxonomy four_leaves() {
  return Taxonomy::build({node("r"), node("a"), node("b"), node("a0"), node("a1"), node("b0"), node("b1")},
                         {{"r", "a"}, {"r", "b"}, {"a", "a0"}, {"a", "a1"}, {"b", "b0"}, {"b", "b1"}});
}

SynthDataset small_data(std::uint64_t seed) {
  SynthSpec spec;
  spec.seed = seed;
  spec.feature_dim = 8;
  spec.samples_per_class = 40;
  spec.drift_scale = 2.0;
  spec.noise_scale = 0.3;
  return generate(four_leaves(), spec);
}

TrainConfig small_config(std::uint64_t seed) {
  TrainConfig cfg;
  cfg.seed = seed;
  cfg.epochs = 50;
  cfg.batch_size = 32;
  cfg.hidden_dim = 16;
  cfg.embed_dim = 4;
  cfg.view_noise = 0.15;
  return cfg;
}

Matrix as_column(const Vector& v) { return Matrix(v); }

}  // namespace

TEST(Schedule, CosineEndpointsAndMidpoint) {
  TrainConfig cfg;
  EXPECT_NEAR(lr_at(cfg, 0, 1000), 0.1, 1e-12);
  EXPECT_NEAR(lr_at(cfg, 500, 1000), 0.05, 1e-12);
  EXPECT_NEAR(lr_at(cfg, 1000, 1000), 0.0, 1e-12);
  EXPECT_THROW(lr_at(cfg, 1001, 1000), Error);
  EXPECT_THROW(lr_at(cfg, -1, 1000), Error);
  for (long long s = 1; s <= 1000; ++s) EXPECT_LE(lr_at(cfg, s, 1000), lr_at(cfg, s - 1, 1000));
}

TEST(Optimizer, MomentumMatchesHandSteppedRecurrence) {
  // f(θ) = 1.5 θ², g = 3θ; μ = 0.9, lr = 0.1, θ0 = 1.
  Vector theta = Vector::Constant(1, 1.0);
  Vector vel = Vector::Zero(1);
  double t = 1.0, v = 0.0;
  for (int i = 0; i < 5; ++i) {
    const double g = 3.0 * t;
    v = 0.9 * v + g;
    t = t - 0.1 * v;
    momentum_step(theta, vel, Vector::Constant(1, 3.0 * theta(0)), 0.1, 0.9);
    EXPECT_EQ(theta(0), t);
    EXPECT_EQ(vel(0), v);
  }
  // First three steps written out by hand.
  Vector th = Vector::Constant(1, 1.0), ve = Vector::Zero(1);
  momentum_step(th, ve, Vector::Constant(1, 3.0), 0.1, 0.9);
  EXPECT_NEAR(th(0), 0.7, 1e-15);
  momentum_step(th, ve, Vector::Constant(1, 2.1), 0.1, 0.9);
  EXPECT_NEAR(ve(0), 4.8, 1e-15);
  EXPECT_NEAR(th(0), 0.22, 1e-15);
}

TEST(Encoder, UnitNormAndPure) {
  const auto enc = Encoder::initialize(5, 7, 3, 1);
  std::mt19937_64 rng(2);
  const Matrix x = testkit::random_matrix(rng, 10, 5);
  const Matrix z = enc.embed(x);
  for (Eigen::Index r = 0; r < z.rows(); ++r) EXPECT_NEAR(z.row(r).norm(), 1.0, 1e-12);
  EXPECT_TRUE(testkit::bitwise_equal(z, enc.embed(x)));
  EXPECT_THROW(enc.embed(Matrix::Zero(2, 4)), Error);
}

TEST(Encoder, ConstantNetworkWithZeroHiddenWeights) {
  auto enc = Encoder::initialize(3, 4, 2, 3);
  enc.w1.setZero();
  enc.b1 << 0.1, -0.2, 0.3, 0.4;
  std::mt19937_64 rng(4);
  const Matrix z = enc.embed(testkit::random_matrix(rng, 5, 3));
  const Vector expected = (enc.w2 * enc.b1.array().tanh().matrix() + enc.b2).normalized();
  for (Eigen::Index r = 0; r < z.rows(); ++r) EXPECT_LT((z.row(r).transpose() - expected).norm(), 1e-15);
}

TEST(Encoder, CheckpointRoundTrip) {
  const auto enc = Encoder::initialize(6, 5, 4, 7);
  EXPECT_EQ(Encoder::from_bytes(enc.to_bytes()), enc);
  const auto bytes = enc.to_bytes();
  EXPECT_EQ(bytes.substr(0, 4), "RCL1");
  EXPECT_EQ(bytes.size(), 4u + 4u * 4u + 8u * static_cast<std::size_t>(enc.parameter_count()));
  const auto path = std::filesystem::temp_directory_path() / "reco_ckpt.rcl";
  enc.save(path);
  EXPECT_EQ(Encoder::load(path), enc);
  EXPECT_THROW(Encoder::from_bytes("RCL0" + bytes.substr(4)), Error);
  EXPECT_THROW(Encoder::from_bytes(bytes.substr(0, bytes.size() - 1)), Error);
}

TEST(Encoder, BackpropMatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  const auto enc = Encoder::initialize(4, 6, 3, 11);
  const Matrix views = testkit::random_matrix(rng, 4, 4);
  const std::vector<int> labels{0, 1};
  const Matrix centers = testkit::random_unit_rows(rng, 2, 3);
  NegativeMask mask(4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t k = 0; k < 4; ++k)
      if (i != k && (i + k) % 3 != 0) mask.set(i, k, true);

  for (auto obj : {Objective::info_nce, Objective::supcon, Objective::paco, Objective::reco_supcon,
                   Objective::reco_paco}) {
    TrainConfig cfg;
    cfg.objective = obj;
    cfg.temperature = 0.5;
    const auto g = batch_objective(enc, views, labels, centers, &mask, cfg);
    auto f = [&](const Matrix& p) {
      Encoder e = enc;
      e.set_parameters(p.col(0));
      return batch_objective(e, views, labels, centers, &mask, cfg).loss;
    };
    const Matrix numeric = testkit::numeric_gradient(f, as_column(enc.parameters()));
    EXPECT_LT(testkit::relative_error(as_column(g.grad_params), numeric), 1e-5) << to_string(obj);
    if (uses_centers(obj)) {
      auto fc = [&](const Matrix& c) { return batch_objective(enc, views, labels, c, &mask, cfg).loss; };
      EXPECT_LT(testkit::relative_error(g.grad_centers, testkit::numeric_gradient(fc, centers)), 1e-6);
    }
  }
}

TEST(Trainer, ZeroLearningRateKeepsWeights) {
  auto cfg = small_config(1);
  cfg.lr_max = 0.0;
  cfg.epochs = 2;
  const auto res = train(small_data(1), four_leaves(), cfg);
  EXPECT_EQ(res.encoder, res.initial);
}

TEST(Trainer, DeterministicPerSeed) {
  auto cfg = small_config(3);
  cfg.objective = Objective::reco_paco;
  cfg.epochs = 3;
  const auto a = train(small_data(3), four_leaves(), cfg);
  const auto b = train(small_data(3), four_leaves(), cfg);
  EXPECT_EQ(a.encoder.to_bytes(), b.encoder.to_bytes());
  EXPECT_EQ(a.history, b.history);
  EXPECT_TRUE(testkit::bitwise_equal(a.centers, b.centers));
}

TEST(Trainer, SupconLossDecreasesOverSeeds) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto res = train(small_data(seed), four_leaves(), small_config(seed));
    ASSERT_EQ(res.history.size(), 50u);
    EXPECT_LT(res.history.back(), res.history.front()) << "seed " << seed;
    for (double h : res.history) EXPECT_TRUE(std::isfinite(h));
  }
}

TEST(Trainer, EveryObjectiveRuns) {
  for (auto obj : {Objective::info_nce, Objective::paco, Objective::reco_supcon, Objective::reco_paco}) {
    auto cfg = small_config(4);
    cfg.objective = obj;
    cfg.epochs = 5;
    const auto res = train(small_data(4), four_leaves(), cfg);
    EXPECT_EQ(res.history.size(), 5u);
    EXPECT_EQ(res.centers.rows() > 0, uses_centers(obj)) << to_string(obj);
  }
}

TEST(Trainer, DivergenceIsReported) {
  auto cfg = small_config(5);
  cfg.lr_max = 1e300;
  cfg.epochs = 3;
  try {
    train(small_data(5), four_leaves(), cfg);
    FAIL() << "expected divergence";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::numeric);
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
  }
}

TEST(Trainer, RecoExpectationMatchesMonteCarlo) {
  // Two samples (husky-like siblings a0, a1) -> four views.
  const auto tax = four_leaves();
  const auto table = build_similarity_table(tax, {"a0", "a1", "b0", "b1"});
  const auto enc = Encoder::initialize(3, 5, 3, 21);
  std::mt19937_64 rng(22);
  const Matrix views = testkit::random_matrix(rng, 4, 3);
  const std::vector<int> labels{0, 2};
  const Matrix probs = acceptance_matrix(table, {0, 0, 2, 2});
  TrainConfig cfg;
  cfg.objective = Objective::reco_supcon;
  cfg.temperature = 0.5;

  std::vector<std::pair<std::size_t, std::size_t>> free;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t k = 0; k < 4; ++k)
      if (probs(i, k) > 0.0) free.emplace_back(i, k);
  double expected = 0.0;
  for (std::uint32_t bits = 0; bits < (1u << free.size()); ++bits) {
    NegativeMask m(4);
    double w = 1.0;
    for (std::size_t b = 0; b < free.size(); ++b) {
      const auto [i, k] = free[b];
      const bool on = (bits >> b) & 1u;
      m.set(i, k, on);
      w *= on ? probs(i, k) : 1.0 - probs(i, k);
    }
    expected += w * batch_objective(enc, views, labels, Matrix(), &m, cfg).loss;
  }
  double mc = 0.0;
  const int draws = 10000;
  for (int s = 0; s < draws; ++s) {
    const auto m = draw_mask(probs, {31, true}, static_cast<std::uint64_t>(s));
    mc += batch_objective(enc, views, labels, Matrix(), &m, cfg).loss;
  }
  mc /= draws;
  EXPECT_NEAR(mc, expected, 0.01 * std::abs(expected));
}

TEST(TrainConfigCheck, RejectsOddBatch) {
  auto cfg = small_config(0);
  cfg.batch_size = 7;
  EXPECT_THROW(cfg.validate(), Error);
  EXPECT_THROW(parse_objective("simclr"), Error);
}
