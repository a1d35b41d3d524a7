#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "reco/error.hpp"
#include "reco/io.hpp"
#include "reco/synth.hpp"
#include "support.hpp"

using namespace reco;

namespace {

// Balanced binary tree of depth 3: r -> a,b -> a0,a1,b0,b1 -> 8 leaves.
Taxonomy binary3() {
  std::vector<ConceptNode> nodes;
  std::vector<Edge> edges;
  auto add = [&](const std::string& id, const std::string& parent) {
    ConceptNode n;
    n.id = id;
    n.name = id;
    nodes.push_back(n);
    if (!parent.empty()) edges.emplace_back(parent, id);
  };
  add("r", "");
  for (std::string a : {"a", "b"}) {
    add(a, "r");
    for (std::string b : {"0", "1"}) {
      add(a + b, a);
      for (std::string c : {"x", "y"}) add(a + b + c, a + b);
    }
  }
  return Taxonomy::build(nodes, edges);
}

}  // namespace

TEST(Synth, ShapeAndSplits) {
  SynthSpec spec;
  spec.samples_per_class = 10;
  spec.test_fraction = 0.3;
  const auto ds = generate(binary3(), spec);
  EXPECT_EQ(ds.class_ids.size(), 8u);
  EXPECT_EQ(ds.size(), 80u);
  EXPECT_EQ(ds.feature_dim(), 16);
  EXPECT_EQ(ds.indices(Split::test).size(), 24u);
  std::vector<int> per_class(8, 0), test_per_class(8, 0);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    ++per_class[ds.labels[i]];
    test_per_class[ds.labels[i]] += ds.splits[i] == Split::test;
  }
  for (int c = 0; c < 8; ++c) {
    EXPECT_EQ(per_class[c], 10);
    EXPECT_EQ(test_per_class[c], 3);
  }
  EXPECT_EQ(ds.realm_ids(), (std::vector<std::string>{"a", "b"}));
}

TEST(Synth, DeterministicAndRoundTripsThroughCsv) {
  SynthSpec spec;
  spec.seed = 99;
  spec.samples_per_class = 6;
  const auto a = generate(binary3(), spec);
  const auto b = generate(binary3(), spec);
  EXPECT_EQ(a.to_csv(), b.to_csv());
  EXPECT_TRUE(testkit::bitwise_equal(a.features, b.features));

  const auto path = std::filesystem::temp_directory_path() / "reco_synth_roundtrip.csv";
  io::write_file_atomic(path, a.to_csv());
  const auto c = SynthDataset::read_csv(path);
  EXPECT_TRUE(testkit::bitwise_equal(a.features, c.features));
  EXPECT_EQ(a.labels, c.labels);
  EXPECT_EQ(a.realms, c.realms);
  EXPECT_EQ(a.splits, c.splits);
  EXPECT_EQ(a.class_ids, c.class_ids);
}

TEST(Synth, TinyNoiseCollapsesOntoMeans) {
  SynthSpec spec;
  spec.noise_scale = 1e-12;
  spec.samples_per_class = 4;
  const auto ds = generate(binary3(), spec);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    EXPECT_LT((ds.features.row(i) - ds.class_means.row(ds.labels[i])).norm(), 1e-10);
  }
}

TEST(Synth, RejectsBadSpecs) {
  SynthSpec spec;
  spec.noise_scale = 0.0;
  EXPECT_THROW(generate(binary3(), spec), Error);
  spec = {};
  spec.feature_dim = 1;
  EXPECT_THROW(generate(binary3(), spec), Error);
  ConceptNode r;
  r.id = "r";
  ConceptNode x;
  x.id = "x";
  EXPECT_THROW(generate(Taxonomy::build({r, x}, {{"r", "x"}}), SynthSpec{}), Error);
}

TEST(Synth, ExpectedMeanDistancesFollowTheWalk) {
  // Leaves sit at L = 3. Walks that split at depth d differ by 2(L-d)
  // independent increments.
  const auto t = binary3();
  SynthSpec spec;
  spec.samples_per_class = 2;
  const int seeds = 1000;
  double sum[3] = {0, 0, 0};
  int count[3] = {0, 0, 0};
  for (int s = 0; s < seeds; ++s) {
    spec.seed = static_cast<std::uint64_t>(s);
    const auto ds = generate(t, spec);
    for (std::size_t m = 0; m < ds.class_ids.size(); ++m) {
      for (std::size_t n = m + 1; n < ds.class_ids.size(); ++n) {
        const int hops = t.shortest_path(ds.class_ids[m], ds.class_ids[n]) / 2;  // L - d
        sum[hops - 1] += (ds.class_means.row(m) - ds.class_means.row(n)).squaredNorm();
        ++count[hops - 1];
      }
    }
  }
  for (int h = 1; h <= 3; ++h) {
    const double expected = 2.0 * spec.drift_scale * spec.drift_scale * spec.feature_dim * h;
    EXPECT_NEAR(sum[h - 1] / count[h - 1], expected, 0.05 * expected) << "L-d = " << h;
  }
}

TEST(Synth, EmpiricalMeansConverge) {
  SynthSpec spec;
  spec.samples_per_class = 400;
  spec.seed = 5;
  const auto ds = generate(binary3(), spec);
  const auto k = static_cast<int>(ds.class_ids.size());
  Matrix mean = Matrix::Zero(k, spec.feature_dim);
  for (std::size_t i = 0; i < ds.size(); ++i) mean.row(ds.labels[i]) += ds.features.row(i);
  mean /= spec.samples_per_class;
  // Scaled squared deviations sum to a chi-square with k * D degrees of freedom.
  const double stat = (mean - ds.class_means).squaredNorm() * spec.samples_per_class /
                      (spec.noise_scale * spec.noise_scale);
  const double dof = static_cast<double>(k) * spec.feature_dim;
  EXPECT_LT(std::abs(stat - dof), 3.0 * std::sqrt(2.0 * dof));
}

TEST(Synth, ViewsAreJitteredPairs) {
  std::mt19937_64 rng(1);
  Matrix f = Matrix::Ones(3, 4);
  const auto v = make_views(f, 0.0, rng);
  ASSERT_EQ(v.rows(), 6);
  EXPECT_TRUE(testkit::bitwise_equal(v.topRows(2), Matrix::Ones(2, 4)));
  const auto j = make_views(f, 0.5, rng);
  EXPECT_NE(j(0, 0), j(1, 0));
}
