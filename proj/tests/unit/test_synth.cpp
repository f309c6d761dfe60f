#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "mcppi/errors.hpp"
#include "mcppi/splits.hpp"
#include "mcppi/synth.hpp"
#include "probe.hpp"

namespace mcppi {
namespace {

double distance(const Vec3& a, const Vec3& b) {
  return std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) + (a[2] - b[2]) * (a[2] - b[2]));
}

TEST(GenProtein, LengthThreeHasBondLengthSteps) {
  const auto p = gen_protein("p", {3, 3}, 1);
  ASSERT_EQ(p.length(), 3u);
  EXPECT_NEAR(distance(p.coords[0], p.coords[1]), kBondLength, 1e-12);
  EXPECT_NEAR(distance(p.coords[1], p.coords[2]), kBondLength, 1e-12);
}

TEST(GenProtein, FixedSeedIsIdentical) {
  const auto a = gen_protein("p", {10, 50}, 42), b = gen_protein("p", {10, 50}, 42);
  EXPECT_EQ(a.sequence, b.sequence);
  EXPECT_EQ(a.coords, b.coords);
  EXPECT_NE(gen_protein("p", {10, 50}, 43).coords, a.coords);
}

TEST(GenProtein, RespectsClearanceAndLengthRange) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto p = gen_protein("p", {40, 80}, seed);
    ASSERT_GE(p.length(), 40u);
    ASSERT_LE(p.length(), 80u);
    EXPECT_NO_THROW(p.validate());
    for (std::size_t i = 0; i < p.length(); ++i) {
      if (i + 1 < p.length()) EXPECT_NEAR(distance(p.coords[i], p.coords[i + 1]), kBondLength, 1e-9);
      for (std::size_t j = i + 1; j < p.length(); ++j) ASSERT_GE(distance(p.coords[i], p.coords[j]), kClearance);
    }
  }
}

TEST(GenProtein, RejectsShortRanges) {
  EXPECT_THROW(gen_protein("p", {2, 5}, 0), ConfigError);
  EXPECT_THROW(gen_protein("p", {10, 5}, 0), ConfigError);
}

TEST(Planted, SingleClassUsesOneTemplate) {
  const auto d = gen_planted_microenv_dataset(1, 20, 3);
  EXPECT_EQ(d.n_classes, 1u);
  for (const auto& r : d.residue_classes)
    for (auto c : r) EXPECT_EQ(c, 0u);
}

TEST(Planted, LabelsParallelProteins) {
  const auto d = gen_planted_microenv_dataset(8, 30, 4);
  ASSERT_EQ(d.proteins.size(), 30u);
  ASSERT_EQ(d.residue_classes.size(), 30u);
  for (std::size_t i = 0; i < 30; ++i) {
    EXPECT_EQ(d.residue_classes[i].size(), d.proteins[i].length());
    for (auto c : d.residue_classes[i]) EXPECT_LT(c, 8u);
  }
  EXPECT_EQ(d.proteins[7].id, "P0007");
}

TEST(Planted, ClassesBalancedAtLargeN) {
  const auto d = gen_planted_microenv_dataset(8, 5000, 5);
  std::vector<double> counts(8, 0.0);
  double total = 0.0;
  for (const auto& r : d.residue_classes)
    for (auto c : r) {
      ++counts[c];
      ++total;
    }
  for (double c : counts) EXPECT_NEAR(c / total, 1.0 / 8.0, 0.1 / 8.0);
}

TEST(Planted, TemplatesHaveDistinctResidueMarginals) {
  const auto d = gen_planted_microenv_dataset(8, 200, 6);
  std::vector<std::array<double, kNumAminoAcids>> counts(8);
  for (auto& c : counts) c.fill(0.0);
  for (std::size_t i = 0; i < d.proteins.size(); ++i)
    for (std::size_t m = 0; m < d.proteins[i].length(); ++m)
      ++counts[d.residue_classes[i][m]][d.proteins[i].sequence[m]];
  // Critical value of chi-squared with 19 degrees of freedom at p = 1e-3.
  constexpr double kCritical = 43.82;
  for (std::size_t a = 0; a < 8; ++a) {
    for (std::size_t b = a + 1; b < 8; ++b) {
      double na = 0, nb = 0;
      for (std::size_t t = 0; t < kNumAminoAcids; ++t) {
        na += counts[a][t];
        nb += counts[b][t];
      }
      double chi2 = 0.0;
      for (std::size_t t = 0; t < kNumAminoAcids; ++t) {
        const double col = counts[a][t] + counts[b][t];
        if (col == 0.0) continue;
        const double ea = col * na / (na + nb), eb = col * nb / (na + nb);
        chi2 += (counts[a][t] - ea) * (counts[a][t] - ea) / ea + (counts[b][t] - eb) * (counts[b][t] - eb) / eb;
      }
      EXPECT_GT(chi2, kCritical) << "classes " << a << " and " << b;
    }
  }
}

TEST(Planted, RejectsTooManyClasses) {
  EXPECT_THROW(gen_planted_microenv_dataset(21, 5, 0), ConfigError);
  EXPECT_THROW(gen_planted_microenv_dataset(0, 5, 0), ConfigError);
}

TEST(Planted, ReproducibleFromSeed) {
  const auto a = gen_planted_microenv_dataset(4, 10, 8), b = gen_planted_microenv_dataset(4, 10, 8);
  EXPECT_EQ(a.residue_classes, b.residue_classes);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(a.proteins[i].coords, b.proteins[i].coords);
}

TEST(GenPpi, ZeroEdgesIsEmpty) {
  const auto d = gen_planted_microenv_dataset(4, 10, 1);
  const auto ppi = gen_ppi_graph(d, 0, 1);
  EXPECT_TRUE(ppi.graph.edges.empty());
  EXPECT_EQ(ppi.graph.protein_ids.size(), 10u);
}

TEST(GenPpi, TooManyEdgesIsConfigError) {
  const auto d = gen_planted_microenv_dataset(4, 5, 1);
  EXPECT_THROW(gen_ppi_graph(d, 11, 1), ConfigError);
  EXPECT_NO_THROW(gen_ppi_graph(d, 10, 1));
}

TEST(GenPpi, RuleIsDeterministicPerSeed) {
  const auto d = gen_planted_microenv_dataset(8, 60, 2);
  const auto a = gen_ppi_graph(d, 150, 5), b = gen_ppi_graph(d, 150, 5);
  ASSERT_EQ(a.graph.edges.size(), b.graph.edges.size());
  for (std::size_t k = 0; k < a.graph.edges.size(); ++k) {
    EXPECT_EQ(a.graph.edges[k].a, b.graph.edges[k].a);
    EXPECT_EQ(a.graph.edges[k].b, b.graph.edges[k].b);
    EXPECT_EQ(a.graph.edges[k].labels, b.graph.edges[k].labels);
  }
  EXPECT_EQ(a.traits, b.traits);
}

TEST(GenPpi, OutputValidates) {
  const auto d = gen_planted_microenv_dataset(8, 100, 3);
  const auto ppi = gen_ppi_graph(d, 400, 3);
  ASSERT_EQ(ppi.graph.edges.size(), 400u);
  EXPECT_NO_THROW(ppi.graph.validate());
  std::set<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& e : ppi.graph.edges) {
    EXPECT_TRUE(pairs.insert({std::min(e.a, e.b), std::max(e.a, e.b)}).second);
    std::size_t positives = 0;
    for (auto y : e.labels) positives += y;
    EXPECT_GE(positives, 1u);
  }
  for (const auto& t : ppi.traits) EXPECT_EQ(t.size(), PpiRuleConfig{}.trait_dim);
  for (const auto& p : d.proteins) EXPECT_NO_THROW(p.validate());
}

TEST(GenPpi, PairFeaturesAreSymmetric) {
  const std::vector<double> a = {0.3, -1.2}, b = {2.0, 0.5};
  const auto ab = pair_trait_features(a, b), ba = pair_trait_features(b, a);
  EXPECT_EQ(ab, ba);
  ASSERT_EQ(ab.size(), 4u);
  EXPECT_EQ(ab.back(), 1.0);
  EXPECT_DOUBLE_EQ(ab[0], a[0] * b[0]);
  EXPECT_DOUBLE_EQ(ab[1], 0.5 * (a[0] * b[1] + a[1] * b[0]));
}

TEST(GenPpi, TraitProbeReachesCeiling) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto d = gen_planted_microenv_dataset(8, 100, seed);
    const auto ppi = gen_ppi_graph(d, 400, seed);
    const auto split = partition(ppi.graph, SplitScheme::kRandom, {}, seed);
    EXPECT_GT(testing::trait_probe(ppi, split.train, split.test).micro_f1, 0.95) << "seed " << seed;
  }
}

}  // namespace
}  // namespace mcppi
