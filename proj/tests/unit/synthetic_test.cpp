#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "rda/errors.hpp"
#include "rda/synthetic.hpp"

namespace rda {
namespace {

std::size_t count(const FeatureDataset& ds, Label l) {
  std::size_t n = 0;
  for (Label x : ds.labels()) n += x == l;
  return n;
}

std::vector<double> column_means(const FeatureDataset& ds, Label only) {
  std::vector<double> m(ds.dim(), 0.0);
  std::size_t n = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.label(i) != only) continue;
    ++n;
    const auto r = ds.row(i);
    for (std::size_t j = 0; j < ds.dim(); ++j) m[j] += r[j];
  }
  for (auto& x : m) x /= static_cast<double>(n);
  return m;
}

TEST(Synthetic, DefaultBenchmarkShape) {
  const auto d = generate(SyntheticSpec::gauss_shift_16());
  EXPECT_EQ(d.train.size(), 2000u);
  EXPECT_EQ(d.val.size(), 600u);
  EXPECT_EQ(d.test.size(), 1200u);
  EXPECT_EQ(d.train.dim(), 16u);
  EXPECT_EQ(count(d.train, Label::Ood), 0u);
  EXPECT_EQ(count(d.val, Label::Ood), 200u);
  EXPECT_EQ(count(d.test, Label::Ood), 400u);
  EXPECT_EQ(d.train.split, Split::Train);
  EXPECT_EQ(d.val.split, Split::Val);
  EXPECT_EQ(d.test.split, Split::Test);
  EXPECT_NO_THROW(d.train.validate());
  EXPECT_NO_THROW(d.val.validate());
  EXPECT_NO_THROW(d.test.validate());
  // shuffled: OOD rows are not all at the end
  std::size_t ood_in_first_half = 0;
  for (std::size_t i = 0; i < d.test.size() / 2; ++i) ood_in_first_half += d.test.label(i) == Label::Ood;
  EXPECT_GT(ood_in_first_half, 100u);
}

TEST(Synthetic, SameSpecSameBytes) {
  const auto a = generate(SyntheticSpec{});
  const auto b = generate(SyntheticSpec{});
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.val, b.val);
  EXPECT_EQ(a.test, b.test);
  SyntheticSpec other;
  other.seed = 8;
  EXPECT_FALSE(generate(other).train == a.train);
}

TEST(Synthetic, NoOodRequestedMeansIdOnly) {
  SyntheticSpec spec;
  spec.ood = {0, 0, 0};
  const auto d = generate(spec);
  EXPECT_EQ(count(d.val, Label::Ood), 0u);
  EXPECT_EQ(count(d.test, Label::Ood), 0u);
}

TEST(Synthetic, IsotropicMoments) {
  SyntheticSpec spec;
  spec.id = {10000, 0, 0};
  spec.ood = {0, 0, 0};
  const auto d = generate(spec);
  const auto& ds = d.train;
  const auto mean = column_means(ds, Label::Id);
  for (std::size_t j = 0; j < ds.dim(); ++j) {
    EXPECT_NEAR(mean[j], 0.0, 0.05) << j;
    double ss = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) ss += (ds.row(i)[j] - mean[j]) * (ds.row(i)[j] - mean[j]);
    EXPECT_NEAR(std::sqrt(ss / static_cast<double>(ds.size() - 1)), 1.0, 0.05) << j;
  }
}

TEST(Synthetic, MeanShiftMovesEveryCoordinate) {
  SyntheticSpec spec;
  spec.id = {0, 0, 4000};
  spec.ood = {0, 0, 4000};
  spec.ood_kind = MeanShift{2.0};
  const auto d = generate(spec);
  const auto id = column_means(d.test, Label::Id);
  const auto ood = column_means(d.test, Label::Ood);
  for (std::size_t j = 0; j < 16; ++j) EXPECT_NEAR(ood[j] - id[j], 2.0, 0.1) << j;
}

TEST(Synthetic, SubspaceOffsetMovesOneAxis) {
  SyntheticSpec spec;
  spec.dim = 4;
  spec.id = {0, 0, 4000};
  spec.ood = {0, 0, 4000};
  spec.ood_kind = SubspaceOffset{2, 3.0};
  const auto d = generate(spec);
  const auto id = column_means(d.test, Label::Id);
  const auto ood = column_means(d.test, Label::Ood);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(ood[j] - id[j], j == 2 ? 3.0 : 0.0, 0.1) << j;
}

TEST(Synthetic, ScaleShiftWidensTheCloud) {
  SyntheticSpec spec;
  spec.dim = 2;
  spec.id = {0, 0, 4000};
  spec.ood = {0, 0, 4000};
  spec.ood_kind = ScaleShift{3.0};
  const auto d = generate(spec);
  double id_sq = 0.0, ood_sq = 0.0;
  for (std::size_t i = 0; i < d.test.size(); ++i) {
    const auto r = d.test.row(i);
    (d.test.label(i) == Label::Ood ? ood_sq : id_sq) += r[0] * r[0] + r[1] * r[1];
  }
  EXPECT_NEAR(std::sqrt(ood_sq / id_sq), 3.0, 0.15);
}

TEST(Synthetic, MixtureIsFinite) {
  SyntheticSpec spec;
  spec.id_kind = GaussianMixture{3, 4.0, 0.5};
  const auto d = generate(spec);
  EXPECT_NO_THROW(d.train.validate());
  EXPECT_EQ(d.train.size(), 2000u);
}

TEST(Synthetic, InvalidSpecsNameTheField) {
  auto field_of = [](SyntheticSpec spec) {
    try {
      spec.validate();
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string("<accepted>");
  };
  SyntheticSpec s;
  s.dim = 0;
  EXPECT_EQ(field_of(s), "synth.dim");
  s = {};
  s.ood_kind = MeanShift{-1.0};
  EXPECT_EQ(field_of(s), "synth.delta");
  s = {};
  s.ood_kind = ScaleShift{0.0};
  EXPECT_EQ(field_of(s), "synth.gamma");
  s = {};
  s.ood_kind = SubspaceOffset{16, 1.0};
  EXPECT_EQ(field_of(s), "synth.axis");
  s = {};
  s.ood = {5, 0, 0};
  EXPECT_EQ(field_of(s), "synth.n_train_ood");
}

}  // namespace
}  // namespace rda
