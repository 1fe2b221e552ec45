#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "powerspace/error.hpp"
#include "powerspace/kfunctional.hpp"
#include "random_instances.hpp"

namespace powerspace {
namespace {

using testing::random_coeffs;
using testing::random_size;
using testing::random_spectrum;
using testing::rel_diff;

// One coordinate with eigenvalue c: K(x,t) = |x| min(1, t / sqrt(c)).
double one_dim_k(double x, double c, double t) { return std::abs(x) * std::min(1.0, t / std::sqrt(c)); }

// Integrating the two linear pieces of log K in log t gives
// |x| c^{-theta/2} (r theta (1-theta))^{-1/r}; the sup over t is |x| c^{-theta/2}.
double one_dim_interp(double x, double c, double theta, const FineIndex& r) {
  const double base = std::abs(x) * std::pow(c, -theta / 2);
  if (r.is_infinite()) return base;
  return base * std::pow(r.value() * theta * (1 - theta), -1.0 / r.value());
}

TEST(WeightedCouple, NormsAndEmbedding) {
  const WeightedCouple couple(EigenSpectrum({0.25, 0.04}));
  const std::vector<double> x{1.0, 1.0};
  EXPECT_NEAR(couple.coarse_norm(x), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(couple.fine_norm(x), std::sqrt(4.0 + 25.0), 1e-14);
  EXPECT_DOUBLE_EQ(couple.embedding_norm(), 0.5);
}

TEST(KFunctional, ZeroVectorIsZeroEverywhere) {
  const WeightedCouple couple(EigenSpectrum({0.5, 0.1}));
  const std::vector<double> z{0.0, 0.0};
  for (double t : {1e-8, 0.1, 1.0, 1e6}) EXPECT_EQ(k_functional(z, t, couple), 0.0);
}

TEST(KFunctional, OneDimensionalClosedForm) {
  const WeightedCouple couple(EigenSpectrum({0.09}));
  const std::vector<double> x{-2.0};
  for (double t : {1e-4, 0.1, 0.29, 0.3, 0.31, 1.0, 100.0}) {
    EXPECT_LE(rel_diff(k_functional(x, t, couple), one_dim_k(-2.0, 0.09, t)), 1e-12) << t;
  }
}

TEST(KFunctional, TwoSidedBoundsAndConcavity) {
  auto rng = testing::make_rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = random_size(rng, 1, 30);
    const WeightedCouple couple(random_spectrum(rng, n));
    const auto x = random_coeffs(rng, n);
    const double coarse = couple.coarse_norm(x);
    const double fine = couple.fine_norm(x);
    double previous_k = 0.0;
    double previous_ratio = INFINITY;
    for (double lt = -5.0; lt <= 1.0; lt += 0.25) {
      const double t = std::pow(10.0, lt);
      const double k = k_functional(x, t, couple);
      EXPECT_LE(k, std::min(coarse, t * fine) * (1 + 1e-12));
      // K(t) >= min(1, t/sqrt(mu_1)) ||x||_{E2} since ||y||_{E1} >= ||y||_{E2}/sqrt(mu_1)
      EXPECT_GE(k, std::min(1.0, t / couple.embedding_norm()) * coarse * (1 - 1e-12));
      EXPECT_GE(k, previous_k * (1 - 1e-12));
      EXPECT_LE(k / t, previous_ratio * (1 + 1e-12));
      previous_k = k;
      previous_ratio = k / t;
    }
  }
}

TEST(KRegimes, OrderedInsideSpectralRange) {
  auto rng = testing::make_rng(32);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = random_size(rng, 1, 40);
    const WeightedCouple couple(random_spectrum(rng, n));
    const auto x = random_coeffs(rng, n);
    const auto reg = k_regimes(x, couple);
    const auto& mu = couple.spectrum();
    EXPECT_LE(std::sqrt(mu.bottom()), reg.t_lower * (1 + 1e-14));
    EXPECT_LE(reg.t_lower, reg.t_upper * (1 + 1e-14));
    EXPECT_LE(reg.t_upper, std::sqrt(mu.top()) * (1 + 1e-14));
    // exact linear and constant regimes
    const double tl = reg.t_lower * 0.5;
    const double tu = reg.t_upper * 2.0;
    EXPECT_LE(rel_diff(k_functional(x, tl, couple), tl * couple.fine_norm(x)), 1e-12);
    EXPECT_LE(rel_diff(k_functional(x, tu, couple), couple.coarse_norm(x)), 1e-12);
  }
}

TEST(KRegimes, ZeroVectorIsDegenerate) {
  const WeightedCouple couple(EigenSpectrum({0.5}));
  const std::vector<double> z{0.0};
  EXPECT_THROW(k_regimes(z, couple), DegenerateInputError);
}

TEST(QuadratureGrid, DefaultCoversSpectrumAndValidates) {
  const EigenSpectrum mu({0.8, 1e-6});
  const auto g = QuadratureGrid::default_for(mu);
  EXPECT_LT(g.t_min, std::sqrt(1e-6));
  EXPECT_GT(g.t_max, std::sqrt(0.8));
  EXPECT_NO_THROW(g.validate());
  EXPECT_THROW((QuadratureGrid{1.0, 0.5, 32}.validate()), ParameterError);
  EXPECT_THROW((QuadratureGrid{0.0, 1.0, 32}.validate()), ParameterError);
  EXPECT_THROW((QuadratureGrid{1e-3, 1.0, 0}.validate()), ParameterError);
}

TEST(KProfile, WindowTooNarrowIsTruncation) {
  const WeightedCouple couple(EigenSpectrum({0.5, 1e-4}));
  const std::vector<double> x{1.0, 1.0};
  EXPECT_THROW(k_profile(x, couple, QuadratureGrid{0.1, 10.0, 32}), TruncationError);
}

TEST(KProfile, EndpointsAreExactRegimeValues) {
  const WeightedCouple couple(EigenSpectrum({0.7, 0.2, 0.003}));
  const std::vector<double> x{0.3, -1.0, 2.0};
  const auto prof = k_profile(x, couple, QuadratureGrid::default_for(couple.spectrum()));
  ASSERT_GE(prof.t.size(), 2u);
  EXPECT_DOUBLE_EQ(prof.t.front(), prof.t_lower);
  EXPECT_DOUBLE_EQ(prof.t.back(), prof.t_upper);
  EXPECT_LE(rel_diff(prof.k.front(), prof.t_lower * couple.fine_norm(x)), 1e-15);
  EXPECT_LE(rel_diff(prof.k.back(), couple.coarse_norm(x)), 1e-15);
  EXPECT_TRUE(std::is_sorted(prof.t.begin(), prof.t.end()));
  EXPECT_EQ(prof.weights.front(), 0.0);
  EXPECT_EQ(prof.weights.back(), 0.0);
}

TEST(InterpNorm, OneDimensionalClosedForm) {
  const WeightedCouple couple(EigenSpectrum({0.09}));
  const std::vector<double> x{1.7};
  const auto grid = QuadratureGrid::default_for(couple.spectrum());
  for (double theta : testing::standard_thetas()) {
    for (const auto& r : testing::standard_fine_indices()) {
      const double v = interp_norm(x, PowerParams(theta, r), couple, grid);
      EXPECT_LE(rel_diff(v, one_dim_interp(1.7, 0.09, theta, r)), 1e-12)
          << theta << " " << r.to_string();
    }
  }
}

TEST(InterpNorm, ZeroVectorIsZero) {
  const WeightedCouple couple(EigenSpectrum({0.5, 0.25}));
  const std::vector<double> z{0.0, 0.0};
  const auto grid = QuadratureGrid::default_for(couple.spectrum());
  EXPECT_EQ(interp_norm(z, PowerParams(0.5, FineIndex(2.0)), couple, grid), 0.0);
}

TEST(InterpNorm, AdaptivePanelsConvergeFromAnyStartingDensity) {
  auto rng = testing::make_rng(33);
  const WeightedCouple couple(random_spectrum(rng, 50, 1e-8));
  const auto x = random_coeffs(rng, 50);
  auto reference = QuadratureGrid::default_for(couple.spectrum());
  reference.points_per_decade = 128;
  for (const auto& r : testing::standard_fine_indices()) {
    const PowerParams p(0.4, r);
    const double ref = interp_norm(x, p, couple, reference);
    for (int ppd : {4, 8, 16, 32}) {
      auto g = reference;
      g.points_per_decade = ppd;
      EXPECT_LE(rel_diff(interp_norm(x, p, couple, g), ref), 1e-12) << r.to_string() << " ppd " << ppd;
    }
  }
}

TEST(GilbertNorm, SingleBlockClosedForm) {
  const WeightedCouple couple(EigenSpectrum({0.3, 0.3}));
  const std::vector<double> x{3.0, 4.0};
  const PowerParams p(0.6, FineIndex(1.0));
  // mu^{-1/2} = 1.826 lies in (1, 2] (j = 0 for s = 2) and in (sqrt2, 2]
  // (j = -1 for s = sqrt2)
  EXPECT_NEAR(gilbert_norm(x, p, 2.0, couple), 5.0, 1e-14);
  EXPECT_NEAR(gilbert_norm(x, p, std::sqrt(2.0), couple), 5.0 * std::pow(2.0, 0.3), 1e-14);
  EXPECT_THROW(gilbert_norm(x, p, 1.0, couple), ParameterError);
}

TEST(GilbertNorm, ZeroIsZero) {
  const WeightedCouple couple(EigenSpectrum({0.6, 0.5, 0.1}));
  const std::vector<double> z{0.0, 0.0, 0.0};
  EXPECT_EQ(gilbert_norm(z, PowerParams(0.5, FineIndex(1.0)), std::sqrt(2.0), couple), 0.0);
}

TEST(GilbertNorm, WithinFactorTwoOfPowerNorm) {
  {
    const WeightedCouple couple(EigenSpectrum({0.6, 0.5, 0.1}));
    const std::vector<double> x{1.0, 1.0, 1.0};
    const PowerParams p(0.999, FineIndex(1.0));
    const double g = gilbert_norm(x, p, std::sqrt(2.0), couple);
    const double pn = power_norm(x, couple.spectrum(), p);
    EXPECT_LE(g, 2.0 * pn);
    EXPECT_LE(pn, 2.0 * g);
  }
  auto rng = testing::make_rng(34);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = random_size(rng, 1, 60);
    const WeightedCouple couple(random_spectrum(rng, n, 1e-10));
    const auto x = random_coeffs(rng, n);
    for (double theta : testing::standard_thetas()) {
      for (const auto& r : testing::standard_fine_indices()) {
        const PowerParams p(theta, r);
        const double ratio = power_norm(x, couple.spectrum(), p) / gilbert_norm(x, p, std::sqrt(2.0), couple);
        EXPECT_GE(ratio, 0.5);
        EXPECT_LE(ratio, 2.0);
      }
    }
  }
}

TEST(EquivalenceReport, CanonicalVectorsHaveBoundedSpread) {
  const WeightedCouple couple(EigenSpectrum({0.5, 0.25, 0.125}));
  const std::vector<CoeffSeq> samples{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  const auto rep = equivalence_report(samples, PowerParams(0.5, FineIndex(1.0)), couple,
                                      QuadratureGrid::default_for(couple.spectrum()));
  EXPECT_EQ(rep.sample_count, 3u);
  EXPECT_LE(rep.spread(), 10.0);
  // every canonical vector is a one-dimensional instance: ratio 1/(theta(1-theta)) = 4
  for (double ratio : rep.ratios) EXPECT_NEAR(ratio, 4.0, 1e-11);
}

TEST(EquivalenceReport, DuplicatesAndZeroSamples) {
  const WeightedCouple couple(EigenSpectrum({0.9, 0.1, 0.01}));
  const CoeffSeq s{0.3, -0.2, 1.0};
  const std::vector<CoeffSeq> samples{s, {0, 0, 0}, s};
  const auto rep = equivalence_report(samples, PowerParams(0.25, FineIndex(4.0)), couple,
                                      QuadratureGrid::default_for(couple.spectrum()));
  EXPECT_EQ(rep.sample_count, 2u);
  ASSERT_EQ(rep.ratios.size(), 3u);
  EXPECT_TRUE(std::isnan(rep.ratios[1]));
  EXPECT_EQ(rep.ratios[0], rep.ratios[2]);

  const std::vector<CoeffSeq> zeros{{0, 0, 0}};
  EXPECT_THROW(equivalence_report(zeros, PowerParams(0.25, FineIndex(4.0)), couple,
                                  QuadratureGrid::default_for(couple.spectrum())),
               DegenerateInputError);
}

TEST(EquivalenceReport, SharedProfilesMatchSingleCells) {
  auto rng = testing::make_rng(35);
  const WeightedCouple couple(random_spectrum(rng, 20));
  std::vector<CoeffSeq> samples;
  for (int k = 0; k < 5; ++k) samples.push_back(random_coeffs(rng, 20));
  const std::vector<PowerParams> cells{PowerParams(0.25, FineIndex(1.0)),
                                       PowerParams(0.75, FineIndex::infinity())};
  const auto grid = QuadratureGrid::default_for(couple.spectrum());
  const auto reps = equivalence_reports(samples, cells, couple, grid);
  ASSERT_EQ(reps.size(), 2u);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto single = equivalence_report(samples, cells[c], couple, grid);
    EXPECT_EQ(single.ratios, reps[c].ratios);
  }
}

}  // namespace
}  // namespace powerspace
