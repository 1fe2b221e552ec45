// Acceptance suite: one line per criterion, PASS or FAIL, with the measured
// quantity next to its pinned tolerance. Exit status 0 only if all pass.

#include <chrono>
#include <limits>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "powerspace/dualsum.hpp"
#include "powerspace/embedding.hpp"
#include "powerspace/error.hpp"
#include "powerspace/kernelmodel.hpp"
#include "powerspace/kfunctional.hpp"
#include "powerspace/regularize.hpp"
#include "powerspace/spectrum.hpp"
#include "powerspace/summation.hpp"
#include "random_instances.hpp"

namespace ps = powerspace;
using ps::testing::random_coeffs;
using ps::testing::random_size;
using ps::testing::random_spectrum;
using ps::testing::rel_diff;

namespace {

// Pinned tolerances and limits.
constexpr double kIdentityTol = 1e-12;
constexpr double kIdentitySeconds = 1.0;
constexpr std::size_t kIdentityInstances = 1000;
constexpr std::size_t kHolderInstancesPerCell = 10000;
constexpr double kHolderTol = 1e-12;
constexpr double kHolderSeconds = 10.0;
constexpr std::size_t kDualityVectorsPerCell = 100;
constexpr std::size_t kDualityProbesPerCell = 100000;
constexpr double kAttainmentTol = 1e-10;
constexpr double kProbeTol = 1e-12;
constexpr std::size_t kEquivPoints = 256;
constexpr std::size_t kEquivSamples = 100;
constexpr double kEquivSpreadLimit = 10.0;
constexpr double kEquivGrowthLimit = 0.05;
constexpr double kEquivSeconds = 300.0;
constexpr double kGilbertFactor = 2.0;
constexpr double kEmbeddingTol = 1e-8;
constexpr std::size_t kEmbeddingChecks = 1000;
constexpr double kTikhonovGridStep = 1e-5;
// Grid points can land on the maximiser, where both sides agree up to the
// rounding of pow.
constexpr double kTikhonovRounding = 1e-14;
constexpr double kRateSlack = 0.05;
constexpr std::size_t kRateSize = 4096;
constexpr double kLandweberTol = 1e-6;
constexpr double kLandweberLogStep = 1e-5;
constexpr double kMercerTol = 0.02;
constexpr std::size_t kMercerPoints = 512;
constexpr double kBoundTol = 1e-12;

const std::vector<double> kThetas{0.25, 0.5, 0.75};

struct Outcome {
  bool passed;
  std::string detail;
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<double> dyadic_lambdas() {
  std::vector<double> out;
  for (int k = 0; k <= 12; ++k) out.push_back(std::ldexp(1.0, -k));
  return out;
}

ps::EigenSpectrum power_law(std::size_t n) {
  std::vector<double> mu(n);
  for (std::size_t i = 0; i < n; ++i) mu[i] = 1.0 / static_cast<double>((i + 1) * (i + 1));
  return ps::EigenSpectrum(mu);
}

ps::NystromDecomposition bridge_decomposition(std::size_t n) {
  const auto m = ps::QuadratureMeasure::uniform(n);
  return ps::nystrom_eig(ps::build_gram(ps::KernelSpec::brownian_bridge(), m), m);
}

Outcome r2_identity() {
  auto rng = ps::testing::make_rng(1001);
  std::uniform_real_distribution<double> theta_dist(1e-3, 1.0 - 1e-3);
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (std::size_t k = 0; k < kIdentityInstances; ++k) {
    const std::size_t n = random_size(rng, 1, 64);
    const auto mu = random_spectrum(rng, n, 1e-12);
    const auto b = random_coeffs(rng, n);
    const double theta = theta_dist(rng);
    ps::CompensatedSum direct;
    for (std::size_t i = 0; i < n; ++i) direct.add(b[i] * b[i] * std::pow(mu[i], -theta));
    worst = std::max(worst, rel_diff(ps::power_norm(b, mu, ps::PowerParams(theta, ps::FineIndex(2.0))),
                                     std::sqrt(direct.value())));
  }
  const double elapsed = seconds_since(start);
  return {worst <= kIdentityTol && elapsed < kIdentitySeconds,
          fmt("max rel err %.2e (tol %.0e), %.3f s (limit %.0f s)", worst, kIdentityTol, elapsed,
              kIdentitySeconds)};
}

Outcome holder_suite() {
  auto rng = ps::testing::make_rng(1002);
  const auto start = std::chrono::steady_clock::now();
  std::size_t violations = 0;
  double worst_ratio = 0.0;
  for (double theta : kThetas) {
    for (const auto& r : ps::testing::standard_fine_indices()) {
      const ps::PowerParams p(theta, r);
      for (std::size_t k = 0; k < kHolderInstancesPerCell; ++k) {
        const std::size_t n = random_size(rng, 1, 48);
        const auto mu = random_spectrum(rng, n, 1e-10);
        const auto a = random_coeffs(rng, n);
        const auto b = random_coeffs(rng, n);
        const double lhs = ps::dual_pairing(a, b, mu, theta).absolute_value_sum;
        const double rhs = ps::power_norm(a, mu, p.dual()) * ps::power_norm(b, mu, p);
        worst_ratio = std::max(worst_ratio, lhs / rhs);
        if (lhs > rhs * (1 + kHolderTol)) ++violations;
      }
    }
  }
  const double elapsed = seconds_since(start);
  return {violations == 0 && elapsed < kHolderSeconds,
          fmt("%.0f violations in %.0f instances, max lhs/rhs %.15f, %.2f s", static_cast<double>(violations),
              static_cast<double>(15 * kHolderInstancesPerCell), worst_ratio, elapsed)};
}

Outcome duality_attainment() {
  auto rng = ps::testing::make_rng(1003);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst_attain = 0.0;
  double worst_excess = -INFINITY;
  const std::size_t probes_per_vector = kDualityProbesPerCell / kDualityVectorsPerCell;
  for (double theta : kThetas) {
    for (double rv : {1.5, 2.0, 4.0}) {
      const ps::PowerParams p(theta, ps::FineIndex(rv));
      for (std::size_t k = 0; k < kDualityVectorsPerCell; ++k) {
        const std::size_t n = random_size(rng, 1, 32);
        const auto mu = random_spectrum(rng, n, 1e-8);
        const auto a = random_coeffs(rng, n);
        const double dual_norm = ps::power_norm(a, mu, p.dual());
        const auto ext = ps::dual_norm_extremal(a, mu, p);
        worst_attain = std::max(worst_attain, rel_diff(ext.attained, dual_norm));
        for (std::size_t q = 0; q < probes_per_vector; ++q) {
          // half the probes are uniform directions, half perturb the extremal
          std::vector<double> b(n);
          const double spread = q % 2 == 0 ? 1.0 : 1e-3 * static_cast<double>(q % 7 + 1);
          for (std::size_t i = 0; i < n; ++i) {
            b[i] = (q % 2 == 0 ? 0.0 : ext.b_star[i]) + spread * g(rng) * (q % 2 == 0 ? 1.0 : std::abs(ext.b_star[i]) + 1e-12);
          }
          const double nb = ps::power_norm(b, mu, p);
          if (nb == 0.0) continue;
          const double v = ps::dual_pairing(a, b, mu, theta).value / nb;
          worst_excess = std::max(worst_excess, (v - dual_norm) / dual_norm);
        }
      }
    }
  }
  return {worst_attain <= kAttainmentTol && worst_excess <= kProbeTol,
          fmt("attainment rel err %.2e (tol %.0e), max probe excess %.2e (tol %.0e)", worst_attain,
              kAttainmentTol, worst_excess, kProbeTol)};
}

Outcome norm_equivalence() {
  const auto start = std::chrono::steady_clock::now();
  const auto dec = bridge_decomposition(kEquivPoints);
  const ps::WeightedCouple couple(dec.spectrum());
  const auto grid = ps::QuadratureGrid::default_for(dec.spectrum());
  double worst_spread = 0.0;
  double worst_growth = -INFINITY;
  std::string worst_cell;
  for (std::size_t ti = 0; ti < kThetas.size(); ++ti) {
    const double theta = kThetas[ti];
    std::mt19937_64 rng(1004 + ti);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<ps::CoeffSeq> samples(2 * kEquivSamples, ps::CoeffSeq(dec.spectrum().size()));
    for (auto& s : samples) {
      for (std::size_t i = 0; i < s.size(); ++i) s[i] = g(rng) * std::pow(dec.spectrum()[i], theta / 2);
    }
    std::vector<ps::PowerParams> cells;
    for (const auto& r : ps::testing::standard_fine_indices()) cells.emplace_back(theta, r);
    const auto doubled = ps::equivalence_reports(samples, cells, couple, grid);
    for (std::size_t c = 0; c < doubled.size(); ++c) {
      const auto& rep = doubled[c];
      // the first half of the doubled sample set is the base set
      double lo = INFINITY, hi = 0.0;
      for (std::size_t k = 0; k < kEquivSamples; ++k) {
        lo = std::min(lo, rep.ratios[k]);
        hi = std::max(hi, rep.ratios[k]);
      }
      const double base_spread = hi / lo;
      worst_spread = std::max({worst_spread, base_spread, rep.spread()});
      if (rep.spread() / base_spread - 1.0 > worst_growth) {
        worst_growth = rep.spread() / base_spread - 1.0;
        worst_cell = fmt(" at theta %.2f", theta) + " r " + cells[c].r().to_string();
      }
    }
  }
  const double elapsed = seconds_since(start);
  return {worst_spread <= kEquivSpreadLimit && worst_growth < kEquivGrowthLimit && elapsed < kEquivSeconds,
          fmt("max spread %.4f (limit %.0f), max growth %.4f (limit %.2f)", worst_spread, kEquivSpreadLimit,
              worst_growth, kEquivGrowthLimit) +
              worst_cell +
              fmt(", %.1f s (limit %.0f s)", elapsed, kEquivSeconds)};
}

Outcome gilbert_factor() {
  auto rng = ps::testing::make_rng(1005);
  const auto bridge = bridge_decomposition(kEquivPoints);
  double lo = INFINITY, hi = 0.0;
  std::size_t instances = 0;
  for (int k = 0; k < 400; ++k) {
    const std::size_t n = k < 200 ? random_size(rng, 1, 64) : bridge.spectrum().size();
    const auto mu = k < 200 ? random_spectrum(rng, n, 1e-12) : bridge.spectrum();
    const ps::WeightedCouple couple(mu);
    const auto x = random_coeffs(rng, n);
    for (double theta : kThetas) {
      for (const auto& r : ps::testing::standard_fine_indices()) {
        const ps::PowerParams p(theta, r);
        const double ratio = ps::power_norm(x, mu, p) / ps::gilbert_norm(x, p, std::numbers::sqrt2, couple);
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
        ++instances;
      }
    }
  }
  return {lo >= 1.0 / kGilbertFactor && hi <= kGilbertFactor,
          fmt("power/gilbert in [%.6f, %.6f] over %.0f instances (allowed [0.5, 2])", lo, hi,
              static_cast<double>(instances))};
}

Outcome embedding_criterion() {
  auto rng = ps::testing::make_rng(1006);
  std::vector<ps::SampledEigenbasis> bases;
  bases.push_back(bridge_decomposition(128).basis);
  {
    const auto m = ps::QuadratureMeasure::gauss_legendre(64);
    ps::NystromOptions opts;
    opts.rank = 16;
    bases.push_back(ps::nystrom_eig(ps::build_gram(ps::KernelSpec::gaussian(0.2), m), m, opts).basis);
  }
  {
    const auto m = ps::QuadratureMeasure::uniform(50);
    bases.push_back(ps::nystrom_eig(ps::build_gram(ps::KernelSpec::polynomial(3), m), m).basis);
  }
  double worst = 0.0;
  double worst_check = 0.0;
  for (const auto& basis : bases) {
    const auto& mu = basis.spectrum();
    for (double theta : kThetas) {
      for (const auto& r : ps::testing::standard_fine_indices()) {
        const ps::PowerParams p(theta, r);
        const auto rep = ps::embedding_constant(basis, p);
        // dual side: at each point, evaluate the series of the unit-norm
        // maximiser of the pairing with (e_i(x_k) mu_i^theta)
        double dual_max = 0.0;
        for (std::size_t k = 0; k < basis.point_count(); ++k) {
          std::vector<double> a(mu.size());
          bool zero = true;
          for (std::size_t i = 0; i < mu.size(); ++i) {
            a[i] = basis.values()(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) * std::pow(mu[i], theta);
            zero = zero && a[i] == 0.0;
          }
          if (zero) continue;
          const auto ext = ps::dual_norm_extremal(a, mu, p);
          ps::CompensatedSum series;
          for (std::size_t i = 0; i < mu.size(); ++i) {
            series.add(ext.b_star[i] * basis.values()(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)));
          }
          dual_max = std::max(dual_max, std::abs(series.value()) / ps::power_norm(ext.b_star, mu, p));
        }
        worst = std::max(worst, rel_diff(dual_max, rep.kappa_hat));
        for (std::size_t c = 0; c < kEmbeddingChecks / 15 + 1; ++c) {
          const auto b = random_coeffs(rng, mu.size());
          const auto chk = ps::sup_norm_bound_check(b, basis, rep);
          worst_check = std::max(worst_check, chk.sup_value / chk.bound);
        }
      }
    }
  }
  const double checks = static_cast<double>(bases.size() * 15 * (kEmbeddingChecks / 15 + 1));
  return {worst <= kEmbeddingTol && worst_check <= 1.0 + 1e-12,
          fmt("dual vs kappa_hat rel err %.2e (tol %.0e); max sup/bound %.4f over %.0f random b", worst,
              kEmbeddingTol, worst_check, checks)};
}

Outcome tikhonov_bound() {
  const auto grid = ps::uniform_mu_grid(kTikhonovGridStep);
  double worst = 0.0;
  for (int gi = 1; gi <= 9; ++gi) {
    const double gamma = 0.1 * gi;
    for (double lambda : dyadic_lambdas()) {
      worst = std::max(worst, ps::tikhonov_grid_sup(lambda, gamma, grid) / ps::tikhonov_sup_bound(lambda, gamma));
    }
  }
  // rate: error in (theta, 2) of a beta-source decays like lambda^gamma
  // with gamma = (beta - theta)/2
  const auto mu = power_law(kRateSize);
  std::vector<double> lambdas;
  for (int k = 0; k <= 24; ++k) lambdas.push_back(std::ldexp(1.0, -k));
  double worst_margin = INFINITY;
  std::string rates;
  for (double beta : {0.5, 0.75, 0.95}) {
    for (double theta : {0.1, 0.25}) {
      const auto target = ps::synthetic_target(mu, beta, ps::FineIndex(2.0));
      const auto fit = ps::tikhonov_rate(target, mu, ps::PowerParams(theta, ps::FineIndex(2.0)), lambdas);
      const double gamma = (beta - theta) / 2;
      worst_margin = std::min(worst_margin, fit.slope - (gamma - kRateSlack));
    }
  }
  return {worst <= 1.0 + kTikhonovRounding && worst_margin >= 0.0,
          fmt("max grid sup / bound - 1 = %.2e (rounding allowance %.0e); min slope - (gamma - %.2f) = %.4f",
              worst - 1.0, kTikhonovRounding, kRateSlack, worst_margin)};
}

Outcome landweber_supremum() {
  double worst = 0.0;
  for (double gamma : {0.1, 0.25, 0.5, 0.75, 1.0}) {
    for (std::size_t t = 1; t <= 256; t *= 2) {
      const double peak = gamma / (gamma + static_cast<double>(t));
      const auto grid = ps::log_mu_grid(peak / 10, kLandweberLogStep);
      worst = std::max(worst, rel_diff(ps::landweber_grid_sup(t, gamma, grid), ps::landweber_sup_bound(t, gamma)));
    }
  }
  const double quarter = ps::landweber_sup_bound(1, 1.0);
  const double quarter_grid = ps::landweber_grid_sup(1, 1.0, ps::uniform_mu_grid(kTikhonovGridStep));
  const bool exact = std::abs(quarter - 0.25) <= std::numeric_limits<double>::epsilon() * 0.25 &&
                     std::abs(quarter_grid - 0.25) <= 4 * std::numeric_limits<double>::epsilon() * 0.25;
  return {worst <= kLandweberTol && exact,
          fmt("max rel err %.2e (tol %.0e); t=1 gamma=1: bound %.17g, grid %.17g", worst, kLandweberTol, quarter,
              quarter_grid)};
}

Outcome nystrom_convergence() {
  const auto dec = bridge_decomposition(kMercerPoints);
  double worst = 0.0;
  for (int i = 1; i <= 5; ++i) {
    const double exact = 1.0 / (std::numbers::pi * std::numbers::pi * i * i);
    worst = std::max(worst, std::abs(dec.spectrum()[static_cast<std::size_t>(i - 1)] - exact) / exact);
  }
  return {worst <= kMercerTol, fmt("max rel err i<=5 %.2e (tol %.2f)", worst, kMercerTol)};
}

Outcome filter_error_bound() {
  std::vector<ps::EigenSpectrum> spectra{power_law(1024), bridge_decomposition(256).spectrum()};
  std::vector<ps::PowerParams> params;
  for (double theta : kThetas) {
    for (const auto& r : ps::testing::standard_fine_indices()) params.emplace_back(theta, r);
  }
  std::size_t rows = 0, violations = 0;
  double worst = 0.0;
  for (const auto& mu : spectra) {
    for (double beta : kThetas) {
      for (const auto& r : ps::testing::standard_fine_indices()) {
        const auto target = ps::synthetic_target(mu, beta, r);
        std::vector<ps::PowerParams> same_r;
        for (const auto& p : params) {
          if (p.r() == r) same_r.push_back(p);
        }
        for (auto kind : {ps::FilterKind::tikhonov, ps::FilterKind::landweber, ps::FilterKind::cutoff}) {
          for (const auto& rep : ps::regularization_sweep(target, kind, dyadic_lambdas(), same_r, mu)) {
            ++rows;
            const double ratio = rep.error_norm / rep.bound;
            worst = std::max(worst, ratio);
            if (rep.error_norm > rep.bound * (1 + kBoundTol)) ++violations;
          }
        }
      }
    }
  }
  return {violations == 0, fmt("%.0f violations over %.0f rows, max error/bound %.15f", static_cast<double>(violations),
                               static_cast<double>(rows), worst)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"r=2 identity", r2_identity},
      {"Hoelder suite", holder_suite},
      {"duality attainment", duality_attainment},
      {"norm equivalence", norm_equivalence},
      {"Gilbert factor 2", gilbert_factor},
      {"embedding criterion", embedding_criterion},
      {"Tikhonov bound and rate", tikhonov_bound},
      {"Landweber supremum", landweber_supremum},
      {"Nystroem convergence", nystrom_convergence},
      {"filter error bound", filter_error_bound},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome out;
    try {
      out = criteria[k].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    if (!out.passed) ++failures;
    std::printf("criterion %2zu %s  %-24s %s\n", k + 1, out.passed ? "PASS" : "FAIL", criteria[k].first.c_str(),
                out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
