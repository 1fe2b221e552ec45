#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "powerspace/spectrum.hpp"

namespace powerspace {

/// The couple (E2, E1) = (l^2, l^2(mu^{-1})) on a finite index set. It stands
/// in for (L^2(nu), [H]~) through the eigen-coefficient isometry.
class WeightedCouple {
 public:
  explicit WeightedCouple(EigenSpectrum spectrum);

  const EigenSpectrum& spectrum() const noexcept { return spectrum_; }
  std::size_t size() const noexcept { return spectrum_.size(); }

  /// ||x||_{E2}, the unweighted l^2 norm.
  double coarse_norm(std::span<const double> x) const;
  /// ||y||_{E1} = (sum y_i^2 / mu_i)^{1/2}.
  double fine_norm(std::span<const double> y) const;
  /// ||E1 -> E2|| = sqrt(mu_1).
  double embedding_norm() const noexcept;

 private:
  EigenSpectrum spectrum_;
};

/// Integration window and node density for interpolation norms. The window
/// must contain the transition range of K (see k_regimes); outside it K is
/// integrated in closed form.
struct QuadratureGrid {
  double t_min;
  double t_max;
  /// Starting density in nodes per decade of t, in panels of 8
  /// Gauss-Legendre points. Panels are halved until the integral of log K
  /// over each one changes by less than 1e-11 per unit of log t.
  int points_per_decade;

  /// [1e-6 sqrt(mu_n), 1e6 sqrt(mu_1)] at 32 points per decade.
  static QuadratureGrid default_for(const EigenSpectrum& spectrum);

  /// Throws ParameterError when the window or density is invalid.
  void validate() const;
};

/// K(x,t) = t ||x||_{E1} exactly for t <= t_lower and K(x,t) = ||x||_{E2}
/// exactly for t >= t_upper, with
///   t_lower = ||x||_{E1} / ||x/mu||_{l^2},  t_upper = ||sqrt(mu) x||_{l^2} / ||x||_{E2}.
/// Always sqrt(mu_n) <= t_lower <= t_upper <= sqrt(mu_1).
struct KRegimes {
  double t_lower;
  double t_upper;
};

/// Throws DegenerateInputError for x = 0.
KRegimes k_regimes(std::span<const double> x, const WeightedCouple& couple);

/// K(x,t) = inf_y ||x-y||_{E2} + t ||y||_{E1}, to relative accuracy tol.
///
/// The minimiser lies on y(rho) = x / (1 + rho/mu); along that path the
/// stationarity ratio rho ||y||_{E1} / ||x-y||_{E2} is non-decreasing in rho,
/// so the objective is unimodal and its minimiser is the root of a monotone
/// function, found by bisection in log(rho). For t below the root range the
/// answer is exactly t ||x||_{E1}, above it exactly ||x||_{E2}.
///
/// Throws NumericalFailure (carrying the best value seen) when the search
/// fails to converge.
double k_functional(std::span<const double> x, double t, const WeightedCouple& couple,
                    double tol = 1e-12);

/// K(x, .) on the transition range [t_lower, t_upper], together with the two
/// endpoint norms that govern the closed-form tails.
struct KProfile {
  CoeffSeq x;
  QuadratureGrid grid;
  double t_lower = 0.0;
  double t_upper = 0.0;
  /// Ascending nodes, t_lower and t_upper included.
  std::vector<double> t;
  std::vector<double> k;
  /// Quadrature weights in d(log t); zero at the two endpoints.
  std::vector<double> weights;
  double coarse_norm = 0.0;
  double fine_norm = 0.0;
};

/// Throws TruncationError when [t_lower, t_upper] is not inside the grid
/// window.
KProfile k_profile(std::span<const double> x, const WeightedCouple& couple,
                   const QuadratureGrid& grid);

/// ||x||_{[E2,E1]_{theta,r}} from a profile. For r < inf: composite
/// Gauss-Legendre in log t on [t_lower, t_upper] plus the exact integrals of
/// the linear and constant regimes. For r = inf: the maximum of t^{-theta} K,
/// attained in [t_lower, t_upper], located on the nodes and refined by
/// golden section between the neighbours of the best node.
double interp_norm(const KProfile& profile, const WeightedCouple& couple,
                   const PowerParams& params);

double interp_norm(std::span<const double> x, const PowerParams& params,
                   const WeightedCouple& couple, const QuadratureGrid& grid);

/// Equivalent block norm for weighted l^2 couples with base s > 1:
/// (sum_j (s^{-j theta} ||x 1_{M~_j}||_{l^2})^r)^{1/r}, with
/// M~_j = { i : s^{-j} < mu_i^{-1/2} <= s^{-j+1} } (sup over j for r = inf).
double gilbert_norm(std::span<const double> x, const PowerParams& params, double base,
                    const WeightedCouple& couple);

struct EquivalenceReport {
  /// Non-zero samples, the ones that enter the ratio range.
  std::size_t sample_count = 0;
  double ratio_min = 0.0;
  double ratio_max = 0.0;
  PowerParams params;
  QuadratureGrid grid;
  /// interp_norm / power_norm per sample; NaN for zero samples.
  std::vector<double> ratios;

  double spread() const noexcept { return ratio_max / ratio_min; }
};

/// Ratio interp_norm / power_norm over the samples. Zero samples are skipped.
/// Throws InconsistencyError if power_norm vanishes while interp_norm does
/// not, DegenerateInputError if no non-zero sample remains.
EquivalenceReport equivalence_report(std::span<const CoeffSeq> samples,
                                     const PowerParams& params, const WeightedCouple& couple,
                                     const QuadratureGrid& grid);

/// Several parameter cells over the same samples; K profiles are computed
/// once per sample and shared between cells.
std::vector<EquivalenceReport> equivalence_reports(std::span<const CoeffSeq> samples,
                                                   std::span<const PowerParams> cells,
                                                   const WeightedCouple& couple,
                                                   const QuadratureGrid& grid);

}  // namespace powerspace
