#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "powerspace/spectrum.hpp"

namespace powerspace {

enum class FilterKind { tikhonov, landweber, cutoff };

/// Spectral filter g_lambda. Landweber is parameterised by its iteration
/// count t, with lambda = 1/t.
class FilterSpec {
 public:
  /// g(mu) = 1/(lambda + mu), lambda in (0,1].
  static FilterSpec tikhonov(double lambda);
  /// g(mu) = sum_{i<t} (1-mu)^i, t >= 1.
  static FilterSpec landweber(std::size_t t);
  /// g(mu) = 1/mu for mu >= lambda, 0 otherwise; lambda in (0,1].
  static FilterSpec cutoff(double lambda);
  /// Landweber maps lambda to t = max(1, round(1/lambda)).
  static FilterSpec from_lambda(FilterKind kind, double lambda);

  FilterKind kind() const noexcept { return kind_; }
  double lambda() const noexcept { return lambda_; }
  /// Landweber iteration count; 0 for the other kinds.
  std::size_t iterations() const noexcept { return t_; }
  std::string name() const;

 private:
  FilterSpec(FilterKind kind, double lambda, std::size_t t) : kind_(kind), lambda_(lambda), t_(t) {}
  FilterKind kind_;
  double lambda_;
  std::size_t t_;
};

FilterKind parse_filter_kind(const std::string& name);

/// g_lambda(mu) for mu in (0,1]. Landweber uses the geometric closed form,
/// evaluated without cancellation, and returns 1 at mu = 1. Throws
/// ParameterError for mu outside (0,1].
double filter_value(const FilterSpec& spec, double mu);

/// Qualification constant C with |1 - mu g| mu^alpha lambda^{-alpha} <= C:
/// alpha^alpha (1-alpha)^{1-alpha} for Tikhonov (alpha <= 1), alpha^alpha
/// (at least 1) for Landweber, 1 for cutoff. Throws ParameterError beyond
/// the qualification of the filter (alpha > 1 for Tikhonov).
double qualification_bound(FilterKind kind, double alpha);

/// Largest alpha the bound is known for: 1 for Tikhonov, +inf otherwise.
double qualification_limit(FilterKind kind);

struct AdmissibilityReport {
  double sup_lambda_g = 0.0;        ///< sup |lambda g(mu)|
  double sup_mu_g = 0.0;            ///< sup |mu g(mu)|
  double sup_residual = 0.0;        ///< sup |1 - mu g(mu)|
  double sup_qualification = 0.0;  ///< sup |1 - mu g(mu)| mu^alpha lambda^{-alpha}
  double constant = 0.0;            ///< qualification_bound(kind, alpha)
  bool passed = false;
};

/// The four suprema over mu_grid x lambda_grid. Passes when they are finite,
/// lambda g and mu g are at most 1 and the qualification supremum is within
/// the filter's constant.
AdmissibilityReport admissibility_check(FilterKind kind, std::span<const double> mu_grid,
                                        std::span<const double> lambda_grid, double alpha);

/// The largest alpha in alpha_grid whose qualification supremum stays below
/// max(1, alpha^alpha); 0 when none does.
double largest_verified_alpha(FilterKind kind, std::span<const double> mu_grid,
                              std::span<const double> lambda_grid,
                              std::span<const double> alpha_grid);

/// Coefficients b_i of the target, its smoothness beta and fine index r.
struct TargetFunction {
  CoeffSeq coeffs;
  double beta;
  FineIndex r;

  /// ||b||_{(mu,beta,r)}.
  double source_norm(const EigenSpectrum& spectrum) const;
};

/// b_i = mu_i^{beta/2} i^{-(1/2 + eps)}.
TargetFunction synthetic_target(const EigenSpectrum& spectrum, double beta, FineIndex r,
                                double eps = 0.05);

/// (mu_i g(mu_i) b_i)_i.
CoeffSeq regularized_coeffs(const TargetFunction& target, const FilterSpec& spec,
                            const EigenSpectrum& spectrum);

struct MultiplierCheck {
  double lhs;         ///< ||(alpha_i b_i)||_{(mu,theta,r)}
  double rhs;         ///< sup_factor ||b||_{(mu,beta,r)}
  double sup_factor;  ///< sup_i |alpha_i| mu_i^{(beta-theta)/2}
};

/// Throws InvariantViolation if lhs > rhs (1 + 1e-12).
MultiplierCheck multiplier_bound(std::span<const double> alpha, std::span<const double> b,
                                 const EigenSpectrum& spectrum, double beta, double theta,
                                 FineIndex r);

struct ErrorReport {
  double theta;
  FineIndex r;
  double beta;
  std::string filter;
  /// lambda for Tikhonov and cutoff, t for Landweber.
  double parameter;
  /// ||((1 - mu_i g(mu_i)) b_i)||_{(mu,theta,r)}.
  double error_norm;
  double bound;
  double sup_factor;
  /// ||(mu_i g(mu_i) b_i)||_{(mu,theta,r)} and its multiplier bound.
  double solution_norm;
  double solution_bound;
  double solution_sup_factor;

  /// Both inequalities within 1e-12 relative.
  bool holds() const noexcept;
};

/// Error and solution norms in (theta, r) against the multiplier bounds with
/// the source norm in (beta, r). Requires beta, theta in (0,1).
ErrorReport error_report(const TargetFunction& target, const FilterSpec& spec,
                         const EigenSpectrum& spectrum, const PowerParams& params);

/// One report per (lambda, params) pair, ordered by lambda then params.
/// Lambdas are processed in parallel.
std::vector<ErrorReport> regularization_sweep(const TargetFunction& target, FilterKind kind,
                                              std::span<const double> lambdas,
                                              std::span<const PowerParams> params,
                                              const EigenSpectrum& spectrum);

/// Header `lambda,theta,r,beta,error_norm,bound,sup_factor`.
void write_sweep_csv(std::ostream& out, std::span<const ErrorReport> rows);

/// lambda^gamma gamma^gamma (1-gamma)^{1-gamma}, gamma in (0,1), lambda in (0,1].
double tikhonov_sup_bound(double lambda, double gamma);
/// (t/(gamma+t))^t (gamma/(gamma+t))^gamma, the exact supremum of
/// (1-mu)^t mu^gamma over (0,1); gamma > 0, t >= 1.
double landweber_sup_bound(std::size_t t, double gamma);

/// {step, 2 step, ...} up to and including 1.
std::vector<double> uniform_mu_grid(double step);
/// mu_min (1+step)^k up to 1, plus 1 itself.
std::vector<double> log_mu_grid(double mu_min, double step);

/// max over the grid of lambda mu^gamma / (lambda + mu).
double tikhonov_grid_sup(double lambda, double gamma, std::span<const double> mu_grid);
/// max over the grid of (1-mu)^t mu^gamma.
double landweber_grid_sup(std::size_t t, double gamma, std::span<const double> mu_grid);

struct RateFit {
  double slope;                 ///< least-squares slope of log error vs log lambda
  std::vector<double> lambdas;  ///< lambdas used (saturated ones excluded)
  std::vector<double> errors;
};

/// Tikhonov error decay on a target. Lambdas below saturation_factor * mu_n
/// are treated as saturated by the finite truncation and excluded. Throws
/// DegenerateInputError if fewer than two lambdas remain.
RateFit tikhonov_rate(const TargetFunction& target, const EigenSpectrum& spectrum,
                      const PowerParams& params, std::span<const double> lambdas,
                      double saturation_factor = 100.0);

}  // namespace powerspace
