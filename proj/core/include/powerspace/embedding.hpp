#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "powerspace/spectrum.hpp"

namespace powerspace {

/// Eigenfunction values on sample points: values(k, i) = e_i(x_k), with the
/// quadrature weights of the discrete measure.
class SampledEigenbasis {
 public:
  /// Throws ParameterError on shape mismatch or non-positive weights.
  SampledEigenbasis(std::vector<double> points, std::vector<double> quad_weights,
                    EigenSpectrum spectrum, Eigen::MatrixXd values);

  const std::vector<double>& points() const noexcept { return points_; }
  const std::vector<double>& quad_weights() const noexcept { return quad_weights_; }
  const EigenSpectrum& spectrum() const noexcept { return spectrum_; }
  const Eigen::MatrixXd& values() const noexcept { return values_; }

  std::size_t point_count() const noexcept { return points_.size(); }
  std::size_t function_count() const noexcept { return spectrum_.size(); }

  /// Restriction to a subset of the sample points (weights kept as is).
  SampledEigenbasis restricted_to(std::span<const std::size_t> point_indices) const;

  /// Exact (bitwise value) equality of every field.
  friend bool operator==(const SampledEigenbasis& a, const SampledEigenbasis& b);

 private:
  std::vector<double> points_;
  std::vector<double> quad_weights_;
  EigenSpectrum spectrum_;
  Eigen::MatrixXd values_;
};

/// Deviation of the discrete Gramian sum_k w_k e_i(x_k) e_l(x_k) from the
/// identity.
struct OnsDiagnostics {
  double max_offdiagonal = 0.0;
  double max_diagonal_deviation = 0.0;
  std::size_t worst_column = 0;  ///< 0-based column with the largest deviation

  double worst() const noexcept { return std::max(max_offdiagonal, max_diagonal_deviation); }
};

OnsDiagnostics ons_diagnostics(const SampledEigenbasis& basis);

inline constexpr double kDefaultOnsTol = 1e-6;

/// || (e_i(x_k) mu_i^theta)_i ||_{(mu,theta,r')}.
double pointwise_weighted_norm(const SampledEigenbasis& basis, std::size_t point,
                               const PowerParams& params);

struct EmbeddingReport {
  double kappa_hat;
  std::size_t argmax_point;
  std::vector<double> per_point;
  PowerParams params;
};

/// Sample maximum of the pointwise weighted norms, the surrogate of the
/// essential supremum. Throws BasisQualityError when the basis is not
/// orthonormal within ons_tol.
EmbeddingReport embedding_constant(const SampledEigenbasis& basis, const PowerParams& params,
                                   double ons_tol = kDefaultOnsTol);

struct SupNormCheck {
  double sup_value;  ///< max_k |sum_i b_i e_i(x_k)|
  double bound;      ///< kappa_hat ||b||_{(mu,theta,r)}
};

/// Throws InvariantViolation if sup_value exceeds bound beyond rounding.
SupNormCheck sup_norm_bound_check(std::span<const double> b, const SampledEigenbasis& basis,
                                  const EmbeddingReport& report);
SupNormCheck sup_norm_bound_check(std::span<const double> b, const SampledEigenbasis& basis,
                                  const PowerParams& params);

struct SeriesEvaluation {
  std::vector<double> values;  ///< partial sums at the requested points
  std::size_t terms = 0;       ///< number of leading coefficients summed
  double tail_bound = 0.0;     ///< kappa_hat ||(b_i 1_{i > terms})||_{(mu,theta,r)}
};

/// Point values of sum_i b_i e_i(x) with a certified uniform remainder: the
/// shortest prefix whose tail bound is <= tail_tol is summed. Throws
/// TruncationError if no prefix of at most max_terms coefficients meets it.
SeriesEvaluation evaluate_function(std::span<const double> b, const SampledEigenbasis& basis,
                                   const EmbeddingReport& report,
                                   std::span<const std::size_t> points, double tail_tol,
                                   std::optional<std::size_t> max_terms = std::nullopt);

}  // namespace powerspace
