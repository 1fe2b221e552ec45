#include "powerspace/embedding.hpp"

#include <cmath>
#include <sstream>

#include "powerspace/error.hpp"
#include "powerspace/summation.hpp"

namespace powerspace {

SampledEigenbasis::SampledEigenbasis(std::vector<double> points, std::vector<double> quad_weights,
                                     EigenSpectrum spectrum, Eigen::MatrixXd values)
    : points_(std::move(points)),
      quad_weights_(std::move(quad_weights)),
      spectrum_(std::move(spectrum)),
      values_(std::move(values)) {
  if (points_.empty()) throw ParameterError("sampled eigenbasis needs at least one point");
  if (quad_weights_.size() != points_.size()) {
    throw AlignmentError("sampled eigenbasis: weights and points differ in length");
  }
  if (static_cast<std::size_t>(values_.rows()) != points_.size() ||
      static_cast<std::size_t>(values_.cols()) != spectrum_.size()) {
    throw AlignmentError("sampled eigenbasis: value matrix must be points x functions");
  }
  for (double w : quad_weights_) {
    if (!(w > 0.0) || !std::isfinite(w)) throw ParameterError("quadrature weights must be positive");
  }
  if (!values_.allFinite()) throw ParameterError("eigenfunction values must be finite");
}

bool operator==(const SampledEigenbasis& a, const SampledEigenbasis& b) {
  return a.points_ == b.points_ && a.quad_weights_ == b.quad_weights_ &&
         a.spectrum_ == b.spectrum_ && a.values_.rows() == b.values_.rows() &&
         a.values_.cols() == b.values_.cols() && a.values_ == b.values_;
}

SampledEigenbasis SampledEigenbasis::restricted_to(std::span<const std::size_t> point_indices) const {
  std::vector<double> pts;
  std::vector<double> wts;
  Eigen::MatrixXd vals(static_cast<Eigen::Index>(point_indices.size()), values_.cols());
  for (std::size_t r = 0; r < point_indices.size(); ++r) {
    const std::size_t k = point_indices[r];
    if (k >= point_count()) throw ParameterError("point index out of range");
    pts.push_back(points_[k]);
    wts.push_back(quad_weights_[k]);
    vals.row(static_cast<Eigen::Index>(r)) = values_.row(static_cast<Eigen::Index>(k));
  }
  return SampledEigenbasis(std::move(pts), std::move(wts), spectrum_, std::move(vals));
}

OnsDiagnostics ons_diagnostics(const SampledEigenbasis& basis) {
  const Eigen::Map<const Eigen::VectorXd> w(basis.quad_weights().data(),
                                            static_cast<Eigen::Index>(basis.point_count()));
  const Eigen::MatrixXd gram = basis.values().transpose() * w.asDiagonal() * basis.values();
  OnsDiagnostics d;
  double worst = -1.0;
  for (Eigen::Index i = 0; i < gram.cols(); ++i) {
    double column_worst = std::abs(gram(i, i) - 1.0);
    d.max_diagonal_deviation = std::max(d.max_diagonal_deviation, column_worst);
    for (Eigen::Index l = 0; l < gram.rows(); ++l) {
      if (l == i) continue;
      d.max_offdiagonal = std::max(d.max_offdiagonal, std::abs(gram(l, i)));
      column_worst = std::max(column_worst, std::abs(gram(l, i)));
    }
    if (column_worst > worst) {
      worst = column_worst;
      d.worst_column = static_cast<std::size_t>(i);
    }
  }
  return d;
}

namespace {

std::vector<double> weighted_row(const SampledEigenbasis& basis, std::size_t point, double theta) {
  if (point >= basis.point_count()) throw ParameterError("point index out of range");
  const auto mu = basis.spectrum().values();
  std::vector<double> a(basis.function_count());
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = basis.values()(static_cast<Eigen::Index>(point), static_cast<Eigen::Index>(i)) *
           std::pow(mu[i], theta);
  }
  return a;
}

}  // namespace

double pointwise_weighted_norm(const SampledEigenbasis& basis, std::size_t point,
                               const PowerParams& params) {
  return power_norm(weighted_row(basis, point, params.theta()), basis.spectrum(), params.dual());
}

EmbeddingReport embedding_constant(const SampledEigenbasis& basis, const PowerParams& params,
                                   double ons_tol) {
  const OnsDiagnostics ons = ons_diagnostics(basis);
  if (ons.worst() > ons_tol) {
    std::ostringstream os;
    os << "eigenbasis is not orthonormal within " << ons_tol << ": deviation " << ons.worst()
       << " (column " << ons.worst_column + 1 << ")";
    throw BasisQualityError(os.str());
  }
  const BlockPartition part = partition_blocks(basis.spectrum());
  const PowerParams dual = params.dual();
  EmbeddingReport report{0.0, 0, std::vector<double>(basis.point_count()), params};
  for (std::size_t k = 0; k < basis.point_count(); ++k) {
    report.per_point[k] = power_norm(weighted_row(basis, k, params.theta()), part, dual);
    if (report.per_point[k] > report.kappa_hat) {
      report.kappa_hat = report.per_point[k];
      report.argmax_point = k;
    }
  }
  return report;
}

namespace {

double series_value(std::span<const double> b, const SampledEigenbasis& basis, std::size_t point,
                    std::size_t terms) {
  CompensatedSum acc;
  for (std::size_t i = 0; i < terms; ++i) {
    acc.add(b[i] * basis.values()(static_cast<Eigen::Index>(point), static_cast<Eigen::Index>(i)));
  }
  return acc.value();
}

}  // namespace

SupNormCheck sup_norm_bound_check(std::span<const double> b, const SampledEigenbasis& basis,
                                  const EmbeddingReport& report) {
  require_aligned(b.size(), basis.function_count(), "sup_norm_bound_check");
  double sup = 0.0;
  for (std::size_t k = 0; k < basis.point_count(); ++k) {
    sup = std::max(sup, std::abs(series_value(b, basis, k, b.size())));
  }
  const double bound = report.kappa_hat * power_norm(b, basis.spectrum(), report.params);
  if (sup > bound + 1e-12 * std::max(bound, sup)) {
    throw InvariantViolation("sup-norm bound violated: " + std::to_string(sup) + " > " +
                             std::to_string(bound));
  }
  return SupNormCheck{sup, bound};
}

SupNormCheck sup_norm_bound_check(std::span<const double> b, const SampledEigenbasis& basis,
                                  const PowerParams& params) {
  return sup_norm_bound_check(b, basis, embedding_constant(basis, params));
}

SeriesEvaluation evaluate_function(std::span<const double> b, const SampledEigenbasis& basis,
                                   const EmbeddingReport& report,
                                   std::span<const std::size_t> points, double tail_tol,
                                   std::optional<std::size_t> max_terms) {
  require_aligned(b.size(), basis.function_count(), "evaluate_function");
  if (!(tail_tol >= 0.0)) throw ParameterError("tail tolerance must be non-negative");
  if (!std::isfinite(report.kappa_hat)) throw TruncationError("embedding constant is not finite");
  for (std::size_t k : points) {
    if (k >= basis.point_count()) throw ParameterError("point index out of range");
  }

  const BlockPartition part = partition_blocks(basis.spectrum());
  const std::size_t limit = std::min(max_terms.value_or(b.size()), b.size());
  std::vector<double> tail(b.begin(), b.end());
  SeriesEvaluation out;
  for (std::size_t n = 0;; ++n) {
    // tail holds b with the first n entries cleared
    const double bound = report.kappa_hat * power_norm(tail, part, report.params);
    if (bound <= tail_tol) {
      out.terms = n;
      out.tail_bound = bound;
      break;
    }
    if (n == limit) {
      throw TruncationError("tail bound " + std::to_string(bound) + " above tolerance after " +
                            std::to_string(n) + " terms");
    }
    tail[n] = 0.0;
  }
  out.values.reserve(points.size());
  for (std::size_t k : points) out.values.push_back(series_value(b, basis, k, out.terms));
  return out;
}

}  // namespace powerspace
