#include "powerspace/regularize.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "powerspace/error.hpp"
#include "powerspace/parallel.hpp"

namespace powerspace {

namespace {

void require_lambda(double lambda) {
  if (!(lambda > 0.0 && lambda <= 1.0)) {
    throw ParameterError("regularisation parameter lambda must lie in (0,1]");
  }
}

void require_unit_interval(double value, const char* what) {
  if (!(value > 0.0 && value < 1.0)) {
    throw ParameterError(std::string(what) + " must lie in (0,1)");
  }
}

}  // namespace

FilterSpec FilterSpec::tikhonov(double lambda) {
  require_lambda(lambda);
  return FilterSpec(FilterKind::tikhonov, lambda, 0);
}

FilterSpec FilterSpec::landweber(std::size_t t) {
  if (t == 0) throw ParameterError("Landweber needs t >= 1");
  return FilterSpec(FilterKind::landweber, 1.0 / static_cast<double>(t), t);
}

FilterSpec FilterSpec::cutoff(double lambda) {
  require_lambda(lambda);
  return FilterSpec(FilterKind::cutoff, lambda, 0);
}

FilterSpec FilterSpec::from_lambda(FilterKind kind, double lambda) {
  switch (kind) {
    case FilterKind::tikhonov: return tikhonov(lambda);
    case FilterKind::cutoff: return cutoff(lambda);
    case FilterKind::landweber: {
      require_lambda(lambda);
      return landweber(std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(1.0 / lambda))));
    }
  }
  throw ParameterError("unknown filter kind");
}

std::string FilterSpec::name() const {
  switch (kind_) {
    case FilterKind::tikhonov: return "tikhonov";
    case FilterKind::landweber: return "landweber";
    case FilterKind::cutoff: return "cutoff";
  }
  return "unknown";
}

FilterKind parse_filter_kind(const std::string& name) {
  if (name == "tikhonov") return FilterKind::tikhonov;
  if (name == "landweber") return FilterKind::landweber;
  if (name == "cutoff") return FilterKind::cutoff;
  throw ParameterError("unknown filter '" + name + "' (expected tikhonov, landweber or cutoff)");
}

double filter_value(const FilterSpec& spec, double mu) {
  if (!(mu > 0.0 && mu <= 1.0)) throw ParameterError("filter argument mu must lie in (0,1]");
  switch (spec.kind()) {
    case FilterKind::tikhonov: return 1.0 / (spec.lambda() + mu);
    case FilterKind::landweber: {
      if (mu == 1.0) return 1.0;
      const double t = static_cast<double>(spec.iterations());
      // (1 - (1-mu)^t) / mu without cancellation for small mu
      return -std::expm1(t * std::log1p(-mu)) / mu;
    }
    case FilterKind::cutoff: return mu >= spec.lambda() ? 1.0 / mu : 0.0;
  }
  return 0.0;
}

double qualification_limit(FilterKind kind) {
  return kind == FilterKind::tikhonov ? 1.0 : std::numeric_limits<double>::infinity();
}

double qualification_bound(FilterKind kind, double alpha) {
  if (!(alpha > 0.0)) throw ParameterError("qualification exponent alpha must be positive");
  if (alpha > qualification_limit(kind)) {
    throw ParameterError("alpha exceeds the qualification of the filter");
  }
  switch (kind) {
    case FilterKind::tikhonov:
      return alpha == 1.0 ? 1.0 : std::pow(alpha, alpha) * std::pow(1.0 - alpha, 1.0 - alpha);
    case FilterKind::landweber: return std::max(1.0, std::pow(alpha, alpha));
    case FilterKind::cutoff: return 1.0;
  }
  return 0.0;
}

namespace {

AdmissibilityReport grid_suprema(FilterKind kind, std::span<const double> mu_grid,
                                 std::span<const double> lambda_grid, double alpha) {
  if (mu_grid.empty() || lambda_grid.empty()) throw ParameterError("admissibility grids are empty");
  AdmissibilityReport rep;
  for (double lambda_in : lambda_grid) {
    const FilterSpec spec = FilterSpec::from_lambda(kind, lambda_in);
    const double lambda = spec.lambda();
    for (double mu : mu_grid) {
      const double g = filter_value(spec, mu);
      const double residual = std::abs(1.0 - mu * g);
      rep.sup_lambda_g = std::max(rep.sup_lambda_g, std::abs(lambda * g));
      rep.sup_mu_g = std::max(rep.sup_mu_g, std::abs(mu * g));
      rep.sup_residual = std::max(rep.sup_residual, residual);
      rep.sup_qualification =
          std::max(rep.sup_qualification, residual * std::pow(mu / lambda, alpha));
    }
  }
  return rep;
}

constexpr double kRelTol = 1e-12;

}  // namespace

AdmissibilityReport admissibility_check(FilterKind kind, std::span<const double> mu_grid,
                                        std::span<const double> lambda_grid, double alpha) {
  AdmissibilityReport rep = grid_suprema(kind, mu_grid, lambda_grid, alpha);
  rep.constant = qualification_bound(kind, alpha);
  const bool finite = std::isfinite(rep.sup_lambda_g) && std::isfinite(rep.sup_mu_g) &&
                      std::isfinite(rep.sup_residual) && std::isfinite(rep.sup_qualification);
  rep.passed = finite && rep.sup_lambda_g <= 1.0 + kRelTol && rep.sup_mu_g <= 1.0 + kRelTol &&
               rep.sup_qualification <= rep.constant * (1.0 + kRelTol);
  return rep;
}

double largest_verified_alpha(FilterKind kind, std::span<const double> mu_grid,
                              std::span<const double> lambda_grid,
                              std::span<const double> alpha_grid) {
  double best = 0.0;
  for (double alpha : alpha_grid) {
    if (!(alpha > 0.0)) throw ParameterError("alpha grid entries must be positive");
    const double sup = grid_suprema(kind, mu_grid, lambda_grid, alpha).sup_qualification;
    if (sup <= std::max(1.0, std::pow(alpha, alpha)) * (1.0 + kRelTol)) best = std::max(best, alpha);
  }
  return best;
}

double TargetFunction::source_norm(const EigenSpectrum& spectrum) const {
  return power_norm(coeffs, spectrum, PowerParams(beta, r));
}

TargetFunction synthetic_target(const EigenSpectrum& spectrum, double beta, FineIndex r,
                                double eps) {
  require_unit_interval(beta, "smoothness beta");
  if (!(eps > 0.0)) throw ParameterError("decay margin eps must be positive");
  CoeffSeq b(spectrum.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    b[i] = std::pow(spectrum[i], beta / 2.0) * std::pow(static_cast<double>(i + 1), -(0.5 + eps));
  }
  return TargetFunction{std::move(b), beta, r};
}

CoeffSeq regularized_coeffs(const TargetFunction& target, const FilterSpec& spec,
                            const EigenSpectrum& spectrum) {
  require_aligned(target.coeffs.size(), spectrum.size(), "regularized_coeffs");
  CoeffSeq out(spectrum.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = spectrum[i] * filter_value(spec, spectrum[i]) * target.coeffs[i];
  }
  return out;
}

namespace {

struct MultiplierParts {
  double lhs;
  double sup_factor;
};

MultiplierParts multiplier_parts(std::span<const double> alpha, std::span<const double> b,
                                 const BlockPartition& part, double beta, double theta,
                                 FineIndex r) {
  const auto mu = part.spectrum().values();
  CoeffSeq scaled(b.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    scaled[i] = alpha[i] * b[i];
    sup = std::max(sup, std::abs(alpha[i]) * std::pow(mu[i], (beta - theta) / 2.0));
  }
  return MultiplierParts{power_norm(scaled, part, PowerParams(theta, r)), sup};
}

}  // namespace

MultiplierCheck multiplier_bound(std::span<const double> alpha, std::span<const double> b,
                                 const EigenSpectrum& spectrum, double beta, double theta,
                                 FineIndex r) {
  require_aligned(alpha.size(), spectrum.size(), "multiplier_bound");
  require_aligned(b.size(), spectrum.size(), "multiplier_bound");
  require_unit_interval(beta, "smoothness beta");
  require_unit_interval(theta, "smoothness theta");
  const BlockPartition part = partition_blocks(spectrum);
  const MultiplierParts p = multiplier_parts(alpha, b, part, beta, theta, r);
  const double rhs = p.sup_factor * power_norm(b, part, PowerParams(beta, r));
  if (p.lhs > rhs * (1.0 + kRelTol)) {
    throw InvariantViolation("multiplier bound violated: " + std::to_string(p.lhs) + " > " +
                             std::to_string(rhs));
  }
  return MultiplierCheck{p.lhs, rhs, p.sup_factor};
}

bool ErrorReport::holds() const noexcept {
  return error_norm <= bound * (1.0 + kRelTol) && solution_norm <= solution_bound * (1.0 + kRelTol);
}

ErrorReport error_report(const TargetFunction& target, const FilterSpec& spec,
                         const EigenSpectrum& spectrum, const PowerParams& params) {
  require_aligned(target.coeffs.size(), spectrum.size(), "error_report");
  require_unit_interval(target.beta, "smoothness beta");
  const BlockPartition part = partition_blocks(spectrum);
  std::vector<double> residual(spectrum.size());
  std::vector<double> gain(spectrum.size());
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    gain[i] = spectrum[i] * filter_value(spec, spectrum[i]);
    residual[i] = 1.0 - gain[i];
  }
  const double source = power_norm(target.coeffs, part, PowerParams(target.beta, params.r()));
  const MultiplierParts err =
      multiplier_parts(residual, target.coeffs, part, target.beta, params.theta(), params.r());
  const MultiplierParts sol =
      multiplier_parts(gain, target.coeffs, part, target.beta, params.theta(), params.r());
  const double parameter = spec.kind() == FilterKind::landweber
                               ? static_cast<double>(spec.iterations())
                               : spec.lambda();
  return ErrorReport{params.theta(), params.r(),       target.beta,    spec.name(),
                     parameter,      err.lhs,          err.sup_factor * source,
                     err.sup_factor, sol.lhs,          sol.sup_factor * source,
                     sol.sup_factor};
}

std::vector<ErrorReport> regularization_sweep(const TargetFunction& target, FilterKind kind,
                                              std::span<const double> lambdas,
                                              std::span<const PowerParams> params,
                                              const EigenSpectrum& spectrum) {
  std::vector<std::vector<ErrorReport>> per_lambda(lambdas.size());
  parallel_for(lambdas.size(), [&](std::size_t k) {
    const FilterSpec spec = FilterSpec::from_lambda(kind, lambdas[k]);
    for (const PowerParams& p : params) {
      per_lambda[k].push_back(error_report(target, spec, spectrum, p));
    }
  });
  std::vector<ErrorReport> out;
  for (auto& rows : per_lambda) {
    for (auto& row : rows) out.push_back(std::move(row));
  }
  return out;
}

void write_sweep_csv(std::ostream& out, std::span<const ErrorReport> rows) {
  out << "lambda,theta,r,beta,error_norm,bound,sup_factor\n";
  const auto old_precision = out.precision(17);
  for (const ErrorReport& row : rows) {
    const double lambda = row.filter == "landweber" ? 1.0 / row.parameter : row.parameter;
    out << lambda << ',' << row.theta << ',' << row.r.to_string() << ',' << row.beta << ','
        << row.error_norm << ',' << row.bound << ',' << row.sup_factor << '\n';
  }
  out.precision(old_precision);
}

double tikhonov_sup_bound(double lambda, double gamma) {
  require_lambda(lambda);
  require_unit_interval(gamma, "gamma");
  return std::pow(lambda, gamma) * std::pow(gamma, gamma) * std::pow(1.0 - gamma, 1.0 - gamma);
}

double landweber_sup_bound(std::size_t t, double gamma) {
  if (t == 0) throw ParameterError("Landweber needs t >= 1");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ParameterError("gamma must be positive");
  const double td = static_cast<double>(t);
  return std::pow(td / (gamma + td), td) * std::pow(gamma / (gamma + td), gamma);
}

std::vector<double> uniform_mu_grid(double step) {
  if (!(step > 0.0 && step <= 1.0)) throw ParameterError("grid step must lie in (0,1]");
  const auto count = static_cast<std::size_t>(std::floor(1.0 / step));
  std::vector<double> grid;
  grid.reserve(count + 1);
  for (std::size_t k = 1; k <= count; ++k) grid.push_back(std::min(1.0, static_cast<double>(k) * step));
  if (grid.empty() || grid.back() < 1.0) grid.push_back(1.0);
  return grid;
}

std::vector<double> log_mu_grid(double mu_min, double step) {
  if (!(mu_min > 0.0 && mu_min < 1.0)) throw ParameterError("mu_min must lie in (0,1)");
  if (!(step > 0.0)) throw ParameterError("grid step must be positive");
  const double log_min = std::log(mu_min);
  const double ratio = std::log1p(step);
  const auto count = static_cast<std::size_t>(std::ceil(-log_min / ratio));
  std::vector<double> grid;
  grid.reserve(count + 1);
  for (std::size_t k = 0; k < count; ++k) {
    const double mu = std::exp(log_min + static_cast<double>(k) * ratio);
    if (mu >= 1.0) break;
    grid.push_back(mu);
  }
  grid.push_back(1.0);
  return grid;
}

double tikhonov_grid_sup(double lambda, double gamma, std::span<const double> mu_grid) {
  double sup = 0.0;
  for (double mu : mu_grid) sup = std::max(sup, lambda * std::pow(mu, gamma) / (lambda + mu));
  return sup;
}

double landweber_grid_sup(std::size_t t, double gamma, std::span<const double> mu_grid) {
  const double td = static_cast<double>(t);
  double sup = 0.0;
  for (double mu : mu_grid) {
    if (mu >= 1.0) continue;
    sup = std::max(sup, std::exp(td * std::log1p(-mu) + gamma * std::log(mu)));
  }
  return sup;
}

RateFit tikhonov_rate(const TargetFunction& target, const EigenSpectrum& spectrum,
                      const PowerParams& params, std::span<const double> lambdas,
                      double saturation_factor) {
  RateFit fit{0.0, {}, {}};
  for (double lambda : lambdas) {
    if (lambda < saturation_factor * spectrum.bottom()) continue;
    const ErrorReport rep = error_report(target, FilterSpec::tikhonov(lambda), spectrum, params);
    fit.lambdas.push_back(lambda);
    fit.errors.push_back(rep.error_norm);
  }
  if (fit.lambdas.size() < 2) {
    throw DegenerateInputError("rate fit needs at least two unsaturated lambdas");
  }
  const double n = static_cast<double>(fit.lambdas.size());
  double sx = 0.0;
  double sy = 0.0;
  for (std::size_t k = 0; k < fit.lambdas.size(); ++k) {
    sx += std::log(fit.lambdas[k]);
    sy += std::log(fit.errors[k]);
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t k = 0; k < fit.lambdas.size(); ++k) {
    const double dx = std::log(fit.lambdas[k]) - mx;
    sxy += dx * (std::log(fit.errors[k]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw DegenerateInputError("rate fit needs distinct lambdas");
  fit.slope = sxy / sxx;
  return fit;
}

}  // namespace powerspace
