#include "powerspace/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

#include "powerspace/dualsum.hpp"
#include "powerspace/embedding.hpp"
#include "powerspace/error.hpp"
#include "powerspace/kernelmodel.hpp"
#include "powerspace/kfunctional.hpp"
#include "powerspace/regularize.hpp"
#include "powerspace/spectrum.hpp"

namespace powerspace {

bool Certificate::passed() const noexcept { return first_failure() == nullptr; }

const PropertyResult* Certificate::first_failure() const noexcept {
  for (const auto& p : properties) {
    if (!p.passed) return &p;
  }
  return nullptr;
}

const std::vector<std::string>& verify_modules() {
  static const std::vector<std::string> names{"spectrum",  "kfunctional", "dualsum",
                                              "embedding", "regularize",  "kernelmodel"};
  return names;
}

namespace {

using Rng = std::mt19937_64;

constexpr double kThetas[] = {0.25, 0.5, 0.75};

FineIndex r_from_cell(std::size_t k) {
  static const double rs[] = {1.0, 1.5, 2.0, 4.0};
  return k < 4 ? FineIndex(rs[k]) : FineIndex::infinity();
}

PowerParams random_params(Rng& rng, bool finite_r_above_one = false) {
  std::uniform_int_distribution<std::size_t> theta_pick(0, 2);
  std::uniform_int_distribution<std::size_t> r_pick(finite_r_above_one ? 1 : 0,
                                                    finite_r_above_one ? 3 : 4);
  return PowerParams(kThetas[theta_pick(rng)], r_from_cell(r_pick(rng)));
}

EigenSpectrum random_spectrum(Rng& rng, std::size_t max_n = 64) {
  std::uniform_int_distribution<std::size_t> size(1, max_n);
  std::uniform_real_distribution<double> log_mu(std::log(1e-8), 0.0);
  std::vector<double> mu(size(rng));
  for (double& m : mu) m = std::exp(log_mu(rng));
  std::sort(mu.begin(), mu.end(), std::greater<>());
  return EigenSpectrum(std::move(mu));
}

CoeffSeq random_coeffs(Rng& rng, std::size_t n) {
  std::normal_distribution<double> normal;
  CoeffSeq b(n);
  for (double& x : b) x = normal(rng);
  return b;
}

/// Accumulates instance slacks for one property.
class Tracker {
 public:
  Tracker(std::string module, std::string name) {
    result_.module = std::move(module);
    result_.name = std::move(name);
    result_.worst_slack = std::numeric_limits<double>::infinity();
  }

  void record(double slack, const std::function<std::string()>& describe) {
    ++result_.instances;
    if (std::isnan(slack)) slack = -std::numeric_limits<double>::infinity();
    if (slack < result_.worst_slack) result_.worst_slack = slack;
    if (slack < 0.0 && result_.passed) {
      result_.passed = false;
      result_.detail = describe();
    }
  }

  void fail_with(const std::string& detail) {
    ++result_.instances;
    result_.worst_slack = -std::numeric_limits<double>::infinity();
    if (result_.passed) {
      result_.passed = false;
      result_.detail = detail;
    }
  }

  PropertyResult finish() {
    if (result_.instances == 0) result_.worst_slack = 0.0;
    return result_;
  }

 private:
  PropertyResult result_;
};

std::string describe_pair(double lhs, double rhs) {
  std::ostringstream os;
  os.precision(17);
  os << "lhs " << lhs << " vs rhs " << rhs;
  return os.str();
}

/// Relative margin of lhs <= rhs, allowing rel_tol.
double inequality_slack(double lhs, double rhs, double rel_tol) {
  const double scale = std::max({std::abs(lhs), std::abs(rhs), std::numeric_limits<double>::min()});
  return (rhs - lhs) / scale + rel_tol;
}

/// Margin of |a - b| <= rel_tol * max(|a|,|b|).
double equality_slack(double a, double b, double rel_tol) {
  const double scale = std::max({std::abs(a), std::abs(b), std::numeric_limits<double>::min()});
  return rel_tol - std::abs(a - b) / scale;
}

void spectrum_suite(Rng& rng, std::size_t count, std::vector<PropertyResult>& out) {
  Tracker r2("spectrum", "r2_identity");
  Tracker blocks("spectrum", "dyadic_block_membership");
  Tracker monotone("spectrum", "norm_non_increasing_in_r");
  for (std::size_t k = 0; k < count; ++k) {
    const EigenSpectrum spec = random_spectrum(rng);
    const CoeffSeq b = random_coeffs(rng, spec.size());
    const double theta = kThetas[k % 3];

    const double pn = power_norm(b, spec, PowerParams(theta, FineIndex(2.0)));
    const double direct = weighted_l2_norm(b, spec, theta);
    r2.record(equality_slack(pn, direct, 1e-12), [&] { return describe_pair(pn, direct); });

    const BlockPartition part = partition_blocks(spec);
    bool ok = true;
    for (const Block& blk : part.blocks()) {
      for (std::size_t i = blk.begin; i < blk.end; ++i) {
        // 2^j < 1/mu <= 2^{j+1} checked as mu in [2^{-(j+1)}, 2^{-j}), which is exact
        ok = ok && spec[i] >= std::ldexp(1.0, -(blk.j + 1)) && spec[i] < std::ldexp(1.0, -blk.j);
      }
    }
    blocks.record(ok ? 0.0 : -1.0, [] { return std::string("index outside its dyadic block"); });

    double prev = std::numeric_limits<double>::infinity();
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < 5; ++c) {
      const double v = power_norm(b, part, PowerParams(theta, r_from_cell(c)));
      if (std::isfinite(prev)) worst = std::min(worst, inequality_slack(v, prev, 1e-12));
      prev = v;
    }
    monotone.record(worst, [] { return std::string("power norm increased with r"); });
  }
  out.push_back(r2.finish());
  out.push_back(blocks.finish());
  out.push_back(monotone.finish());
}

void kfunctional_suite(Rng& rng, std::size_t count, std::vector<PropertyResult>& out) {
  Tracker bounds("kfunctional", "k_two_sided_bounds");
  Tracker gilbert("kfunctional", "gilbert_factor_two");
  Tracker closed("kfunctional", "one_dimensional_closed_form");
  std::uniform_real_distribution<double> log_t(std::log(1e-6), std::log(1e3));
  for (std::size_t k = 0; k < count; ++k) {
    const EigenSpectrum spec = random_spectrum(rng, 16);
    const WeightedCouple couple(spec);
    const CoeffSeq x = random_coeffs(rng, spec.size());
    const double t = std::exp(log_t(rng));
    const double kval = k_functional(x, t, couple);
    const double coarse = couple.coarse_norm(x);
    const double upper = std::min(coarse, t * couple.fine_norm(x));
    const double lower = std::min(1.0, t / couple.embedding_norm()) * coarse;
    bounds.record(std::min(inequality_slack(kval, upper, 1e-10), inequality_slack(lower, kval, 1e-10)),
                  [&] { return describe_pair(kval, upper); });

    const PowerParams params = random_params(rng);
    const double g = gilbert_norm(x, params, std::sqrt(2.0), couple);
    const double p = power_norm(x, spec, params);
    gilbert.record(std::min(inequality_slack(g, p, 1e-12), inequality_slack(p, 2.0 * g, 1e-12)),
                   [&] { return describe_pair(g, p); });

    // one eigenvalue: |x| mu^{-theta/2} (r theta (1-theta))^{-1/r}
    std::uniform_real_distribution<double> log_mu(std::log(1e-6), 0.0);
    const EigenSpectrum one({std::exp(log_mu(rng))});
    const WeightedCouple one_couple(one);
    const CoeffSeq x1{x.front()};
    const double value =
        interp_norm(x1, params, one_couple, QuadratureGrid::default_for(one));
    double expected = std::abs(x1[0]) * std::pow(one[0], -params.theta() / 2.0);
    if (!params.r().is_infinite()) {
      const double r = params.r().value();
      expected *= std::pow(r * params.theta() * (1.0 - params.theta()), -1.0 / r);
    }
    closed.record(equality_slack(value, expected, 1e-12),
                  [&] { return describe_pair(value, expected); });
  }
  out.push_back(bounds.finish());
  out.push_back(gilbert.finish());
  out.push_back(closed.finish());
}

void dualsum_suite(Rng& rng, std::size_t count, bool inject, std::vector<PropertyResult>& out) {
  Tracker holder("dualsum", "holder_inequality");
  Tracker attain("dualsum", "duality_attainment");
  Tracker probes("dualsum", "random_probes_below_dual_norm");
  Tracker iso("dualsum", "direct_sum_isometry");
  for (std::size_t k = 0; k < count; ++k) {
    const EigenSpectrum spec = random_spectrum(rng);
    const CoeffSeq a = random_coeffs(rng, spec.size());
    const CoeffSeq b = random_coeffs(rng, spec.size());
    const PowerParams params = random_params(rng);
    const BlockPartition part = partition_blocks(spec);

    const double lhs = dual_pairing(a, b, spec, params.theta()).absolute_value_sum;
    const double rhs = power_norm(a, part, params.dual()) * power_norm(b, part, params);
    holder.record(inequality_slack(lhs, rhs, 1e-12), [&] { return describe_pair(lhs, rhs); });

    const double psum = psum_norm(DirectSumVec::from_coefficients(b, part, params.theta()), params.r());
    const double pn = power_norm(b, part, params);
    iso.record(psum == pn ? 0.0 : -std::abs(psum - pn) / pn,
               [&] { return describe_pair(psum, pn); });

    const PowerParams inner = random_params(rng, true);
    const double target = power_norm(a, part, inner.dual());
    const DualExtremal ext = dual_norm_extremal(a, spec, inner);
    const double unit = power_norm(ext.b_star, part, inner);
    attain.record(std::min(equality_slack(ext.attained, target, 1e-10), equality_slack(unit, 1.0, 1e-10)),
                  [&] { return describe_pair(ext.attained, target); });

    double worst = std::numeric_limits<double>::infinity();
    for (int probe = 0; probe < 20; ++probe) {
      CoeffSeq c = random_coeffs(rng, spec.size());
      const double norm = power_norm(c, part, inner);
      for (double& v : c) v /= norm;
      const double value = std::abs(dual_pairing(a, c, spec, inner.theta()).value);
      worst = std::min(worst, inequality_slack(value, target, 1e-12));
    }
    probes.record(worst, [&] { return std::string("a random unit vector beat the dual norm"); });
  }
  if (inject && count > 0) {
    // a paired in the same exponent as b (r = r' = inf): the sum over many
    // blocks exceeds the product of block maxima
    std::vector<double> mu;
    for (int j = 0; j < 8; ++j) mu.push_back(std::ldexp(0.75, -j));
    const EigenSpectrum spec(mu);
    const CoeffSeq a(mu.size(), 1.0);
    const PowerParams wrong(0.5, FineIndex::infinity());
    const double lhs = dual_pairing(a, a, spec, wrong.theta()).absolute_value_sum;
    const double rhs = power_norm(a, spec, wrong) * power_norm(a, spec, wrong);
    holder.record(inequality_slack(lhs, rhs, 1e-12),
                  [&] { return "injected fixture: " + describe_pair(lhs, rhs); });
  }
  out.push_back(holder.finish());
  out.push_back(attain.finish());
  out.push_back(probes.finish());
  out.push_back(iso.finish());
}

NystromDecomposition random_decomposition(Rng& rng, double drop_factor) {
  std::uniform_int_distribution<int> kind(0, 2);
  std::uniform_int_distribution<std::size_t> points(8, 64);
  std::uniform_real_distribution<double> width(0.1, 1.0);
  std::uniform_int_distribution<int> degree(1, 5);
  const int which = kind(rng);
  const KernelSpec kernel = which == 0   ? KernelSpec::gaussian(width(rng))
                            : which == 1 ? KernelSpec::brownian_bridge()
                                         : KernelSpec::polynomial(degree(rng));
  const std::size_t n = points(rng);
  const QuadratureMeasure measure =
      rng() % 2 == 0 ? QuadratureMeasure::uniform(n) : QuadratureMeasure::gauss_legendre(n);
  const Eigen::MatrixXd gram = build_gram(kernel, measure);
  NystromOptions opts;
  NystromDecomposition probe = nystrom_eig(gram, measure, opts);
  opts.drop_tol = drop_factor * probe.spectrum().top();
  return nystrom_eig(gram, measure, opts);
}

void embedding_suite(Rng& rng, std::size_t count, std::vector<PropertyResult>& out) {
  Tracker bound("embedding", "sup_norm_bound");
  Tracker criterion("embedding", "criterion_equivalence");
  Tracker theta_mono("embedding", "kappa_non_increasing_in_theta");
  Tracker refine("embedding", "sample_refinement_monotone");
  for (std::size_t k = 0; k < count; ++k) {
    const NystromDecomposition dec = random_decomposition(rng, 1e-10);
    const SampledEigenbasis& basis = dec.basis;
    const PowerParams params = random_params(rng);
    const EmbeddingReport rep = embedding_constant(basis, params);

    const CoeffSeq b = random_coeffs(rng, basis.function_count());
    try {
      const SupNormCheck c = sup_norm_bound_check(b, basis, rep);
      bound.record(inequality_slack(c.sup_value, c.bound, 1e-12),
                   [&] { return describe_pair(c.sup_value, c.bound); });
    } catch (const InvariantViolation& e) {
      bound.fail_with(e.what());
    }

    double worst = std::numeric_limits<double>::infinity();
    const auto mu = basis.spectrum().values();
    for (std::size_t p = 0; p < basis.point_count(); ++p) {
      CoeffSeq a(basis.function_count());
      bool nonzero = false;
      for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = basis.values()(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(i)) *
               std::pow(mu[i], params.theta());
        nonzero = nonzero || a[i] != 0.0;
      }
      if (!nonzero) continue;
      const DualExtremal ext = dual_norm_extremal(a, basis.spectrum(), params);
      double value = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        value += ext.b_star[i] *
                 basis.values()(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(i));
      }
      worst = std::min(worst, equality_slack(std::abs(value), rep.per_point[p], 1e-8));
    }
    criterion.record(worst, [] { return std::string("extremal value differs from pointwise norm"); });

    double mono = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < basis.point_count(); ++p) {
      double prev = std::numeric_limits<double>::infinity();
      for (double theta : kThetas) {
        const double v = pointwise_weighted_norm(basis, p, PowerParams(theta, params.r()));
        if (std::isfinite(prev)) mono = std::min(mono, inequality_slack(v, prev, 1e-12));
        prev = v;
      }
    }
    if (basis.spectrum().top() <= 1.0) {
      theta_mono.record(mono, [] { return std::string("pointwise norm increased with theta"); });
    }

    std::vector<std::size_t> subset;
    for (std::size_t p = 0; p < basis.point_count(); p += 2) subset.push_back(p);
    const double coarse = embedding_constant(basis.restricted_to(subset), params, 1.0).kappa_hat;
    refine.record(inequality_slack(coarse, rep.kappa_hat, 0.0),
                  [&] { return describe_pair(coarse, rep.kappa_hat); });
  }
  out.push_back(bound.finish());
  out.push_back(criterion.finish());
  out.push_back(theta_mono.finish());
  out.push_back(refine.finish());
}

void regularize_suite(Rng& rng, std::size_t count, std::vector<PropertyResult>& out) {
  Tracker bound("regularize", "error_and_solution_bounds");
  Tracker range("regularize", "filter_gain_in_unit_interval");
  Tracker landweber("regularize", "landweber_supremum_exact");
  Tracker tikhonov("regularize", "tikhonov_supremum_bound");
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  std::uniform_real_distribution<double> log_lambda(std::log(1e-4), 0.0);
  std::uniform_int_distribution<int> kind(0, 2);
  std::uniform_int_distribution<int> log_t(0, 8);
  const std::vector<double> coarse_grid = uniform_mu_grid(1e-4);
  for (std::size_t k = 0; k < count; ++k) {
    const EigenSpectrum spec = random_spectrum(rng);
    const double beta = unit(rng);
    const PowerParams params(unit(rng), r_from_cell(rng() % 5));
    const TargetFunction target{random_coeffs(rng, spec.size()), beta, params.r()};
    const FilterSpec filter =
        FilterSpec::from_lambda(static_cast<FilterKind>(kind(rng)), std::exp(log_lambda(rng)));
    const ErrorReport rep = error_report(target, filter, spec, params);
    bound.record(std::min(inequality_slack(rep.error_norm, rep.bound, 1e-12),
                          inequality_slack(rep.solution_norm, rep.solution_bound, 1e-12)),
                 [&] { return describe_pair(rep.error_norm, rep.bound); });

    double worst = std::numeric_limits<double>::infinity();
    for (double mu : spec.values()) {
      for (const FilterSpec& f : {FilterSpec::tikhonov(filter.lambda()),
                                  FilterSpec::landweber(std::max<std::size_t>(1, filter.iterations()))}) {
        const double gain = mu * filter_value(f, mu);
        worst = std::min({worst, gain + 1e-15, 1.0 + 1e-15 - gain});
      }
    }
    range.record(worst, [] { return std::string("mu g outside [0,1]"); });

    const double gamma = unit(rng);
    const std::size_t t = std::size_t{1} << log_t(rng);
    const double exact = landweber_sup_bound(t, gamma);
    const double mu_star = gamma / (gamma + static_cast<double>(t));
    const std::vector<double> grid = log_mu_grid(mu_star / 10.0, 1e-5);
    const double sup = landweber_grid_sup(t, gamma, grid);
    landweber.record(std::min(equality_slack(sup, exact, 1e-6), inequality_slack(sup, exact, 1e-12)),
                     [&] { return describe_pair(sup, exact); });

    const double lambda = filter.lambda();
    const double tsup = tikhonov_grid_sup(lambda, gamma, coarse_grid);
    const double tb = tikhonov_sup_bound(lambda, gamma);
    tikhonov.record(inequality_slack(tsup, tb, 1e-12), [&] { return describe_pair(tsup, tb); });
  }
  out.push_back(bound.finish());
  out.push_back(range.finish());
  out.push_back(landweber.finish());
  out.push_back(tikhonov.finish());
}

void kernelmodel_suite(Rng& rng, std::size_t count, std::vector<PropertyResult>& out) {
  Tracker residual("kernelmodel", "integral_operator_consistency");
  Tracker ons("kernelmodel", "discrete_orthonormality");
  Tracker order("kernelmodel", "spectrum_sorted_positive");
  for (std::size_t k = 0; k < count; ++k) {
    const NystromDecomposition dec = random_decomposition(rng, 1e-6);
    const OnsValidation v = validate_ons(dec, 1e-8);
    residual.record(1e-10 - v.max_residual, [&] { return describe_pair(v.max_residual, 1e-10); });
    ons.record(1e-8 - v.l2.worst(), [&] { return describe_pair(v.l2.worst(), 1e-8); });
    const auto mu = dec.spectrum().values();
    bool sorted = mu.back() > 0.0 && mu.front() <= 1.0;
    for (std::size_t i = 1; i < mu.size(); ++i) sorted = sorted && mu[i] <= mu[i - 1];
    order.record(sorted ? 0.0 : -1.0, [] { return std::string("spectrum unsorted or outside (0,1]"); });
  }
  out.push_back(residual.finish());
  out.push_back(ons.finish());
  out.push_back(order.finish());
}

}  // namespace

Certificate run_verification(const VerifyOptions& options) {
  const auto& known = verify_modules();
  for (const auto& m : options.modules) {
    if (std::find(known.begin(), known.end(), m) == known.end()) {
      throw ParameterError("unknown verification module '" + m + "'");
    }
  }
  const auto selected = [&](const std::string& m) {
    return options.modules.empty() ||
           std::find(options.modules.begin(), options.modules.end(), m) != options.modules.end();
  };

  Certificate cert;
  cert.seed = options.seed;
  cert.instances_per_property = options.instances;
  const std::size_t n = options.instances;
  // each module gets its own stream so that selecting modules does not
  // change the instances of the others
  std::size_t stream = 0;
  for (const auto& name : known) {
    Rng rng(options.seed + 0x9E3779B97F4A7C15ULL * ++stream);
    if (!selected(name)) continue;
    if (name == "spectrum") spectrum_suite(rng, n, cert.properties);
    if (name == "kfunctional") kfunctional_suite(rng, n, cert.properties);
    if (name == "dualsum") dualsum_suite(rng, n, options.inject_holder_violation, cert.properties);
    if (name == "embedding") embedding_suite(rng, n, cert.properties);
    if (name == "regularize") regularize_suite(rng, n, cert.properties);
    if (name == "kernelmodel") kernelmodel_suite(rng, n, cert.properties);
  }
  if (n == 0) cert.warnings.push_back("no instances evaluated; all properties pass vacuously");
  for (const auto& p : cert.properties) {
    if (p.instances == 0 && n != 0) {
      cert.warnings.push_back("property " + p.module + "." + p.name + " evaluated no instances");
    }
  }
  return cert;
}

}  // namespace powerspace
