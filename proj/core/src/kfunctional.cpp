#include "powerspace/kfunctional.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "powerspace/error.hpp"
#include "powerspace/parallel.hpp"
#include "powerspace/quadrature.hpp"
#include "powerspace/summation.hpp"

namespace powerspace {

WeightedCouple::WeightedCouple(EigenSpectrum spectrum) : spectrum_(std::move(spectrum)) {}

double WeightedCouple::coarse_norm(std::span<const double> x) const {
  require_aligned(x.size(), size(), "coarse_norm");
  CompensatedSum acc;
  for (double v : x) acc.add(v * v);
  return std::sqrt(acc.value());
}

double WeightedCouple::fine_norm(std::span<const double> y) const {
  require_aligned(y.size(), size(), "fine_norm");
  CompensatedSum acc;
  for (std::size_t i = 0; i < y.size(); ++i) acc.add(y[i] * y[i] / spectrum_[i]);
  return std::sqrt(acc.value());
}

double WeightedCouple::embedding_norm() const noexcept { return std::sqrt(spectrum_.top()); }

QuadratureGrid QuadratureGrid::default_for(const EigenSpectrum& spectrum) {
  return QuadratureGrid{1e-6 * std::sqrt(spectrum.bottom()), 1e6 * std::sqrt(spectrum.top()), 32};
}

void QuadratureGrid::validate() const {
  if (!(t_min > 0.0) || !std::isfinite(t_max) || !(t_min < t_max)) {
    throw ParameterError("quadrature grid needs 0 < t_min < t_max < inf");
  }
  if (points_per_decade <= 0) throw ParameterError("quadrature grid needs points_per_decade > 0");
}

namespace {

// Evaluates K(x, t) for one fixed x and many t.
class KSolver {
 public:
  KSolver(std::span<const double> x, const WeightedCouple& couple)
      : mu_(couple.spectrum().values()) {
    require_aligned(x.size(), couple.size(), "k_functional");
    x2_.reserve(x.size());
    for (double v : x) x2_.push_back(v * v);
    coarse_ = couple.coarse_norm(x);
    fine_ = couple.fine_norm(x);
    // Outside [u_lo, u_hi] every factor rho/mu_i is below 1e-16 or above 1e16.
    u_lo_ = std::log(1e-16 * couple.spectrum().bottom());
    u_hi_ = std::log(1e16 * couple.spectrum().top());
  }

  double coarse() const noexcept { return coarse_; }
  double fine() const noexcept { return fine_; }

  double operator()(double t, double tol) const {
    if (!(t > 0.0) || !std::isfinite(t)) throw ParameterError("K-functional needs t > 0");
    if (!(tol > 0.0)) throw ParameterError("K-functional needs tol > 0");
    if (coarse_ == 0.0) return 0.0;

    double best = std::min(t * fine_, coarse_);
    const auto lo_eval = evaluate(u_lo_, t);
    const auto hi_eval = evaluate(u_hi_, t);
    best = std::min({best, lo_eval.objective, hi_eval.objective});
    if (t <= lo_eval.ratio) return std::min(t * fine_, lo_eval.objective);
    if (t >= hi_eval.ratio) return std::min(coarse_, hi_eval.objective);

    // The objective error is quadratic in the error of log(rho).
    const double width_tol = std::clamp(std::sqrt(tol), 1e-12, 1e-4);
    double lo = u_lo_;
    double hi = u_hi_;
    for (int iter = 0; iter < kMaxIterations; ++iter) {
      const double mid = 0.5 * (lo + hi);
      const auto e = evaluate(mid, t);
      if (!std::isfinite(e.ratio) || !std::isfinite(e.objective)) break;
      best = std::min(best, e.objective);
      if (e.ratio < t) {
        lo = mid;
      } else {
        hi = mid;
      }
      if (hi - lo <= width_tol) {
        return std::min(best, evaluate(0.5 * (lo + hi), t).objective);
      }
    }
    throw NumericalFailure("K-functional search did not converge", best);
  }

 private:
  static constexpr int kMaxIterations = 400;

  struct Eval {
    double objective;
    double ratio;
  };

  // Point y(rho) = x / (1 + rho/mu) with rho = exp(u).
  Eval evaluate(double u, double t) const {
    const double rho = std::exp(u);
    CompensatedSum residual;
    CompensatedSum fine;
    for (std::size_t i = 0; i < x2_.size(); ++i) {
      const double s = rho / mu_[i];
      const double keep = 1.0 / (1.0 + s);
      const double drop = s * keep;
      residual.add(x2_[i] * drop * drop);
      fine.add(x2_[i] * keep * keep / mu_[i]);
    }
    const double d = std::sqrt(residual.value());
    const double n = std::sqrt(fine.value());
    return Eval{d + t * n, d > 0.0 ? rho * n / d : std::numeric_limits<double>::infinity()};
  }

  std::span<const double> mu_;
  std::vector<double> x2_;
  double coarse_ = 0.0;
  double fine_ = 0.0;
  double u_lo_ = 0.0;
  double u_hi_ = 0.0;
};

constexpr std::size_t kPanelNodes = 8;
// Relative accuracy of K at quadrature nodes.
constexpr double kNodeTol = 1e-14;
// Allowed change of the integral of log K per unit of log t when a panel is
// halved.
constexpr double kPanelTol = 1e-11;
constexpr int kMaxPanelDepth = 30;

struct Panel {
  double a;
  double b;
  int depth;
  std::array<double, kPanelNodes> k;
  double log_k_integral;
};

}  // namespace

double k_functional(std::span<const double> x, double t, const WeightedCouple& couple,
                    double tol) {
  return KSolver(x, couple)(t, tol);
}

KRegimes k_regimes(std::span<const double> x, const WeightedCouple& couple) {
  require_aligned(x.size(), couple.size(), "k_regimes");
  const auto mu = couple.spectrum().values();
  CompensatedSum fine;
  CompensatedSum steep;
  CompensatedSum flat;
  CompensatedSum coarse;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double x2 = x[i] * x[i];
    coarse.add(x2);
    fine.add(x2 / mu[i]);
    steep.add(x2 / (mu[i] * mu[i]));
    flat.add(x2 * mu[i]);
  }
  if (coarse.value() == 0.0) throw DegenerateInputError("K regimes are undefined for x = 0");
  KRegimes reg{std::sqrt(fine.value() / steep.value()), std::sqrt(flat.value() / coarse.value())};
  // Cauchy-Schwarz gives t_lower <= t_upper; rounding may not
  if (reg.t_lower > reg.t_upper) reg.t_lower = reg.t_upper = std::sqrt(reg.t_lower * reg.t_upper);
  return reg;
}

KProfile k_profile(std::span<const double> x, const WeightedCouple& couple,
                   const QuadratureGrid& grid) {
  grid.validate();
  const KSolver solver(x, couple);
  KProfile profile;
  profile.x.assign(x.begin(), x.end());
  profile.grid = grid;
  profile.coarse_norm = solver.coarse();
  profile.fine_norm = solver.fine();
  if (profile.coarse_norm == 0.0) return profile;

  const KRegimes reg = k_regimes(x, couple);
  if (reg.t_lower < grid.t_min || reg.t_upper > grid.t_max) {
    std::ostringstream os;
    os << "quadrature window [" << grid.t_min << ", " << grid.t_max
       << "] does not contain the transition range [" << reg.t_lower << ", " << reg.t_upper << "]";
    throw TruncationError(os.str());
  }
  profile.t_lower = reg.t_lower;
  profile.t_upper = reg.t_upper;

  const double u0 = std::log(reg.t_lower);
  const double u1 = std::log(reg.t_upper);
  profile.t.push_back(reg.t_lower);
  profile.weights.push_back(0.0);
  if (u1 > u0) {
    const GaussRule rule = gauss_legendre_rule(kPanelNodes);
    const double log_scale = std::log(profile.coarse_norm);
    const auto fill = [&](double a, double b, int depth) {
      Panel p{a, b, depth, {}, 0.0};
      const double mid = 0.5 * (a + b);
      const double half = 0.5 * (b - a);
      for (std::size_t q = 0; q < kPanelNodes; ++q) {
        p.k[q] = solver(std::exp(mid + half * rule.nodes[q]), kNodeTol);
        p.log_k_integral += half * rule.weights[q] * (std::log(p.k[q]) - log_scale);
      }
      return p;
    };
    std::vector<Panel> accepted;
    // K can bend sharply just inside [t_lower, t_upper]; a panel is kept
    // once its rule agrees with the rules on its two halves
    const std::function<void(const Panel&)> refine = [&](const Panel& p) {
      const double mid = 0.5 * (p.a + p.b);
      const Panel left = fill(p.a, mid, p.depth + 1);
      const Panel right = fill(mid, p.b, p.depth + 1);
      const double change = std::abs(p.log_k_integral - left.log_k_integral - right.log_k_integral);
      if (change <= kPanelTol * (p.b - p.a) || p.depth + 1 >= kMaxPanelDepth) {
        accepted.push_back(left);
        accepted.push_back(right);
        return;
      }
      refine(left);
      refine(right);
    };

    const double decades = (u1 - u0) / std::log(10.0);
    const auto panels = static_cast<std::size_t>(std::max(
        1.0, std::ceil(decades * grid.points_per_decade / static_cast<double>(kPanelNodes))));
    const double h = (u1 - u0) / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
      const double a = u0 + static_cast<double>(p) * h;
      refine(fill(a, p + 1 == panels ? u1 : a + h, 0));
    }
    for (const Panel& p : accepted) {
      const double mid = 0.5 * (p.a + p.b);
      const double half = 0.5 * (p.b - p.a);
      for (std::size_t q = 0; q < kPanelNodes; ++q) {
        profile.t.push_back(std::exp(mid + half * rule.nodes[q]));
        profile.weights.push_back(half * rule.weights[q]);
        profile.k.push_back(p.k[q]);
      }
    }
    profile.t.push_back(reg.t_upper);
    profile.weights.push_back(0.0);
  }
  // exact values at the regime boundaries
  profile.k.insert(profile.k.begin(), reg.t_lower * profile.fine_norm);
  if (profile.t.size() > 1) profile.k.push_back(profile.coarse_norm);
  return profile;
}

double interp_norm(const KProfile& profile, const WeightedCouple& couple,
                   const PowerParams& params) {
  const double scale = profile.coarse_norm;
  if (scale == 0.0) return 0.0;
  const double theta = params.theta();
  const auto& t = profile.t;
  const auto& k = profile.k;

  if (params.r().is_infinite()) {
    // t^{-theta} K grows below t_lower and decays above t_upper
    std::size_t arg = 0;
    double peak = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double v = std::pow(t[i], -theta) * k[i];
      if (v > peak) {
        peak = v;
        arg = i;
      }
    }
    if (t.size() < 3) return peak;
    const KSolver solver(profile.x, couple);
    const auto value_at = [&](double u) { return std::exp(-theta * u) * solver(std::exp(u), 1e-12); };
    double a = std::log(t[arg == 0 ? 0 : arg - 1]);
    double b = std::log(t[std::min(arg + 1, t.size() - 1)]);
    const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - golden * (b - a);
    double d = a + golden * (b - a);
    double fc = value_at(c);
    double fd = value_at(d);
    for (int iter = 0; iter < 80 && b - a > 1e-12; ++iter) {
      if (fc > fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - golden * (b - a);
        fc = value_at(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + golden * (b - a);
        fd = value_at(d);
      }
    }
    return std::max({peak, fc, fd});
  }

  // integral of t^{-theta r - 1} K^r, in units of scale^r
  const double r = params.r().value();
  CompensatedSum acc;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (profile.weights[i] == 0.0) continue;
    acc.add(profile.weights[i] * std::pow(std::pow(t[i], -theta) * k[i] / scale, r));
  }
  const double fine_ratio = profile.fine_norm / scale;
  acc.add(std::pow(fine_ratio * profile.t_lower, r) * std::pow(profile.t_lower, -r * theta) /
          (r * (1.0 - theta)));
  acc.add(std::pow(profile.t_upper, -theta * r) / (theta * r));
  return scale * std::pow(acc.value(), 1.0 / r);
}

double interp_norm(std::span<const double> x, const PowerParams& params,
                   const WeightedCouple& couple, const QuadratureGrid& grid) {
  return interp_norm(k_profile(x, couple, grid), couple, params);
}

double gilbert_norm(std::span<const double> x, const PowerParams& params, double base,
                    const WeightedCouple& couple) {
  require_aligned(x.size(), couple.size(), "gilbert_norm");
  if (!(base > 1.0) || !std::isfinite(base)) throw ParameterError("gilbert_norm needs s > 1");
  const auto& mu = couple.spectrum();

  // Label j of index i: s^{-j} < mu_i^{-1/2} <= s^{-j+1}.
  const bool dyadic = base == std::sqrt(2.0);
  const auto label = [&](double m) {
    if (dyadic) return -dyadic_block_index(m);
    const double v = 1.0 / std::sqrt(m);
    int j = 1 - static_cast<int>(std::ceil(std::log(v) / std::log(base)));
    while (std::pow(base, -j) >= v) ++j;
    while (std::pow(base, -j + 1) < v) --j;
    return j;
  };

  std::vector<double> terms;
  int current = 0;
  CompensatedSum block;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const int j = label(mu[i]);
    if (i == 0 || j != current) {
      if (i > 0) terms.push_back(std::pow(base, -current * params.theta()) * std::sqrt(block.value()));
      current = j;
      block = CompensatedSum{};
    }
    block.add(x[i] * x[i]);
  }
  terms.push_back(std::pow(base, -current * params.theta()) * std::sqrt(block.value()));
  return lr_norm(terms, params.r());
}

std::vector<EquivalenceReport> equivalence_reports(std::span<const CoeffSeq> samples,
                                                   std::span<const PowerParams> cells,
                                                   const WeightedCouple& couple,
                                                   const QuadratureGrid& grid) {
  if (samples.empty()) throw ParameterError("equivalence report needs at least one sample");
  grid.validate();
  for (const auto& s : samples) require_aligned(s.size(), couple.size(), "equivalence_report");

  std::vector<KProfile> profiles(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) { profiles[i] = k_profile(samples[i], couple, grid); });

  const BlockPartition part = partition_blocks(couple.spectrum());
  constexpr double kZeroTol = 1e-300;
  std::vector<EquivalenceReport> reports;
  reports.reserve(cells.size());
  for (const PowerParams& params : cells) {
    std::vector<double> ratios(samples.size(), std::numeric_limits<double>::quiet_NaN());
    parallel_for(samples.size(), [&](std::size_t i) {
      const double interp = interp_norm(profiles[i], couple, params);
      const double power = power_norm(samples[i], part, params);
      if (power == 0.0) {
        if (interp > kZeroTol) {
          throw InconsistencyError("sample " + std::to_string(i) +
                                   " has zero power norm but non-zero interpolation norm");
        }
        return;
      }
      ratios[i] = interp / power;
    });

    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    std::size_t counted = 0;
    for (double r : ratios) {
      if (std::isnan(r)) continue;
      lo = std::min(lo, r);
      hi = std::max(hi, r);
      ++counted;
    }
    if (counted == 0) throw DegenerateInputError("equivalence report: every sample is zero");
    reports.push_back(EquivalenceReport{counted, lo, hi, params, grid, std::move(ratios)});
  }
  return reports;
}

EquivalenceReport equivalence_report(std::span<const CoeffSeq> samples,
                                     const PowerParams& params, const WeightedCouple& couple,
                                     const QuadratureGrid& grid) {
  const PowerParams cells[] = {params};
  return std::move(equivalence_reports(samples, cells, couple, grid).front());
}

}  // namespace powerspace
