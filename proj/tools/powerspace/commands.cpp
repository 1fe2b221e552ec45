#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "powerspace/dualsum.hpp"
#include "powerspace/embedding.hpp"
#include "powerspace/error.hpp"
#include "powerspace/kernelmodel.hpp"
#include "powerspace/kfunctional.hpp"
#include "powerspace/regularize.hpp"
#include "powerspace/spectrum.hpp"
#include "powerspace/spectrum_io.hpp"
#include "powerspace/verify.hpp"

namespace powerspace::cli {

using nlohmann::json;

namespace {

struct LoadedInput {
  EigenSpectrum spectrum;
  std::optional<CoeffSeq> coeffs;
  std::optional<NystromDecomposition> decomposition;
};

LoadedInput load_input(const SpectrumSource& src) {
  if (src.spectrum_csv.empty() == src.decomposition.empty()) {
    throw ParameterError("give exactly one of --spectrum or --decomposition");
  }
  if (!src.spectrum_csv.empty()) {
    SpectrumTable table = read_spectrum_csv(std::filesystem::path(src.spectrum_csv));
    return LoadedInput{std::move(table.spectrum), std::move(table.coeffs), std::nullopt};
  }
  NystromDecomposition dec = load_decomposition(std::filesystem::path(src.decomposition));
  EigenSpectrum spectrum = dec.spectrum();
  return LoadedInput{std::move(spectrum), std::nullopt, std::move(dec)};
}

json source_json(const SpectrumSource& src) {
  return src.spectrum_csv.empty() ? json{{"decomposition", src.decomposition}}
                                  : json{{"spectrum", src.spectrum_csv}};
}

json base_parameters(const GlobalOptions& g, const std::string& command) {
  return json{{"command", command},
              {"seed", g.seed},
              {"format", g.format == Format::json ? "json" : "csv"}};
}

std::string render(const json& j) { return j.dump(2) + "\n"; }

/// CSV number with round-trip precision.
std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::vector<FineIndex> parse_rs(const std::vector<std::string>& rs) {
  std::vector<FineIndex> out;
  for (const auto& r : rs) out.push_back(FineIndex::parse(r));
  if (out.empty()) throw ParameterError("at least one fine index r is required");
  return out;
}

json r_json(FineIndex r) { return r.to_string(); }

}  // namespace

CommandResult cmd_decompose(const GlobalOptions& global) {
  if (global.config.empty()) throw ParameterError("decompose needs a kernel --config file");
  const KernelConfig config = parse_kernel_config(std::filesystem::path(global.config));
  const NystromDecomposition dec = decompose(config);
  CommandResult res;
  std::ostringstream body;
  if (global.format == Format::csv) {
    write_spectrum_csv(body, dec.spectrum());
  } else {
    save_decomposition(dec, body);
  }
  res.body = body.str();
  std::ostringstream summary;
  summary.precision(17);
  summary << "rank " << dec.rank << " mu_1 " << dec.spectrum().top() << " mu_n "
          << dec.spectrum().bottom() << " kernel_scale " << dec.kernel_scale << '\n';
  res.summary = summary.str();
  return res;
}

CommandResult cmd_norm(const GlobalOptions& global, const NormOptions& opts) {
  const PowerParams params(opts.theta, FineIndex::parse(opts.r));
  if (!(opts.base > 1.0)) throw ParameterError("--base must exceed 1");
  const LoadedInput in = load_input(opts.input);
  if (!in.coeffs) throw ParameterError("norm needs coefficients: a CSV with columns index,mu,b");
  const CoeffSeq& b = *in.coeffs;
  const BlockPartition part = partition_blocks(in.spectrum, opts.base);
  const double norm = power_norm(b, part, params);
  const double weighted = weighted_l2_norm(b, in.spectrum, params.theta());

  CommandResult res;
  if (global.format == Format::csv) {
    res.body = "theta,r,base,power_norm,weighted_l2_norm\n" + num(params.theta()) + "," +
               params.r().to_string() + "," + num(opts.base) + "," + num(norm) + "," +
               num(weighted) + "\n";
    return res;
  }
  json j;
  j["parameters"] = base_parameters(global, "norm");
  j["parameters"]["input"] = source_json(opts.input);
  j["parameters"]["theta"] = params.theta();
  j["parameters"]["r"] = r_json(params.r());
  j["parameters"]["base"] = opts.base;
  j["n"] = in.spectrum.size();
  j["power_norm"] = norm;
  j["weighted_l2_norm"] = weighted;
  json blocks = json::array();
  const auto comps = block_components(b, part, params.theta());
  for (std::size_t k = 0; k < part.blocks().size(); ++k) {
    const Block& blk = part.blocks()[k];
    blocks.push_back({{"j", blk.j}, {"first_index", blk.begin + 1}, {"size", blk.size()},
                      {"component", comps[k]}});
  }
  j["blocks"] = blocks;
  res.body = render(j);
  return res;
}

CommandResult cmd_kfunc(const GlobalOptions& global, const KfuncOptions& opts) {
  const LoadedInput in = load_input(opts.input);
  if (!in.coeffs) throw ParameterError("kfunc needs coefficients: a CSV with columns index,mu,b");
  const WeightedCouple couple(in.spectrum);
  QuadratureGrid grid = QuadratureGrid::default_for(in.spectrum);
  grid.points_per_decade = opts.points_per_decade;
  grid.validate();

  std::vector<double> ts = opts.t;
  std::vector<double> ks;
  std::optional<KProfile> profile;
  if (ts.empty()) {
    profile = k_profile(*in.coeffs, couple, grid);
    ts = profile->t;
    ks = profile->k;
  } else {
    for (double t : ts) {
      if (!(t > 0.0) || !std::isfinite(t)) throw ParameterError("--t values must be positive");
      ks.push_back(k_functional(*in.coeffs, t, couple));
    }
  }
  std::optional<double> interp;
  std::optional<PowerParams> params;
  if (opts.theta) {
    params.emplace(*opts.theta, FineIndex::parse(opts.r));
    if (!profile) profile = k_profile(*in.coeffs, couple, grid);
    interp = interp_norm(*profile, couple, *params);
  }

  CommandResult res;
  if (global.format == Format::csv) {
    std::string body = "t,k\n";
    for (std::size_t i = 0; i < ts.size(); ++i) body += num(ts[i]) + "," + num(ks[i]) + "\n";
    res.body = body;
    return res;
  }
  json j;
  j["parameters"] = base_parameters(global, "kfunc");
  j["parameters"]["input"] = source_json(opts.input);
  j["parameters"]["grid"] = {{"t_min", grid.t_min}, {"t_max", grid.t_max},
                             {"points_per_decade", grid.points_per_decade}};
  if (params) {
    j["parameters"]["theta"] = params->theta();
    j["parameters"]["r"] = r_json(params->r());
  }
  j["coarse_norm"] = couple.coarse_norm(*in.coeffs);
  j["fine_norm"] = couple.fine_norm(*in.coeffs);
  j["t"] = ts;
  j["k"] = ks;
  if (interp) j["interp_norm"] = *interp;
  res.body = render(j);
  return res;
}

CommandResult cmd_equiv(const GlobalOptions& global, const EquivOptions& opts) {
  if (opts.samples == 0) throw ParameterError("--samples must be positive");
  const LoadedInput in = load_input(opts.input);
  const std::vector<FineIndex> rs = parse_rs(opts.rs);
  if (opts.thetas.empty()) throw ParameterError("at least one theta is required");
  const WeightedCouple couple(in.spectrum);
  QuadratureGrid grid = QuadratureGrid::default_for(in.spectrum);
  grid.points_per_decade = opts.points_per_decade;
  grid.validate();

  std::vector<EquivalenceReport> reports;
  for (std::size_t ti = 0; ti < opts.thetas.size(); ++ti) {
    const double theta = opts.thetas[ti];
    std::vector<PowerParams> cells;
    for (FineIndex r : rs) cells.emplace_back(theta, r);
    // b_i = g_i mu_i^{theta/2}: every block contributes at a comparable scale
    std::mt19937_64 rng(global.seed + 0x9E3779B97F4A7C15ULL * (ti + 1));
    std::normal_distribution<double> normal;
    std::vector<CoeffSeq> samples(opts.samples, CoeffSeq(in.spectrum.size()));
    for (auto& s : samples) {
      for (std::size_t i = 0; i < s.size(); ++i) {
        s[i] = normal(rng) * std::pow(in.spectrum[i], theta / 2.0);
      }
    }
    for (auto& rep : equivalence_reports(samples, cells, couple, grid)) reports.push_back(std::move(rep));
  }

  CommandResult res;
  if (global.format == Format::csv) {
    std::string body = "theta,r,samples,ratio_min,ratio_max,spread\n";
    for (const auto& rep : reports) {
      body += num(rep.params.theta()) + "," + rep.params.r().to_string() + "," +
              std::to_string(rep.sample_count) + "," + num(rep.ratio_min) + "," +
              num(rep.ratio_max) + "," + num(rep.spread()) + "\n";
    }
    res.body = body;
    return res;
  }
  json j;
  j["parameters"] = base_parameters(global, "equiv");
  j["parameters"]["input"] = source_json(opts.input);
  j["parameters"]["samples"] = opts.samples;
  j["parameters"]["thetas"] = opts.thetas;
  json cells = json::array();
  for (const auto& rep : reports) {
    cells.push_back({{"theta", rep.params.theta()},
                     {"r", r_json(rep.params.r())},
                     {"samples", rep.sample_count},
                     {"ratio_min", rep.ratio_min},
                     {"ratio_max", rep.ratio_max},
                     {"spread", rep.spread()},
                     {"grid", {{"t_min", rep.grid.t_min},
                               {"t_max", rep.grid.t_max},
                               {"points_per_decade", rep.grid.points_per_decade}}}});
  }
  j["cells"] = cells;
  res.body = render(j);
  return res;
}

CommandResult cmd_embed(const GlobalOptions& global, const EmbedOptions& opts) {
  if (opts.decomposition.empty()) throw ParameterError("embed needs --decomposition");
  const PowerParams params(opts.theta, FineIndex::parse(opts.r));
  const NystromDecomposition dec = load_decomposition(std::filesystem::path(opts.decomposition));
  const EmbeddingReport rep = embedding_constant(dec.basis, params, opts.ons_tol);

  double worst_ratio = 0.0;
  if (opts.checks > 0) {
    std::mt19937_64 rng(global.seed);
    std::normal_distribution<double> normal;
    for (std::size_t c = 0; c < opts.checks; ++c) {
      CoeffSeq b(dec.basis.function_count());
      for (double& x : b) x = normal(rng);
      const SupNormCheck check = sup_norm_bound_check(b, dec.basis, rep);
      if (check.bound > 0.0) worst_ratio = std::max(worst_ratio, check.sup_value / check.bound);
    }
  }

  CommandResult res;
  if (global.format == Format::csv) {
    std::string body = "point,x,pointwise_norm\n";
    for (std::size_t k = 0; k < rep.per_point.size(); ++k) {
      body += std::to_string(k) + "," + num(dec.basis.points()[k]) + "," + num(rep.per_point[k]) + "\n";
    }
    res.body = body;
    return res;
  }
  json j;
  j["parameters"] = base_parameters(global, "embed");
  j["parameters"]["decomposition"] = opts.decomposition;
  j["parameters"]["theta"] = params.theta();
  j["parameters"]["r"] = r_json(params.r());
  j["parameters"]["r_conjugate"] = r_json(params.conjugate_r());
  j["parameters"]["ons_tol"] = opts.ons_tol;
  j["kappa_hat"] = rep.kappa_hat;
  j["argmax_point"] = rep.argmax_point;
  j["argmax_x"] = dec.basis.points()[rep.argmax_point];
  j["per_point"] = rep.per_point;
  if (opts.checks > 0) j["sup_norm_checks"] = {{"count", opts.checks}, {"worst_ratio", worst_ratio}};
  res.body = render(j);
  return res;
}

CommandResult cmd_regularize(const GlobalOptions& global, const RegularizeOptions& opts) {
  const LoadedInput in = load_input(opts.input);
  const FilterKind kind = parse_filter_kind(opts.filter);
  const std::vector<FineIndex> rs = parse_rs(opts.rs);
  if (opts.thetas.empty()) throw ParameterError("at least one theta is required");
  std::vector<double> lambdas = opts.lambdas;
  if (lambdas.empty()) {
    for (int k = 0; k <= 12; ++k) lambdas.push_back(std::ldexp(1.0, -k));
  }
  if (in.spectrum.top() > 1.0) {
    throw ParameterError("filters need eigenvalues in (0,1]; decompose with normalization");
  }

  // one sweep per r so that the source norm uses the matching fine index
  std::vector<ErrorReport> rows;
  std::vector<std::vector<ErrorReport>> per_r;
  for (FineIndex r : rs) {
    TargetFunction target = synthetic_target(in.spectrum, opts.beta, r, opts.eps);
    if (opts.target == "coeffs") {
      if (!in.coeffs) throw ParameterError("--target coeffs needs a CSV with a b column");
      target.coeffs = *in.coeffs;
    } else if (opts.target != "synthetic") {
      throw ParameterError("--target must be synthetic or coeffs");
    }
    std::vector<PowerParams> cell;
    for (double theta : opts.thetas) cell.emplace_back(theta, r);
    per_r.push_back(regularization_sweep(target, kind, lambdas, cell, in.spectrum));
  }
  // order by lambda, then r, then theta
  for (std::size_t l = 0; l < lambdas.size(); ++l) {
    for (const auto& sweep : per_r) {
      for (std::size_t t = 0; t < opts.thetas.size(); ++t) rows.push_back(sweep[l * opts.thetas.size() + t]);
    }
  }

  CommandResult res;
  for (const auto& row : rows) {
    if (!row.holds()) {
      std::ostringstream os;
      os.precision(17);
      os << "error bound violated at " << row.filter << " parameter " << row.parameter << ": "
         << row.error_norm << " > " << row.bound;
      res.violation = os.str();
      break;
    }
  }
  if (global.format == Format::csv) {
    std::ostringstream os;
    write_sweep_csv(os, rows);
    res.body = os.str();
    return res;
  }
  json j;
  j["parameters"] = base_parameters(global, "regularize");
  j["parameters"]["input"] = source_json(opts.input);
  j["parameters"]["filter"] = opts.filter;
  j["parameters"]["beta"] = opts.beta;
  j["parameters"]["target"] = opts.target;
  j["parameters"]["eps"] = opts.eps;
  j["parameters"]["lambdas"] = lambdas;
  json out = json::array();
  for (const auto& row : rows) {
    out.push_back({{"lambda", row.filter == "landweber" ? 1.0 / row.parameter : row.parameter},
                   {"parameter", row.parameter},
                   {"theta", row.theta},
                   {"r", r_json(row.r)},
                   {"beta", row.beta},
                   {"error_norm", row.error_norm},
                   {"bound", row.bound},
                   {"sup_factor", row.sup_factor},
                   {"solution_norm", row.solution_norm},
                   {"solution_bound", row.solution_bound},
                   {"solution_sup_factor", row.solution_sup_factor}});
  }
  j["rows"] = out;
  res.body = render(j);
  return res;
}

CommandResult cmd_bounds(const GlobalOptions& global, const BoundsOptions& opts) {
  const FilterKind kind = parse_filter_kind(opts.filter);
  if (!opts.grid.empty() && opts.grid != "uniform" && opts.grid != "log") {
    throw ParameterError("--grid must be uniform or log");
  }
  double bound = 0.0;
  double grid_sup = 0.0;
  std::size_t grid_points = 0;
  std::string grid_kind = opts.grid;
  json parameter;
  if (kind == FilterKind::tikhonov) {
    if (!opts.lambda) throw ParameterError("tikhonov bounds need --lambda");
    if (grid_kind.empty()) grid_kind = "uniform";
    bound = tikhonov_sup_bound(*opts.lambda, opts.gamma);
    const auto grid = grid_kind == "log" ? log_mu_grid(std::min(1e-12, *opts.lambda * 1e-3), opts.grid_step)
                                         : uniform_mu_grid(opts.grid_step);
    grid_sup = tikhonov_grid_sup(*opts.lambda, opts.gamma, grid);
    grid_points = grid.size();
    parameter = {{"lambda", *opts.lambda}};
  } else if (kind == FilterKind::landweber) {
    if (!opts.t) throw ParameterError("landweber bounds need --t");
    if (grid_kind.empty()) grid_kind = "log";
    bound = landweber_sup_bound(*opts.t, opts.gamma);
    const double mu_star = opts.gamma / (opts.gamma + static_cast<double>(*opts.t));
    const auto grid = grid_kind == "log" ? log_mu_grid(std::min(1e-12, mu_star * 1e-3), opts.grid_step)
                                         : uniform_mu_grid(opts.grid_step);
    grid_sup = landweber_grid_sup(*opts.t, opts.gamma, grid);
    grid_points = grid.size();
    parameter = {{"t", *opts.t}};
  } else {
    throw ParameterError("bounds are available for tikhonov and landweber");
  }

  CommandResult res;
  if (grid_sup > bound * (1.0 + 1e-12)) {
    res.violation = "grid supremum " + num(grid_sup) + " exceeds the closed-form bound " + num(bound);
  }
  if (global.format == Format::csv) {
    res.body = "filter,gamma,parameter,bound,grid_sup,grid_points\n" + opts.filter + "," +
               num(opts.gamma) + "," +
               num(kind == FilterKind::tikhonov ? *opts.lambda : static_cast<double>(*opts.t)) + "," +
               num(bound) + "," + num(grid_sup) + "," + std::to_string(grid_points) + "\n";
    return res;
  }
  json j;
  j["parameters"] = base_parameters(global, "bounds");
  j["parameters"]["filter"] = opts.filter;
  j["parameters"]["gamma"] = opts.gamma;
  j["parameters"].update(parameter);
  j["parameters"]["grid"] = grid_kind;
  j["parameters"]["grid_step"] = opts.grid_step;
  j["bound"] = bound;
  j["grid_sup"] = grid_sup;
  j["grid_points"] = grid_points;
  res.body = render(j);
  return res;
}

CommandResult cmd_verify(const GlobalOptions& global, const VerifyCommandOptions& opts) {
  VerifyOptions vo;
  vo.seed = global.seed;
  vo.instances = opts.instances;
  vo.modules = opts.modules;
  vo.inject_holder_violation = opts.inject_holder_violation;
  const Certificate cert = run_verification(vo);

  CommandResult res;
  res.warnings = cert.warnings;
  if (const PropertyResult* f = cert.first_failure()) {
    res.violation = "property " + f->module + "." + f->name + " failed: " + f->detail;
  }
  if (global.format == Format::csv) {
    std::string body = "module,property,instances,worst_slack,passed\n";
    for (const auto& p : cert.properties) {
      body += p.module + "," + p.name + "," + std::to_string(p.instances) + "," +
              num(p.worst_slack) + "," + (p.passed ? "true" : "false") + "\n";
    }
    res.body = body;
    return res;
  }
  json j;
  j["parameters"] = base_parameters(global, "verify");
  j["parameters"]["instances"] = opts.instances;
  j["parameters"]["modules"] = opts.modules;
  j["parameters"]["inject_holder_violation"] = opts.inject_holder_violation;
  j["passed"] = cert.passed();
  j["warnings"] = cert.warnings;
  json props = json::array();
  for (const auto& p : cert.properties) {
    props.push_back({{"module", p.module},
                     {"property", p.name},
                     {"instances", p.instances},
                     {"worst_slack", p.worst_slack},
                     {"passed", p.passed},
                     {"detail", p.detail}});
  }
  j["properties"] = props;
  res.body = render(j);
  return res;
}

}  // namespace powerspace::cli
