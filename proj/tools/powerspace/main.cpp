#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "json.hpp"
#include "json_config.hpp"
#include "powerspace/error.hpp"
#include "powerspace/parallel.hpp"

namespace {

using namespace powerspace::cli;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitInvariant = 4;

int exit_code_for(powerspace::ErrorCategory category) {
  switch (category) {
    case powerspace::ErrorCategory::config: return kExitConfig;
    case powerspace::ErrorCategory::numeric: return kExitNumeric;
    case powerspace::ErrorCategory::invariant: return kExitInvariant;
  }
  return kExitNumeric;
}

void add_source(CLI::App* cmd, SpectrumSource& src) {
  cmd->add_option("--spectrum", src.spectrum_csv, "CSV with columns index,mu[,b]");
  cmd->add_option("--decomposition", src.decomposition, "Decomposition JSON from `decompose`");
}

int emit(const GlobalOptions& global, const CommandResult& result) {
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  if (global.output.empty()) {
    std::cout << result.body << std::flush;
  } else {
    std::ofstream out(global.output, std::ios::binary);
    if (!out) throw powerspace::ParameterError("cannot open " + global.output + " for writing");
    out << result.body;
    out.close();
    if (!out) throw powerspace::ParameterError("failed to write " + global.output);
    std::cout << result.summary << std::flush;
  }
  if (result.violation) {
    std::cerr << "invariant violation: " << *result.violation << '\n';
    return kExitInvariant;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Power spaces of kernel integral operators: norms, K-functionals, "
               "embeddings and regularisation bounds"};
  app.require_subcommand(1);
  app.fallthrough();
  app.config_formatter(std::make_shared<JsonConfig>());
  app.allow_config_extras(CLI::config_extras_mode::ignore);

  GlobalOptions global;
  std::string format = "json";
  std::size_t threads = 0;
  app.set_config("--config", "", "JSON configuration (kernel spec for decompose, option values otherwise)")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", global.seed, "Seed for every random generator")->capture_default_str();
  app.add_option("--output", global.output, "Write the report here instead of standard output");
  app.add_option("--format", format, "Report format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  app.add_option("--threads", threads, "Worker threads (falls back to POWERSPACE_THREADS)")
      ->check(CLI::PositiveNumber);

  auto* decompose = app.add_subcommand("decompose", "Nystroem eigendecomposition of a kernel");

  NormOptions norm;
  auto* norm_cmd = app.add_subcommand("norm", "Block power norm of a coefficient sequence");
  add_source(norm_cmd, norm.input);
  norm_cmd->add_option("--theta", norm.theta, "Smoothness in (0,1)")->capture_default_str();
  norm_cmd->add_option("--r", norm.r, "Fine index in [1, inf]")->capture_default_str();
  norm_cmd->add_option("--base", norm.base, "Block base s > 1")->capture_default_str();

  KfuncOptions kfunc;
  auto* kfunc_cmd = app.add_subcommand("kfunc", "K-functional profile and interpolation norm");
  add_source(kfunc_cmd, kfunc.input);
  kfunc_cmd->add_option("--t", kfunc.t, "Evaluation points (default: the quadrature grid)");
  kfunc_cmd->add_option("--theta", kfunc.theta, "Also compute the interpolation norm");
  kfunc_cmd->add_option("--r", kfunc.r, "Fine index for the interpolation norm")->capture_default_str();
  kfunc_cmd->add_option("--ppd", kfunc.points_per_decade, "Starting grid density per decade; panels refine adaptively")->capture_default_str();

  EquivOptions equiv;
  auto* equiv_cmd = app.add_subcommand("equiv", "Interpolation norm against power norm on random samples");
  add_source(equiv_cmd, equiv.input);
  equiv_cmd->add_option("--samples", equiv.samples, "Samples per theta")->capture_default_str();
  equiv_cmd->add_option("--theta", equiv.thetas, "Smoothness values")->capture_default_str();
  equiv_cmd->add_option("--r", equiv.rs, "Fine indices")->capture_default_str();
  equiv_cmd->add_option("--ppd", equiv.points_per_decade, "Starting grid density per decade; panels refine adaptively")->capture_default_str();

  EmbedOptions embed;
  auto* embed_cmd = app.add_subcommand("embed", "Embedding constant into L-infinity");
  embed_cmd->add_option("--decomposition", embed.decomposition, "Decomposition JSON")->required();
  embed_cmd->add_option("--theta", embed.theta, "Smoothness in (0,1)")->capture_default_str();
  embed_cmd->add_option("--r", embed.r, "Fine index")->capture_default_str();
  embed_cmd->add_option("--ons-tol", embed.ons_tol, "Orthonormality tolerance")->capture_default_str();
  embed_cmd->add_option("--checks", embed.checks, "Random sup-norm bound checks")->capture_default_str();

  RegularizeOptions reg;
  auto* reg_cmd = app.add_subcommand("regularize", "Error and solution norms of spectral filters");
  add_source(reg_cmd, reg.input);
  reg_cmd->add_option("--filter", reg.filter, "tikhonov, landweber or cutoff")->capture_default_str();
  reg_cmd->add_option("--lambda", reg.lambdas, "Regularisation parameters (default 2^-k, k=0..12)");
  reg_cmd->add_option("--beta", reg.beta, "Source smoothness in (0,1)")->capture_default_str();
  reg_cmd->add_option("--theta", reg.thetas, "Error-norm smoothness values")->capture_default_str();
  reg_cmd->add_option("--r", reg.rs, "Fine indices")->capture_default_str();
  reg_cmd->add_option("--target", reg.target, "synthetic or coeffs")->capture_default_str();
  reg_cmd->add_option("--eps", reg.eps, "Decay margin of the synthetic target")->capture_default_str();

  BoundsOptions bounds;
  auto* bounds_cmd = app.add_subcommand("bounds", "Closed-form filter suprema against a grid search");
  bounds_cmd->add_option("--filter", bounds.filter, "tikhonov or landweber")->capture_default_str();
  bounds_cmd->add_option("--gamma", bounds.gamma, "Exponent gamma")->capture_default_str();
  bounds_cmd->add_option("--lambda", bounds.lambda, "Tikhonov parameter");
  bounds_cmd->add_option("--t", bounds.t, "Landweber iterations");
  bounds_cmd->add_option("--grid-step", bounds.grid_step, "Grid resolution")->capture_default_str();
  bounds_cmd->add_option("--grid", bounds.grid, "uniform or log (default per filter)");

  VerifyCommandOptions verify;
  auto* verify_cmd = app.add_subcommand("verify", "Seeded property suites; JSON certificate");
  verify_cmd->add_option("--instances", verify.instances, "Instances per property")->capture_default_str();
  verify_cmd->add_option("--module", verify.modules, "Restrict to these modules");
  verify_cmd->add_flag("--inject-holder-violation", verify.inject_holder_violation,
                       "Add a fixture that must fail the Hoelder property");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  global.format = format == "csv" ? Format::csv : Format::json;
  if (auto* cfg = app.get_config_ptr(); cfg != nullptr && cfg->count() > 0) {
    global.config = cfg->as<std::string>();
  }
  if (threads > 0) {
    global.threads = threads;
    powerspace::set_thread_count(threads);
  }

  try {
    if (decompose->parsed()) return emit(global, cmd_decompose(global));
    if (norm_cmd->parsed()) return emit(global, cmd_norm(global, norm));
    if (kfunc_cmd->parsed()) return emit(global, cmd_kfunc(global, kfunc));
    if (equiv_cmd->parsed()) return emit(global, cmd_equiv(global, equiv));
    if (embed_cmd->parsed()) return emit(global, cmd_embed(global, embed));
    if (reg_cmd->parsed()) return emit(global, cmd_regularize(global, reg));
    if (bounds_cmd->parsed()) return emit(global, cmd_bounds(global, bounds));
    if (verify_cmd->parsed()) return emit(global, cmd_verify(global, verify));
  } catch (const powerspace::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.category());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitConfig;
}
