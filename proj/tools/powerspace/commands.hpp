#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace powerspace::cli {

enum class Format { json, csv };

struct GlobalOptions {
  std::string config;
  std::uint64_t seed = 1;
  std::string output;
  Format format = Format::json;
  std::optional<std::size_t> threads;
};

/// Rendered report plus an optional invariant failure that must be signalled
/// after the report has been written.
struct CommandResult {
  std::string body;
  /// Printed to standard output after the report is written to --output.
  std::string summary;
  std::optional<std::string> violation;
  std::vector<std::string> warnings;
};

/// Spectrum source shared by several commands: a CSV (index,mu[,b]) or a
/// decomposition file.
struct SpectrumSource {
  std::string spectrum_csv;
  std::string decomposition;
};

struct NormOptions {
  SpectrumSource input;
  double theta = 0.5;
  std::string r = "2";
  double base = 2.0;
};

struct KfuncOptions {
  SpectrumSource input;
  std::vector<double> t;
  std::optional<double> theta;
  std::string r = "2";
  int points_per_decade = 32;
};

struct EquivOptions {
  SpectrumSource input;
  std::size_t samples = 100;
  std::vector<double> thetas{0.25, 0.5, 0.75};
  std::vector<std::string> rs{"1", "1.5", "2", "4", "inf"};
  int points_per_decade = 32;
};

struct EmbedOptions {
  std::string decomposition;
  double theta = 0.5;
  std::string r = "2";
  double ons_tol = 1e-6;
  std::size_t checks = 0;
};

struct RegularizeOptions {
  SpectrumSource input;
  std::string filter = "tikhonov";
  std::vector<double> lambdas;
  double beta = 0.75;
  std::vector<double> thetas{0.25};
  std::vector<std::string> rs{"2"};
  std::string target = "synthetic";
  double eps = 0.05;
};

struct BoundsOptions {
  std::string filter = "tikhonov";
  double gamma = 0.5;
  std::optional<double> lambda;
  std::optional<std::size_t> t;
  double grid_step = 1e-5;
  std::string grid;
};

struct VerifyCommandOptions {
  std::size_t instances = 100;
  std::vector<std::string> modules;
  bool inject_holder_violation = false;
};

CommandResult cmd_decompose(const GlobalOptions& global);
CommandResult cmd_norm(const GlobalOptions& global, const NormOptions& opts);
CommandResult cmd_kfunc(const GlobalOptions& global, const KfuncOptions& opts);
CommandResult cmd_equiv(const GlobalOptions& global, const EquivOptions& opts);
CommandResult cmd_embed(const GlobalOptions& global, const EmbedOptions& opts);
CommandResult cmd_regularize(const GlobalOptions& global, const RegularizeOptions& opts);
CommandResult cmd_bounds(const GlobalOptions& global, const BoundsOptions& opts);
CommandResult cmd_verify(const GlobalOptions& global, const VerifyCommandOptions& opts);

}  // namespace powerspace::cli
