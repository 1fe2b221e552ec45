#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace powerspace {

/// Outcome of one property over all of its random instances. Slack is the
/// margin by which the property held on an instance, relative where that
/// makes sense; negative slack is a failure. worst_slack is the minimum.
struct PropertyResult {
  std::string module;
  std::string name;
  std::size_t instances = 0;
  double worst_slack = 0.0;
  bool passed = true;
  std::string detail;
};

struct VerifyOptions {
  std::uint64_t seed = 20240601;
  /// Random instances per property; 0 runs nothing and passes vacuously.
  std::size_t instances = 100;
  /// Restrict to these modules (all when empty).
  std::vector<std::string> modules;
  /// Adds a fixture that pairs a with the wrong exponent, so the Hoelder
  /// property must fail. Used to check that failures are reported.
  bool inject_holder_violation = false;
};

struct Certificate {
  std::uint64_t seed = 0;
  std::size_t instances_per_property = 0;
  std::vector<PropertyResult> properties;
  std::vector<std::string> warnings;

  bool passed() const noexcept;
  /// nullptr when every property passed.
  const PropertyResult* first_failure() const noexcept;
};

/// Names accepted in VerifyOptions::modules.
const std::vector<std::string>& verify_modules();

/// Runs the property suites with a generator seeded from options.seed. The
/// outcome depends only on the options. Throws ParameterError for unknown
/// module names.
Certificate run_verification(const VerifyOptions& options);

}  // namespace powerspace
