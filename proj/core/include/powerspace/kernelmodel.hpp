#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "powerspace/embedding.hpp"
#include "powerspace/spectrum.hpp"

namespace powerspace {

enum class KernelKind { gaussian, brownian_bridge, polynomial };

/// A bounded kernel on [0,1].
class KernelSpec {
 public:
  /// exp(-(x-y)^2 / (2 w^2)), w > 0.
  static KernelSpec gaussian(double width);
  /// min(x,y) - xy.
  static KernelSpec brownian_bridge();
  /// (1 + xy)^d, d >= 0.
  static KernelSpec polynomial(int degree);

  KernelKind kind() const noexcept { return kind_; }
  double width() const noexcept { return width_; }
  int degree() const noexcept { return degree_; }
  std::string name() const;

  double operator()(double x, double y) const noexcept;

 private:
  KernelSpec(KernelKind kind, double width, int degree)
      : kind_(kind), width_(width), degree_(degree) {}
  KernelKind kind_;
  double width_;
  int degree_;
};

enum class QuadratureKind { uniform, gauss_legendre };

/// Discrete probability measure on [0,1]: point masses weights[k] at points[k].
struct QuadratureMeasure {
  std::vector<double> points;
  std::vector<double> weights;

  /// Midpoints (k + 1/2)/n with weight 1/n.
  static QuadratureMeasure uniform(std::size_t n);
  /// n-point Gauss-Legendre rule mapped to [0,1].
  static QuadratureMeasure gauss_legendre(std::size_t n);
  static QuadratureMeasure make(QuadratureKind kind, std::size_t n);

  std::size_t size() const noexcept { return points.size(); }
  double mass() const;

  /// Throws ParameterError for empty, misaligned, non-positive or
  /// out-of-domain data.
  void validate() const;
};

/// G(k,l) = k(x_k, x_l). Rows are assembled in parallel. Throws
/// ParameterError on non-finite kernel values.
Eigen::MatrixXd build_gram(const KernelSpec& kernel, const QuadratureMeasure& measure);

struct NystromOptions {
  /// Maximum number of retained pairs; all surviving pairs when empty.
  std::optional<std::size_t> rank;
  /// Absolute threshold on the (scaled) eigenvalues; 1e-12 mu_1 when empty.
  std::optional<double> drop_tol;
  /// Scale the kernel so that mu_1 <= 1 (only applied when mu_1 > 1).
  bool normalize_to_unit_top = true;
  /// Negative eigenvalues down to -psd_tol * trace are tolerated.
  double psd_tol = 1e-10;
};

struct NystromDecomposition {
  SampledEigenbasis basis;
  std::size_t rank;
  /// Factor applied to the kernel before the eigensolve (1 when unscaled).
  double kernel_scale;
  /// ||G_w e_i - mu_i e_i|| in the discrete L^2 norm, per retained pair.
  std::vector<double> residuals;

  const EigenSpectrum& spectrum() const noexcept { return basis.spectrum(); }

  friend bool operator==(const NystromDecomposition&, const NystromDecomposition&) = default;
};

/// Symmetric eigendecomposition of diag(sqrt w) G diag(sqrt w), with
/// e_i(x_k) = v_i[k] / sqrt(w_k) so that the e_i are orthonormal in the
/// discrete L^2. Each eigenvector is signed so that its largest-magnitude
/// entry is positive.
///
/// Throws ParameterError if the rank exceeds the point count,
/// BasisQualityError if G is indefinite beyond tolerance or no pair survives
/// the drop threshold.
NystromDecomposition nystrom_eig(const Eigen::MatrixXd& gram, const QuadratureMeasure& measure,
                                 const NystromOptions& options = {});

struct OnsValidation {
  OnsDiagnostics l2;
  /// max |<sqrt(mu_i) e_i, sqrt(mu_l) e_l>_H - delta_il|.
  double h_deviation = 0.0;
  std::size_t h_worst_column = 0;
  double max_residual = 0.0;
  bool passed = false;
  /// Names the offending column when the check fails.
  std::string message;
};

/// Orthonormality in L^2 and in H. With the Gram matrix the H inner products
/// are computed through the representer e_i = mu_i^{-1} sum_k w_k k(., x_k)
/// e_i(x_k); without it, through the eigen-equation G_w e_i = mu_i e_i.
OnsValidation validate_ons(const NystromDecomposition& dec, double tol,
                           const Eigen::MatrixXd* gram = nullptr);

/// Bit-exact JSON persistence of a decomposition.
void save_decomposition(const NystromDecomposition& dec, std::ostream& out);
void save_decomposition(const NystromDecomposition& dec, const std::filesystem::path& path);
/// Throws ParseError on malformed JSON, SchemaError on a wrong format tag,
/// version, missing fields or inconsistent shapes.
NystromDecomposition load_decomposition(std::istream& in);
NystromDecomposition load_decomposition(const std::filesystem::path& path);

inline constexpr int kDecompositionVersion = 1;

/// Bare basis container {points, quad_weights, mu, values (row-major)}.
void save_basis(const SampledEigenbasis& basis, std::ostream& out);
SampledEigenbasis load_basis(std::istream& in);

/// {"kernel": {"kind", "params"}, "measure": {"kind", "n"}, "rank", "drop_tol"}.
struct KernelConfig {
  KernelSpec kernel;
  QuadratureKind measure_kind;
  std::size_t measure_size;
  NystromOptions options;

  QuadratureMeasure measure() const { return QuadratureMeasure::make(measure_kind, measure_size); }
};

/// Throws ParseError or SchemaError.
KernelConfig parse_kernel_config(std::istream& in);
KernelConfig parse_kernel_config(const std::filesystem::path& path);

/// Gram assembly and eigensolve for a configuration.
NystromDecomposition decompose(const KernelConfig& config);

}  // namespace powerspace
