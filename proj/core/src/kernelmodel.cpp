#include "powerspace/kernelmodel.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "powerspace/error.hpp"
#include "powerspace/parallel.hpp"
#include "powerspace/quadrature.hpp"
#include "powerspace/summation.hpp"

namespace powerspace {

using nlohmann::json;

KernelSpec KernelSpec::gaussian(double width) {
  if (!(width > 0.0) || !std::isfinite(width)) {
    throw ParameterError("gaussian kernel width must be positive and finite");
  }
  return KernelSpec(KernelKind::gaussian, width, 0);
}

KernelSpec KernelSpec::brownian_bridge() { return KernelSpec(KernelKind::brownian_bridge, 0.0, 0); }

KernelSpec KernelSpec::polynomial(int degree) {
  if (degree < 0) throw ParameterError("polynomial kernel degree must be >= 0");
  return KernelSpec(KernelKind::polynomial, 0.0, degree);
}

std::string KernelSpec::name() const {
  switch (kind_) {
    case KernelKind::gaussian: return "gaussian";
    case KernelKind::brownian_bridge: return "brownian-bridge";
    case KernelKind::polynomial: return "polynomial";
  }
  return "unknown";
}

double KernelSpec::operator()(double x, double y) const noexcept {
  switch (kind_) {
    case KernelKind::gaussian: {
      const double d = x - y;
      return std::exp(-d * d / (2.0 * width_ * width_));
    }
    case KernelKind::brownian_bridge: return std::min(x, y) - x * y;
    case KernelKind::polynomial: return std::pow(1.0 + x * y, degree_);
  }
  return 0.0;
}

QuadratureMeasure QuadratureMeasure::uniform(std::size_t n) {
  if (n == 0) throw ParameterError("quadrature needs at least one point");
  QuadratureMeasure m;
  m.points.resize(n);
  m.weights.assign(n, 1.0 / static_cast<double>(n));
  for (std::size_t k = 0; k < n; ++k) {
    m.points[k] = (static_cast<double>(k) + 0.5) / static_cast<double>(n);
  }
  return m;
}

QuadratureMeasure QuadratureMeasure::gauss_legendre(std::size_t n) {
  if (n == 0) throw ParameterError("quadrature needs at least one point");
  const GaussRule rule = gauss_legendre_rule(n);
  QuadratureMeasure m;
  for (std::size_t k = 0; k < n; ++k) {
    m.points.push_back(0.5 * (1.0 + rule.nodes[k]));
    m.weights.push_back(0.5 * rule.weights[k]);
  }
  return m;
}

QuadratureMeasure QuadratureMeasure::make(QuadratureKind kind, std::size_t n) {
  return kind == QuadratureKind::uniform ? uniform(n) : gauss_legendre(n);
}

double QuadratureMeasure::mass() const { return compensated_sum(weights); }

void QuadratureMeasure::validate() const {
  if (points.empty()) throw ParameterError("quadrature needs at least one point");
  if (points.size() != weights.size()) {
    throw AlignmentError("quadrature points and weights differ in length");
  }
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (!(points[k] >= 0.0 && points[k] <= 1.0)) {
      throw ParameterError("quadrature point outside [0,1]");
    }
    if (!(weights[k] > 0.0) || !std::isfinite(weights[k])) {
      throw ParameterError("quadrature weights must be positive");
    }
  }
}

Eigen::MatrixXd build_gram(const KernelSpec& kernel, const QuadratureMeasure& measure) {
  measure.validate();
  const auto n = static_cast<Eigen::Index>(measure.size());
  Eigen::MatrixXd g(n, n);
  parallel_for(measure.size(), [&](std::size_t row) {
    const auto k = static_cast<Eigen::Index>(row);
    for (Eigen::Index l = 0; l < n; ++l) {
      g(k, l) = kernel(measure.points[row], measure.points[static_cast<std::size_t>(l)]);
    }
  });
  if (!g.allFinite()) throw ParameterError("kernel produced non-finite values");
  return g;
}

NystromDecomposition nystrom_eig(const Eigen::MatrixXd& gram, const QuadratureMeasure& measure,
                                 const NystromOptions& options) {
  measure.validate();
  const std::size_t n = measure.size();
  if (gram.rows() != gram.cols() || static_cast<std::size_t>(gram.rows()) != n) {
    throw AlignmentError("Gram matrix must be square with one row per quadrature point");
  }
  if (options.rank && *options.rank > n) {
    throw ParameterError("rank " + std::to_string(*options.rank) + " exceeds the point count " +
                         std::to_string(n));
  }
  if (options.rank && *options.rank == 0) throw ParameterError("rank must be positive");
  if (options.drop_tol && !(*options.drop_tol >= 0.0)) {
    throw ParameterError("drop_tol must be non-negative");
  }

  Eigen::VectorXd sqrt_w(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) sqrt_w[static_cast<Eigen::Index>(k)] = std::sqrt(measure.weights[k]);
  const Eigen::MatrixXd a = sqrt_w.asDiagonal() * gram * sqrt_w.asDiagonal();

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
  if (solver.info() != Eigen::Success) {
    throw NumericalFailure("symmetric eigensolver did not converge", 0.0);
  }
  const Eigen::VectorXd& lambda = solver.eigenvalues();  // ascending
  const double trace = a.trace();
  if (lambda[0] < -options.psd_tol * std::abs(trace)) {
    std::ostringstream os;
    os << "Gram matrix is indefinite: smallest eigenvalue " << lambda[0] << " against trace "
       << trace;
    throw BasisQualityError(os.str());
  }
  const double raw_top = lambda[lambda.size() - 1];
  if (!(raw_top > 0.0)) throw BasisQualityError("Gram matrix has no positive eigenvalue");

  const double scale = options.normalize_to_unit_top && raw_top > 1.0 ? 1.0 / raw_top : 1.0;
  const double top = scale == 1.0 ? raw_top : 1.0;
  const double drop = options.drop_tol.value_or(1e-12 * top);

  std::vector<double> mu;
  std::vector<Eigen::Index> columns;
  for (Eigen::Index c = lambda.size() - 1; c >= 0; --c) {
    const double value = c == lambda.size() - 1 ? top : lambda[c] * scale;
    if (!(value > 0.0) || value < drop) break;
    if (options.rank && mu.size() == *options.rank) break;
    mu.push_back(value);
    columns.push_back(c);
  }
  if (mu.empty()) throw BasisQualityError("no eigenpair survives the drop threshold");

  const auto rows = static_cast<Eigen::Index>(n);
  const auto cols = static_cast<Eigen::Index>(mu.size());
  Eigen::MatrixXd values(rows, cols);
  std::vector<double> residuals(mu.size());
  for (Eigen::Index i = 0; i < cols; ++i) {
    Eigen::VectorXd v = solver.eigenvectors().col(columns[static_cast<std::size_t>(i)]);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0.0) v = -v;
    const double mu_i = mu[static_cast<std::size_t>(i)];
    residuals[static_cast<std::size_t>(i)] = (scale * (a * v) - mu_i * v).norm();
    values.col(i) = v.cwiseQuotient(sqrt_w);
  }

  SampledEigenbasis basis(measure.points, measure.weights, EigenSpectrum(std::move(mu)),
                          std::move(values));
  const std::size_t rank = basis.function_count();
  return NystromDecomposition{std::move(basis), rank, scale, std::move(residuals)};
}

OnsValidation validate_ons(const NystromDecomposition& dec, double tol,
                           const Eigen::MatrixXd* gram) {
  const SampledEigenbasis& basis = dec.basis;
  OnsValidation out;
  out.l2 = ons_diagnostics(basis);
  for (double r : dec.residuals) out.max_residual = std::max(out.max_residual, r);

  const Eigen::Map<const Eigen::VectorXd> w(basis.quad_weights().data(),
                                            static_cast<Eigen::Index>(basis.point_count()));
  const Eigen::MatrixXd& e = basis.values();
  const auto mu = basis.spectrum().values();
  const auto m = static_cast<Eigen::Index>(mu.size());
  Eigen::MatrixXd h(m, m);
  if (gram != nullptr) {
    if (gram->rows() != e.rows() || gram->cols() != e.rows()) {
      throw AlignmentError("validate_ons: Gram matrix does not match the sample points");
    }
    const Eigen::MatrixXd we = w.asDiagonal() * e;
    h = dec.kernel_scale * (we.transpose() * (*gram) * we);
  } else {
    // G_w e_l = mu_l e_l turns the H product into mu_l <e_i, e_l>_{L^2}
    h = e.transpose() * w.asDiagonal() * e;
    for (Eigen::Index l = 0; l < m; ++l) h.col(l) *= mu[static_cast<std::size_t>(l)];
  }
  double worst = -1.0;
  for (Eigen::Index l = 0; l < m; ++l) {
    double column_worst = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double normalized =
          h(i, l) / std::sqrt(mu[static_cast<std::size_t>(i)] * mu[static_cast<std::size_t>(l)]);
      column_worst = std::max(column_worst, std::abs(normalized - (i == l ? 1.0 : 0.0)));
    }
    out.h_deviation = std::max(out.h_deviation, column_worst);
    if (column_worst > worst) {
      worst = column_worst;
      out.h_worst_column = static_cast<std::size_t>(l);
    }
  }

  out.passed = out.l2.worst() <= tol && out.h_deviation <= tol;
  if (!out.passed) {
    std::ostringstream os;
    if (out.l2.worst() > tol) {
      os << "L2 orthonormality fails at column " << out.l2.worst_column + 1 << " (deviation "
         << out.l2.worst() << ")";
    } else {
      os << "H orthonormality fails at column " << out.h_worst_column + 1 << " (deviation "
         << out.h_deviation << ")";
    }
    out.message = os.str();
  }
  return out;
}

namespace {

constexpr const char* kDecompositionFormat = "powerspace-decomposition";

template <typename T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) throw SchemaError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw SchemaError(std::string("field '") + key + "': " + e.what());
  }
}

json parse_json(std::istream& in, const std::string& what) {
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(what + ": " + e.what());
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open " + path.string());
  return in;
}

json basis_json(const SampledEigenbasis& b) {
  const auto mu = b.spectrum().values();
  std::vector<double> values;
  values.reserve(b.point_count() * b.function_count());
  for (Eigen::Index k = 0; k < b.values().rows(); ++k) {
    for (Eigen::Index i = 0; i < b.values().cols(); ++i) values.push_back(b.values()(k, i));
  }
  json j;
  j["points"] = b.points();
  j["quad_weights"] = b.quad_weights();
  j["mu"] = std::vector<double>(mu.begin(), mu.end());
  j["values"] = values;
  return j;
}

SampledEigenbasis basis_from_json(const json& j) {
  auto points = field<std::vector<double>>(j, "points");
  auto weights = field<std::vector<double>>(j, "quad_weights");
  auto mu = field<std::vector<double>>(j, "mu");
  const auto flat = field<std::vector<double>>(j, "values");
  if (flat.size() != points.size() * mu.size()) {
    throw SchemaError("values has " + std::to_string(flat.size()) + " entries, expected " +
                      std::to_string(points.size() * mu.size()));
  }
  Eigen::MatrixXd values(static_cast<Eigen::Index>(points.size()),
                         static_cast<Eigen::Index>(mu.size()));
  std::size_t pos = 0;
  for (Eigen::Index k = 0; k < values.rows(); ++k) {
    for (Eigen::Index i = 0; i < values.cols(); ++i) values(k, i) = flat[pos++];
  }
  try {
    return SampledEigenbasis(std::move(points), std::move(weights), EigenSpectrum(std::move(mu)),
                             std::move(values));
  } catch (const ParameterError& e) {
    throw SchemaError(std::string("invalid basis: ") + e.what());
  }
}

}  // namespace

void save_basis(const SampledEigenbasis& basis, std::ostream& out) {
  out << basis_json(basis).dump() << '\n';
  if (!out) throw ParameterError("failed to write basis");
}

SampledEigenbasis load_basis(std::istream& in) {
  const json j = parse_json(in, "basis");
  if (!j.is_object()) throw SchemaError("basis must be a JSON object");
  return basis_from_json(j);
}

void save_decomposition(const NystromDecomposition& dec, std::ostream& out) {
  json j = basis_json(dec.basis);
  j["format"] = kDecompositionFormat;
  j["version"] = kDecompositionVersion;
  j["rank"] = dec.rank;
  j["kernel_scale"] = dec.kernel_scale;
  j["residuals"] = dec.residuals;
  out << j.dump() << '\n';
  if (!out) throw ParameterError("failed to write decomposition");
}

void save_decomposition(const NystromDecomposition& dec, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParameterError("cannot open " + path.string() + " for writing");
  save_decomposition(dec, out);
}

NystromDecomposition load_decomposition(std::istream& in) {
  const json j = parse_json(in, "decomposition");
  if (!j.is_object()) throw SchemaError("decomposition must be a JSON object");
  if (field<std::string>(j, "format") != kDecompositionFormat) {
    throw SchemaError("not a decomposition file");
  }
  const int version = field<int>(j, "version");
  if (version != kDecompositionVersion) {
    throw SchemaError("unsupported decomposition version " + std::to_string(version));
  }
  const auto rank = field<std::size_t>(j, "rank");
  const auto scale = field<double>(j, "kernel_scale");
  auto residuals = field<std::vector<double>>(j, "residuals");
  SampledEigenbasis basis = basis_from_json(j);
  if (rank != basis.function_count() || residuals.size() != basis.function_count()) {
    throw SchemaError("rank and residuals must match the number of eigenvalues");
  }
  return NystromDecomposition{std::move(basis), rank, scale, std::move(residuals)};
}

NystromDecomposition load_decomposition(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  return load_decomposition(in);
}

KernelConfig parse_kernel_config(std::istream& in) {
  const json j = parse_json(in, "kernel config");
  if (!j.is_object()) throw SchemaError("kernel config must be a JSON object");
  if (!j.contains("kernel") || !j["kernel"].is_object()) {
    throw SchemaError("kernel config needs a 'kernel' object");
  }
  if (!j.contains("measure") || !j["measure"].is_object()) {
    throw SchemaError("kernel config needs a 'measure' object");
  }
  const json& kj = j["kernel"];
  const json params = kj.contains("params") ? kj["params"] : json::object();
  if (!params.is_object()) throw SchemaError("kernel params must be an object");
  const auto kind = field<std::string>(kj, "kind");
  std::optional<KernelSpec> kernel;
  try {
    if (kind == "gaussian") {
      kernel = KernelSpec::gaussian(field<double>(params, "width"));
    } else if (kind == "brownian-bridge") {
      kernel = KernelSpec::brownian_bridge();
    } else if (kind == "polynomial") {
      kernel = KernelSpec::polynomial(field<int>(params, "degree"));
    } else {
      throw SchemaError("unknown kernel kind '" + kind + "'");
    }
  } catch (const ParameterError& e) {
    throw SchemaError(e.what());
  }

  const json& mj = j["measure"];
  const auto mkind = field<std::string>(mj, "kind");
  QuadratureKind qk;
  if (mkind == "uniform") {
    qk = QuadratureKind::uniform;
  } else if (mkind == "gauss-legendre") {
    qk = QuadratureKind::gauss_legendre;
  } else {
    throw SchemaError("unknown measure kind '" + mkind + "'");
  }
  const auto n = field<std::int64_t>(mj, "n");
  if (n <= 0) throw SchemaError("measure.n must be positive");

  NystromOptions options;
  if (j.contains("rank") && !j["rank"].is_null()) {
    const auto rank = field<std::int64_t>(j, "rank");
    if (rank <= 0) throw SchemaError("rank must be positive");
    options.rank = static_cast<std::size_t>(rank);
  }
  if (j.contains("drop_tol") && !j["drop_tol"].is_null()) {
    options.drop_tol = field<double>(j, "drop_tol");
    if (!(*options.drop_tol >= 0.0)) throw SchemaError("drop_tol must be non-negative");
  }
  if (j.contains("normalize_to_unit_top")) {
    options.normalize_to_unit_top = field<bool>(j, "normalize_to_unit_top");
  }
  return KernelConfig{*kernel, qk, static_cast<std::size_t>(n), options};
}

KernelConfig parse_kernel_config(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  return parse_kernel_config(in);
}

NystromDecomposition decompose(const KernelConfig& config) {
  const QuadratureMeasure measure = config.measure();
  return nystrom_eig(build_gram(config.kernel, measure), measure, config.options);
}

}  // namespace powerspace
