#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "powerspace/error.hpp"
#include "powerspace/kernelmodel.hpp"
#include "powerspace/parallel.hpp"

namespace powerspace {
namespace {

TEST(KernelSpec, ClosedFormValues) {
  EXPECT_DOUBLE_EQ(KernelSpec::brownian_bridge()(0.5, 0.5), 0.25);
  EXPECT_DOUBLE_EQ(KernelSpec::brownian_bridge()(0.2, 0.7), 0.2 - 0.14);
  EXPECT_DOUBLE_EQ(KernelSpec::gaussian(0.3)(0.4, 0.4), 1.0);
  EXPECT_NEAR(KernelSpec::gaussian(0.5)(0.0, 0.5), std::exp(-0.5), 1e-15);
  EXPECT_DOUBLE_EQ(KernelSpec::polynomial(2)(1.0, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(KernelSpec::polynomial(0)(0.3, 0.9), 1.0);
  EXPECT_THROW(KernelSpec::gaussian(0.0), ParameterError);
  EXPECT_THROW(KernelSpec::gaussian(-1.0), ParameterError);
  EXPECT_THROW(KernelSpec::polynomial(-1), ParameterError);
}

TEST(QuadratureMeasure, ProbabilityMeasures) {
  const auto u = QuadratureMeasure::uniform(10);
  EXPECT_NEAR(u.mass(), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(u.points.front(), 0.05);
  const auto gl = QuadratureMeasure::gauss_legendre(6);
  EXPECT_NEAR(gl.mass(), 1.0, 1e-15);
  double moment = 0.0;
  for (std::size_t k = 0; k < gl.size(); ++k) moment += gl.weights[k] * std::pow(gl.points[k], 11);
  EXPECT_NEAR(moment, 1.0 / 12.0, 1e-15);
  EXPECT_THROW(QuadratureMeasure::uniform(0), ParameterError);
  QuadratureMeasure bad{{0.5, 1.5}, {0.5, 0.5}};
  EXPECT_THROW(bad.validate(), ParameterError);
}

TEST(BuildGram, WideGaussianIsAllOnes) {
  const auto m = QuadratureMeasure::uniform(8);
  const auto g = build_gram(KernelSpec::gaussian(1e8), m);
  EXPECT_LE((g - Eigen::MatrixXd::Ones(8, 8)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(BuildGram, OnePointMeasure) {
  const QuadratureMeasure m{{0.5}, {1.0}};
  const auto g = build_gram(KernelSpec::brownian_bridge(), m);
  ASSERT_EQ(g.rows(), 1);
  EXPECT_DOUBLE_EQ(g(0, 0), 0.25);
}

TEST(BuildGram, SymmetricAndThreadIndependent) {
  const auto m = QuadratureMeasure::gauss_legendre(40);
  set_thread_count(1);
  const auto serial = build_gram(KernelSpec::gaussian(0.2), m);
  set_thread_count(4);
  const auto threaded = build_gram(KernelSpec::gaussian(0.2), m);
  set_thread_count(1);
  EXPECT_TRUE(serial == threaded);
  EXPECT_TRUE(serial == serial.transpose());
}

TEST(Nystrom, ConstantKernelHasRankOne) {
  const auto m = QuadratureMeasure::uniform(16);
  const auto dec = nystrom_eig(build_gram(KernelSpec::polynomial(0), m), m);
  ASSERT_EQ(dec.rank, 1u);
  EXPECT_NEAR(dec.spectrum()[0], 1.0, 1e-14);
  for (Eigen::Index k = 0; k < 16; ++k) EXPECT_NEAR(dec.basis.values()(k, 0), 1.0, 1e-13);
}

TEST(Nystrom, NarrowGaussianOnTwoPointsIsDiagonal) {
  const QuadratureMeasure m{{0.2, 0.8}, {0.3, 0.7}};
  const auto dec = nystrom_eig(build_gram(KernelSpec::gaussian(1e-3), m), m);
  ASSERT_EQ(dec.rank, 2u);
  // off-diagonal exp(-0.36/2e-6) underflows, so mu = w_k k(x_k, x_k)
  EXPECT_NEAR(dec.spectrum()[0], 0.7, 1e-15);
  EXPECT_NEAR(dec.spectrum()[1], 0.3, 1e-15);
}

TEST(Nystrom, BrownianBridgeApproachesMercerPairs) {
  const auto m = QuadratureMeasure::uniform(256);
  const auto dec = nystrom_eig(build_gram(KernelSpec::brownian_bridge(), m), m);
  EXPECT_EQ(dec.kernel_scale, 1.0);
  for (int i = 1; i <= 3; ++i) {
    const double exact = 1.0 / (std::numbers::pi * std::numbers::pi * i * i);
    EXPECT_LE(std::abs(dec.spectrum()[static_cast<std::size_t>(i - 1)] - exact) / exact, 1e-2);
    double dev_plus = 0.0, dev_minus = 0.0;
    for (std::size_t k = 0; k < m.size(); ++k) {
      const double f = std::sqrt(2.0) * std::sin(std::numbers::pi * i * m.points[k]);
      const double v = dec.basis.values()(static_cast<Eigen::Index>(k), i - 1);
      dev_plus = std::max(dev_plus, std::abs(v - f));
      dev_minus = std::max(dev_minus, std::abs(v + f));
    }
    EXPECT_LE(std::min(dev_plus, dev_minus), 1e-2) << i;
  }
}

TEST(Nystrom, ScalesOnlyWhenTopExceedsOne) {
  const auto m = QuadratureMeasure::gauss_legendre(12);
  const auto gram = build_gram(KernelSpec::polynomial(3), m);
  const auto dec = nystrom_eig(gram, m);
  EXPECT_LT(dec.kernel_scale, 1.0);
  EXPECT_EQ(dec.spectrum()[0], 1.0);
  NystromOptions raw;
  raw.normalize_to_unit_top = false;
  const auto unscaled = nystrom_eig(gram, m, raw);
  EXPECT_EQ(unscaled.kernel_scale, 1.0);
  EXPECT_NEAR(unscaled.spectrum()[0] * dec.kernel_scale, 1.0, 1e-13);
}

TEST(Nystrom, RankAndIndefiniteInputs) {
  const auto m = QuadratureMeasure::uniform(4);
  const auto gram = build_gram(KernelSpec::gaussian(0.3), m);
  NystromOptions opts;
  opts.rank = 2;
  EXPECT_EQ(nystrom_eig(gram, m, opts).rank, 2u);
  opts.rank = 5;
  EXPECT_THROW(nystrom_eig(gram, m, opts), ParameterError);

  const QuadratureMeasure two{{0.25, 0.75}, {0.5, 0.5}};
  Eigen::MatrixXd indefinite(2, 2);
  indefinite << 0.0, 1.0, 1.0, 0.0;
  EXPECT_THROW(nystrom_eig(indefinite, two), BasisQualityError);
}

TEST(Nystrom, DeterministicAcrossRuns) {
  const auto m = QuadratureMeasure::gauss_legendre(64);
  const auto gram = build_gram(KernelSpec::gaussian(0.15), m);
  EXPECT_TRUE(nystrom_eig(gram, m) == nystrom_eig(gram, m));
}

TEST(ValidateOns, FreshDecompositionPasses) {
  const auto m = QuadratureMeasure::gauss_legendre(48);
  const auto gram = build_gram(KernelSpec::brownian_bridge(), m);
  const auto dec = nystrom_eig(gram, m);
  const auto with_gram = validate_ons(dec, 1e-8, &gram);
  EXPECT_TRUE(with_gram.passed) << with_gram.message;
  const auto identity = validate_ons(dec, 1e-8);
  EXPECT_TRUE(identity.passed) << identity.message;
  EXPECT_LE(with_gram.max_residual, 1e-12);
}

TEST(ValidateOns, ZeroedColumnIsNamed) {
  const auto m = QuadratureMeasure::uniform(32);
  auto dec = nystrom_eig(build_gram(KernelSpec::brownian_bridge(), m), m);
  Eigen::MatrixXd values = dec.basis.values();
  values.col(3).setZero();
  NystromDecomposition broken{SampledEigenbasis(dec.basis.points(), dec.basis.quad_weights(),
                                                dec.basis.spectrum(), values),
                              dec.rank, dec.kernel_scale, dec.residuals};
  const auto res = validate_ons(broken, 1e-8);
  EXPECT_FALSE(res.passed);
  EXPECT_EQ(res.l2.worst_column, 3u);
  EXPECT_NE(res.message.find("column 4"), std::string::npos) << res.message;
}

TEST(ValidateOns, SingleEigenpair) {
  const auto m = QuadratureMeasure::uniform(8);
  const auto dec = nystrom_eig(build_gram(KernelSpec::polynomial(0), m), m);
  const auto res = validate_ons(dec, 1e-10);
  EXPECT_TRUE(res.passed);
  EXPECT_EQ(res.l2.max_offdiagonal, 0.0);
}

TEST(Persistence, RoundTripIsBitExact) {
  const auto m = QuadratureMeasure::gauss_legendre(20);
  const auto dec = nystrom_eig(build_gram(KernelSpec::gaussian(0.25), m), m);
  std::stringstream ss;
  save_decomposition(dec, ss);
  EXPECT_TRUE(load_decomposition(ss) == dec);

  std::stringstream basis_io;
  save_basis(dec.basis, basis_io);
  EXPECT_TRUE(load_basis(basis_io) == dec.basis);
}

TEST(Persistence, SchemaAndParseErrors) {
  const auto m = QuadratureMeasure::uniform(4);
  const auto dec = nystrom_eig(build_gram(KernelSpec::brownian_bridge(), m), m);
  std::stringstream ss;
  save_decomposition(dec, ss);
  const std::string text = ss.str();

  auto replaced = [&](const std::string& from, const std::string& to) {
    std::string t = text;
    const auto pos = t.find(from);
    EXPECT_NE(pos, std::string::npos) << from;
    t.replace(pos, from.size(), to);
    return t;
  };
  std::istringstream wrong_version(replaced("\"version\":1", "\"version\":2"));
  EXPECT_THROW(load_decomposition(wrong_version), SchemaError);
  std::istringstream wrong_format(replaced("powerspace-decomposition", "something-else"));
  EXPECT_THROW(load_decomposition(wrong_format), SchemaError);
  std::istringstream truncated(text.substr(0, text.size() / 2));
  EXPECT_THROW(load_decomposition(truncated), ParseError);
  std::istringstream missing(R"({"format":"powerspace-decomposition","version":1})");
  EXPECT_THROW(load_decomposition(missing), SchemaError);
}

TEST(KernelConfig, ParsesAndRejects) {
  std::istringstream ok(R"({"kernel":{"kind":"gaussian","params":{"width":0.2}},
                           "measure":{"kind":"gauss-legendre","n":30},"rank":5})");
  const auto cfg = parse_kernel_config(ok);
  EXPECT_EQ(cfg.kernel.kind(), KernelKind::gaussian);
  EXPECT_DOUBLE_EQ(cfg.kernel.width(), 0.2);
  EXPECT_EQ(cfg.measure_kind, QuadratureKind::gauss_legendre);
  EXPECT_EQ(cfg.measure_size, 30u);
  ASSERT_TRUE(cfg.options.rank.has_value());
  EXPECT_EQ(decompose(cfg).rank, 5u);

  std::istringstream bad_kind(R"({"kernel":{"kind":"laplace"},"measure":{"kind":"uniform","n":4}})");
  EXPECT_THROW(parse_kernel_config(bad_kind), SchemaError);
  std::istringstream bad_width(
      R"({"kernel":{"kind":"gaussian","params":{"width":-1}},"measure":{"kind":"uniform","n":4}})");
  EXPECT_THROW(parse_kernel_config(bad_width), SchemaError);
  std::istringstream no_measure(R"({"kernel":{"kind":"brownian-bridge"}})");
  EXPECT_THROW(parse_kernel_config(no_measure), SchemaError);
  std::istringstream not_json("{kernel:");
  EXPECT_THROW(parse_kernel_config(not_json), ParseError);
}

}  // namespace
}  // namespace powerspace
