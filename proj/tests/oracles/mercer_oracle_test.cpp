#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "powerspace/kernelmodel.hpp"

namespace powerspace {
namespace {

// Brownian bridge min(x,y) - xy on [0,1] with Lebesgue measure has the
// Mercer pairs mu_i = (pi i)^{-2}, e_i = sqrt2 sin(pi i x).
double bridge_eigenvalue(int i) { return 1.0 / (std::numbers::pi * std::numbers::pi * i * i); }

TEST(MercerOracle, BrownianBridgeAt512UniformPoints) {
  const auto m = QuadratureMeasure::uniform(512);
  const auto dec = nystrom_eig(build_gram(KernelSpec::brownian_bridge(), m), m);
  for (int i = 1; i <= 5; ++i) {
    const double err = std::abs(dec.spectrum()[static_cast<std::size_t>(i - 1)] - bridge_eigenvalue(i)) /
                       bridge_eigenvalue(i);
    EXPECT_LE(err, 0.02) << i;
  }
}

TEST(MercerOracle, BrownianBridgeErrorShrinksWithRefinement) {
  double previous = INFINITY;
  for (std::size_t n : {32u, 64u, 128u, 256u}) {
    const auto m = QuadratureMeasure::uniform(n);
    const auto dec = nystrom_eig(build_gram(KernelSpec::brownian_bridge(), m), m);
    double worst = 0.0;
    for (int i = 1; i <= 5; ++i) {
      worst = std::max(worst, std::abs(dec.spectrum()[static_cast<std::size_t>(i - 1)] - bridge_eigenvalue(i)) /
                                  bridge_eigenvalue(i));
    }
    EXPECT_LT(worst, previous) << n;
    previous = worst;
  }
}

TEST(MercerOracle, GaussianKernelConvergesUnderGaussLegendre) {
  // the analytic kernel makes Gauss-Legendre Nystroem converge geometrically;
  // a 160-point rule serves as the reference for a 60-point one
  const auto kernel = KernelSpec::gaussian(0.3);
  const auto fine = QuadratureMeasure::gauss_legendre(160);
  const auto coarse = QuadratureMeasure::gauss_legendre(60);
  const auto ref = nystrom_eig(build_gram(kernel, fine), fine);
  const auto dec = nystrom_eig(build_gram(kernel, coarse), coarse);
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_LE(std::abs(dec.spectrum()[i] - ref.spectrum()[i]), 1e-12 * ref.spectrum()[0]) << i;
  }
}

}  // namespace
}  // namespace powerspace
