#pragma once

#include <cstddef>
#include <vector>

namespace powerspace {

/// n-point Gauss-Legendre rule on [-1, 1], nodes ascending.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Roots of P_n by Newton iteration; exact for polynomials of degree < 2n.
/// Throws ParameterError for n = 0.
GaussRule gauss_legendre_rule(std::size_t n);

}  // namespace powerspace
