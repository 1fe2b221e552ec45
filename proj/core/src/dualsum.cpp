#include "powerspace/dualsum.hpp"

#include <algorithm>
#include <cmath>

#include "powerspace/error.hpp"
#include "powerspace/summation.hpp"

namespace powerspace {

double DirectSumBlock::norm() const {
  if (values.size() != weights.size()) throw AlignmentError("direct-sum block: values/weights mismatch");
  CompensatedSum acc;
  for (std::size_t i = 0; i < values.size(); ++i) acc.add(values[i] * values[i] * weights[i]);
  return std::sqrt(acc.value());
}

DirectSumVec DirectSumVec::from_coefficients(std::span<const double> b, const BlockPartition& part,
                                             double theta) {
  require_aligned(b.size(), part.index_count(), "DirectSumVec::from_coefficients");
  const auto mu = part.spectrum().values();
  DirectSumVec x;
  x.blocks.reserve(part.blocks().size());
  for (const Block& block : part.blocks()) {
    DirectSumBlock component{block.j, {}, {}};
    for (std::size_t i = block.begin; i < block.end; ++i) {
      component.values.push_back(b[i]);
      component.weights.push_back(std::pow(mu[i], -theta));
    }
    x.blocks.push_back(std::move(component));
  }
  return x;
}

double psum_norm(const DirectSumVec& x, DirectSumExponent p) {
  std::vector<double> norms;
  norms.reserve(x.blocks.size());
  for (const auto& block : x.blocks) norms.push_back(block.norm());
  return lr_norm(norms, p.norm_exponent());
}

DualPairResult dual_pairing(std::span<const double> a, std::span<const double> b,
                            const EigenSpectrum& spectrum, double theta) {
  require_aligned(a.size(), spectrum.size(), "dual_pairing");
  require_aligned(b.size(), spectrum.size(), "dual_pairing");
  CompensatedSum value;
  CompensatedSum absolute;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double term = a[i] * b[i] * std::pow(spectrum[i], -theta);
    value.add(term);
    absolute.add(std::abs(term));
  }
  return DualPairResult{value.value(), absolute.value()};
}

double blockwise_pairing(std::span<const double> a, std::span<const double> b,
                         const BlockPartition& part, double theta) {
  require_aligned(a.size(), part.index_count(), "blockwise_pairing");
  require_aligned(b.size(), part.index_count(), "blockwise_pairing");
  const auto mu = part.spectrum().values();
  CompensatedSum total;
  for (const Block& block : part.blocks()) {
    CompensatedSum inner;
    for (std::size_t i = block.begin; i < block.end; ++i) {
      inner.add(a[i] * b[i] * std::pow(mu[i], -theta));
    }
    total.add(inner.value());
  }
  return total.value();
}

HolderCheck holder_check(std::span<const double> a, std::span<const double> b,
                         const EigenSpectrum& spectrum, const PowerParams& params) {
  const BlockPartition part = partition_blocks(spectrum);
  const double lhs = dual_pairing(a, b, spectrum, params.theta()).absolute_value_sum;
  const double rhs = power_norm(a, part, params.dual()) * power_norm(b, part, params);
  if (lhs > rhs + 1e-12 * rhs) {
    throw InvariantViolation("Hoelder inequality violated: " + std::to_string(lhs) + " > " +
                             std::to_string(rhs));
  }
  return HolderCheck{lhs, rhs};
}

DualExtremal dual_norm_extremal(std::span<const double> a, const EigenSpectrum& spectrum,
                                const PowerParams& params) {
  require_aligned(a.size(), spectrum.size(), "dual_norm_extremal");
  const BlockPartition part = partition_blocks(spectrum);
  const std::vector<double> c = block_components(a, part, params.theta());
  const FineIndex r = params.r();
  const FineIndex r_dual = r.conjugate();
  const double dual_norm = lr_norm(c, r_dual);
  if (dual_norm == 0.0) throw DegenerateInputError("dual_norm_extremal needs a != 0");

  std::vector<double> mass(c.size(), 0.0);
  if (r.value() == 1.0) {
    const auto arg = std::distance(c.begin(), std::max_element(c.begin(), c.end()));
    mass[static_cast<std::size_t>(arg)] = 1.0;
  } else if (r.is_infinite()) {
    for (std::size_t k = 0; k < c.size(); ++k) mass[k] = c[k] > 0.0 ? 1.0 : 0.0;
  } else {
    const double exponent = r_dual.value() - 1.0;
    for (std::size_t k = 0; k < c.size(); ++k) {
      mass[k] = c[k] > 0.0 ? std::pow(c[k] / dual_norm, exponent) : 0.0;
    }
  }

  CoeffSeq b(a.size(), 0.0);
  const auto& blocks = part.blocks();
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    if (mass[k] == 0.0) continue;
    for (std::size_t i = blocks[k].begin; i < blocks[k].end; ++i) b[i] = mass[k] * a[i] / c[k];
  }
  const double attained = dual_pairing(a, b, spectrum, params.theta()).value;
  return DualExtremal{std::move(b), attained};
}

}  // namespace powerspace
