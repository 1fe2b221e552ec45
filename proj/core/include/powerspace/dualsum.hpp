#pragma once

#include <span>
#include <utility>
#include <vector>

#include "powerspace/spectrum.hpp"

namespace powerspace {

/// Exponent of a p-direct sum: 0 (the c_0-type sum, normed by sup), or
/// p in [1, inf].
class DirectSumExponent {
 public:
  static DirectSumExponent zero() noexcept { return DirectSumExponent(); }
  DirectSumExponent(FineIndex p) noexcept : p_(p), zero_(false) {}  // NOLINT(google-explicit-constructor)

  bool is_zero() const noexcept { return zero_; }
  /// The l^p exponent used for the norm (inf for the zero sum).
  FineIndex norm_exponent() const noexcept { return zero_ ? FineIndex::infinity() : p_; }

 private:
  DirectSumExponent() noexcept : p_(FineIndex::infinity()), zero_(true) {}
  FineIndex p_;
  bool zero_;
};

/// One component of a direct sum: a vector over the index block M_j, normed
/// in E_j = l^2((mu_i^{-theta})_{i in M_j}).
struct DirectSumBlock {
  int j;
  std::vector<double> values;
  std::vector<double> weights;  ///< mu_i^{-theta} for the indices of the block

  double norm() const;
};

/// Element of the p-direct sum of the blocks E_j.
struct DirectSumVec {
  std::vector<DirectSumBlock> blocks;

  /// The projections pi_j(b) for every non-empty block of `part`.
  static DirectSumVec from_coefficients(std::span<const double> b, const BlockPartition& part,
                                        double theta);
};

/// ||x||_p = || (||x_j||_{E_j})_j ||_{l^p}.
double psum_norm(const DirectSumVec& x, DirectSumExponent p);

struct DualPairResult {
  double value;
  double absolute_value_sum;
};

/// sum_i a_i b_i mu_i^{-theta} and sum_i |a_i b_i| mu_i^{-theta}, compensated.
DualPairResult dual_pairing(std::span<const double> a, std::span<const double> b,
                            const EigenSpectrum& spectrum, double theta);

/// sum_j <pi_j a, pi_j b>_{E_j}, accumulated block by block.
double blockwise_pairing(std::span<const double> a, std::span<const double> b,
                         const BlockPartition& part, double theta);

struct HolderCheck {
  double lhs;  ///< sum |a_i b_i| mu_i^{-theta}
  double rhs;  ///< ||a||_{(mu,theta,r')} ||b||_{(mu,theta,r)}
};

/// Throws InvariantViolation if lhs > rhs (1 + 1e-12).
HolderCheck holder_check(std::span<const double> a, std::span<const double> b,
                         const EigenSpectrum& spectrum, const PowerParams& params);

struct DualExtremal {
  CoeffSeq b_star;  ///< unit vector of ||.||_{(mu,theta,r)}
  double attained;  ///< dual_pairing(a, b_star) = ||a||_{(mu,theta,r')}
};

/// Maximiser of b -> sum a_i b_i mu_i^{-theta} over the unit ball of
/// ||.||_{(mu,theta,r)}. Inside every block b is parallel to a; across blocks
/// the masses are c_j(a)^{r'-1} / ||c(a)||_{r'}^{r'-1} for 1 < r < inf, a
/// single arg-max block for r = 1, and mass 1 on every non-zero block for
/// r = inf. Throws DegenerateInputError for a = 0.
DualExtremal dual_norm_extremal(std::span<const double> a, const EigenSpectrum& spectrum,
                                const PowerParams& params);

}  // namespace powerspace
