#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace powerspace {

/// Fine index r of the real interpolation method, r in [1, inf]. Infinity is
/// a distinct state, never a large finite number.
class FineIndex {
 public:
  /// Throws ParameterError unless r >= 1. Passing +inf yields infinity().
  explicit FineIndex(double r);

  static FineIndex infinity() noexcept;

  /// Accepts "inf", "infinity" or a decimal number >= 1.
  static FineIndex parse(std::string_view text);

  bool is_infinite() const noexcept { return infinite_; }

  /// The exponent; +inf when is_infinite().
  double value() const noexcept;

  /// r' with 1/r + 1/r' = 1 and 1/inf := 0.
  FineIndex conjugate() const noexcept;

  std::string to_string() const;

  friend bool operator==(const FineIndex&, const FineIndex&) = default;

 private:
  FineIndex() = default;
  double r_ = 1.0;
  bool infinite_ = false;
};

/// Smoothness theta in (0,1) and fine index r.
class PowerParams {
 public:
  PowerParams(double theta, FineIndex r);

  double theta() const noexcept { return theta_; }
  FineIndex r() const noexcept { return r_; }
  FineIndex conjugate_r() const noexcept { return r_.conjugate(); }

  /// Same theta, conjugate fine index.
  PowerParams dual() const { return PowerParams(theta_, r_.conjugate()); }

 private:
  double theta_;
  FineIndex r_;
};

/// Non-increasing, strictly positive eigenvalues mu_1 >= ... >= mu_n > 0.
class EigenSpectrum {
 public:
  /// Throws ParameterError on an empty list, non-positive or non-finite
  /// entries, or an increasing step.
  explicit EigenSpectrum(std::vector<double> values);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double top() const noexcept { return values_.front(); }
  double bottom() const noexcept { return values_.back(); }

  friend bool operator==(const EigenSpectrum&, const EigenSpectrum&) = default;

 private:
  std::vector<double> values_;
};

/// Real coefficients against the eigenbasis, aligned index-for-index with a
/// spectrum.
using CoeffSeq = std::vector<double>;

/// Indices [begin, end) whose reciprocal eigenvalue lies in (s^j, s^{j+1}].
/// Blocks are contiguous because the spectrum is sorted.
struct Block {
  int j;
  std::size_t begin;
  std::size_t end;

  std::size_t size() const noexcept { return end - begin; }
};

/// Partition of {0, ..., n-1} into the non-empty blocks M_j, ordered by j.
class BlockPartition {
 public:
  BlockPartition(EigenSpectrum spectrum, double base, std::vector<Block> blocks);

  const EigenSpectrum& spectrum() const noexcept { return spectrum_; }
  const std::vector<Block>& blocks() const noexcept { return blocks_; }
  double base() const noexcept { return base_; }
  std::size_t index_count() const noexcept { return spectrum_.size(); }

  /// nullptr when M_j is empty.
  const Block* find(int j) const noexcept;

  /// Block label j of index i (0-based).
  int block_of(std::size_t i) const;

 private:
  EigenSpectrum spectrum_;
  double base_;
  std::vector<Block> blocks_;
};

/// The unique j with 2^j < 1/mu <= 2^{j+1}. Exact: read off the binary
/// exponent of mu, no floating comparison involved.
int dyadic_block_index(double mu);

/// Dyadic partition with weight w(i) = 1/mu_i.
BlockPartition partition_blocks(const EigenSpectrum& spectrum);

/// Partition with base s > 1. s == 2 delegates to the exact dyadic routine.
BlockPartition partition_blocks(const EigenSpectrum& spectrum, double base);

/// c_j(b) = (sum_{i in M_j} b_i^2 mu_i^{-theta})^{1/2}; 0 for an empty block.
double block_component(std::span<const double> b, const BlockPartition& part, int j,
                       double theta);

/// c_j(b) for every non-empty block, in the order of part.blocks().
std::vector<double> block_components(std::span<const double> b, const BlockPartition& part,
                                     double theta);

/// l^r norm of a non-negative sequence; scaled by its maximum to avoid
/// overflow for large r.
double lr_norm(std::span<const double> values, FineIndex r);

/// ||b||_{(mu,theta,r)}: the l^r norm of the block components.
double power_norm(std::span<const double> b, const EigenSpectrum& spectrum,
                  const PowerParams& params);
double power_norm(std::span<const double> b, const BlockPartition& part,
                  const PowerParams& params);

/// Same norm with blocks built on base s > 1 instead of 2.
double power_norm_rescaled_base(std::span<const double> b, const EigenSpectrum& spectrum,
                                const PowerParams& params, double base);

/// (sum_i b_i^2 mu_i^{-theta})^{1/2}, summed directly without blocks.
double weighted_l2_norm(std::span<const double> b, const EigenSpectrum& spectrum,
                        double theta);

/// Throws AlignmentError when the lengths differ.
void require_aligned(std::size_t coeffs, std::size_t spectrum, std::string_view what);

}  // namespace powerspace
