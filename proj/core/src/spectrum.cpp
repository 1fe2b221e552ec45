#include "powerspace/spectrum.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "powerspace/error.hpp"
#include "powerspace/summation.hpp"

namespace powerspace {

FineIndex::FineIndex(double r) {
  if (std::isnan(r) || r < 1.0) {
    throw ParameterError("fine index r must satisfy r >= 1 (got " + std::to_string(r) + ")");
  }
  if (std::isinf(r)) {
    infinite_ = true;
    r_ = std::numeric_limits<double>::infinity();
  } else {
    r_ = r;
  }
}

FineIndex FineIndex::infinity() noexcept {
  FineIndex f;
  f.infinite_ = true;
  f.r_ = std::numeric_limits<double>::infinity();
  return f;
}

FineIndex FineIndex::parse(std::string_view text) {
  if (text == "inf" || text == "infinity" || text == "Inf" || text == "INF") return infinity();
  double v = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) {
    throw ParameterError("cannot parse fine index '" + std::string(text) + "'");
  }
  return FineIndex(v);
}

double FineIndex::value() const noexcept { return r_; }

FineIndex FineIndex::conjugate() const noexcept {
  if (infinite_) return FineIndex(1.0);
  if (r_ == 1.0) return infinity();
  return FineIndex(r_ / (r_ - 1.0));
}

std::string FineIndex::to_string() const {
  if (infinite_) return "inf";
  std::ostringstream os;
  os.precision(17);
  os << r_;
  return os.str();
}

PowerParams::PowerParams(double theta, FineIndex r) : theta_(theta), r_(r) {
  if (!(theta > 0.0 && theta < 1.0)) {
    throw ParameterError("theta must lie in (0,1) (got " + std::to_string(theta) + ")");
  }
}

EigenSpectrum::EigenSpectrum(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw ParameterError("spectrum must not be empty");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double mu = values_[i];
    if (!std::isfinite(mu) || mu <= 0.0) {
      throw ParameterError("eigenvalue " + std::to_string(i + 1) + " is not a positive finite number");
    }
    if (i > 0 && mu > values_[i - 1]) {
      throw ParameterError("eigenvalues must be non-increasing (index " + std::to_string(i + 1) + ")");
    }
  }
}

BlockPartition::BlockPartition(EigenSpectrum spectrum, double base, std::vector<Block> blocks)
    : spectrum_(std::move(spectrum)), base_(base), blocks_(std::move(blocks)) {}

const Block* BlockPartition::find(int j) const noexcept {
  const auto it = std::lower_bound(blocks_.begin(), blocks_.end(), j,
                                   [](const Block& b, int key) { return b.j < key; });
  if (it == blocks_.end() || it->j != j) return nullptr;
  return &*it;
}

int BlockPartition::block_of(std::size_t i) const {
  if (i >= index_count()) throw ParameterError("index out of range in block_of");
  const auto it = std::upper_bound(blocks_.begin(), blocks_.end(), i,
                                   [](std::size_t key, const Block& b) { return key < b.end; });
  return it->j;
}

int dyadic_block_index(double mu) {
  // mu = m * 2^e with m in [1/2, 1), i.e. mu in [2^{e-1}, 2^e), so j = -e.
  int e = 0;
  std::frexp(mu, &e);
  return -e;
}

namespace {

template <typename IndexFn>
std::vector<Block> group_contiguous(const EigenSpectrum& spectrum, IndexFn index_of) {
  std::vector<Block> blocks;
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    const int j = index_of(spectrum[i]);
    if (blocks.empty() || blocks.back().j != j) {
      blocks.push_back(Block{j, i, i + 1});
    } else {
      blocks.back().end = i + 1;
    }
  }
  return blocks;
}

int base_block_index(double mu, double base) {
  const double w = 1.0 / mu;
  int j = static_cast<int>(std::ceil(std::log(w) / std::log(base))) - 1;
  while (std::pow(base, j) >= w) --j;
  while (std::pow(base, j + 1) < w) ++j;
  return j;
}

}  // namespace

BlockPartition partition_blocks(const EigenSpectrum& spectrum) {
  return BlockPartition(spectrum, 2.0, group_contiguous(spectrum, dyadic_block_index));
}

BlockPartition partition_blocks(const EigenSpectrum& spectrum, double base) {
  if (!(base > 1.0) || !std::isfinite(base)) {
    throw ParameterError("block base s must satisfy s > 1");
  }
  if (base == 2.0) return partition_blocks(spectrum);
  return BlockPartition(spectrum, base, group_contiguous(spectrum, [base](double mu) {
                          return base_block_index(mu, base);
                        }));
}

void require_aligned(std::size_t coeffs, std::size_t spectrum, std::string_view what) {
  if (coeffs != spectrum) {
    throw AlignmentError(std::string(what) + ": coefficient length " + std::to_string(coeffs) +
                         " does not match spectrum length " + std::to_string(spectrum));
  }
}

namespace {

double block_component_of(std::span<const double> b, std::span<const double> mu,
                          const Block& block, double theta) {
  CompensatedSum acc;
  for (std::size_t i = block.begin; i < block.end; ++i) {
    acc.add(b[i] * b[i] * std::pow(mu[i], -theta));
  }
  return std::sqrt(acc.value());
}

}  // namespace

double block_component(std::span<const double> b, const BlockPartition& part, int j,
                       double theta) {
  require_aligned(b.size(), part.index_count(), "block_component");
  const Block* block = part.find(j);
  if (block == nullptr) return 0.0;
  return block_component_of(b, part.spectrum().values(), *block, theta);
}

std::vector<double> block_components(std::span<const double> b, const BlockPartition& part,
                                     double theta) {
  require_aligned(b.size(), part.index_count(), "block_components");
  std::vector<double> c;
  c.reserve(part.blocks().size());
  for (const Block& block : part.blocks()) {
    c.push_back(block_component_of(b, part.spectrum().values(), block, theta));
  }
  return c;
}

double lr_norm(std::span<const double> values, FineIndex r) {
  double peak = 0.0;
  for (double v : values) peak = std::max(peak, std::abs(v));
  if (r.is_infinite() || peak == 0.0) return peak;
  const double p = r.value();
  CompensatedSum acc;
  if (p == 1.0) {
    for (double v : values) acc.add(std::abs(v));
    return acc.value();
  }
  for (double v : values) acc.add(std::pow(std::abs(v) / peak, p));
  return peak * std::pow(acc.value(), 1.0 / p);
}

double power_norm(std::span<const double> b, const BlockPartition& part,
                  const PowerParams& params) {
  return lr_norm(block_components(b, part, params.theta()), params.r());
}

double power_norm(std::span<const double> b, const EigenSpectrum& spectrum,
                  const PowerParams& params) {
  require_aligned(b.size(), spectrum.size(), "power_norm");
  return power_norm(b, partition_blocks(spectrum), params);
}

double power_norm_rescaled_base(std::span<const double> b, const EigenSpectrum& spectrum,
                                const PowerParams& params, double base) {
  require_aligned(b.size(), spectrum.size(), "power_norm_rescaled_base");
  return power_norm(b, partition_blocks(spectrum, base), params);
}

double weighted_l2_norm(std::span<const double> b, const EigenSpectrum& spectrum,
                        double theta) {
  require_aligned(b.size(), spectrum.size(), "weighted_l2_norm");
  CompensatedSum acc;
  for (std::size_t i = 0; i < b.size(); ++i) acc.add(b[i] * b[i] * std::pow(spectrum[i], -theta));
  return std::sqrt(acc.value());
}

}  // namespace powerspace
