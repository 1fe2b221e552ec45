#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "powerspace/spectrum.hpp"

namespace powerspace {

/// Contents of a spectrum/coefficient CSV file: header `index,mu` or
/// `index,mu,b`, 1-based consecutive indices, non-increasing mu.
struct SpectrumTable {
  EigenSpectrum spectrum;
  std::optional<CoeffSeq> coeffs;
};

SpectrumTable read_spectrum_csv(std::istream& in);
SpectrumTable read_spectrum_csv(const std::filesystem::path& path);

/// Writes with 17 significant digits so values round-trip exactly.
void write_spectrum_csv(std::ostream& out, const EigenSpectrum& spectrum,
                        const CoeffSeq* coeffs = nullptr);

}  // namespace powerspace
