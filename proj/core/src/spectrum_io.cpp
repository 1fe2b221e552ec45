#include "powerspace/spectrum_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "powerspace/error.hpp"

namespace powerspace {
namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

double parse_double(const std::string& field, std::size_t line_no) {
  double v = 0.0;
  const auto* last = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), last, v);
  if (field.empty() || ec != std::errc{} || ptr != last) {
    throw ParseError("line " + std::to_string(line_no) + ": cannot parse number '" + field + "'");
  }
  return v;
}

}  // namespace

SpectrumTable read_spectrum_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("spectrum CSV is empty");
  ++line_no;
  const auto header = split_commas(trim(line));
  const bool with_b = header == std::vector<std::string>{"index", "mu", "b"};
  if (!with_b && header != std::vector<std::string>{"index", "mu"}) {
    throw SchemaError("spectrum CSV header must be 'index,mu' or 'index,mu,b'");
  }

  std::vector<double> mu;
  CoeffSeq b;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != header.size()) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " fields");
    }
    const double index = parse_double(fields[0], line_no);
    if (index != static_cast<double>(mu.size() + 1)) {
      throw SchemaError("line " + std::to_string(line_no) + ": index must be " +
                        std::to_string(mu.size() + 1));
    }
    mu.push_back(parse_double(fields[1], line_no));
    if (with_b) b.push_back(parse_double(fields[2], line_no));
  }

  SpectrumTable table{EigenSpectrum(std::move(mu)), std::nullopt};
  if (with_b) table.coeffs = std::move(b);
  return table;
}

SpectrumTable read_spectrum_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open spectrum file " + path.string());
  return read_spectrum_csv(in);
}

void write_spectrum_csv(std::ostream& out, const EigenSpectrum& spectrum, const CoeffSeq* coeffs) {
  if (coeffs != nullptr) require_aligned(coeffs->size(), spectrum.size(), "write_spectrum_csv");
  const auto old_precision = out.precision(17);
  out << (coeffs != nullptr ? "index,mu,b\n" : "index,mu\n");
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    out << (i + 1) << ',' << spectrum[i];
    if (coeffs != nullptr) out << ',' << (*coeffs)[i];
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace powerspace
