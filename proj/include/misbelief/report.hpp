#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace misbelief {

inline constexpr int kCsvDigits = 9;
inline constexpr int kTableDigits = 4;
inline constexpr int kFullDigits = 17;

/// %.{significant}g with negative zero printed as 0.
std::string format_number(double x, int significant);

/// Header block written as '#' comment lines above every CSV report.
struct Provenance {
  std::string command;
  std::string scenario_name;
  std::string input_digest;  // empty when the command has no input file
  std::uint64_t seed = 0;
};

/// Rectangular table rendered either as CSV or as aligned text.
class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

  /// Throws DimensionMismatch when the row width differs from the header.
  void add_row(std::vector<std::string> row);

  const std::vector<std::string>& header() const noexcept { return header_; }
  const std::vector<std::vector<std::string>>& rows() const noexcept { return rows_; }

  /// CSV with RFC 4180 quoting, preceded by the provenance comment block.
  std::string to_csv(const Provenance& provenance) const;

  /// Space-aligned columns for terminal output.
  std::string to_text() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace misbelief
