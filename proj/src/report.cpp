#include "misbelief/report.hpp"

#include "misbelief/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace misbelief {

std::string format_number(double x, int significant) {
  if (x == 0.0) return "0";  // also catches -0
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", significant, x);
  return buf;
}

void Table::add_row(std::vector<std::string> row) {
  require(row.size() == header_.size(), ErrorKind::DimensionMismatch,
          "table row has " + std::to_string(row.size()) + " cells, header has " + std::to_string(header_.size()));
  rows_.push_back(std::move(row));
}

namespace {

std::string csv_cell(const std::string& cell) {
  if (cell.find_first_of(",\"\n\r") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void append_csv_row(std::string& out, const std::vector<std::string>& row) {
  for (std::size_t k = 0; k < row.size(); ++k) {
    if (k) out += ',';
    out += csv_cell(row[k]);
  }
  out += '\n';
}

}  // namespace

std::string Table::to_csv(const Provenance& provenance) const {
  std::string out;
  out += "# tool: misbelief " MISBELIEF_VERSION "\n";
  out += "# command: " + provenance.command + "\n";
  if (!provenance.scenario_name.empty()) out += "# scenario: " + provenance.scenario_name + "\n";
  if (!provenance.input_digest.empty()) out += "# input_digest: fnv1a64:" + provenance.input_digest + "\n";
  out += "# seed: " + std::to_string(provenance.seed) + "\n";
  append_csv_row(out, header_);
  for (const auto& row : rows_) append_csv_row(out, row);
  return out;
}

std::string Table::to_text() const {
  std::vector<std::size_t> width(header_.size());
  for (std::size_t c = 0; c < header_.size(); ++c) width[c] = header_[c].size();
  for (const auto& row : rows_)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  auto line = [&](const std::vector<std::string>& row) {
    std::string out;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += "  ";
      out += row[c];
      if (c + 1 < row.size()) out.append(width[c] - row[c].size(), ' ');
    }
    return out + '\n';
  };
  std::string out = line(header_);
  std::size_t total = 0;
  for (auto w : width) total += w;
  out.append(total + 2 * (width.empty() ? 0 : width.size() - 1), '-');
  out += '\n';
  for (const auto& row : rows_) out += line(row);
  return out;
}

}  // namespace misbelief
