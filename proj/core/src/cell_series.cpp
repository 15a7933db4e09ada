#include "sdk/cell_series.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "sdk/errors.hpp"
#include "sdk/ingest.hpp"

namespace sdk {

double CellSeries::max_value() const {
  double m = 0.0;
  bool first = true;
  for (const auto& [cell, v] : values_) {
    m = first ? v : std::max(m, v);
    first = false;
  }
  return first ? 0.0 : m;
}

std::string CellSeries::to_csv() const {
  std::string out = "col,row,value\n";
  for (const auto& [cell, v] : values_) {
    out += std::to_string(cell.col) + ',' + std::to_string(cell.row) + ',' +
           ingest::format_double(v) + '\n';
  }
  return out;
}

CellSeries CellSeries::from_csv(const std::string& csv_text, const geo::GridSpec& grid,
                                std::string name, std::string units) {
  CellSeries series(grid, std::move(name), std::move(units));
  std::size_t line_no = 0;
  std::size_t start = 0;
  bool header_seen = false;
  while (start < csv_text.size()) {
    std::size_t eol = csv_text.find('\n', start);
    if (eol == std::string::npos) {
      eol = csv_text.size();
    }
    std::string_view line(csv_text.data() + start, eol - start);
    start = eol + 1;
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
      line.remove_suffix(1);
    }
    if (line.empty() || line.front() == '#') {
      continue;
    }
    if (!header_seen) {
      if (line != "col,row,value") {
        throw ParseError("<cell series>", line_no, 1, "expected header 'col,row,value'");
      }
      header_seen = true;
      continue;
    }
    const std::size_t c1 = line.find(',');
    const std::size_t c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string_view::npos) {
      throw ParseError("<cell series>", line_no, 1, "expected 3 fields");
    }
    const auto parse_int = [&](std::string_view f, std::int32_t& out) {
      const auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), out);
      if (ec != std::errc{} || p != f.data() + f.size()) {
        throw ParseError("<cell series>", line_no, 1, "bad integer '" + std::string(f) + "'");
      }
    };
    geo::CellId cell;
    parse_int(line.substr(0, c1), cell.col);
    parse_int(line.substr(c1 + 1, c2 - c1 - 1), cell.row);
    const std::string_view vf = line.substr(c2 + 1);
    double v = 0.0;
    const auto [p, ec] = std::from_chars(vf.data(), vf.data() + vf.size(), v);
    if (ec != std::errc{} || p != vf.data() + vf.size() || !std::isfinite(v)) {
      throw ParseError("<cell series>", line_no, 3, "bad value '" + std::string(vf) + "'");
    }
    if (!grid.contains(cell)) {
      throw ValidationError({"line " + std::to_string(line_no) + ": cell (" +
                             std::to_string(cell.col) + ", " + std::to_string(cell.row) +
                             ") outside grid"});
    }
    series.set(cell, v);
  }
  if (!header_seen) {
    throw ParseError("<cell series>", 1, 1, "missing header line");
  }
  return series;
}

void CellSeries::save_csv(const std::string& path) const {
  ingest::write_text_file(path, to_csv());
}

CellSeries CellSeries::load_csv(const std::string& path, const geo::GridSpec& grid,
                                std::string name, std::string units) {
  return from_csv(ingest::read_text_file(path), grid, std::move(name), std::move(units));
}

}  // namespace sdk
