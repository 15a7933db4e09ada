#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <string_view>

#include "sdk/errors.hpp"
#include "sdk/ingest.hpp"

namespace sdk::ingest {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

struct Tokenizer {
  std::string_view text;
  std::size_t pos = 0;
  std::size_t line = 1;

  std::string_view next() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) {
      if (text[pos] == '\n') ++line;
      ++pos;
    }
    const std::size_t start = pos;
    while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos]))) {
      ++pos;
    }
    return text.substr(start, pos - start);
  }
};

double to_double(const std::string& path, const Tokenizer& tok, std::string_view token) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    throw ParseError(path, tok.line, 1, "expected a number, got '" + std::string(token) + "'");
  }
  return v;
}

}  // namespace

RasterGrid parse_raster(const std::string& path) {
  const std::string text = read_text_file(path);
  Tokenizer tok{text};

  const auto header_value = [&](const char* key) {
    const std::string_view k = tok.next();
    if (lower(k) != key) {
      throw ParseError(path, tok.line, 1,
                       std::string("expected header '") + key + "', got '" + std::string(k) + "'");
    }
    return to_double(path, tok, tok.next());
  };

  RasterGrid raster;
  const double ncols = header_value("ncols");
  const double nrows = header_value("nrows");
  raster.origin.lon = header_value("xllcorner");
  raster.origin.lat = header_value("yllcorner");
  raster.cell_deg = header_value("cellsize");

  if (ncols < 1 || nrows < 1 || ncols != std::floor(ncols) || nrows != std::floor(nrows)) {
    throw ParseError(path, tok.line, 1, "ncols/nrows must be positive integers");
  }
  if (raster.cell_deg <= 0.0) {
    throw ParseError(path, tok.line, 1, "cellsize must be > 0");
  }
  raster.n_cols = static_cast<std::int32_t>(ncols);
  raster.n_rows = static_cast<std::int32_t>(nrows);

  // NODATA_value is optional; when absent the first token is already data.
  std::string_view token = tok.next();
  if (lower(token) == "nodata_value") {
    raster.nodata = to_double(path, tok, tok.next());
    token = tok.next();
  }

  const std::size_t expected = static_cast<std::size_t>(raster.n_cols) * raster.n_rows;
  std::vector<double> north_up;
  north_up.reserve(expected);
  while (!token.empty()) {
    north_up.push_back(to_double(path, tok, token));
    token = tok.next();
  }
  if (north_up.size() != expected) {
    throw ParseError(path, tok.line, 1,
                     "value count " + std::to_string(north_up.size()) + " != ncols*nrows = " +
                         std::to_string(expected));
  }

  // File order is row-major from the north; flip to south-up.
  raster.values.resize(expected);
  for (std::int32_t file_row = 0; file_row < raster.n_rows; ++file_row) {
    const std::int32_t south_row = raster.n_rows - 1 - file_row;
    std::copy_n(north_up.begin() + static_cast<std::size_t>(file_row) * raster.n_cols,
                raster.n_cols, raster.values.begin() + static_cast<std::size_t>(south_row) * raster.n_cols);
  }
  return raster;
}

void write_raster(const RasterGrid& raster, const std::string& path) {
  std::string out;
  out += "ncols " + std::to_string(raster.n_cols) + '\n';
  out += "nrows " + std::to_string(raster.n_rows) + '\n';
  out += "xllcorner " + format_double(raster.origin.lon) + '\n';
  out += "yllcorner " + format_double(raster.origin.lat) + '\n';
  out += "cellsize " + format_double(raster.cell_deg) + '\n';
  out += "NODATA_value " + format_double(raster.nodata) + '\n';
  for (std::int32_t file_row = 0; file_row < raster.n_rows; ++file_row) {
    const std::int32_t south_row = raster.n_rows - 1 - file_row;
    for (std::int32_t col = 0; col < raster.n_cols; ++col) {
      out += format_double(raster.at(col, south_row));
      out += (col + 1 == raster.n_cols) ? '\n' : ' ';
    }
  }
  write_text_file(path, out);
}

}  // namespace sdk::ingest
