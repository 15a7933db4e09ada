#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string_view>

#include "sdk/errors.hpp"
#include "sdk/ingest.hpp"

namespace sdk::ingest {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return fields;
}

/// Data rows of a CSV file with its header checked against `expected_header`.
struct CsvRows {
  std::vector<std::pair<std::size_t, std::vector<std::string_view>>> rows;  // (line no, fields)
  std::string text;  // backing storage for the views
};

CsvRows read_csv(const std::string& path, std::string_view expected_header) {
  CsvRows out;
  out.text = read_text_file(path);

  const std::size_t n_fields = std::count(expected_header.begin(), expected_header.end(), ',') + 1;
  std::string_view rest = out.text;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (!rest.empty()) {
    const std::size_t eol = rest.find('\n');
    std::string_view line = rest.substr(0, eol);
    rest = (eol == std::string_view::npos) ? std::string_view{} : rest.substr(eol + 1);
    ++line_no;

    const std::string_view stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') {
      continue;
    }
    if (!header_seen) {
      if (stripped != expected_header) {
        throw ParseError(path, line_no, 1,
                         "header mismatch: expected '" + std::string(expected_header) + "'");
      }
      header_seen = true;
      continue;
    }
    auto fields = split_fields(line);
    if (fields.size() != n_fields) {
      throw ParseError(path, line_no, fields.size(),
                       "expected " + std::to_string(n_fields) + " fields, got " +
                           std::to_string(fields.size()));
    }
    out.rows.emplace_back(line_no, std::move(fields));
  }
  if (!header_seen) {
    throw ParseError(path, line_no == 0 ? 1 : line_no, 1, "missing header line");
  }
  return out;
}

double parse_double_field(const std::string& path, std::size_t line, std::size_t column,
                          std::string_view field) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(value)) {
    throw ParseError(path, line, column, "not a finite number: '" + std::string(field) + "'");
  }
  return value;
}

std::int64_t parse_int_field(const std::string& path, std::size_t line, std::size_t column,
                             std::string_view field) {
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw ParseError(path, line, column, "not an integer: '" + std::string(field) + "'");
  }
  return value;
}

bool valid_iso_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') {
    return false;
  }
  const auto digits = [&](std::size_t from, std::size_t to) {
    for (std::size_t i = from; i < to; ++i) {
      if (s[i] < '0' || s[i] > '9') return false;
    }
    return true;
  };
  if (!digits(0, 4) || !digits(5, 7) || !digits(8, 10)) {
    return false;
  }
  const int month = (s[5] - '0') * 10 + (s[6] - '0');
  const int day = (s[8] - '0') * 10 + (s[9] - '0');
  return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open for writing: " + path);
  }
  out << content;
  if (!out) {
    throw IoError("write failed: " + path);
  }
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::vector<propagation::SiteRecord> parse_sites(const std::string& path) {
  static constexpr std::string_view kHeader =
      "site_id,lat,lon,tx_power_dbm,antenna_height_m,center_freq_mhz,bandwidth_mhz,environment";
  const CsvRows csv = read_csv(path, kHeader);

  std::vector<propagation::SiteRecord> sites;
  sites.reserve(csv.rows.size());
  std::vector<std::string> issues;
  std::set<std::string_view> seen_ids;
  for (const auto& [line, f] : csv.rows) {
    propagation::SiteRecord s;
    s.site_id = std::string(f[0]);
    s.location.lat = parse_double_field(path, line, 2, f[1]);
    s.location.lon = parse_double_field(path, line, 3, f[2]);
    s.tx_power_dbm = parse_double_field(path, line, 4, f[3]);
    s.antenna_height_m = parse_double_field(path, line, 5, f[4]);
    s.center_freq_mhz = parse_double_field(path, line, 6, f[5]);
    s.bandwidth_mhz = parse_double_field(path, line, 7, f[6]);
    try {
      s.environment = propagation::environment_from_string(std::string(f[7]));
    } catch (const ValidationError& e) {
      issues.push_back("line " + std::to_string(line) + ": " + e.issues().front());
      continue;
    }

    const auto reject = [&](const std::string& why) {
      issues.push_back("line " + std::to_string(line) + " (site '" + s.site_id + "'): " + why);
    };
    if (s.site_id.empty()) {
      reject("empty site_id");
    } else if (!seen_ids.insert(f[0]).second) {
      reject("duplicate site_id");
    }
    if (s.location.lat < -90.0 || s.location.lat > 90.0) {
      reject("lat outside [-90, 90]");
    }
    if (s.location.lon < -180.0 || s.location.lon > 180.0) {
      reject("lon outside [-180, 180]");
    }
    if (s.center_freq_mhz < propagation::kMinFreqMhz || s.center_freq_mhz > propagation::kMaxFreqMhz) {
      reject("center_freq_mhz outside [150, 3000]");
    }
    if (s.bandwidth_mhz <= 0.0) {
      reject("bandwidth_mhz must be > 0");
    }
    if (s.antenna_height_m < 1.0 || s.antenna_height_m > 300.0) {
      reject("antenna_height_m outside [1, 300]");
    }
    sites.push_back(std::move(s));
  }
  if (!issues.empty()) {
    throw ValidationError(std::move(issues));
  }
  return sites;
}

void write_sites(const std::vector<propagation::SiteRecord>& sites, const std::string& path) {
  std::string out =
      "site_id,lat,lon,tx_power_dbm,antenna_height_m,center_freq_mhz,bandwidth_mhz,environment\n";
  for (const auto& s : sites) {
    out += s.site_id + ',' + format_double(s.location.lat) + ',' + format_double(s.location.lon) +
           ',' + format_double(s.tx_power_dbm) + ',' + format_double(s.antenna_height_m) + ',' +
           format_double(s.center_freq_mhz) + ',' + format_double(s.bandwidth_mhz) + ',' +
           propagation::to_string(s.environment) + '\n';
  }
  write_text_file(path, out);
}

std::vector<TrafficRecord> parse_traffic(const std::string& path) {
  static constexpr std::string_view kHeader = "site_id,date,hour,dl_throughput_mbps";
  const CsvRows csv = read_csv(path, kHeader);

  std::vector<TrafficRecord> records;
  records.reserve(csv.rows.size());
  std::vector<std::string> issues;
  std::set<std::tuple<std::string_view, std::string_view, std::int64_t>> seen;
  for (const auto& [line, f] : csv.rows) {
    TrafficRecord r;
    r.site_id = std::string(f[0]);
    r.date = std::string(f[1]);
    const std::int64_t hour = parse_int_field(path, line, 3, f[2]);
    r.hour = static_cast<int>(hour);
    r.dl_throughput_mbps = parse_double_field(path, line, 4, f[3]);

    const auto reject = [&](const std::string& why) {
      issues.push_back("line " + std::to_string(line) + ": " + why);
    };
    if (r.site_id.empty()) {
      reject("empty site_id");
    }
    if (!valid_iso_date(r.date)) {
      reject("date '" + r.date + "' is not ISO-8601 (YYYY-MM-DD)");
    }
    if (hour < 0 || hour > 23) {
      reject("hour " + std::to_string(hour) + " outside [0, 23]");
    }
    if (r.dl_throughput_mbps < 0.0) {
      reject("dl_throughput_mbps must be >= 0");
    }
    if (!seen.insert({f[0], f[1], hour}).second) {
      reject("duplicate (site_id, date, hour) = (" + r.site_id + ", " + r.date + ", " +
             std::to_string(hour) + ")");
    }
    records.push_back(std::move(r));
  }
  if (!issues.empty()) {
    throw ValidationError(std::move(issues));
  }
  return records;
}

void write_traffic(const std::vector<TrafficRecord>& records, const std::string& path) {
  std::string out = "site_id,date,hour,dl_throughput_mbps\n";
  for (const auto& r : records) {
    out += r.site_id + ',' + r.date + ',' + std::to_string(r.hour) + ',' +
           format_double(r.dl_throughput_mbps) + '\n';
  }
  write_text_file(path, out);
}

std::vector<MeasurementRecord> parse_measurements(const std::string& path) {
  static constexpr std::string_view kHeader = "lat,lon,samples";
  const CsvRows csv = read_csv(path, kHeader);

  std::vector<MeasurementRecord> records;
  records.reserve(csv.rows.size());
  std::vector<std::string> issues;
  for (const auto& [line, f] : csv.rows) {
    MeasurementRecord r;
    r.location.lat = parse_double_field(path, line, 1, f[0]);
    r.location.lon = parse_double_field(path, line, 2, f[1]);
    r.samples = parse_int_field(path, line, 3, f[2]);

    const auto reject = [&](const std::string& why) {
      issues.push_back("line " + std::to_string(line) + ": " + why);
    };
    if (r.location.lat < -90.0 || r.location.lat > 90.0) {
      reject("lat outside [-90, 90]");
    }
    if (r.location.lon < -180.0 || r.location.lon > 180.0) {
      reject("lon outside [-180, 180]");
    }
    if (r.samples < 1) {
      reject("samples must be >= 1");
    }
    records.push_back(r);
  }
  if (!issues.empty()) {
    throw ValidationError(std::move(issues));
  }
  return records;
}

void write_measurements(const std::vector<MeasurementRecord>& records, const std::string& path) {
  std::string out = "lat,lon,samples\n";
  for (const auto& r : records) {
    out += format_double(r.location.lat) + ',' + format_double(r.location.lon) + ',' +
           std::to_string(r.samples) + '\n';
  }
  write_text_file(path, out);
}

}  // namespace sdk::ingest
