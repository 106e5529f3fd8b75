#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace noon {

/// Formats a double with 12 significant digits (the declared CSV
/// precision); values written this way round-trip bit-exactly through the
/// reader for the stated precision.
inline std::string format_sig12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

/// Ordered (setting, expected rate, sampled counts, integration time) rows
/// of one scan, plus metadata echoing the configuration that produced it.
struct ScanRecord {
  struct Row {
    double setting = 0.0;        // chi in radians, or x in micrometers
    double expected_rate = 0.0;  // events per second
    long long sampled_counts = 0;
    double integration_time = 0.0;  // seconds
  };

  std::string name;
  std::string setting_label;  // column header for the scan variable
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<Row> rows;

  void add_meta(const std::string& key, const std::string& value) {
    metadata.emplace_back(key, value);
  }
  void add_meta(const std::string& key, double value) {
    metadata.emplace_back(key, format_sig12(value));
  }

  std::string find_meta(const std::string& key) const {
    for (const auto& [k, v] : metadata)
      if (k == key) return v;
    return {};
  }
};

inline void write_csv(const ScanRecord& rec, std::ostream& out) {
  out << "# noonsim scan record\n";
  out << "# name=" << rec.name << "\n";
  for (const auto& [k, v] : rec.metadata) out << "# " << k << "=" << v << "\n";
  out << rec.setting_label << ",expected_rate,sampled_counts,integration_time\n";
  for (const auto& r : rec.rows) {
    out << format_sig12(r.setting) << "," << format_sig12(r.expected_rate)
        << "," << r.sampled_counts << "," << format_sig12(r.integration_time)
        << "\n";
  }
}

inline void write_csv_file(const ScanRecord& rec, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_csv(rec, out);
}

inline ScanRecord read_csv(std::istream& in) {
  ScanRecord rec;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(1);
      if (!body.empty() && body.front() == ' ') body.erase(0, 1);
      auto eq = body.find('=');
      if (eq != std::string::npos) {
        std::string key = body.substr(0, eq);
        std::string value = body.substr(eq + 1);
        if (key == "name")
          rec.name = value;
        else
          rec.metadata.emplace_back(key, value);
      }
      continue;
    }
    if (!header_seen) {
      auto comma = line.find(',');
      if (comma == std::string::npos)
        throw std::runtime_error("malformed scan record header: " + line);
      rec.setting_label = line.substr(0, comma);
      header_seen = true;
      continue;
    }
    ScanRecord::Row row;
    char* end = nullptr;
    const char* s = line.c_str();
    row.setting = std::strtod(s, &end);
    if (*end != ',') throw std::runtime_error("malformed scan row: " + line);
    row.expected_rate = std::strtod(end + 1, &end);
    if (*end != ',') throw std::runtime_error("malformed scan row: " + line);
    row.sampled_counts = std::strtoll(end + 1, &end, 10);
    if (*end != ',') throw std::runtime_error("malformed scan row: " + line);
    row.integration_time = std::strtod(end + 1, &end);
    rec.rows.push_back(row);
  }
  if (!header_seen) throw std::runtime_error("empty scan record");
  return rec;
}

inline ScanRecord read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return read_csv(in);
}

inline std::string to_csv_string(const ScanRecord& rec) {
  std::ostringstream ss;
  write_csv(rec, ss);
  return ss.str();
}

}  // namespace noon
