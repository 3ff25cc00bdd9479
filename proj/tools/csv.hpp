#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>

#include "config.hpp"

namespace wskde_cli {

/// 17-significant-digit float formatting; the round trip is exact for
/// doubles, which keeps re-runs byte-identical.
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string fmt(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%llu", static_cast<unsigned long long>(v));
  return buf;
}

/// CSV output: one leading comment line carrying the config digest, then a
/// header row, then data rows. Comma separated, LF line endings.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& digest,
            const std::string& version, const std::string& rng_name)
      : out_(path, std::ios::binary) {
    if (!out_) throw IoError("cannot create output file: " + path);
    out_ << "# wskde " << version << " config=" << digest
         << " rng=" << rng_name << "\n";
  }

  void line(const std::string& text) {
    out_ << text << "\n";
    if (!out_) throw IoError("write failure");
  }

  template <typename... Fields>
  void row(const Fields&... fields) {
    std::string joined;
    append(joined, fields...);
    line(joined);
  }

 private:
  static void append(std::string& joined, const std::string& first) {
    joined += first;
  }

  template <typename... Rest>
  static void append(std::string& joined, const std::string& first,
                     const Rest&... rest) {
    joined += first;
    joined += ',';
    append(joined, rest...);
  }

  std::ofstream out_;
};

}  // namespace wskde_cli
