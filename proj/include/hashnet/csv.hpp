#pragma once

#include <cstdio>
#include <string>

namespace hashnet {

/// RFC 4180 quoting, applied only when the cell needs it.
inline std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

/// Fixed-point rendering used for every real number in CSV output.
inline std::string format_real(double v, int decimals = 10) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

}  // namespace hashnet
