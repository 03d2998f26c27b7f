#pragma once

// CSV output with a '#'-prefixed run manifest. Data rows never contain the
// timestamp, so identical runs produce identical rows.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace qrx {

inline constexpr const char* tool_version = "1.0.0";

struct RunManifest
{
  std::string command;
  std::vector<std::pair<std::string, std::string>> parameters;
  std::string version = tool_version;
  std::string timestamp;

  static std::string utc_now()
  {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
  }

  void write(std::ostream& os) const
  {
    os << "# command: " << command << '\n';
    for (const auto& [key, value] : parameters) os << "# parameter: " << key << " = " << value << '\n';
    os << "# tool_version: " << version << '\n';
    os << "# timestamp: " << timestamp << '\n';
  }
};

/// Scientific notation with 13 significant digits, '.' as decimal separator.
inline std::string format_sci(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

inline std::string format_sci(const std::optional<double>& v)
{
  return v ? format_sci(*v) : std::string{};
}

inline void write_csv_row(std::ostream& os, const std::vector<std::string>& fields)
{
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    const auto& f = fields[i];
    if (f.find_first_of(",\"\n") != std::string::npos) {
      os << '"';
      for (char ch : f) {
        if (ch == '"') os << '"';
        os << ch;
      }
      os << '"';
    } else {
      os << f;
    }
  }
  os << '\n';
}

}  // namespace qrx
