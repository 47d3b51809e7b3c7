#pragma once

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string>
#include <system_error>

namespace iptvsim {

/// Raised when a function is called outside its mathematical domain
/// (non-positive distance, bandwidth, frame duration, ...).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLightMps = 299792458.0;

inline double to_db(double linear) {
  if (!(linear > 0.0)) {
    throw DomainError("to_db: linear value must be positive");
  }
  return 10.0 * std::log10(linear);
}

inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

inline double dbm_to_watts(double dbm) { return from_db(dbm) * 1e-3; }

inline double watts_to_dbm(double watts) { return to_db(watts * 1e3); }

namespace detail {

inline void require(bool condition, const char* what) {
  if (!condition) {
    throw DomainError(what);
  }
}

// Shortest round-trip representation, in plain notation for everyday
// magnitudes; stable across runs so reports stay byte-identical.
inline std::string format_double(double value) {
  char buf[512];
  const double mag = value < 0 ? -value : value;
  const bool plain = mag == 0.0 || (mag >= 1e-5 && mag < 1e15);
  auto [end, ec] = plain ? std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed)
                         : std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) {
    return "nan";
  }
  return std::string(buf, end);
}

}  // namespace detail
}  // namespace iptvsim
