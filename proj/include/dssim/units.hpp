#pragma once

#include <cmath>
#include <cstdint>
#include <string>

namespace dssim {

// Simulated time is kept in integer nanoseconds so the event queue never has
// to compare floating-point timestamps. Everything user-facing is in µs.
using Nanos = std::int64_t;

// Power in microwatts and energy in femtojoules: µW × ns = fJ, so energy
// integration over integer time is exact.
using MicroWatts = std::int64_t;
using Femtojoules = std::int64_t;

using Mhz = std::int64_t;
using Bytes = std::int64_t;

inline constexpr Nanos kNsPerUs = 1000;
inline constexpr Nanos kNsPerMs = 1000 * kNsPerUs;

constexpr Nanos us_to_ns(std::int64_t us) { return us * kNsPerUs; }

inline Nanos us_to_ns(double us) { return static_cast<Nanos>(std::llround(us * 1000.0)); }

constexpr double ns_to_us(Nanos ns) { return static_cast<double>(ns) / 1000.0; }

inline MicroWatts mw_to_uw(double mw) { return static_cast<MicroWatts>(std::llround(mw * 1000.0)); }

constexpr double uw_to_mw(MicroWatts uw) { return static_cast<double>(uw) / 1000.0; }

constexpr double uw_to_w(MicroWatts uw) { return static_cast<double>(uw) * 1e-6; }

constexpr double fj_to_mj(Femtojoules fj) { return static_cast<double>(fj) * 1e-12; }

// Exact decimal rendering of a nanosecond count in µs ("42", "10.5", "0.001").
std::string format_us(Nanos ns);

// Inverse of format_us; throws std::invalid_argument on malformed input or
// more than three fractional digits.
Nanos parse_us(const std::string& text);

// Shortest round-trip decimal for a double.
std::string format_double(double value);
double parse_double(const std::string& text);

}  // namespace dssim
