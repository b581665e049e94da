#pragma once

#include <numbers>

// Unit convention used throughout: angular frequency (rad/s) internally,
// plain cycles (Hz) on every external surface (config files, CSV, CLI).
// Conversions happen exactly once, at the I/O boundary.

namespace cptmag {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

constexpr double hz_to_rad(double hz) { return hz * two_pi; }
constexpr double rad_to_hz(double rad) { return rad / two_pi; }

}  // namespace cptmag
