// brdfmeas is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace brdfmeas {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kHalfPi = 0.5 * std::numbers::pi;
inline constexpr double kInvPi = std::numbers::inv_pi;

/// Linear RGB triple. Also used for reflectance (1/sr) and light intensity.
struct Rgb {
    double r = 0.0, g = 0.0, b = 0.0;
};

inline Rgb operator+(Rgb a, Rgb c) { return {a.r + c.r, a.g + c.g, a.b + c.b}; }
inline Rgb operator-(Rgb a, Rgb c) { return {a.r - c.r, a.g - c.g, a.b - c.b}; }
inline Rgb operator*(Rgb a, Rgb c) { return {a.r * c.r, a.g * c.g, a.b * c.b}; }
inline Rgb operator*(Rgb a, double s) { return {a.r * s, a.g * s, a.b * s}; }
inline Rgb operator*(double s, Rgb a) { return a * s; }
inline Rgb& operator+=(Rgb& a, Rgb c) { a = a + c; return a; }

inline double mean(Rgb a) { return (a.r + a.g + a.b) / 3.0; }
inline double max_component(Rgb a) { return std::max(a.r, std::max(a.g, a.b)); }

/// Position or displacement in world units (not necessarily unit length).
struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

inline Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline double length_squared(Vec3 v) { return v.x * v.x + v.y * v.y + v.z * v.z; }

/// Failure to open, read, or write a file.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Input bytes that do not conform to an expected file format.
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace brdfmeas
