// brdfmeas is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "brdfmeas/core.hpp"

namespace brdfmeas {

/// Unit direction; z is the surface-normal axis of the local shading frame.
struct Direction {
    double x = 0.0, y = 0.0, z = 1.0;
};

/// Polar angle theta in [0, pi/2] and azimuth phi in [0, 2*pi).
struct Spherical {
    double theta = 0.0;
    double phi = 0.0;
};

/// Half-angle/difference-angle coordinates of an isotropic direction pair.
/// phi_d is folded into [0, pi) by reciprocity, matching tabulated storage.
struct HalfDiffCoords {
    double theta_h = 0.0;
    double theta_d = 0.0;
    double phi_d = 0.0;
};

inline double dot(const Direction& a, const Direction& b) {
    return a.x * b.x + a.y * b.y + a.z * b.z;
}

inline double norm(const Direction& d) { return std::sqrt(dot(d, d)); }

inline Direction normalized(const Direction& d) {
    double n = norm(d);
    return {d.x / n, d.y / n, d.z / n};
}

inline Direction spherical_to_dir(const Spherical& s) {
    double st = std::sin(s.theta);
    return {st * std::cos(s.phi), st * std::sin(s.phi), std::cos(s.theta)};
}

/// Inverse of spherical_to_dir. phi of the pole is defined as 0.
inline Spherical dir_to_spherical(const Direction& d) {
    double theta = std::acos(std::clamp(d.z, -1.0, 1.0));
    double phi = std::atan2(d.y, d.x);
    if (phi < 0.0) phi += kTwoPi;
    if (phi >= kTwoPi) phi = 0.0;
    return {theta, phi};
}

/// Normalized wi + wo. Throws for antipodal pairs.
inline Direction half_vector(const Direction& wi, const Direction& wo) {
    Direction s{wi.x + wo.x, wi.y + wo.y, wi.z + wo.z};
    double n = norm(s);
    if (n < 1e-12)
        throw std::invalid_argument("half_vector: degenerate (antipodal) direction pair");
    return {s.x / n, s.y / n, s.z / n};
}

/// Mirror wi about wh: 2(wh.wi)wh - wi. May land below the horizon;
/// callers decide what to do with such directions.
inline Direction reflect_about_half(const Direction& wh, const Direction& wi) {
    double c = 2.0 * dot(wh, wi);
    return {c * wh.x - wi.x, c * wh.y - wi.y, c * wh.z - wi.z};
}

/// Standard half/diff transform: (theta_h, phi_h) from the half vector,
/// (theta_d, phi_d) from wi rotated by -phi_h about the normal and then
/// by -theta_h about the binormal.
inline HalfDiffCoords dir_to_half_diff(const Direction& wi, const Direction& wo) {
    Direction h = half_vector(wi, wo);
    Spherical hs = dir_to_spherical(h);

    double cp = std::cos(hs.phi), sp = std::sin(hs.phi);
    Direction t{wi.x * cp + wi.y * sp, -wi.x * sp + wi.y * cp, wi.z};
    double ct = std::cos(hs.theta), st = std::sin(hs.theta);
    Direction d{t.x * ct - t.z * st, t.y, t.x * st + t.z * ct};

    Spherical ds = dir_to_spherical(d);
    double phi_d = ds.phi;
    if (phi_d >= kPi) phi_d -= kPi;  // reciprocity fold
    return {hs.theta, ds.theta, phi_d};
}

/// Stratified midpoints of the cosine-weighted marginal over theta:
/// theta_k = asin(sqrt((k + 0.5)/n)), strictly increasing, all < pi/2.
inline std::vector<double> cosine_weighted_thetas(int n) {
    assert(n >= 1);
    std::vector<double> thetas(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k)
        thetas[static_cast<size_t>(k)] = std::asin(std::sqrt((k + 0.5) / n));
    return thetas;
}

}  // namespace brdfmeas
