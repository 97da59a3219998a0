// brdfmeas is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <variant>

#include "brdfmeas/core.hpp"
#include "brdfmeas/geom.hpp"

namespace brdfmeas {

// Clamps shared by the evaluators and the warps. Chosen so that warp
// round-trips stay below 1e-9 while log(0), tan(pi/2) and divisions by
// grazing cosines cannot blow up.
inline constexpr double kMinCos = 1e-6;
inline constexpr double kMinU1 = 1e-12;
inline constexpr double kMaxU1 = 1.0 - 1e-12;
inline constexpr double kMaxThetaH = kHalfPi - 1e-6;

/// Ward model parameters. The specular weight is derived per channel as
/// rho_s = 1 - rho_d and never stored.
struct WardParams {
    Rgb rho_d{0.5, 0.5, 0.5};
    double alpha = 0.1;
};

/// Microfacet (GGX) parameters with Fresnel fixed at 1.
struct GgxParams {
    Rgb albedo{0.5, 0.5, 0.5};
    double alpha = 0.1;
};

inline WardParams clamp_params(const WardParams& p) {
    auto c01 = [](double v) { return std::clamp(v, 0.0, 1.0); };
    return {{c01(p.rho_d.r), c01(p.rho_d.g), c01(p.rho_d.b)},
            std::clamp(p.alpha, 1e-3, 2.0)};
}

inline GgxParams clamp_params(const GgxParams& p) {
    auto c01 = [](double v) { return std::clamp(v, 0.0, 1.0); };
    return {{c01(p.albedo.r), c01(p.albedo.g), c01(p.albedo.b)},
            std::clamp(p.alpha, 1e-3, 1.0)};
}

/// Point on the unit square driving an importance-sampling warp.
struct UnitSquarePoint {
    double u1 = 0.0, u2 = 0.0;
};

/// Mixture weights of the diffuse and specular sampling lobes; w_d + w_s = 1.
struct LobeWeights {
    double w_d = 0.5, w_s = 0.5;

    static LobeWeights specular(double ws) {
        ws = std::clamp(ws, 0.0, 1.0);
        return {1.0 - ws, ws};
    }
};

inline LobeWeights default_weights(const WardParams& p) {
    return LobeWeights::specular(1.0 - mean(p.rho_d));
}

inline LobeWeights default_weights(const GgxParams& p) {
    double ws = 1.0 - mean(p.albedo);
    if (p.alpha >= 0.7) ws = std::max(ws, 0.5);
    return LobeWeights::specular(ws);
}

namespace detail {

// Returns tan^2(theta) of a unit-vector cosine, or a huge value at the
// horizon so that exp(-tan2/..) underflows to 0.
inline double tan2_from_cos(double cos_t) {
    if (cos_t <= 0.0) return 1e30;
    double c2 = cos_t * cos_t;
    return std::max(0.0, 1.0 - c2) / c2;
}

// cos(theta_h) of the (unnormalized) wi+wo, or -1 for a degenerate pair.
inline double half_cos(const Direction& wi, const Direction& wo) {
    Direction s{wi.x + wo.x, wi.y + wo.y, wi.z + wo.z};
    double n2 = dot(s, s);
    if (n2 < 1e-24) return -1.0;
    return s.z / std::sqrt(n2);
}

}  // namespace detail

/// Ward reflectance: rho_d/pi plus a Gaussian-in-tan(theta_h) lobe of
/// roughness alpha, weighted by rho_s = 1 - rho_d per channel.
inline Rgb ward_eval(const WardParams& p, const Direction& wi, const Direction& wo) {
    double ci = std::max(wi.z, kMinCos);
    double co = std::max(wo.z, kMinCos);
    double a2 = p.alpha * p.alpha;

    double spec = 0.0;
    double ch = detail::half_cos(wi, wo);
    if (ch > 0.0) {
        double t2 = detail::tan2_from_cos(ch);
        spec = std::exp(-t2 / a2) / (4.0 * kPi * a2 * std::sqrt(ci * co));
    }
    return {p.rho_d.r * kInvPi + (1.0 - p.rho_d.r) * spec,
            p.rho_d.g * kInvPi + (1.0 - p.rho_d.g) * spec,
            p.rho_d.b * kInvPi + (1.0 - p.rho_d.b) * spec};
}

/// GGX normal distribution D(theta_h).
inline double ggx_ndf(double alpha, double cos_h) {
    double a2 = alpha * alpha;
    double t = (a2 - 1.0) * cos_h * cos_h + 1.0;
    return a2 / (kPi * t * t);
}

namespace detail {

// Smith Lambda for GGX; the height-correlated masking-shadowing term is
// G = 1 / (1 + Lambda(wi) + Lambda(wo)).
inline double ggx_lambda(double alpha, double cos_t) {
    double t2 = tan2_from_cos(std::min(cos_t, 1.0));
    return 0.5 * (-1.0 + std::sqrt(1.0 + alpha * alpha * t2));
}

}  // namespace detail

/// Microfacet reflectance: albedo/pi + D*G / (4 cos_i cos_o), Fresnel = 1.
inline Rgb ggx_eval(const GgxParams& p, const Direction& wi, const Direction& wo) {
    double ci = std::max(wi.z, kMinCos);
    double co = std::max(wo.z, kMinCos);

    double spec = 0.0;
    double ch = detail::half_cos(wi, wo);
    if (ch > 0.0) {
        double d = ggx_ndf(p.alpha, ch);
        double g = 1.0 / (1.0 + detail::ggx_lambda(p.alpha, ci) + detail::ggx_lambda(p.alpha, co));
        spec = d * g / (4.0 * ci * co);
    }
    return {p.albedo.r * kInvPi + spec,
            p.albedo.g * kInvPi + spec,
            p.albedo.b * kInvPi + spec};
}

/// Warp of a uniform unit-square point to a Ward half angle:
/// theta_h = atan(alpha sqrt(-log u1)), phi_h = 2 pi u2.
inline Spherical ward_sample(const WardParams& p, UnitSquarePoint u) {
    double u1 = std::max(u.u1, kMinU1);
    return {std::atan(p.alpha * std::sqrt(-std::log(u1))), kTwoPi * u.u2};
}

/// Exact inverse of ward_sample: u1 = exp(-tan^2 theta_h / alpha^2).
inline UnitSquarePoint ward_inverse(const WardParams& p, const Spherical& h) {
    double th = std::min(h.theta, kMaxThetaH);
    double t = std::tan(th);
    return {std::exp(-(t * t) / (p.alpha * p.alpha)), h.phi / kTwoPi};
}

/// GGX NDF inverse-CDF warp: theta_h = atan(alpha sqrt(u1/(1-u1))).
inline Spherical ggx_sample(const GgxParams& p, UnitSquarePoint u) {
    double u1 = std::min(u.u1, kMaxU1);
    return {std::atan(p.alpha * std::sqrt(u1 / (1.0 - u1))), kTwoPi * u.u2};
}

/// Exact inverse of ggx_sample: u1 = tan^2 theta_h / (alpha^2 + tan^2 theta_h).
inline UnitSquarePoint ggx_inverse(const GgxParams& p, const Spherical& h) {
    double th = std::min(h.theta, kMaxThetaH);
    double t = std::tan(th);
    double t2 = t * t;
    return {t2 / (p.alpha * p.alpha + t2), h.phi / kTwoPi};
}

/// Either analytic model; the measurement pipeline is generic over this.
using ModelParams = std::variant<WardParams, GgxParams>;

inline Spherical model_sample(const ModelParams& m, UnitSquarePoint u) {
    return std::visit(
        [&](const auto& p) {
            if constexpr (std::is_same_v<std::decay_t<decltype(p)>, WardParams>)
                return ward_sample(p, u);
            else
                return ggx_sample(p, u);
        },
        m);
}

inline UnitSquarePoint model_inverse(const ModelParams& m, const Spherical& h) {
    return std::visit(
        [&](const auto& p) {
            if constexpr (std::is_same_v<std::decay_t<decltype(p)>, WardParams>)
                return ward_inverse(p, h);
            else
                return ggx_inverse(p, h);
        },
        m);
}

inline Rgb model_eval(const ModelParams& m, const Direction& wi, const Direction& wo) {
    return std::visit(
        [&](const auto& p) {
            if constexpr (std::is_same_v<std::decay_t<decltype(p)>, WardParams>)
                return ward_eval(p, wi, wo);
            else
                return ggx_eval(p, wi, wo);
        },
        m);
}

inline LobeWeights model_default_weights(const ModelParams& m) {
    return std::visit([](const auto& p) { return default_weights(p); }, m);
}

namespace detail {

// Density of the sampled half angle in the half-vector solid-angle measure.
inline double half_lobe_pdf(const ModelParams& m, double cos_h) {
    if (cos_h <= 0.0) return 0.0;
    return std::visit(
        [&](const auto& p) -> double {
            if constexpr (std::is_same_v<std::decay_t<decltype(p)>, WardParams>) {
                double a2 = p.alpha * p.alpha;
                double t2 = tan2_from_cos(cos_h);
                return std::exp(-t2 / a2) / (kPi * a2 * cos_h * cos_h * cos_h);
            } else {
                return ggx_ndf(p.alpha, cos_h) * cos_h;
            }
        },
        m);
}

}  // namespace detail

/// Mixture density of an outgoing direction for incoming wi:
/// p(wo) = w_d cos(theta_o)/pi + w_s p_h(wh) / (4 (wh.wi)),
/// where p_h is the half-angle lobe density and the 1/(4 (wh.wi)) factor is
/// the half-to-outgoing Jacobian. The density is supported on directions
/// reachable by reflecting a sampled half vector; it evaluates to 0 where
/// the half vector would be degenerate or below the horizon.
inline double pdf(const ModelParams& m, LobeWeights w, const Direction& wi,
                  const Direction& wo) {
    double diffuse = std::max(wo.z, 0.0) * kInvPi;

    double spec = 0.0;
    Direction s{wi.x + wo.x, wi.y + wo.y, wi.z + wo.z};
    double n2 = dot(s, s);
    if (n2 > 1e-24) {
        double inv = 1.0 / std::sqrt(n2);
        double cos_h = s.z * inv;
        double h_dot_wi = dot(s, wi) * inv;
        if (h_dot_wi > 1e-9)
            spec = detail::half_lobe_pdf(m, cos_h) / (4.0 * h_dot_wi);
    }
    return w.w_d * diffuse + w.w_s * spec;
}

}  // namespace brdfmeas
