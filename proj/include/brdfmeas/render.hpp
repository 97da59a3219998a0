// brdfmeas is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "brdfmeas/brdf.hpp"
#include "brdfmeas/core.hpp"
#include "brdfmeas/geom.hpp"
#include "brdfmeas/image.hpp"

namespace brdfmeas {

/// Orthographic, axis-aligned camera framing the unit sphere at the origin
/// (view extent [-1, 1] on both axes), one point light, square raster.
struct SceneSpec {
    Vec3 light_pos{2.0, 2.0, 4.0};
    Rgb light_intensity{20.0, 20.0, 20.0};
    int resolution = 256;
};

/// Analytic vertical-gradient dome: two-color lerp in world z.
struct EnvironmentLight {
    Rgb top{0.55, 0.65, 0.9};
    Rgb bottom{0.25, 0.2, 0.15};

    Rgb radiance(const Direction& w) const {
        double t = 0.5 * (w.z + 1.0);
        return bottom * (1.0 - t) + top * t;
    }
};

/// Reflectance evaluated in the local shading frame (z = surface normal).
using BrdfEval = std::function<Rgb(const Direction&, const Direction&)>;

namespace detail {

// Branchless orthonormal basis around n (Duff et al. construction).
inline void coordinate_frame(const Direction& n, Direction& t, Direction& b) {
    double sign = std::copysign(1.0, n.z);
    double a = -1.0 / (sign + n.z);
    double bx = n.x * n.y * a;
    t = {1.0 + sign * n.x * n.x * a, sign * bx, -sign * n.x};
    b = {bx, sign + n.y * n.y * a, -n.y};
}

inline Direction to_local(const Direction& t, const Direction& b, const Direction& n,
                          const Direction& w) {
    return {dot(w, t), dot(w, b), dot(w, n)};
}

// Runs fn(y) for every row index; rows are partitioned into contiguous
// chunks so the output is identical for any worker count.
inline void parallel_rows(int height, int workers, const std::function<void(int)>& fn) {
    if (workers <= 0) workers = int(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    workers = std::min(workers, height);
    if (workers == 1) {
        for (int y = 0; y < height; ++y) fn(y);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(size_t(workers));
    int chunk = (height + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        int y0 = w * chunk, y1 = std::min(height, y0 + chunk);
        if (y0 >= y1) break;
        pool.emplace_back([=, &fn] {
            for (int y = y0; y < y1; ++y) fn(y);
        });
    }
    for (auto& th : pool) th.join();
}

struct SphereHit {
    bool covered = false;
    Direction n;       // surface normal (= hit point on the unit sphere)
    Direction t, b;    // tangent frame
};

inline SphereHit intersect_ortho_pixel(int px, int py, int res) {
    SphereHit hit;
    double x = -1.0 + 2.0 * (px + 0.5) / res;
    double y = 1.0 - 2.0 * (py + 0.5) / res;
    double r2 = x * x + y * y;
    if (r2 >= 1.0) return hit;
    hit.covered = true;
    hit.n = {x, y, std::sqrt(1.0 - r2)};
    coordinate_frame(hit.n, hit.t, hit.b);
    return hit;
}

}  // namespace detail

/// Renders the unit sphere under the scene's point light. Per covered pixel
/// the radiance is brdf(wi, wo) * intensity * cos(theta_i) / r^2 in the
/// local shading frame; background pixels stay 0. Deterministic: the output
/// is bit-identical for any worker count.
inline ImageBuffer render_sphere(const BrdfEval& brdf, const SceneSpec& scene,
                                 int workers = 0) {
    if (scene.resolution < 1) throw std::invalid_argument("render_sphere: bad resolution");
    const int res = scene.resolution;
    ImageBuffer img(res, res);
    detail::parallel_rows(res, workers, [&](int py) {
        for (int px = 0; px < res; ++px) {
            detail::SphereHit hit = detail::intersect_ortho_pixel(px, py, res);
            if (!hit.covered) continue;
            Vec3 to_light = scene.light_pos - Vec3{hit.n.x, hit.n.y, hit.n.z};
            double d2 = length_squared(to_light);
            double inv_d = 1.0 / std::sqrt(d2);
            Direction wi_world{to_light.x * inv_d, to_light.y * inv_d, to_light.z * inv_d};
            double cos_i = dot(hit.n, wi_world);
            if (cos_i <= 0.0) continue;
            Direction wi = detail::to_local(hit.t, hit.b, hit.n, wi_world);
            Direction wo = detail::to_local(hit.t, hit.b, hit.n, {0.0, 0.0, 1.0});
            Rgb f = brdf(wi, wo);
            img.set_pixel(px, py, f * scene.light_intensity * (cos_i / d2));
        }
    });
    return img;
}

/// Renders the sphere under the gradient dome, integrating incident light by
/// an 8x8 stratified cosine-weighted quadrature per pixel (no randomness).
inline ImageBuffer render_sphere_env(const BrdfEval& brdf, const SceneSpec& scene,
                                     const EnvironmentLight& env, int workers = 0) {
    if (scene.resolution < 1) throw std::invalid_argument("render_sphere_env: bad resolution");
    const int res = scene.resolution;
    constexpr int kStrata = 8;
    ImageBuffer img(res, res);
    detail::parallel_rows(res, workers, [&](int py) {
        for (int px = 0; px < res; ++px) {
            detail::SphereHit hit = detail::intersect_ortho_pixel(px, py, res);
            if (!hit.covered) continue;
            Direction wo = detail::to_local(hit.t, hit.b, hit.n, {0.0, 0.0, 1.0});
            Rgb acc{};
            for (int sx = 0; sx < kStrata; ++sx) {
                for (int sy = 0; sy < kStrata; ++sy) {
                    double u1 = (sx + 0.5) / kStrata;
                    double u2 = (sy + 0.5) / kStrata;
                    double r = std::sqrt(u1);
                    double phi = kTwoPi * u2;
                    Direction wi{r * std::cos(phi), r * std::sin(phi), std::sqrt(1.0 - u1)};
                    Direction wi_world{
                        hit.t.x * wi.x + hit.b.x * wi.y + hit.n.x * wi.z,
                        hit.t.y * wi.x + hit.b.y * wi.y + hit.n.y * wi.z,
                        hit.t.z * wi.x + hit.b.z * wi.y + hit.n.z * wi.z};
                    acc += brdf(wi, wo) * env.radiance(wi_world);
                }
            }
            // cosine-weighted quadrature: estimator = (pi / N) * sum f * L
            img.set_pixel(px, py, acc * (kPi / (kStrata * kStrata)));
        }
    });
    return img;
}

}  // namespace brdfmeas
