// brdfmeas is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include <cassert>
#include <cmath>
#include <functional>
#include <vector>

#include "brdfmeas/brdf.hpp"
#include "brdfmeas/core.hpp"
#include "brdfmeas/geom.hpp"

namespace brdfmeas {

using BrdfReference = std::function<Rgb(const Direction&, const Direction&)>;

struct PlanEntry {
    UnitSquarePoint u;  // midpoint-lattice coordinates
    Direction wo;       // warped outgoing direction
    bool valid;         // above the horizon and invertible
};

/// Planned gonioreflectometer directions: for every incoming slice
/// (theta_k, phi = 0) a warped N x N outgoing grid. Entries are stored
/// incoming-major, then u1 index, then u2 index.
struct MeasurementPlan {
    std::vector<Spherical> incoming;
    int grid_n = 0;
    ModelParams warp_params;
    LobeWeights weights;
    std::vector<PlanEntry> entries;

    size_t entry_index(size_t slice, int i, int j) const {
        return (slice * size_t(grid_n) + size_t(i)) * size_t(grid_n) + size_t(j);
    }
};

/// Reflectance captured at the plan's valid directions. values is aligned
/// with plan.entries; invalid entries hold zeros and carry no meaning.
struct MeasurementTable {
    MeasurementPlan plan;
    std::vector<Rgb> values;
    size_t valid_count = 0;
};

/// Builds the measurement plan: incoming angles from the stratified cosine
/// rule (isotropy fixes phi = 0), outgoing directions by warping the
/// midpoint lattice u = ((i+0.5)/N, (j+0.5)/N) through the model's
/// specular importance-sampling function and reflecting the incoming
/// direction about the sampled half vector. Below-horizon results are
/// flagged invalid rather than clamped. Fully deterministic.
inline MeasurementPlan plan_measurements(const ModelParams& params, LobeWeights weights,
                                         int n_out, int n_theta_in) {
    assert(n_out >= 1 && n_theta_in >= 1);
    MeasurementPlan plan;
    plan.grid_n = n_out;
    plan.warp_params = params;
    plan.weights = weights;

    for (double theta : cosine_weighted_thetas(n_theta_in))
        plan.incoming.push_back({theta, 0.0});

    plan.entries.reserve(plan.incoming.size() * size_t(n_out) * size_t(n_out));
    for (const Spherical& in : plan.incoming) {
        Direction wi = spherical_to_dir(in);
        for (int i = 0; i < n_out; ++i) {
            for (int j = 0; j < n_out; ++j) {
                UnitSquarePoint u{(i + 0.5) / n_out, (j + 0.5) / n_out};
                Direction h = spherical_to_dir(model_sample(params, u));
                Direction wo = reflect_about_half(h, wi);
                bool valid = wo.z >= 0.0 && dot(h, wi) > 1e-9;
                plan.entries.push_back({u, wo, valid});
            }
        }
    }
    return plan;
}

/// Virtually measures the reference BRDF at every valid planned direction.
inline MeasurementTable measure(const MeasurementPlan& plan, const BrdfReference& reference) {
    MeasurementTable table;
    table.plan = plan;
    table.values.assign(plan.entries.size(), Rgb{});
    for (size_t s = 0; s < plan.incoming.size(); ++s) {
        Direction wi = spherical_to_dir(plan.incoming[s]);
        for (int i = 0; i < plan.grid_n; ++i) {
            for (int j = 0; j < plan.grid_n; ++j) {
                size_t k = plan.entry_index(s, i, j);
                if (!plan.entries[k].valid) continue;
                table.values[k] = reference(wi, plan.entries[k].wo);
                ++table.valid_count;
            }
        }
    }
    return table;
}

namespace detail {

// Snaps a lattice coordinate onto an exact node when the warp round-trip
// left it within floating-point noise, so node queries reproduce stored
// values bit-for-bit.
inline double snap_lattice(double x) {
    double r = std::round(x);
    return std::abs(x - r) < 1e-9 ? r : x;
}

// Interpolates along u2 within one lattice row, dropping invalid nodes.
// Returns false when neither node is usable.
inline bool row_value(const MeasurementTable& t, size_t slice, int i, double y, Rgb* out) {
    const int n = t.plan.grid_n;
    int j0 = std::clamp(int(std::floor(y)), 0, n - 1);
    int j1 = std::min(j0 + 1, n - 1);
    double fy = std::clamp(y - j0, 0.0, 1.0);
    size_t k0 = t.plan.entry_index(slice, i, j0);
    size_t k1 = t.plan.entry_index(slice, i, j1);
    bool v0 = t.plan.entries[k0].valid, v1 = t.plan.entries[k1].valid;
    if (v0 && v1) {
        *out = t.values[k0] * (1.0 - fy) + t.values[k1] * fy;
        return true;
    }
    if (v0 || v1) {
        *out = t.values[v0 ? k0 : k1];
        return true;
    }
    return false;
}

// Interpolation over one incoming slice. Along u2 queries clamp to the
// boundary cell. Along u1 the two bracketing rows extrapolate linearly a
// half cell past each end of the lattice: the warp maps the whole specular
// tail into the outermost half cell, and snapping those queries onto the
// boundary row would paste its full specular value over everything beyond
// the lobe. The warp keeps the lobe factor linear in u1, so the linear
// extension is the consistent completion; results clamp at zero.
inline Rgb bilinear_slice(const MeasurementTable& t, size_t slice, double x, double y) {
    const int n = t.plan.grid_n;
    Rgb a{}, b{};
    if (n == 1) return row_value(t, slice, 0, y, &a) ? a : Rgb{};

    int i0 = std::clamp(int(std::floor(x)), 0, n - 2);
    double fx = x - i0;
    bool has_a = row_value(t, slice, i0, y, &a);
    bool has_b = row_value(t, slice, i0 + 1, y, &b);
    if (has_a && has_b) {
        Rgb v = a * (1.0 - fx) + b * fx;
        return {std::max(0.0, v.r), std::max(0.0, v.g), std::max(0.0, v.b)};
    }
    if (has_a) return a;
    if (has_b) return b;
    return {};
}

}  // namespace detail

/// Evaluates the measured BRDF at an arbitrary direction pair: rotate the
/// pair to the plan's phi_in = 0 frame (isotropy), invert the warp on the
/// half vector, bilinearly interpolate the surrounding lattice values in the
/// two nearest incoming slices, and blend the slices linearly in
/// cos(theta_i). Outside the lattice hull, u2 clamps to the boundary cell
/// and u1 extends linearly (see bilinear_slice).
inline Rgb reconstruct_eval(const MeasurementTable& t, const Direction& wi,
                            const Direction& wo) {
    Direction wi_r = wi, wo_r = wo;
    if (!(wi.y == 0.0 && wi.x >= 0.0)) {
        double phi_i = std::atan2(wi.y, wi.x);
        double c = std::cos(phi_i), s = std::sin(phi_i);
        wi_r = {wi.x * c + wi.y * s, -wi.x * s + wi.y * c, wi.z};
        wo_r = {wo.x * c + wo.y * s, -wo.x * s + wo.y * c, wo.z};
    }

    Direction sum{wi_r.x + wo_r.x, wi_r.y + wo_r.y, wi_r.z + wo_r.z};
    double n2 = dot(sum, sum);
    if (n2 < 1e-24) return {};
    double inv = 1.0 / std::sqrt(n2);
    Spherical h = dir_to_spherical({sum.x * inv, sum.y * inv, sum.z * inv});
    UnitSquarePoint u = model_inverse(t.plan.warp_params, h);

    const int n = t.plan.grid_n;
    double x = detail::snap_lattice(u.u1 * n - 0.5);
    double y = detail::snap_lattice(u.u2 * n - 0.5);

    // Bracketing incoming slices by cos(theta_i); cosines decrease with k.
    const auto& in = t.plan.incoming;
    double ci = std::clamp(wi_r.z, -1.0, 1.0);
    size_t lo = 0;
    while (lo + 1 < in.size() && std::cos(in[lo + 1].theta) > ci) ++lo;
    if (lo + 1 >= in.size()) return detail::bilinear_slice(t, in.size() - 1, x, y);
    double c0 = std::cos(in[lo].theta), c1 = std::cos(in[lo + 1].theta);
    if (ci >= c0) return detail::bilinear_slice(t, lo, x, y);
    if (ci <= c1) return detail::bilinear_slice(t, lo + 1, x, y);

    double w = (ci - c0) / (c1 - c0);
    Rgb a = detail::bilinear_slice(t, lo, x, y);
    Rgb b = detail::bilinear_slice(t, lo + 1, x, y);
    return a * (1.0 - w) + b * w;
}

}  // namespace brdfmeas
