// brdfmeas is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <numeric>
#include <vector>

#include "brdfmeas/brdf.hpp"
#include "brdfmeas/image.hpp"
#include "brdfmeas/render.hpp"

namespace brdfmeas {

/// Mean absolute channel difference on linear HDR values.
inline double image_loss_l1(const ImageBuffer& a, const ImageBuffer& b) {
    detail::require_same_dims(a, b, "image_loss_l1");
    double acc = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i)
        acc += std::abs(double(a.data[i]) - double(b.data[i]));
    return acc / double(a.data.size());
}

struct FitResult {
    ModelParams params;
    double final_loss = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> loss_history;  // best objective after each iteration of the winning start
};

namespace detail {

struct NmResult {
    std::vector<double> x;
    double fx = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> history;
};

// Nelder-Mead downhill simplex with the standard coefficients. Stops when
// the best value improves by less than tol over a full polytope iteration,
// i.e. one generation of n+1 elementary steps (a single step usually
// replaces only the worst vertex, so per-step improvement of the incumbent
// best is the wrong granularity).
inline NmResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                            const std::vector<double>& x0, const std::vector<double>& step,
                            int max_iters, double tol) {
    const size_t n = x0.size();
    std::vector<std::vector<double>> xs(n + 1, x0);
    for (size_t i = 0; i < n; ++i) xs[i + 1][i] += step[i];
    std::vector<double> fs(n + 1);
    for (size_t i = 0; i <= n; ++i) fs[i] = f(xs[i]);

    NmResult out;
    auto order_simplex = [&] {
        std::vector<size_t> idx(n + 1);
        std::iota(idx.begin(), idx.end(), size_t(0));
        std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return fs[a] < fs[b]; });
        std::vector<std::vector<double>> xs2(n + 1);
        std::vector<double> fs2(n + 1);
        for (size_t i = 0; i <= n; ++i) {
            xs2[i] = xs[idx[i]];
            fs2[i] = fs[idx[i]];
        }
        xs = std::move(xs2);
        fs = std::move(fs2);
    };

    order_simplex();
    out.history.push_back(fs[0]);
    const size_t generation = n + 1;
    for (int it = 0; it < max_iters; ++it) {
        std::vector<double> centroid(n, 0.0);
        for (size_t i = 0; i < n; ++i)
            for (size_t d = 0; d < n; ++d) centroid[d] += xs[i][d] / double(n);

        auto blend = [&](double coef) {
            std::vector<double> x(n);
            for (size_t d = 0; d < n; ++d) x[d] = centroid[d] + coef * (centroid[d] - xs[n][d]);
            return x;
        };

        std::vector<double> xr = blend(1.0);
        double fr = f(xr);
        if (fr < fs[0]) {
            std::vector<double> xe = blend(2.0);
            double fe = f(xe);
            if (fe < fr) {
                xs[n] = std::move(xe);
                fs[n] = fe;
            } else {
                xs[n] = std::move(xr);
                fs[n] = fr;
            }
        } else if (fr < fs[n - 1]) {
            xs[n] = std::move(xr);
            fs[n] = fr;
        } else {
            std::vector<double> xc = blend(fr < fs[n] ? 0.5 : -0.5);
            double fc = f(xc);
            if (fc < std::min(fr, fs[n])) {
                xs[n] = std::move(xc);
                fs[n] = fc;
            } else {
                for (size_t i = 1; i <= n; ++i) {  // shrink toward the best vertex
                    for (size_t d = 0; d < n; ++d) xs[i][d] = xs[0][d] + 0.5 * (xs[i][d] - xs[0][d]);
                    fs[i] = f(xs[i]);
                }
            }
        }

        order_simplex();
        out.iterations = it + 1;
        out.history.push_back(fs[0]);
        // Converged once a full polytope generation brings less than tol and
        // the polytope's value spread has collapsed to the same scale; the
        // spread guard keeps a run of lazy worst-vertex steps from passing
        // for convergence while the simplex is still wide.
        if (out.history.size() > generation &&
            out.history[out.history.size() - 1 - generation] - fs[0] < tol &&
            fs[n] - fs[0] < tol) {
            out.converged = true;
            break;
        }
    }
    out.x = xs[0];
    out.fx = fs[0];
    return out;
}

inline double box_penalty(const std::vector<double>& x, const std::vector<double>& lo,
                          const std::vector<double>& hi) {
    double p = 0.0;
    for (size_t i = 0; i < x.size(); ++i)
        p += std::max(0.0, lo[i] - x[i]) + std::max(0.0, x[i] - hi[i]);
    return p;
}

inline constexpr int kFitMaxIters = 500;
inline constexpr double kFitTol = 1e-5;

// 4x4 multi-start grid over (mean rho_d, alpha).
inline const double kStartMeans[4] = {0.1, 0.1 + 0.8 / 3, 0.1 + 1.6 / 3, 0.9};
inline const double kStartAlphas[4] = {0.05, 0.3, 0.55, 0.8};

// One descent with fresh-simplex restarts at the incumbent until the restart
// stops paying or the per-start budget is spent. A restart recovers from the
// boundary collapse NM is prone to when the optimum sits on the box wall.
inline NmResult descend_with_restarts(const std::function<double(const std::vector<double>&)>& f,
                                      std::vector<double> x0, const std::vector<double>& step) {
    NmResult acc = nelder_mead(f, x0, step, kFitMaxIters, kFitTol);
    while (acc.iterations < kFitMaxIters) {
        NmResult next = nelder_mead(f, acc.x, step, kFitMaxIters - acc.iterations, kFitTol);
        acc.iterations += next.iterations;
        acc.converged = next.converged;
        acc.history.insert(acc.history.end(), next.history.begin(), next.history.end());
        bool improved = acc.fx - next.fx >= kFitTol;
        if (next.fx < acc.fx) {
            acc.x = next.x;
            acc.fx = next.fx;
        }
        if (!improved) break;
    }
    return acc;
}

// Runs one Nelder-Mead descent per start concurrently and picks the winner
// by (loss, start index) so the result is independent of scheduling.
inline NmResult multi_start(const std::function<double(const std::vector<double>&)>& objective,
                            const std::vector<std::vector<double>>& starts,
                            const std::vector<double>& step, int* total_iterations) {
    std::vector<std::future<NmResult>> futures;
    futures.reserve(starts.size());
    for (const auto& x0 : starts)
        futures.push_back(std::async(std::launch::async, [&objective, x0, &step] {
            return descend_with_restarts(objective, x0, step);
        }));

    NmResult best;
    int total = 0;
    bool have = false;
    for (auto& fut : futures) {
        NmResult r = fut.get();
        total += r.iterations;
        if (!have || r.fx < best.fx) {
            best = std::move(r);
            have = true;
        }
    }
    if (total_iterations) *total_iterations = total;
    return best;
}

inline void require_fit_inputs(const ImageBuffer& target, const SceneSpec& scene) {
    if (target.width != target.height || target.width != scene.resolution)
        throw std::invalid_argument(
            "fit: target must be square and match the scene resolution");
}

}  // namespace detail

/// Recovers Ward parameters from a rendered sphere image by multi-start
/// Nelder-Mead over (rho_d, alpha), minimizing the L1 image loss against
/// re-renders under the same scene. Non-convergence is reported through
/// converged = false with the best parameters found, never an exception.
inline FitResult fit_ward(const ImageBuffer& target, const SceneSpec& scene) {
    detail::require_fit_inputs(target, scene);
    const std::vector<double> lo{0.0, 0.0, 0.0, 1e-3};
    const std::vector<double> hi{1.0, 1.0, 1.0, 2.0};

    auto objective = [&](const std::vector<double>& x) {
        WardParams p = clamp_params(WardParams{{x[0], x[1], x[2]}, x[3]});
        ImageBuffer img = render_sphere(
            [&p](const Direction& wi, const Direction& wo) { return ward_eval(p, wi, wo); },
            scene, 1);
        return image_loss_l1(img, target) + detail::box_penalty(x, lo, hi);
    };

    std::vector<std::vector<double>> starts;
    for (double m : detail::kStartMeans)
        for (double a : detail::kStartAlphas) starts.push_back({m, m, m, a});

    FitResult result;
    detail::NmResult best =
        detail::multi_start(objective, starts, {0.15, 0.15, 0.15, 0.08}, &result.iterations);

    WardParams params = clamp_params(WardParams{{best.x[0], best.x[1], best.x[2]}, best.x[3]});
    ImageBuffer render = render_sphere(
        [&params](const Direction& wi, const Direction& wo) { return ward_eval(params, wi, wo); },
        scene, 1);
    result.params = params;
    result.final_loss = image_loss_l1(render, target);
    result.converged = best.converged;
    result.loss_history = std::move(best.history);
    return result;
}

/// Recovers the microfacet roughness from a rendered sphere image with the
/// diffuse albedo held fixed (supplied by the caller or pre-fit with
/// estimate_albedo). Same search contract as fit_ward, one dimension.
inline FitResult fit_ggx_alpha(const ImageBuffer& target, const SceneSpec& scene,
                               const Rgb& albedo) {
    detail::require_fit_inputs(target, scene);
    const std::vector<double> lo{1e-3};
    const std::vector<double> hi{1.0};

    auto objective = [&](const std::vector<double>& x) {
        GgxParams p = clamp_params(GgxParams{albedo, x[0]});
        ImageBuffer img = render_sphere(
            [&p](const Direction& wi, const Direction& wo) { return ggx_eval(p, wi, wo); },
            scene, 1);
        return image_loss_l1(img, target) + detail::box_penalty(x, lo, hi);
    };

    std::vector<std::vector<double>> starts;
    for (double a : detail::kStartAlphas) starts.push_back({a});

    FitResult result;
    detail::NmResult best = detail::multi_start(objective, starts, {0.08}, &result.iterations);

    GgxParams params = clamp_params(GgxParams{albedo, best.x[0]});
    ImageBuffer render = render_sphere(
        [&params](const Direction& wi, const Direction& wo) { return ggx_eval(params, wi, wo); },
        scene, 1);
    result.params = params;
    result.final_loss = image_loss_l1(render, target);
    result.converged = best.converged;
    result.loss_history = std::move(best.history);
    return result;
}

/// Recovers the microfacet roughness with the diffuse albedo profiled out:
/// the rendered image is linear in the albedo (spec + albedo * diffuse
/// basis per channel), so for every candidate alpha the L1-optimal albedo
/// is the weighted median of the per-pixel implied albedos, weighted by the
/// diffuse basis. This removes the 3-channel search dimension exactly; use
/// fit_ggx_alpha when the albedo is known.
inline FitResult fit_ggx_auto(const ImageBuffer& target, const SceneSpec& scene) {
    detail::require_fit_inputs(target, scene);
    const std::vector<double> lo{1e-3};
    const std::vector<double> hi{1.0};

    ImageBuffer diffuse_basis = render_sphere(
        [](const Direction&, const Direction&) { return Rgb{kInvPi, kInvPi, kInvPi}; }, scene,
        1);

    auto profiled_albedo = [&](const ImageBuffer& spec) {
        Rgb albedo{};
        std::vector<std::pair<double, double>> implied;  // (value, weight)
        for (int c = 0; c < 3; ++c) {
            implied.clear();
            double total = 0.0;
            for (size_t i = c; i < target.data.size(); i += 3) {
                double basis = diffuse_basis.data[i];
                if (basis <= 0.0f) continue;
                double a = (double(target.data[i]) - double(spec.data[i])) / basis;
                implied.emplace_back(a, basis);
                total += basis;
            }
            double value = 0.0;
            if (!implied.empty()) {
                std::sort(implied.begin(), implied.end());
                double half = 0.5 * total, acc = 0.0;
                for (const auto& [a, weight] : implied) {
                    acc += weight;
                    value = a;
                    if (acc >= half) break;
                }
            }
            double* channel = c == 0 ? &albedo.r : c == 1 ? &albedo.g : &albedo.b;
            *channel = std::clamp(value, 0.0, 1.0);
        }
        return albedo;
    };

    auto spec_image = [&](double alpha) {
        GgxParams p = clamp_params(GgxParams{{0.0, 0.0, 0.0}, alpha});
        return render_sphere(
            [&p](const Direction& wi, const Direction& wo) { return ggx_eval(p, wi, wo); },
            scene, 1);
    };

    auto objective = [&](const std::vector<double>& x) {
        ImageBuffer spec = spec_image(x[0]);
        Rgb albedo = profiled_albedo(spec);
        double acc = 0.0;
        for (size_t i = 0; i < target.data.size(); ++i) {
            double a = i % 3 == 0 ? albedo.r : i % 3 == 1 ? albedo.g : albedo.b;
            acc += std::abs(double(spec.data[i]) + a * double(diffuse_basis.data[i]) -
                            double(target.data[i]));
        }
        return acc / double(target.data.size()) + detail::box_penalty(x, lo, hi);
    };

    std::vector<std::vector<double>> starts;
    for (double a : detail::kStartAlphas) starts.push_back({a});

    FitResult result;
    detail::NmResult best = detail::multi_start(objective, starts, {0.08}, &result.iterations);

    double alpha = std::clamp(best.x[0], 1e-3, 1.0);
    Rgb albedo = profiled_albedo(spec_image(alpha));
    GgxParams params = clamp_params(GgxParams{albedo, alpha});
    ImageBuffer render = render_sphere(
        [&params](const Direction& wi, const Direction& wo) { return ggx_eval(params, wi, wo); },
        scene, 1);
    result.params = params;
    result.final_loss = image_loss_l1(render, target);
    result.converged = best.converged;
    result.loss_history = std::move(best.history);
    return result;
}

/// Diffuse-albedo initialization: invert the known point-light shading per
/// lit pixel and average the darkest decile of the implied albedos. The
/// pixel value is diffuse plus specular, so the implied albedo bounds the
/// true one from above and its lowest decile carries the least specular
/// contamination. Pixels near the terminator are skipped; the cosine
/// division there amplifies whatever glancing lobe remains.
inline Rgb estimate_albedo(const ImageBuffer& target, const SceneSpec& scene) {
    detail::require_fit_inputs(target, scene);
    const int res = scene.resolution;

    struct LitPixel {
        double level;  // mean implied albedo, the ranking key
        Rgb implied;
    };
    std::vector<LitPixel> lit;
    for (int py = 0; py < res; ++py) {
        for (int px = 0; px < res; ++px) {
            detail::SphereHit hit = detail::intersect_ortho_pixel(px, py, res);
            if (!hit.covered) continue;
            Vec3 to_light = scene.light_pos - Vec3{hit.n.x, hit.n.y, hit.n.z};
            double d2 = length_squared(to_light);
            double inv_d = 1.0 / std::sqrt(d2);
            double cos_i = (hit.n.x * to_light.x + hit.n.y * to_light.y + hit.n.z * to_light.z) * inv_d;
            if (cos_i < 0.1) continue;
            Rgb pixel = target.pixel(px, py);
            double shade = cos_i / d2;
            Rgb implied{kPi * pixel.r / (scene.light_intensity.r * shade),
                        kPi * pixel.g / (scene.light_intensity.g * shade),
                        kPi * pixel.b / (scene.light_intensity.b * shade)};
            lit.push_back({mean(implied), implied});
        }
    }
    if (lit.empty()) return {0.0, 0.0, 0.0};

    size_t keep = std::max<size_t>(1, lit.size() / 10);
    std::nth_element(lit.begin(), lit.begin() + long(keep), lit.end(),
                     [](const LitPixel& a, const LitPixel& b) { return a.level < b.level; });
    Rgb acc{};
    for (size_t i = 0; i < keep; ++i) acc += lit[i].implied;
    acc = acc * (1.0 / double(keep));
    return {std::clamp(acc.r, 0.0, 1.0), std::clamp(acc.g, 0.0, 1.0), std::clamp(acc.b, 0.0, 1.0)};
}

}  // namespace brdfmeas
