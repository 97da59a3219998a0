// brdfmeas is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include <chrono>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include "brdfmeas/render.hpp"
#include "brdfmeas/sampler.hpp"

namespace brdfmeas {

struct SweepPoint {
    int n = 0;
    size_t samples_total = 0;
    double rmse = 0.0;
    double psnr = 0.0;
    double millis = 0.0;  // wall time; excluded from determinism guarantees
};

struct SweepReport {
    std::vector<SweepPoint> points;
    int selected_n = 0;
    double epsilon = 0.0;
    bool degenerate_plateau = false;  // improvement never settled; largest grid selected
};

/// Reference material plus the warp that drives its measurement plan.
struct SweepMaterial {
    BrdfReference reference;
    ModelParams warp_params;
    LobeWeights weights;
    int n_theta_in = 8;
};

namespace detail {

// Relative RMSE improvement over the previous schedule point.
inline double rel_improvement(double prev, double cur) {
    if (prev <= 1e-300) return 0.0;
    return (prev - cur) / prev;
}

}  // namespace detail

/// Plateau rule: returns the smallest grid side from which every later
/// transition improves RMSE by less than epsilon. A curve that never settles
/// selects the largest entry and sets the degenerate flag.
inline std::pair<int, bool> select_plateau(const std::vector<int>& ns,
                                           const std::vector<double>& rmses,
                                           double epsilon) {
    const size_t count = ns.size();
    if (count == 1) return {ns[0], false};
    size_t plateau_start = count;
    for (size_t k = count; k-- > 1;) {
        if (detail::rel_improvement(rmses[k - 1], rmses[k]) < epsilon)
            plateau_start = k;
        else
            break;
    }
    if (plateau_start < count) return {ns[plateau_start - 1], false};
    return {ns[count - 1], true};
}

/// Measures the reference on every grid in the schedule, renders each
/// reconstruction against the directly rendered ground truth, and selects
/// the smallest grid after which the relative RMSE improvement stays below
/// epsilon (plateau rule). The full curve is always reported.
inline SweepReport run_sweep(const SweepMaterial& mat, const SceneSpec& scene,
                             const std::vector<int>& schedule, double epsilon,
                             int workers = 0) {
    if (schedule.empty()) throw std::invalid_argument("run_sweep: empty schedule");
    for (size_t i = 1; i < schedule.size(); ++i)
        if (schedule[i] <= schedule[i - 1])
            throw std::invalid_argument("run_sweep: schedule must be strictly increasing");
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::invalid_argument("run_sweep: epsilon must be in (0, 1)");

    ImageBuffer ground_truth = render_sphere(mat.reference, scene, workers);

    SweepReport report;
    report.epsilon = epsilon;
    for (int n : schedule) {
        auto t0 = std::chrono::steady_clock::now();
        MeasurementPlan plan = plan_measurements(mat.warp_params, mat.weights, n, mat.n_theta_in);
        MeasurementTable table = measure(plan, mat.reference);
        ImageBuffer img = render_sphere(
            [&table](const Direction& wi, const Direction& wo) {
                return reconstruct_eval(table, wi, wo);
            },
            scene, workers);
        auto t1 = std::chrono::steady_clock::now();

        SweepPoint point;
        point.n = n;
        point.samples_total = plan.entries.size();
        point.rmse = rmse(img, ground_truth);
        point.psnr = psnr(img, ground_truth);
        point.millis = std::chrono::duration<double, std::milli>(t1 - t0).count();
        report.points.push_back(point);
    }

    std::vector<double> rmses;
    for (const SweepPoint& p : report.points) rmses.push_back(p.rmse);
    std::tie(report.selected_n, report.degenerate_plateau) =
        select_plateau(schedule, rmses, epsilon);
    return report;
}

}  // namespace brdfmeas
