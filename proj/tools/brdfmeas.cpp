// brdfmeas is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

// Command-line surface for the adaptive BRDF measurement pipeline:
// fit, render, plan, measure, pipeline, sweep, compare.
//
// Exit codes: 0 success, 2 bad arguments, 3 input I/O, 4 parse/validation.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "brdfmeas/brdf.hpp"
#include "brdfmeas/estimator.hpp"
#include "brdfmeas/image.hpp"
#include "brdfmeas/merl.hpp"
#include "brdfmeas/render.hpp"
#include "brdfmeas/report.hpp"
#include "brdfmeas/sampler.hpp"
#include "brdfmeas/sweep.hpp"

namespace fs = std::filesystem;
using namespace brdfmeas;

namespace {

constexpr int kExitBadArgs = 2;
constexpr int kExitIo = 3;
constexpr int kExitValidation = 4;

struct SceneOptions {
    std::vector<double> light_pos{2.0, 2.0, 4.0};
    std::vector<double> light_intensity{20.0, 20.0, 20.0};
    int resolution = 256;

    SceneSpec scene() const {
        SceneSpec s;
        s.light_pos = {light_pos[0], light_pos[1], light_pos[2]};
        s.light_intensity = {light_intensity[0], light_intensity[1], light_intensity[2]};
        s.resolution = resolution;
        return s;
    }
};

struct MaterialOptions {
    std::string merl_path;
    std::string model = "ward";
    std::vector<double> rho_d{0.5, 0.5, 0.5};
    std::vector<double> albedo{0.5, 0.5, 0.5};
    double alpha = 0.1;

    bool use_merl() const { return !merl_path.empty(); }

    ModelParams analytic_params() const {
        if (model == "ward")
            return WardParams{{rho_d[0], rho_d[1], rho_d[2]}, alpha};
        return GgxParams{{albedo[0], albedo[1], albedo[2]}, alpha};
    }
};

void add_scene_options(CLI::App* cmd, SceneOptions& opts) {
    cmd->add_option("--light-pos", opts.light_pos, "Point light position (world units)")
        ->expected(3);
    cmd->add_option("--light-intensity", opts.light_intensity, "Light RGB intensity")
        ->expected(3);
    cmd->add_option("--resolution", opts.resolution, "Square raster side in pixels")
        ->check(CLI::Range(16, 1024));
}

void add_material_options(CLI::App* cmd, MaterialOptions& opts, bool with_merl = true) {
    if (with_merl)
        cmd->add_option("--merl", opts.merl_path, "MERL binary BRDF used as the material");
    cmd->add_option("--model", opts.model, "Analytic model: ward or ggx")
        ->check(CLI::IsMember({"ward", "ggx"}));
    cmd->add_option("--rho-d", opts.rho_d, "Ward diffuse albedo (RGB)")->expected(3);
    cmd->add_option("--albedo", opts.albedo, "GGX diffuse albedo (RGB)")->expected(3);
    cmd->add_option("--alpha", opts.alpha, "Model roughness")->check(CLI::Range(1e-3, 2.0));
}

// Keeps a loaded MERL table alive behind the returned evaluation closure.
BrdfReference make_reference(const MaterialOptions& mat) {
    if (mat.use_merl()) {
        auto table = std::make_shared<MerlBrdf>(load_merl(mat.merl_path));
        return [table](const Direction& wi, const Direction& wo) {
            return merl_lookup(*table, wi, wo);
        };
    }
    ModelParams params = mat.analytic_params();
    return [params](const Direction& wi, const Direction& wo) {
        return model_eval(params, wi, wo);
    };
}

std::string out_path(const std::string& dir, const char* name) {
    fs::create_directories(dir);
    return (fs::path(dir) / name).string();
}

ReportFields fit_report_fields(const FitResult& fit) {
    ReportFields f;
    if (const auto* w = std::get_if<WardParams>(&fit.params)) {
        f.emplace_back("model", "ward");
        f.emplace_back("rho_d_r", format_double(w->rho_d.r));
        f.emplace_back("rho_d_g", format_double(w->rho_d.g));
        f.emplace_back("rho_d_b", format_double(w->rho_d.b));
        f.emplace_back("alpha", format_double(w->alpha));
    } else {
        const auto& g = std::get<GgxParams>(fit.params);
        f.emplace_back("model", "ggx");
        f.emplace_back("albedo_r", format_double(g.albedo.r));
        f.emplace_back("albedo_g", format_double(g.albedo.g));
        f.emplace_back("albedo_b", format_double(g.albedo.b));
        f.emplace_back("alpha", format_double(g.alpha));
    }
    f.emplace_back("final_loss", format_double(fit.final_loss));
    f.emplace_back("iterations", std::to_string(fit.iterations));
    f.emplace_back("converged", fit.converged ? "1" : "0");
    return f;
}

FitResult run_fit(const ImageBuffer& target, const SceneSpec& scene,
                  const MaterialOptions& mat, bool albedo_given) {
    if (!mat.use_merl() && mat.model == "ward") return fit_ward(target, scene);
    if (albedo_given)
        return fit_ggx_alpha(target, scene, {mat.albedo[0], mat.albedo[1], mat.albedo[2]});
    return fit_ggx_auto(target, scene);
}

void export_plan(const MeasurementPlan& plan, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << "# in_theta in_phi out_theta out_phi u1 u2 valid\n";
    for (size_t s = 0; s < plan.incoming.size(); ++s) {
        for (int i = 0; i < plan.grid_n; ++i) {
            for (int j = 0; j < plan.grid_n; ++j) {
                const PlanEntry& e = plan.entries[plan.entry_index(s, i, j)];
                Spherical out = dir_to_spherical(e.wo);
                f << format_double(plan.incoming[s].theta) << ' '
                  << format_double(plan.incoming[s].phi) << ' '
                  << format_double(out.theta) << ' ' << format_double(out.phi) << ' '
                  << format_double(e.u.u1) << ' ' << format_double(e.u.u2) << ' '
                  << (e.valid ? 1 : 0) << '\n';
            }
        }
    }
    if (!f) throw IoError("write failure: " + path);
}

void export_measurements(const MeasurementTable& table, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << "# in_theta in_phi out_theta out_phi r g b\n";
    const MeasurementPlan& plan = table.plan;
    for (size_t s = 0; s < plan.incoming.size(); ++s) {
        for (int i = 0; i < plan.grid_n; ++i) {
            for (int j = 0; j < plan.grid_n; ++j) {
                size_t k = plan.entry_index(s, i, j);
                if (!plan.entries[k].valid) continue;
                Spherical out = dir_to_spherical(plan.entries[k].wo);
                const Rgb& v = table.values[k];
                f << format_double(plan.incoming[s].theta) << ' '
                  << format_double(plan.incoming[s].phi) << ' '
                  << format_double(out.theta) << ' ' << format_double(out.phi) << ' '
                  << format_double(v.r) << ' ' << format_double(v.g) << ' '
                  << format_double(v.b) << '\n';
            }
        }
    }
    if (!f) throw IoError("write failure: " + path);
}

void write_image_pair(const ImageBuffer& img, const std::string& dir, const std::string& stem) {
    write_pfm(img, out_path(dir, (stem + ".pfm").c_str()));
    write_png(img, out_path(dir, (stem + ".png").c_str()));
}

int cmd_fit(const std::string& image_path, const SceneOptions& scene_opts,
            const MaterialOptions& mat, bool albedo_given, bool quiet,
            const std::string& out_dir) {
    ImageBuffer target = read_pfm(image_path);
    SceneSpec scene = scene_opts.scene();
    FitResult fit = run_fit(target, scene, mat, albedo_given);
    ReportFields fields = fit_report_fields(fit);
    write_report(fields, out_path(out_dir, "fit_report.txt"));
    if (!quiet) std::cout << render_report(fields);
    return 0;
}

int cmd_render(const SceneOptions& scene_opts, const MaterialOptions& mat, bool env,
               int threads, const std::string& out_dir) {
    BrdfReference reference = make_reference(mat);
    SceneSpec scene = scene_opts.scene();
    write_image_pair(render_sphere(reference, scene, threads), out_dir, "render");
    if (env)
        write_image_pair(render_sphere_env(reference, scene, EnvironmentLight{}, threads),
                         out_dir, "render_env");
    return 0;
}

int cmd_plan(const MaterialOptions& mat, int grid_n, int n_theta_in,
             const std::string& out_dir) {
    ModelParams params = mat.analytic_params();
    MeasurementPlan plan =
        plan_measurements(params, model_default_weights(params), grid_n, n_theta_in);
    export_plan(plan, out_path(out_dir, "plan.txt"));
    return 0;
}

int cmd_measure(const MaterialOptions& mat, int grid_n, int n_theta_in,
                const std::string& out_dir) {
    BrdfReference reference = make_reference(mat);
    ModelParams params = mat.analytic_params();
    MeasurementPlan plan =
        plan_measurements(params, model_default_weights(params), grid_n, n_theta_in);
    MeasurementTable table = measure(plan, reference);
    export_plan(plan, out_path(out_dir, "plan.txt"));
    export_measurements(table, out_path(out_dir, "measurements.txt"));
    return 0;
}

int cmd_pipeline(const SceneOptions& scene_opts, const MaterialOptions& mat,
                 bool albedo_given, int grid_n, int n_theta_in, int threads, bool quiet,
                 const std::string& out_dir) {
    BrdfReference reference = make_reference(mat);
    SceneSpec scene = scene_opts.scene();

    ImageBuffer ground_truth = render_sphere(reference, scene, threads);
    write_image_pair(ground_truth, out_dir, "gt");

    FitResult fit = run_fit(ground_truth, scene, mat, albedo_given);
    write_report(fit_report_fields(fit), out_path(out_dir, "fit_report.txt"));

    MeasurementPlan plan = plan_measurements(fit.params, model_default_weights(fit.params),
                                             grid_n, n_theta_in);
    MeasurementTable table = measure(plan, reference);
    export_plan(plan, out_path(out_dir, "plan.txt"));
    export_measurements(table, out_path(out_dir, "measurements.txt"));

    auto reconstructed = [&table](const Direction& wi, const Direction& wo) {
        return reconstruct_eval(table, wi, wo);
    };
    ImageBuffer recon = render_sphere(reconstructed, scene, threads);
    write_image_pair(recon, out_dir, "recon");

    EnvironmentLight env;
    ImageBuffer gt_env = render_sphere_env(reference, scene, env, threads);
    ImageBuffer recon_env = render_sphere_env(reconstructed, scene, env, threads);
    write_image_pair(gt_env, out_dir, "gt_env");
    write_image_pair(recon_env, out_dir, "recon_env");

    ReportFields metrics;
    metrics.emplace_back("grid_n", std::to_string(grid_n));
    metrics.emplace_back("n_theta_in", std::to_string(n_theta_in));
    metrics.emplace_back("samples_total", std::to_string(plan.entries.size()));
    metrics.emplace_back("valid_measurements", std::to_string(table.valid_count));
    metrics.emplace_back("rmse", format_double(rmse(recon, ground_truth)));
    metrics.emplace_back("psnr", format_double(psnr(recon, ground_truth)));
    metrics.emplace_back("rmse_env", format_double(rmse(recon_env, gt_env)));
    metrics.emplace_back("psnr_env", format_double(psnr(recon_env, gt_env)));
    write_report(metrics, out_path(out_dir, "metrics_report.txt"));

    std::vector<std::string> row;
    for (const auto& [key, value] : metrics) row.push_back(value);
    std::vector<std::string> header;
    for (const auto& [key, value] : metrics) header.push_back(key);
    write_csv(header, {row}, out_path(out_dir, "metrics.csv"));

    if (!quiet) std::cout << render_report(metrics);
    return 0;
}

int cmd_sweep(const SceneOptions& scene_opts, const MaterialOptions& mat, bool albedo_given,
              int n_min, int n_max, int n_step, double epsilon, int n_theta_in,
              bool skip_fit, int threads, bool quiet, const std::string& out_dir) {
    BrdfReference reference = make_reference(mat);
    SceneSpec scene = scene_opts.scene();

    SweepMaterial sweep_mat;
    sweep_mat.reference = reference;
    sweep_mat.n_theta_in = n_theta_in;
    if (skip_fit && !mat.use_merl()) {
        sweep_mat.warp_params = mat.analytic_params();
    } else {
        ImageBuffer ground_truth = render_sphere(reference, scene, threads);
        FitResult fit = run_fit(ground_truth, scene, mat, albedo_given);
        write_report(fit_report_fields(fit), out_path(out_dir, "fit_report.txt"));
        sweep_mat.warp_params = fit.params;
    }
    sweep_mat.weights = model_default_weights(sweep_mat.warp_params);

    std::vector<int> schedule;
    for (int n = n_min; n <= n_max; n += n_step) schedule.push_back(n);
    SweepReport report = run_sweep(sweep_mat, scene, schedule, epsilon, threads);

    std::vector<std::vector<std::string>> rows;
    for (const SweepPoint& p : report.points)
        rows.push_back({std::to_string(p.n), std::to_string(p.samples_total),
                        format_double(p.rmse), format_double(p.psnr),
                        format_double(p.millis)});
    write_csv({"n", "samples_total", "rmse", "psnr", "millis"}, rows,
              out_path(out_dir, "sweep_curve.csv"));

    ReportFields fields;
    fields.emplace_back("selected_n", std::to_string(report.selected_n));
    fields.emplace_back("epsilon", format_double(report.epsilon));
    fields.emplace_back("degenerate_plateau", report.degenerate_plateau ? "1" : "0");
    fields.emplace_back("n_theta_in", std::to_string(n_theta_in));
    write_report(fields, out_path(out_dir, "sweep_report.txt"));
    if (!quiet) std::cout << render_report(fields);
    return 0;
}

int cmd_compare(const std::string& path_a, const std::string& path_b,
                const std::string& out_dir) {
    ImageBuffer a = read_pfm(path_a);
    ImageBuffer b = read_pfm(path_b);
    ReportFields fields;
    fields.emplace_back("rmse", format_double(rmse(a, b)));
    fields.emplace_back("psnr", format_double(psnr(a, b)));
    if (!out_dir.empty()) write_report(fields, out_path(out_dir, "compare_report.txt"));
    std::cout << render_report(fields);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive BRDF measurement planning, simulation, and evaluation"};
    app.require_subcommand(1);

    SceneOptions scene_opts;
    MaterialOptions mat;
    std::string image_path, out_dir = ".", path_a, path_b, compare_out;
    int grid_n = 16, n_theta_in = 8, threads = 0;
    int n_min = 2, n_max = 32, n_step = 2;
    double epsilon = 0.01;
    bool env = false, skip_fit = false, quiet = false;

    auto* fit = app.add_subcommand("fit", "Estimate BRDF parameters from a PFM sphere image");
    fit->add_option("--image", image_path, "Target PFM image")->required();
    add_scene_options(fit, scene_opts);
    add_material_options(fit, mat, false);
    fit->add_flag("--quiet", quiet, "Write the report file only, no stdout echo");
    fit->add_option("--out", out_dir, "Output directory");

    auto* render = app.add_subcommand("render", "Render a material sphere to PFM/PNG");
    add_scene_options(render, scene_opts);
    add_material_options(render, mat);
    render->add_flag("--env", env, "Also render under the gradient environment light");
    render->add_option("--threads", threads, "Worker threads (0 = hardware)");
    render->add_option("--out", out_dir, "Output directory");

    auto* plan = app.add_subcommand("plan", "Export a measurement direction plan");
    add_material_options(plan, mat, false);
    plan->add_option("--grid-n", grid_n, "Outgoing grid side length")->check(CLI::Range(2, 64));
    plan->add_option("--n-theta-in", n_theta_in, "Incoming theta count")->check(CLI::Range(1, 32));
    plan->add_option("--out", out_dir, "Output directory");

    auto* measure = app.add_subcommand("measure", "Plan and virtually measure a material");
    add_material_options(measure, mat);
    measure->add_option("--grid-n", grid_n, "Outgoing grid side length")->check(CLI::Range(2, 64));
    measure->add_option("--n-theta-in", n_theta_in, "Incoming theta count")->check(CLI::Range(1, 32));
    measure->add_option("--out", out_dir, "Output directory");

    auto* pipeline = app.add_subcommand(
        "pipeline", "Full chain: fit, plan, measure, reconstruct, render, metrics");
    add_scene_options(pipeline, scene_opts);
    add_material_options(pipeline, mat);
    pipeline->add_option("--grid-n", grid_n, "Outgoing grid side length")->check(CLI::Range(2, 64));
    pipeline->add_option("--n-theta-in", n_theta_in, "Incoming theta count")->check(CLI::Range(1, 32));
    pipeline->add_option("--threads", threads, "Worker threads (0 = hardware)");
    pipeline->add_flag("--quiet", quiet, "Write report files only, no stdout echo");
    pipeline->add_option("--out", out_dir, "Output directory");

    auto* sweep = app.add_subcommand("sweep", "Sample-count sweep with plateau selection");
    add_scene_options(sweep, scene_opts);
    add_material_options(sweep, mat);
    sweep->add_option("--n-min", n_min, "Smallest grid side")->check(CLI::Range(2, 64));
    sweep->add_option("--n-max", n_max, "Largest grid side")->check(CLI::Range(2, 64));
    sweep->add_option("--n-step", n_step, "Grid side step")->check(CLI::Range(1, 32));
    sweep->add_option("--epsilon", epsilon, "Relative improvement cutoff")
        ->check(CLI::Range(1e-9, 0.999));
    sweep->add_option("--n-theta-in", n_theta_in, "Incoming theta count")->check(CLI::Range(1, 32));
    sweep->add_flag("--skip-fit", skip_fit, "Warp with the given analytic parameters directly");
    sweep->add_option("--threads", threads, "Worker threads (0 = hardware)");
    sweep->add_flag("--quiet", quiet, "Write report files only, no stdout echo");
    sweep->add_option("--out", out_dir, "Output directory");

    auto* compare = app.add_subcommand("compare", "RMSE/PSNR between two PFM images");
    compare->add_option("--a", path_a, "First PFM image")->required();
    compare->add_option("--b", path_b, "Second PFM image")->required();
    compare->add_option("--out", compare_out, "Optional report directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        app.exit(e);
        return kExitBadArgs;
    }

    try {
        if (fit->parsed())
            return cmd_fit(image_path, scene_opts, mat, fit->count("--albedo") > 0, quiet,
                           out_dir);
        if (render->parsed()) return cmd_render(scene_opts, mat, env, threads, out_dir);
        if (plan->parsed()) return cmd_plan(mat, grid_n, n_theta_in, out_dir);
        if (measure->parsed()) return cmd_measure(mat, grid_n, n_theta_in, out_dir);
        if (pipeline->parsed())
            return cmd_pipeline(scene_opts, mat, pipeline->count("--albedo") > 0, grid_n,
                                n_theta_in, threads, quiet, out_dir);
        if (sweep->parsed())
            return cmd_sweep(scene_opts, mat, sweep->count("--albedo") > 0, n_min, n_max,
                             n_step, epsilon, n_theta_in, skip_fit, threads, quiet, out_dir);
        if (compare->parsed()) return cmd_compare(path_a, path_b, compare_out);
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const FormatError& e) {
        std::cerr << "format error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
