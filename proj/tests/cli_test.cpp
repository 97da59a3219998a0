// brdfmeas is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "brdfmeas/image.hpp"
#include "brdfmeas/merl.hpp"
#include "brdfmeas/report.hpp"

namespace fs = std::filesystem;
using namespace brdfmeas;

namespace {

std::string cli_path() { return BRDFMEAS_CLI_PATH; }

std::string fresh_dir(const std::string& name) {
    fs::path dir = fs::path(testing::TempDir()) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir.string();
}

struct CliResult {
    int code = -1;
    std::string output;
};

CliResult run_cli(const std::string& args) {
    std::string capture = std::string(testing::TempDir()) + "/brdfmeas_cli_capture.txt";
    std::string cmd = cli_path() + " " + args + " >" + capture + " 2>&1";
    int rc = std::system(cmd.c_str());
    CliResult result;
    result.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    std::ifstream f(capture);
    std::stringstream ss;
    ss << f.rdbuf();
    result.output = ss.str();
    return result;
}

std::vector<char> read_bytes(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    EXPECT_TRUE(f.good()) << path;
    return std::vector<char>((std::istreambuf_iterator<char>(f)),
                             std::istreambuf_iterator<char>());
}

size_t line_count(const fs::path& path) {
    std::ifstream f(path);
    size_t lines = 0;
    std::string line;
    while (std::getline(f, line)) ++lines;
    return lines;
}

}  // namespace

TEST(Cli, NoSubcommandIsBadArguments) {
    EXPECT_EQ(run_cli("").code, 2);
}

TEST(Cli, OutOfRangeOptionIsBadArguments) {
    EXPECT_EQ(run_cli("plan --model ward --grid-n 99").code, 2);
    EXPECT_EQ(run_cli("render --resolution 8").code, 2);
}

TEST(Cli, FitMissingImageIsIoErrorWithoutPartialOutputs) {
    std::string dir = fresh_dir("cli_fit_missing");
    CliResult r = run_cli("fit --image /nonexistent/target.pfm --out " + dir);
    EXPECT_EQ(r.code, 3);
    EXPECT_FALSE(fs::exists(fs::path(dir) / "fit_report.txt"));
}

TEST(Cli, FitMalformedImageIsValidationError) {
    std::string dir = fresh_dir("cli_fit_malformed");
    std::string bad = dir + "/bad.pfm";
    std::ofstream(bad) << "P6 not a pfm";
    EXPECT_EQ(run_cli("fit --image " + bad + " --out " + dir).code, 4);
}

TEST(Cli, RenderThenFitRecoversParameters) {
    std::string render_dir = fresh_dir("cli_render");
    CliResult r = run_cli(
        "render --model ward --rho-d 0.5 0.5 0.5 --alpha 0.2 --resolution 48 --threads 1 "
        "--out " + render_dir);
    ASSERT_EQ(r.code, 0) << r.output;
    ImageBuffer img = read_pfm(render_dir + "/render.pfm");
    EXPECT_EQ(img.width, 48);
    EXPECT_TRUE(fs::exists(fs::path(render_dir) / "render.png"));

    std::string fit_dir = fresh_dir("cli_fit");
    r = run_cli("fit --image " + render_dir + "/render.pfm --model ward --resolution 48 --out " +
                fit_dir);
    ASSERT_EQ(r.code, 0) << r.output;

    auto report = read_report(fit_dir + "/fit_report.txt");
    EXPECT_EQ(report.at("model"), "ward");
    EXPECT_NEAR(std::stod(report.at("rho_d_r")), 0.5, 0.03);
    EXPECT_NEAR(std::stod(report.at("alpha")), 0.2, 0.03);
    EXPECT_GE(std::stod(report.at("final_loss")), 0.0);

    // stdout carries the same report text
    auto echoed = parse_report(r.output);
    EXPECT_EQ(echoed.at("alpha"), report.at("alpha"));
}

TEST(Cli, PlanSchemaUsesMidpointLattice) {
    std::string dir = fresh_dir("cli_plan");
    ASSERT_EQ(run_cli("plan --model ward --alpha 0.3 --grid-n 4 --n-theta-in 8 --out " + dir).code,
              0);
    fs::path plan = fs::path(dir) / "plan.txt";
    ASSERT_TRUE(fs::exists(plan));
    EXPECT_EQ(line_count(plan), 1u + 8u * 16u);

    std::ifstream f(plan);
    std::string header;
    std::getline(f, header);
    EXPECT_EQ(header, "# in_theta in_phi out_theta out_phi u1 u2 valid");
    double in_theta, in_phi, out_theta, out_phi, u1, u2;
    int valid;
    size_t rows = 0;
    while (f >> in_theta >> in_phi >> out_theta >> out_phi >> u1 >> u2 >> valid) {
        EXPECT_EQ(in_phi, 0.0);
        EXPECT_TRUE(valid == 0 || valid == 1);
        // u components sit on the midpoint lattice of a 4x4 grid
        EXPECT_NEAR(std::fmod(u1 * 4.0, 1.0), 0.5, 1e-9);
        EXPECT_NEAR(std::fmod(u2 * 4.0, 1.0), 0.5, 1e-9);
        ++rows;
    }
    EXPECT_EQ(rows, 8u * 16u);
}

TEST(Cli, MeasureWritesOneLinePerValidEntry) {
    std::string dir = fresh_dir("cli_measure");
    ASSERT_EQ(run_cli("measure --model ward --rho-d 0.2 0.2 0.2 --alpha 0.8 --grid-n 6 "
                      "--n-theta-in 8 --out " + dir).code,
              0);
    std::ifstream plan(fs::path(dir) / "plan.txt");
    std::string line;
    std::getline(plan, line);  // header
    size_t valid = 0;
    double a, b, c, d, e, g;
    int v;
    while (plan >> a >> b >> c >> d >> e >> g >> v) valid += size_t(v);
    EXPECT_EQ(line_count(fs::path(dir) / "measurements.txt"), valid + 1);
}

TEST(Cli, CompareReportsMetrics) {
    std::string dir = fresh_dir("cli_compare");
    ASSERT_EQ(run_cli("render --model ward --resolution 32 --threads 1 --out " + dir).code, 0);
    CliResult r = run_cli("compare --a " + dir + "/render.pfm --b " + dir + "/render.pfm");
    ASSERT_EQ(r.code, 0);
    auto report = parse_report(r.output);
    EXPECT_EQ(std::stod(report.at("rmse")), 0.0);
    EXPECT_EQ(std::stod(report.at("psnr")), 99.0);
}

TEST(Cli, PipelineArtifactsDeterministicAcrossThreadCounts) {
    std::string dir1 = fresh_dir("cli_pipe1");
    std::string dir2 = fresh_dir("cli_pipe2");
    std::string config =
        "pipeline --model ward --rho-d 0.3 0.3 0.3 --alpha 0.2 --resolution 48 --grid-n 8 ";
    ASSERT_EQ(run_cli(config + "--threads 1 --out " + dir1).code, 0);
    ASSERT_EQ(run_cli(config + "--threads 3 --out " + dir2).code, 0);

    const char* artifacts[] = {"gt.pfm",        "gt.png",        "plan.txt",
                               "measurements.txt", "recon.pfm",  "recon.png",
                               "gt_env.pfm",    "recon_env.pfm", "fit_report.txt",
                               "metrics_report.txt"};
    for (const char* name : artifacts) {
        SCOPED_TRACE(name);
        ASSERT_TRUE(fs::exists(fs::path(dir1) / name));
        EXPECT_EQ(read_bytes(fs::path(dir1) / name), read_bytes(fs::path(dir2) / name));
    }
}

TEST(Cli, PipelineWardEndToEndQuality) {
    std::string dir = fresh_dir("cli_pipe_quality");
    CliResult r = run_cli(
        "pipeline --model ward --rho-d 0.2 0.2 0.2 --alpha 0.1 --resolution 128 --grid-n 16 "
        "--threads 1 --out " + dir);
    ASSERT_EQ(r.code, 0) << r.output;
    auto metrics = read_report(dir + "/metrics_report.txt");
    EXPECT_GT(std::stod(metrics.at("psnr")), 30.0);
    EXPECT_EQ(metrics.at("grid_n"), "16");
    EXPECT_EQ(metrics.at("samples_total"), std::to_string(8 * 16 * 16));
}

TEST(Cli, PipelineConstantMerlIsExact) {
    // A constant tabulated material measures to constants everywhere, so the
    // reconstruction reproduces the ground truth and PSNR hits the 99 dB cap.
    std::string dir = fresh_dir("cli_pipe_merl");
    std::string merl_path = dir + "/constant.binary";
    {
        MerlBrdf table;
        table.samples.assign(MerlBrdf::kSampleCount, 1500.0);
        save_merl(table, merl_path);
    }
    CliResult r = run_cli("pipeline --merl " + merl_path +
                          " --resolution 64 --grid-n 8 --threads 1 --out " + dir);
    ASSERT_EQ(r.code, 0) << r.output;
    auto metrics = read_report(dir + "/metrics_report.txt");
    EXPECT_EQ(std::stod(metrics.at("rmse")), 0.0);
    EXPECT_EQ(std::stod(metrics.at("psnr")), 99.0);
}

TEST(Cli, MerlParseErrorIsValidationError) {
    std::string dir = fresh_dir("cli_merl_bad");
    std::string path = dir + "/truncated.binary";
    std::ofstream(path, std::ios::binary) << "not a merl file";
    EXPECT_EQ(run_cli("render --merl " + path + " --out " + dir).code, 4);
}

TEST(Cli, SweepDiffuseSelectsSmallestGrid) {
    std::string dir = fresh_dir("cli_sweep");
    CliResult r = run_cli(
        "sweep --model ward --rho-d 1 1 1 --alpha 0.3 --skip-fit --resolution 48 "
        "--n-min 2 --n-max 8 --n-step 2 --threads 1 --out " + dir);
    ASSERT_EQ(r.code, 0) << r.output;
    auto report = read_report(dir + "/sweep_report.txt");
    EXPECT_EQ(report.at("selected_n"), "2");
    EXPECT_EQ(report.at("degenerate_plateau"), "0");

    std::ifstream csv(fs::path(dir) / "sweep_curve.csv");
    std::string header;
    std::getline(csv, header);
    EXPECT_EQ(header, "n,samples_total,rmse,psnr,millis");
    EXPECT_EQ(line_count(fs::path(dir) / "sweep_curve.csv"), 5u);  // header + 4 grids
}
