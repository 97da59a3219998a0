// brdfmeas is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#include "brdfmeas/merl.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <random>

using namespace brdfmeas;

namespace {

MerlBrdf constant_table(double value) {
    MerlBrdf b;
    b.samples.assign(MerlBrdf::kSampleCount, value);
    return b;
}

Direction dir_at(double theta, double phi = 0.0) {
    return spherical_to_dir({theta, phi});
}

}  // namespace

TEST(ParseMerl, RejectsWrongSize) {
    std::vector<uint8_t> tiny(100, 0);
    EXPECT_THROW(parse_merl(tiny), FormatError);

    std::vector<uint8_t> truncated(MerlBrdf::kFileBytes - 8, 0);
    EXPECT_THROW(parse_merl(truncated), FormatError);
}

TEST(ParseMerl, RejectsWrongHeader) {
    auto bytes = write_merl(constant_table(0.0));
    bytes[0] = 91;  // corrupt n_theta_h
    EXPECT_THROW(parse_merl(bytes), FormatError);
}

TEST(WriteMerl, LayoutAndLength) {
    auto bytes = write_merl(constant_table(1.0));
    ASSERT_EQ(bytes.size(), 34992012u);
    int32_t dims[3];
    std::memcpy(dims, bytes.data(), 12);
    EXPECT_EQ(dims[0], 90);
    EXPECT_EQ(dims[1], 90);
    EXPECT_EQ(dims[2], 180);
}

TEST(MerlRoundTrip, ParseWriteIdentity) {
    std::mt19937 rng(31u);
    std::uniform_real_distribution<double> uni(-1.0, 1500.0);
    MerlBrdf b;
    b.samples.resize(MerlBrdf::kSampleCount);
    for (auto& s : b.samples) s = uni(rng);

    auto bytes = write_merl(b);
    MerlBrdf back = parse_merl(bytes);
    ASSERT_EQ(back.samples.size(), b.samples.size());
    EXPECT_EQ(std::memcmp(back.samples.data(), b.samples.data(),
                          MerlBrdf::kSampleCount * sizeof(double)),
              0);

    auto bytes2 = write_merl(back);
    EXPECT_EQ(bytes, bytes2);
}

TEST(MerlLookup, ConstantTableScales) {
    MerlBrdf b = constant_table(1500.0);
    for (double ti : {0.0, 0.3, 1.0}) {
        for (double to : {0.1, 0.7, 1.3}) {
            Rgb v = merl_lookup(b, dir_at(ti), dir_at(to, 2.1));
            EXPECT_NEAR(v.r, 1.0, 1e-12);
            EXPECT_NEAR(v.g, 1.15, 1e-12);
            EXPECT_NEAR(v.b, 1.66, 1e-12);
        }
    }
}

TEST(MerlLookup, NegativeCellClampsToZero) {
    MerlBrdf b = constant_table(1500.0);
    Direction wi = dir_at(0.4), wo = dir_at(0.6, 1.0);
    HalfDiffCoords hd = dir_to_half_diff(wi, wo);
    size_t idx = merl_cell_index(merl_theta_half_index(hd.theta_h),
                                 merl_theta_diff_index(hd.theta_d),
                                 merl_phi_diff_index(hd.phi_d));
    b.samples[idx] = -1.0;
    b.samples[idx + MerlBrdf::kCellsPerChannel] = -1.0;
    b.samples[idx + 2 * MerlBrdf::kCellsPerChannel] = -1.0;
    Rgb v = merl_lookup(b, wi, wo);
    EXPECT_EQ(v.r, 0.0);
    EXPECT_EQ(v.g, 0.0);
    EXPECT_EQ(v.b, 0.0);
}

TEST(MerlIndices, ClosedFormMapping) {
    // theta_h = (pi/2) * 0.5^2 addresses row 45 of the sqrt-compressed axis.
    EXPECT_EQ(merl_theta_half_index(kHalfPi * 0.25), 45);
    EXPECT_EQ(merl_theta_half_index(0.0), 0);
    EXPECT_EQ(merl_theta_half_index(kHalfPi), 89);    // clamped top
    EXPECT_EQ(merl_theta_half_index(-0.1), 0);        // clamped bottom

    EXPECT_EQ(merl_theta_diff_index(0.0), 0);
    EXPECT_EQ(merl_theta_diff_index(kHalfPi * 0.5), 45);
    EXPECT_EQ(merl_theta_diff_index(kHalfPi), 89);

    EXPECT_EQ(merl_phi_diff_index(0.0), 0);
    EXPECT_EQ(merl_phi_diff_index(kPi * 0.5), 90);
    EXPECT_EQ(merl_phi_diff_index(kPi), 179);
}

TEST(MerlLookup, ReciprocalByConstruction) {
    std::mt19937 rng(32u);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    MerlBrdf b;
    b.samples.resize(MerlBrdf::kSampleCount);
    for (auto& s : b.samples) s = 1500.0 * uni(rng);

    for (int i = 0; i < 200; ++i) {
        Direction wi = dir_at(uni(rng) * 1.4, uni(rng) * kTwoPi);
        Direction wo = dir_at(uni(rng) * 1.4, uni(rng) * kTwoPi);
        Rgb ab = merl_lookup(b, wi, wo);
        Rgb ba = merl_lookup(b, wo, wi);
        EXPECT_EQ(ab.r, ba.r);
        EXPECT_EQ(ab.g, ba.g);
        EXPECT_EQ(ab.b, ba.b);
        EXPECT_GE(ab.r, 0.0);
        EXPECT_TRUE(std::isfinite(ab.r));
    }
}

TEST(MerlFileIo, SaveLoadRoundTrip) {
    MerlBrdf b = constant_table(2.5);
    b.samples[12345] = 77.0;
    std::string path = testing::TempDir() + "brdfmeas_merl_roundtrip.binary";
    save_merl(b, path);
    MerlBrdf back = load_merl(path);
    EXPECT_EQ(back.samples[12345], 77.0);
    EXPECT_EQ(back.samples[0], 2.5);
    std::remove(path.c_str());
}

TEST(MerlFileIo, MissingFileIsIoError) {
    EXPECT_THROW(load_merl("/nonexistent/path/material.binary"), IoError);
}
