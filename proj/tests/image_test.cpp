// brdfmeas is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#include "brdfmeas/image.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include <png.h>

using namespace brdfmeas;

namespace {

ImageBuffer constant_image(int w, int h, Rgb c) {
    ImageBuffer img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) img.set_pixel(x, y, c);
    return img;
}

ImageBuffer random_image(int w, int h, uint32_t seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 2.0);
    ImageBuffer img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) img.set_pixel(x, y, {uni(rng), uni(rng), uni(rng)});
    return img;
}

std::string temp_path(const char* name) { return testing::TempDir() + name; }

// Minimal libpng-based reader used only to verify the writer.
struct DecodedPng {
    png_uint_32 width = 0, height = 0;
    int bit_depth = 0, color_type = 0;
    std::vector<uint8_t> rows;
};

DecodedPng decode_png(const std::string& path) {
    DecodedPng out;
    FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) throw IoError("cannot open " + path);
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw FormatError("bad png: " + path);
    }
    png_init_io(png, fp);
    png_read_info(png, info);
    out.width = png_get_image_width(png, info);
    out.height = png_get_image_height(png, info);
    out.bit_depth = png_get_bit_depth(png, info);
    out.color_type = png_get_color_type(png, info);
    size_t rowbytes = png_get_rowbytes(png, info);
    out.rows.resize(rowbytes * out.height);
    for (png_uint_32 y = 0; y < out.height; ++y)
        png_read_row(png, out.rows.data() + y * rowbytes, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    return out;
}

}  // namespace

TEST(Rmse, IdenticalAndOffset) {
    ImageBuffer a = random_image(16, 16, 41u);
    EXPECT_DOUBLE_EQ(rmse(a, a), 0.0);

    ImageBuffer b = a;
    for (auto& v : b.data) v += 0.1f;
    EXPECT_NEAR(rmse(a, b), 0.1, 1e-6);
}

TEST(Rmse, DimensionMismatchThrows) {
    ImageBuffer a(8, 8), b(8, 9);
    EXPECT_THROW(rmse(a, b), std::invalid_argument);
    EXPECT_THROW(psnr(a, b), std::invalid_argument);
}

TEST(Rmse, SymmetryAndTriangle) {
    ImageBuffer a = random_image(12, 12, 42u);
    ImageBuffer b = random_image(12, 12, 43u);
    ImageBuffer c = random_image(12, 12, 44u);
    EXPECT_DOUBLE_EQ(rmse(a, b), rmse(b, a));
    EXPECT_LE(rmse(a, c), rmse(a, b) + rmse(b, c) + 1e-12);
}

TEST(Psnr, CapAndClosedForm) {
    ImageBuffer a = constant_image(8, 8, {0.25, 0.5, 0.75});
    EXPECT_DOUBLE_EQ(psnr(a, a), 99.0);

    // constant clamped offset of 0.1 -> rmse 0.1 -> 20 dB
    ImageBuffer b = constant_image(8, 8, {0.35, 0.6, 0.85});
    EXPECT_NEAR(psnr(a, b), 20.0, 1e-5);
}

// Published pairing for red-fabric2: rmse 0.0098 corresponds to 40.17 dB.
TEST(Psnr, MatchesReportedTablePairing) {
    ImageBuffer a = constant_image(32, 32, {0.5, 0.5, 0.5});
    ImageBuffer b = constant_image(32, 32, {0.5098, 0.5098, 0.5098});
    double r = rmse(a, b);
    EXPECT_NEAR(r, 0.0098, 1e-6);
    EXPECT_NEAR(psnr(a, b), 20.0 * std::log10(1.0 / r), 1e-9);
    EXPECT_NEAR(psnr(a, b), 40.17, 0.2);

    // pink-fabric row magnitude: 0.025 -> 32.04 dB at our arithmetic
    ImageBuffer c = constant_image(32, 32, {0.525, 0.525, 0.525});
    EXPECT_NEAR(psnr(a, c), 32.04, 0.01);
}

TEST(Psnr, ClampsBeforeComparing) {
    // HDR values above 1 are identical after the clamp
    ImageBuffer a = constant_image(4, 4, {5.0, 5.0, 5.0});
    ImageBuffer b = constant_image(4, 4, {9.0, 9.0, 9.0});
    EXPECT_DOUBLE_EQ(psnr(a, b), 99.0);
    EXPECT_GT(rmse(a, b), 0.0);
}

TEST(Pfm, RoundTripBitIdentical) {
    ImageBuffer img = random_image(9, 7, 45u);
    std::string path = temp_path("brdfmeas_roundtrip.pfm");
    write_pfm(img, path);
    ImageBuffer back = read_pfm(path);
    ASSERT_EQ(back.width, img.width);
    ASSERT_EQ(back.height, img.height);
    EXPECT_EQ(std::memcmp(back.data.data(), img.data.data(), img.data.size() * 4), 0);
    std::remove(path.c_str());
}

TEST(Pfm, HeaderErrors) {
    std::string path = temp_path("brdfmeas_bad.pfm");
    {
        std::ofstream f(path, std::ios::binary);
        f << "Pf\n4 4\n-1.0\n";  // grayscale map: unsupported
    }
    EXPECT_THROW(read_pfm(path), FormatError);
    {
        std::ofstream f(path, std::ios::binary);
        f << "PF\n4 4\n1.0\n";  // big-endian scale
    }
    EXPECT_THROW(read_pfm(path), FormatError);
    {
        std::ofstream f(path, std::ios::binary);
        f << "PF\n4 4\n-1.0\n";  // no pixel data
    }
    EXPECT_THROW(read_pfm(path), FormatError);
    std::remove(path.c_str());
    EXPECT_THROW(read_pfm("/nonexistent/image.pfm"), IoError);
}

TEST(GammaTransfer, Endpoints) {
    EXPECT_EQ(encode_gamma_byte(0.0), 0);
    EXPECT_EQ(encode_gamma_byte(1.0), 255);
    EXPECT_EQ(encode_gamma_byte(2.0), 255);   // clamped
    EXPECT_EQ(encode_gamma_byte(-1.0), 0);    // clamped
    EXPECT_EQ(encode_gamma_byte(0.5), uint8_t(std::lround(255.0 * std::pow(0.5, 1.0 / 2.2))));
}

TEST(Png, WritesQuantizedGammaEncodedRgb) {
    ImageBuffer img(3, 2);
    img.set_pixel(0, 0, {0.0, 0.0, 0.0});
    img.set_pixel(1, 0, {1.0, 1.0, 1.0});
    img.set_pixel(2, 0, {0.5, 0.25, 2.0});
    std::string path = temp_path("brdfmeas_test.png");
    write_png(img, path);

    DecodedPng png = decode_png(path);
    EXPECT_EQ(png.width, 3u);
    EXPECT_EQ(png.height, 2u);
    EXPECT_EQ(png.bit_depth, 8);
    EXPECT_EQ(png.color_type, PNG_COLOR_TYPE_RGB);
    EXPECT_EQ(png.rows[0], 0);                       // black
    EXPECT_EQ(png.rows[3], 255);                     // 1.0 -> 255
    EXPECT_EQ(png.rows[6], encode_gamma_byte(0.5));  // gamma-encoded
    EXPECT_EQ(png.rows[8], 255);                     // clamped HDR
    std::remove(path.c_str());
}

TEST(Png, AllZeroImageIsAllBlack) {
    ImageBuffer img(4, 4);
    std::string path = temp_path("brdfmeas_black.png");
    write_png(img, path);
    DecodedPng png = decode_png(path);
    for (uint8_t v : png.rows) EXPECT_EQ(v, 0);
    std::remove(path.c_str());
}
