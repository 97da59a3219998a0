// brdfmeas is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <png.h>

#include "brdfmeas/core.hpp"

namespace brdfmeas {

/// Linear-light HDR RGB raster, row-major from the top-left corner.
/// Channels are float32, the precision of the PFM interchange format.
struct ImageBuffer {
    int width = 0, height = 0;
    std::vector<float> data;  // 3 floats per pixel

    ImageBuffer() = default;
    ImageBuffer(int w, int h)
        : width(w), height(h), data(size_t(w) * size_t(h) * 3, 0.0f) {}

    size_t offset(int x, int y) const { return (size_t(y) * size_t(width) + size_t(x)) * 3; }

    Rgb pixel(int x, int y) const {
        size_t o = offset(x, y);
        return {data[o], data[o + 1], data[o + 2]};
    }

    void set_pixel(int x, int y, const Rgb& c) {
        size_t o = offset(x, y);
        data[o] = float(c.r);
        data[o + 1] = float(c.g);
        data[o + 2] = float(c.b);
    }
};

namespace detail {

inline void require_same_dims(const ImageBuffer& a, const ImageBuffer& b, const char* what) {
    if (a.width != b.width || a.height != b.height)
        throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

}  // namespace detail

/// Root mean squared channel difference on linear values.
inline double rmse(const ImageBuffer& a, const ImageBuffer& b) {
    detail::require_same_dims(a, b, "rmse");
    double acc = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        double d = double(a.data[i]) - double(b.data[i]);
        acc += d * d;
    }
    return std::sqrt(acc / double(a.data.size()));
}

/// Peak signal-to-noise ratio in dB, computed on copies clamped to [0, 1]
/// (peak = 1). Identical images return the 99 dB cap.
inline double psnr(const ImageBuffer& a, const ImageBuffer& b) {
    detail::require_same_dims(a, b, "psnr");
    double acc = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        double d = std::clamp(double(a.data[i]), 0.0, 1.0) -
                   std::clamp(double(b.data[i]), 0.0, 1.0);
        acc += d * d;
    }
    double r = std::sqrt(acc / double(a.data.size()));
    if (r <= 0.0) return 99.0;
    return std::min(99.0, 20.0 * std::log10(1.0 / r));
}

// ---------------------------------------------------------------------------
// PFM: the lossless HDR interchange format. Color "PF" maps only,
// little-endian (scale -1.0), rows stored bottom-to-top.
// ---------------------------------------------------------------------------

inline void write_pfm(const ImageBuffer& img, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << "PF\n" << img.width << " " << img.height << "\n-1.0\n";
    for (int y = img.height - 1; y >= 0; --y)
        f.write(reinterpret_cast<const char*>(&img.data[img.offset(0, y)]),
                std::streamsize(size_t(img.width) * 3 * sizeof(float)));
    if (!f) throw IoError("write failure: " + path);
}

inline ImageBuffer read_pfm(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open PFM file: " + path);

    std::string magic;
    int w = 0, h = 0;
    double scale = 0.0;
    f >> magic >> w >> h >> scale;
    if (!f || magic != "PF")
        throw FormatError("malformed PFM header (expected color 'PF' map): " + path);
    if (w <= 0 || h <= 0) throw FormatError("malformed PFM dimensions: " + path);
    if (scale >= 0.0) throw FormatError("big-endian PFM is not supported: " + path);
    f.get();  // the single whitespace byte terminating the header

    ImageBuffer img(w, h);
    for (int y = h - 1; y >= 0; --y) {
        f.read(reinterpret_cast<char*>(&img.data[img.offset(0, y)]),
               std::streamsize(size_t(w) * 3 * sizeof(float)));
        if (!f) throw FormatError("truncated PFM data: " + path);
    }
    return img;
}

// ---------------------------------------------------------------------------
// PNG: 8-bit preview path. Clamp to [0,1], gamma 2.2 transfer, quantize.
// ---------------------------------------------------------------------------

/// Transfer applied per channel when quantizing for PNG output.
inline uint8_t encode_gamma_byte(double v) {
    v = std::clamp(v, 0.0, 1.0);
    return uint8_t(std::lround(255.0 * std::pow(v, 1.0 / 2.2)));
}

inline void write_png(const ImageBuffer& img, const std::string& path) {
    std::vector<uint8_t> rows(size_t(img.width) * size_t(img.height) * 3);
    for (size_t i = 0; i < img.data.size(); ++i)
        rows[i] = encode_gamma_byte(double(img.data[i]));

    FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw IoError("cannot open for writing: " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info || setjmp(png_jmpbuf(png))) {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        std::fclose(fp);
        throw IoError("PNG write failure: " + path);
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, png_uint_32(img.width), png_uint_32(img.height), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < img.height; ++y)
        png_write_row(png, rows.data() + size_t(y) * size_t(img.width) * 3);
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

}  // namespace brdfmeas
