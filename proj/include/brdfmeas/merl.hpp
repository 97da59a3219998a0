// brdfmeas is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "brdfmeas/core.hpp"
#include "brdfmeas/geom.hpp"

namespace brdfmeas {

static_assert(std::endian::native == std::endian::little,
              "MERL binary I/O assumes a little-endian host");

/// Dense isotropic tabulated BRDF in the half/diff parameterization used by
/// the MERL dataset: 90 x 90 x 180 cells, three channels stored
/// channel-major (all red, then green, then blue), raw (unscaled) doubles.
struct MerlBrdf {
    static constexpr int kNThetaH = 90;
    static constexpr int kNThetaD = 90;
    static constexpr int kNPhiD = 180;
    static constexpr size_t kCellsPerChannel =
        size_t(kNThetaH) * kNThetaD * kNPhiD;                       // 1,458,000
    static constexpr size_t kSampleCount = 3 * kCellsPerChannel;    // 4,374,000
    static constexpr size_t kFileBytes = 12 + 8 * kSampleCount;     // 34,992,012

    std::vector<double> samples;
};

// Per-channel scales applied at lookup time only; raw storage keeps the
// dataset's native values so that parse/write round-trips are bit-exact.
inline constexpr double kMerlScale[3] = {1.0 / 1500.0, 1.15 / 1500.0, 1.66 / 1500.0};

/// Cell index of theta_h under the square-root-compressed mapping.
inline int merl_theta_half_index(double theta_h) {
    int i = int(std::sqrt(std::max(0.0, theta_h / kHalfPi)) * MerlBrdf::kNThetaH);
    return std::clamp(i, 0, MerlBrdf::kNThetaH - 1);
}

inline int merl_theta_diff_index(double theta_d) {
    int i = int(theta_d / kHalfPi * MerlBrdf::kNThetaD);
    return std::clamp(i, 0, MerlBrdf::kNThetaD - 1);
}

inline int merl_phi_diff_index(double phi_d) {
    int i = int(phi_d / kPi * MerlBrdf::kNPhiD);
    return std::clamp(i, 0, MerlBrdf::kNPhiD - 1);
}

/// Flat index of a cell within one channel block (phi_d minor, theta_h major).
inline size_t merl_cell_index(int i_theta_h, int i_theta_d, int i_phi_d) {
    return (size_t(i_theta_h) * MerlBrdf::kNThetaD + size_t(i_theta_d)) * MerlBrdf::kNPhiD +
           size_t(i_phi_d);
}

inline MerlBrdf parse_merl(std::span<const uint8_t> bytes) {
    if (bytes.size() != MerlBrdf::kFileBytes)
        throw FormatError("MERL size mismatch: expected " +
                          std::to_string(MerlBrdf::kFileBytes) + " bytes, got " +
                          std::to_string(bytes.size()));
    int32_t dims[3];
    std::memcpy(dims, bytes.data(), 12);
    if (dims[0] != MerlBrdf::kNThetaH || dims[1] != MerlBrdf::kNThetaD ||
        dims[2] != MerlBrdf::kNPhiD)
        throw FormatError("MERL header mismatch: expected dimensions (90, 90, 180), got (" +
                          std::to_string(dims[0]) + ", " + std::to_string(dims[1]) + ", " +
                          std::to_string(dims[2]) + ")");
    MerlBrdf b;
    b.samples.resize(MerlBrdf::kSampleCount);
    std::memcpy(b.samples.data(), bytes.data() + 12, 8 * MerlBrdf::kSampleCount);
    return b;
}

inline std::vector<uint8_t> write_merl(const MerlBrdf& b) {
    std::vector<uint8_t> bytes(MerlBrdf::kFileBytes);
    const int32_t dims[3] = {MerlBrdf::kNThetaH, MerlBrdf::kNThetaD, MerlBrdf::kNPhiD};
    std::memcpy(bytes.data(), dims, 12);
    std::memcpy(bytes.data() + 12, b.samples.data(), 8 * MerlBrdf::kSampleCount);
    return bytes;
}

inline MerlBrdf load_merl(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open MERL file: " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                               std::istreambuf_iterator<char>());
    if (f.bad()) throw IoError("read failure on MERL file: " + path);
    return parse_merl(bytes);
}

inline void save_merl(const MerlBrdf& b, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path);
    auto bytes = write_merl(b);
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("write failure: " + path);
}

/// Nearest-cell lookup with per-channel scales; negative stored entries mark
/// invalid cells and clamp to 0.
inline Rgb merl_lookup(const MerlBrdf& b, const Direction& wi, const Direction& wo) {
    HalfDiffCoords hd = dir_to_half_diff(wi, wo);
    size_t idx = merl_cell_index(merl_theta_half_index(hd.theta_h),
                                 merl_theta_diff_index(hd.theta_d),
                                 merl_phi_diff_index(hd.phi_d));
    const size_t n = MerlBrdf::kCellsPerChannel;
    return {std::max(0.0, b.samples[idx] * kMerlScale[0]),
            std::max(0.0, b.samples[idx + n] * kMerlScale[1]),
            std::max(0.0, b.samples[idx + 2 * n] * kMerlScale[2])};
}

}  // namespace brdfmeas
