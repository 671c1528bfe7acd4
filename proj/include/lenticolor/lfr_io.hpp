#pragma once

// LFR binary raster format.
//
// bytes 0-3   magic "LFR1"
// byte  4     dtype code, 0x01 = float32
// byte  5     kind code: 0x01 gray, 0x02 likelihood, 0x03 coeff-tensor
// bytes 6-7   reserved, zero
// bytes 8-11  height, u32 LE
// bytes 12-15 width, u32 LE
// kind 0x03 only: extra u32 LE inner field = 18 (3 channels x 6 weights)
// payload: row-major float32 LE

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <string>

#include "lenticolor/error.hpp"
#include "lenticolor/raster.hpp"

namespace lenticolor {

enum class RasterKind : uint8_t {
    Gray = 0x01,
    Likelihood = 0x02,
    CoeffTensor = 0x03,
};

namespace detail {

inline void put_u32le(std::ostream& os, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline uint32_t get_u32le(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

inline void write_f32le(std::ostream& os, const std::vector<float>& data) {
    // Assumes little-endian host float32; holds on every supported target.
    os.write(reinterpret_cast<const char*>(data.data()),
             static_cast<std::streamsize>(data.size() * sizeof(float)));
}

inline void read_f32le(std::istream& is, std::vector<float>& data) {
    is.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(float)));
}

inline void write_header(std::ostream& os, RasterKind kind, uint32_t h, uint32_t w) {
    os.write("LFR1", 4);
    char dtype = 0x01, k = static_cast<char>(kind), zero[2] = {0, 0};
    os.write(&dtype, 1);
    os.write(&k, 1);
    os.write(zero, 2);
    put_u32le(os, h);
    put_u32le(os, w);
}

inline void check_finite(const std::vector<float>& data) {
    for (float v : data)
        if (!std::isfinite(v))
            throw Error(ErrorCode::NonFiniteValue, "raster contains non-finite value");
}

}  // namespace detail

inline void write_raster(const std::string& path, const GrayRaster& r) {
    detail::check_finite(r.data);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorCode::IoFailure, "cannot open for writing: " + path);
    detail::write_header(os, RasterKind::Gray, r.height, r.width);
    detail::write_f32le(os, r.data);
    if (!os) throw Error(ErrorCode::IoFailure, "write failed: " + path);
}

inline void write_raster(const std::string& path, const LikelihoodMap& r) {
    detail::check_finite(r.data);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorCode::IoFailure, "cannot open for writing: " + path);
    detail::write_header(os, RasterKind::Likelihood, r.height, r.width);
    detail::write_f32le(os, r.data);
    if (!os) throw Error(ErrorCode::IoFailure, "write failed: " + path);
}

inline void write_raster(const std::string& path, const CoeffTensor& t) {
    std::vector<float> payload(t.data.size());
    for (size_t i = 0; i < t.data.size(); ++i) {
        if (!std::isfinite(t.data[i]))
            throw Error(ErrorCode::NonFiniteValue, "coeff tensor contains non-finite value");
        payload[i] = static_cast<float>(t.data[i]);
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorCode::IoFailure, "cannot open for writing: " + path);
    detail::write_header(os, RasterKind::CoeffTensor, t.height, t.width);
    detail::put_u32le(os, CoeffTensor::kInner);
    detail::write_f32le(os, payload);
    if (!os) throw Error(ErrorCode::IoFailure, "write failed: " + path);
}

struct LfrHeader {
    RasterKind kind;
    uint32_t height;
    uint32_t width;
};

namespace detail {

inline LfrHeader read_header(std::istream& is, const std::string& path) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "LFR1", 4) != 0)
        throw Error(ErrorCode::BadMagic, path);
    char dtype, kind, reserved[2];
    is.read(&dtype, 1);
    is.read(&kind, 1);
    is.read(reserved, 2);
    if (dtype != 0x01)
        throw Error(ErrorCode::BadMagic, "unsupported dtype in " + path);
    if (kind < 0x01 || kind > 0x03)
        throw Error(ErrorCode::BadMagic, "unknown kind code in " + path);
    uint32_t h = get_u32le(is);
    uint32_t w = get_u32le(is);
    if (!is) throw Error(ErrorCode::IoFailure, "truncated header: " + path);
    return {static_cast<RasterKind>(kind), h, w};
}

}  // namespace detail

struct ExpectedDims {
    uint32_t height;
    uint32_t width;
};

inline GrayRaster read_gray(const std::string& path,
                            std::optional<ExpectedDims> expect = std::nullopt) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(ErrorCode::IoFailure, "cannot open: " + path);
    LfrHeader hdr = detail::read_header(is, path);
    if (hdr.kind != RasterKind::Gray)
        throw Error(ErrorCode::BadMagic, "not a gray raster: " + path);
    if (expect && (expect->height != hdr.height || expect->width != hdr.width))
        throw Error(ErrorCode::DimensionMismatch, path);
    GrayRaster r(static_cast<int>(hdr.height), static_cast<int>(hdr.width));
    detail::read_f32le(is, r.data);
    if (!is) throw Error(ErrorCode::IoFailure, "truncated payload: " + path);
    validate_range01(r, "gray raster");
    return r;
}

inline LikelihoodMap read_likelihood(const std::string& path,
                                     std::optional<ExpectedDims> expect = std::nullopt) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(ErrorCode::IoFailure, "cannot open: " + path);
    LfrHeader hdr = detail::read_header(is, path);
    if (hdr.kind != RasterKind::Likelihood)
        throw Error(ErrorCode::BadMagic, "not a likelihood map: " + path);
    if (expect && (expect->height != hdr.height || expect->width != hdr.width))
        throw Error(ErrorCode::DimensionMismatch, path);
    LikelihoodMap m(static_cast<int>(hdr.height), static_cast<int>(hdr.width));
    detail::read_f32le(is, m.data);
    if (!is) throw Error(ErrorCode::IoFailure, "truncated payload: " + path);
    validate_range01(m, "likelihood map");
    return m;
}

// Coefficient tensors are validated against the weight simplex: each
// (pixel, channel) group must be non-negative and sum to 1 within 1e-3, then
// is renormalized to sum exactly 1.
inline CoeffTensor read_coeff_tensor(const std::string& path,
                                     std::optional<ExpectedDims> expect = std::nullopt) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(ErrorCode::IoFailure, "cannot open: " + path);
    LfrHeader hdr = detail::read_header(is, path);
    if (hdr.kind != RasterKind::CoeffTensor)
        throw Error(ErrorCode::BadMagic, "not a coeff tensor: " + path);
    uint32_t inner = detail::get_u32le(is);
    if (inner != CoeffTensor::kInner)
        throw Error(ErrorCode::DimensionMismatch, "coeff inner dim != 18: " + path);
    if (expect && (expect->height != hdr.height || expect->width != hdr.width))
        throw Error(ErrorCode::DimensionMismatch, path);
    CoeffTensor t(static_cast<int>(hdr.height), static_cast<int>(hdr.width));
    std::vector<float> payload(t.data.size());
    detail::read_f32le(is, payload);
    if (!is) throw Error(ErrorCode::IoFailure, "truncated payload: " + path);

    for (size_t g = 0; g < payload.size(); g += 6) {
        double sum = 0.0;
        for (int k = 0; k < 6; ++k) {
            float w = payload[g + k];
            if (!std::isfinite(w))
                throw Error(ErrorCode::NonFiniteValue, "coeff tensor weight");
            if (w < 0.0f)
                throw Error(ErrorCode::SimplexViolation, "negative weight");
            sum += w;
        }
        if (sum < 1.0 - 1e-3 || sum > 1.0 + 1e-3)
            throw Error(ErrorCode::SimplexViolation, "weights do not sum to 1");
        for (int k = 0; k < 6; ++k)
            t.data[g + k] = payload[g + k] / sum;
    }
    return t;
}

}  // namespace lenticolor
