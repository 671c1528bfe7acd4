#pragma once

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <string>

#include "lenticolor/error.hpp"
#include "lenticolor/raster.hpp"

namespace lenticolor {

// 8/16-bit integer samples map to [0,1] by division by the type maximum.
inline GrayRaster load_gray(const std::string& path) {
    cv::Mat img = cv::imread(path, cv::IMREAD_ANYDEPTH | cv::IMREAD_GRAYSCALE);
    if (img.empty())
        throw Error(ErrorCode::IoFailure, "cannot decode image: " + path);
    GrayRaster out(img.rows, img.cols);
    double scale = 1.0;
    if (img.depth() == CV_8U) scale = 1.0 / 255.0;
    else if (img.depth() == CV_16U) scale = 1.0 / 65535.0;
    cv::Mat f;
    img.convertTo(f, CV_32F, scale);
    for (int h = 0; h < out.height; ++h)
        for (int w = 0; w < out.width; ++w)
            out.at(h, w) = std::clamp(f.at<float>(h, w), 0.0f, 1.0f);
    return out;
}

inline RGBRaster load_rgb(const std::string& path) {
    cv::Mat img = cv::imread(path, cv::IMREAD_ANYDEPTH | cv::IMREAD_COLOR);
    if (img.empty())
        throw Error(ErrorCode::IoFailure, "cannot decode image: " + path);
    double scale = 1.0;
    if (img.depth() == CV_8U) scale = 1.0 / 255.0;
    else if (img.depth() == CV_16U) scale = 1.0 / 65535.0;
    cv::Mat f;
    img.convertTo(f, CV_32FC3, scale);
    RGBRaster out(f.rows, f.cols);
    for (int h = 0; h < out.height; ++h)
        for (int w = 0; w < out.width; ++w) {
            cv::Vec3f bgr = f.at<cv::Vec3f>(h, w);
            out.at(h, w, 0) = std::clamp(bgr[2], 0.0f, 1.0f);
            out.at(h, w, 1) = std::clamp(bgr[1], 0.0f, 1.0f);
            out.at(h, w, 2) = std::clamp(bgr[0], 0.0f, 1.0f);
        }
    return out;
}

inline void save_gray16(const std::string& path, const GrayRaster& img) {
    cv::Mat m(img.height, img.width, CV_16U);
    for (int h = 0; h < img.height; ++h)
        for (int w = 0; w < img.width; ++w)
            m.at<uint16_t>(h, w) = static_cast<uint16_t>(
                std::lround(std::clamp(img.at(h, w), 0.0f, 1.0f) * 65535.0f));
    if (!cv::imwrite(path, m))
        throw Error(ErrorCode::IoFailure, "cannot write image: " + path);
}

inline void save_rgb16(const std::string& path, const RGBRaster& img) {
    cv::Mat m(img.height, img.width, CV_16UC3);
    for (int h = 0; h < img.height; ++h)
        for (int w = 0; w < img.width; ++w) {
            auto q = [&](int c) {
                return static_cast<uint16_t>(
                    std::lround(std::clamp(img.at(h, w, c), 0.0f, 1.0f) * 65535.0f));
            };
            m.at<cv::Vec3w>(h, w) = cv::Vec3w(q(2), q(1), q(0));  // BGR on disk
        }
    if (!cv::imwrite(path, m))
        throw Error(ErrorCode::IoFailure, "cannot write image: " + path);
}

// Stripe images persist as 16-bit RGB PNG; the validity rule (column mod 3
// plus channel order) reconstructs which channel each column carries.
inline void save_stripe16(const std::string& path, const StripeImage& stripe) {
    RGBRaster rgb(stripe.height, stripe.width);
    rgb.data = stripe.data;
    save_rgb16(path, rgb);
}

inline StripeImage load_stripe16(const std::string& path, int src_height, int src_width,
                                 const std::array<int, 3>& channel_order = {0, 1, 2}) {
    RGBRaster rgb = load_rgb(path);
    StripeImage s(rgb.height, rgb.width);
    s.data = rgb.data;
    s.src_height = src_height;
    s.src_width = src_width;
    s.channel_order = channel_order;
    return s;
}

}  // namespace lenticolor
