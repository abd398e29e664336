#pragma once

#include <string>
#include <vector>

#include "sheetlight/core/image.hpp"

namespace sheetlight::eval {

/// Interleaved RGB on the 0..255 scale. 8-bit inputs hold exact integers,
/// so differences carry no rounding error.
struct IqImage {
    int width = 0;
    int height = 0;
    std::vector<float> rgb;
};

/// Scales [0, 1] channels by 255 without quantizing.
IqImage to_iq_image(const RgbImage& image);

/// Loads an 8- or 16-bit PNG; gray is replicated and alpha dropped.
IqImage load_iq_image(const std::string& path);

struct IqReport {
    double rmse = 0.0;  // 0..255 scale
    double psnr = 0.0;  // dB; +infinity for identical images
    double ssim = 1.0;
};

/// RMSE over all channels, PSNR = 20 log10(255 / RMSE), and the mean SSIM
/// over all pixels of the luma channel (0.299 R + 0.587 G + 0.114 B) with an
/// 11x11 Gaussian window, sigma 1.5, renormalised where it leaves the image.
IqReport image_quality(const IqImage& ref, const IqImage& test);
IqReport image_quality(const RgbImage& ref, const RgbImage& test);

/// Mean SSIM of two single-channel 0..255 images.
double ssim(const Grid<float>& a, const Grid<float>& b);

/// Normalised Gaussian blur used by ssim().
Grid<float> gaussian_blur(const Grid<float>& in, int radius = 5, double sigma = 1.5);

}  // namespace sheetlight::eval
