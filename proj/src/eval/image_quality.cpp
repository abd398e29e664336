#include "sheetlight/eval/image_quality.hpp"

#include <cmath>
#include <limits>

#include "sheetlight/core/error.hpp"
#include "sheetlight/io/png.hpp"
#include "sheetlight/simd/kernels.hpp"

namespace sheetlight::eval {

namespace {

constexpr double kC1 = (0.01 * 255.0) * (0.01 * 255.0);
constexpr double kC2 = (0.03 * 255.0) * (0.03 * 255.0);

Grid<float> luma(const IqImage& img) {
    Grid<float> out(img.width, img.height);
    auto dst = out.values();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        dst[i] = 0.299f * img.rgb[3 * i] + 0.587f * img.rgb[3 * i + 1] + 0.114f * img.rgb[3 * i + 2];
    }
    return out;
}

Grid<float> multiply(const Grid<float>& a, const Grid<float>& b) {
    Grid<float> out(a.width(), a.height());
    auto pa = a.values(), pb = b.values();
    auto dst = out.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = pa[i] * pb[i];
    return out;
}

void require_same(const IqImage& a, const IqImage& b) {
    if (a.width != b.width || a.height != b.height) {
        throw InvalidParameter("image sizes differ: " + std::to_string(a.width) + "x" + std::to_string(a.height) +
                               " vs " + std::to_string(b.width) + "x" + std::to_string(b.height));
    }
    if (a.rgb.size() != std::size_t(a.width) * std::size_t(a.height) * 3 || b.rgb.size() != a.rgb.size()) {
        throw InvalidParameter("image buffer does not match its dimensions");
    }
}

}  // namespace

IqImage to_iq_image(const RgbImage& image) {
    IqImage out{image.width(), image.height(), {}};
    out.rgb.reserve(image.values().size());
    for (float v : image.values()) out.rgb.push_back(float(double(v) * 255.0));
    return out;
}

IqImage load_iq_image(const std::string& path) {
    const io::PngSamples png = io::read_png(path);
    IqImage out{png.width, png.height, {}};
    out.rgb.resize(std::size_t(png.width) * std::size_t(png.height) * 3);
    const bool color = png.channels >= 3;
    const double scale = png.bit_depth == 16 ? 255.0 / 65535.0 : 1.0;
    for (int y = 0; y < png.height; ++y) {
        for (int x = 0; x < png.width; ++x) {
            const std::size_t o = (std::size_t(y) * std::size_t(png.width) + std::size_t(x)) * 3;
            for (int c = 0; c < 3; ++c) out.rgb[o + std::size_t(c)] = float(png.at(x, y, color ? c : 0) * scale);
        }
    }
    return out;
}

Grid<float> gaussian_blur(const Grid<float>& in, int radius, double sigma) {
    if (radius < 0 || !(sigma > 0.0)) throw InvalidParameter("blur radius must be >= 0 and sigma > 0");
    const int w = in.width(), h = in.height();
    std::vector<float> taps(std::size_t(2 * radius + 1));
    for (int d = -radius; d <= radius; ++d) taps[std::size_t(d + radius)] = float(std::exp(-d * d / (2.0 * sigma * sigma)));

    // Weight mass inside the image per column and per row; the window is
    // renormalised by their product.
    auto mass = [&](int n) {
        std::vector<float> m(std::size_t(n), 0.0f);
        for (int i = 0; i < n; ++i) {
            for (int d = -radius; d <= radius; ++d) {
                if (i + d >= 0 && i + d < n) m[std::size_t(i)] += taps[std::size_t(d + radius)];
            }
        }
        return m;
    };
    const std::vector<float> mx = mass(w), my = mass(h);

    Grid<float> tmp(w, h, 0.0f);
    for (int y = 0; y < h; ++y) {
        const auto src = in.row(y);
        auto dst = tmp.row(y);
        for (int d = -radius; d <= radius; ++d) {
            const int x0 = std::max(0, -d), x1 = std::min(w, w - d);
            if (x1 <= x0) continue;
            simd::axpy(taps[std::size_t(d + radius)], src.subspan(std::size_t(x0 + d), std::size_t(x1 - x0)),
                       dst.subspan(std::size_t(x0), std::size_t(x1 - x0)));
        }
    }
    Grid<float> out(w, h, 0.0f);
    for (int y = 0; y < h; ++y) {
        auto dst = out.row(y);
        for (int d = -radius; d <= radius; ++d) {
            if (y + d < 0 || y + d >= h) continue;
            simd::axpy(taps[std::size_t(d + radius)], tmp.row(y + d), dst);
        }
        for (int x = 0; x < w; ++x) dst[std::size_t(x)] /= mx[std::size_t(x)] * my[std::size_t(y)];
    }
    return out;
}

double ssim(const Grid<float>& a, const Grid<float>& b) {
    if (!a.same_shape(b)) throw InvalidParameter("SSIM inputs differ in size");
    if (a.empty()) throw InvalidParameter("SSIM of an empty image");
    const Grid<float> mu_a = gaussian_blur(a), mu_b = gaussian_blur(b);
    const Grid<float> aa = gaussian_blur(multiply(a, a)), bb = gaussian_blur(multiply(b, b));
    const Grid<float> ab = gaussian_blur(multiply(a, b));
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double ma = mu_a.values()[i], mb = mu_b.values()[i];
        const double va = double(aa.values()[i]) - ma * ma;
        const double vb = double(bb.values()[i]) - mb * mb;
        const double cov = double(ab.values()[i]) - ma * mb;
        sum += ((2.0 * ma * mb + kC1) * (2.0 * cov + kC2)) / ((ma * ma + mb * mb + kC1) * (va + vb + kC2));
    }
    return sum / double(a.size());
}

IqReport image_quality(const IqImage& ref, const IqImage& test) {
    require_same(ref, test);
    if (ref.rgb.empty()) throw InvalidParameter("image quality of an empty image");
    IqReport r;
    r.rmse = std::sqrt(simd::sum_squared_diff(ref.rgb, test.rgb) / double(ref.rgb.size()));
    r.psnr = r.rmse > 0.0 ? 20.0 * std::log10(255.0 / r.rmse) : std::numeric_limits<double>::infinity();
    r.ssim = ssim(luma(ref), luma(test));
    return r;
}

IqReport image_quality(const RgbImage& ref, const RgbImage& test) {
    return image_quality(to_iq_image(ref), to_iq_image(test));
}

}  // namespace sheetlight::eval
