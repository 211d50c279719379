#include "pedscan/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pedscan {

long long intersection_area(const Rect& a, const Rect& b)
{
    const long long w = std::min(a.right(), b.right()) - std::max(a.x, b.x);
    const long long h = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
    return (w > 0 && h > 0) ? w * h : 0;
}

GrayImage::GrayImage(int width, int height, std::uint8_t fill)
    : width_(width), height_(height)
{
    if (width < 0 || height < 0) throw std::invalid_argument("negative image dimensions");
    data_.assign(static_cast<std::size_t>(width) * height, fill);
}

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data))
{
    if (width < 0 || height < 0) throw std::invalid_argument("negative image dimensions");
    if (data_.size() != static_cast<std::size_t>(width) * height) {
        throw std::invalid_argument("image buffer holds " + std::to_string(data_.size()) +
                                    " pixels, expected " + std::to_string(width) + "x" +
                                    std::to_string(height));
    }
}

bool GrayImage::contains(const Rect& r) const
{
    return r.w >= 1 && r.h >= 1 && r.x >= 0 && r.y >= 0 && r.right() <= width_ &&
           r.bottom() <= height_;
}

GrayImage to_grayscale(int width, int height, std::span<const std::uint8_t> rgb)
{
    if (width < 0 || height < 0 || rgb.size() != static_cast<std::size_t>(width) * height * 3) {
        throw std::invalid_argument("RGB buffer size does not match declared dimensions");
    }
    std::vector<std::uint8_t> out(static_cast<std::size_t>(width) * height);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double luma = 0.299 * rgb[3 * i] + 0.587 * rgb[3 * i + 1] + 0.114 * rgb[3 * i + 2];
        out[i] = static_cast<std::uint8_t>(std::clamp(std::lround(luma), 0L, 255L));
    }
    return GrayImage(width, height, std::move(out));
}

namespace {

struct Tap {
    int lo;
    int hi;
    double frac;
};

// Corner-aligned source coordinates: output 0 maps to source 0, output n-1 to source m-1.
std::vector<Tap> make_taps(int src, int dst)
{
    std::vector<Tap> taps(static_cast<std::size_t>(dst));
    const double ratio = dst > 1 ? static_cast<double>(src - 1) / (dst - 1) : 0.0;
    for (int i = 0; i < dst; ++i) {
        const double pos = i * ratio;
        int lo = static_cast<int>(std::floor(pos));
        lo = std::clamp(lo, 0, src - 1);
        const int hi = std::min(lo + 1, src - 1);
        taps[static_cast<std::size_t>(i)] = {lo, hi, pos - lo};
    }
    return taps;
}

}  // namespace

GrayImage resize(const GrayImage& img, int out_w, int out_h)
{
    if (img.empty()) throw std::invalid_argument("resize of an empty image");
    if (out_w < 1 || out_h < 1) throw std::invalid_argument("resize target must be at least 1x1");
    if (out_w == img.width() && out_h == img.height()) return img;

    const auto xs = make_taps(img.width(), out_w);
    const auto ys = make_taps(img.height(), out_h);
    std::vector<std::uint8_t> out(static_cast<std::size_t>(out_w) * out_h);
    for (int y = 0; y < out_h; ++y) {
        const auto& ty = ys[static_cast<std::size_t>(y)];
        const auto top = img.row(ty.lo);
        const auto bot = img.row(ty.hi);
        for (int x = 0; x < out_w; ++x) {
            const auto& tx = xs[static_cast<std::size_t>(x)];
            const double upper = top[tx.lo] + (top[tx.hi] - top[tx.lo]) * tx.frac;
            const double lower = bot[tx.lo] + (bot[tx.hi] - bot[tx.lo]) * tx.frac;
            const double v = upper + (lower - upper) * ty.frac;
            out[static_cast<std::size_t>(y) * out_w + x] =
                static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
        }
    }
    return GrayImage(out_w, out_h, std::move(out));
}

GrayImage crop(const GrayImage& img, const Rect& r)
{
    if (!img.contains(r)) throw std::out_of_range("crop rect outside image");
    std::vector<std::uint8_t> out;
    out.reserve(static_cast<std::size_t>(r.area()));
    for (int y = r.y; y < r.bottom(); ++y) {
        const auto row = img.row(y).subspan(static_cast<std::size_t>(r.x), static_cast<std::size_t>(r.w));
        out.insert(out.end(), row.begin(), row.end());
    }
    return GrayImage(r.w, r.h, std::move(out));
}

IntegralImage::IntegralImage(const GrayImage& img)
    : width_(img.width() + 1), height_(img.height() + 1)
{
    sums_.assign(static_cast<std::size_t>(width_) * height_, 0);
    for (int y = 0; y < img.height(); ++y) {
        const auto src = img.row(y);
        const std::int64_t* above = sums_.data() + static_cast<std::size_t>(y) * width_;
        std::int64_t* cur = sums_.data() + static_cast<std::size_t>(y + 1) * width_;
        std::int64_t running = 0;
        for (int x = 0; x < img.width(); ++x) {
            running += src[static_cast<std::size_t>(x)];
            cur[x + 1] = above[x + 1] + running;
        }
    }
}

std::int64_t IntegralImage::rect_sum(const Rect& r) const
{
    if (r.w < 1 || r.h < 1 || r.x < 0 || r.y < 0 || r.right() > width_ - 1 ||
        r.bottom() > height_ - 1) {
        throw std::out_of_range("rect outside integral image source bounds");
    }
    return rect_sum_unchecked(r.x, r.y, r.w, r.h);
}

}  // namespace pedscan
