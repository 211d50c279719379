#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace pedscan {

/// Axis-aligned rectangle, top-left origin, half-open extent [x, x+w) x [y, y+h).
struct Rect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    [[nodiscard]] long long area() const { return static_cast<long long>(w) * h; }
    [[nodiscard]] int right() const { return x + w; }
    [[nodiscard]] int bottom() const { return y + h; }

    friend bool operator==(const Rect&, const Rect&) = default;
};

/// Area of the intersection of two rects (0 when disjoint).
long long intersection_area(const Rect& a, const Rect& b);

/// 8-bit single-channel raster, row-major.
class GrayImage {
public:
    GrayImage() = default;
    GrayImage(int width, int height, std::uint8_t fill = 0);
    /// Takes ownership of `data`; throws std::invalid_argument if its length is not width*height.
    GrayImage(int width, int height, std::vector<std::uint8_t> data);

    [[nodiscard]] int width() const { return width_; }
    [[nodiscard]] int height() const { return height_; }
    [[nodiscard]] bool empty() const { return data_.empty(); }
    [[nodiscard]] std::size_t size() const { return data_.size(); }

    [[nodiscard]] std::uint8_t at(int x, int y) const { return data_[index(x, y)]; }
    std::uint8_t& at(int x, int y) { return data_[index(x, y)]; }

    [[nodiscard]] std::span<const std::uint8_t> row(int y) const
    {
        return {data_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)};
    }
    [[nodiscard]] std::span<const std::uint8_t> pixels() const { return data_; }
    std::span<std::uint8_t> pixels() { return data_; }

    /// True when `r` is non-empty and lies fully inside the image.
    [[nodiscard]] bool contains(const Rect& r) const;

    friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
    [[nodiscard]] std::size_t index(int x, int y) const
    {
        return static_cast<std::size_t>(y) * width_ + x;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

/// Converts an interleaved 8-bit RGB buffer with BT.601 luma weights,
/// rounding to nearest. Throws std::invalid_argument on a size mismatch.
GrayImage to_grayscale(int width, int height, std::span<const std::uint8_t> rgb);

/// Bilinear resize with corner-aligned sampling; aspect ratio is not preserved.
GrayImage resize(const GrayImage& img, int out_w, int out_h);

/// Copies the pixels under `r`; throws std::out_of_range when `r` is not inside `img`.
GrayImage crop(const GrayImage& img, const Rect& r);

/// Exclusive-prefix 2-D sum table of size (w+1) x (h+1) with a zero first row and column.
class IntegralImage {
public:
    IntegralImage() = default;
    explicit IntegralImage(const GrayImage& img);

    /// Dimensions of the table (source width + 1, source height + 1).
    [[nodiscard]] int width() const { return width_; }
    [[nodiscard]] int height() const { return height_; }

    /// Sum over source rows < row and cols < col.
    [[nodiscard]] std::int64_t at(int row, int col) const
    {
        return sums_[static_cast<std::size_t>(row) * width_ + col];
    }

    /// Bounds-checked rectangle sum.
    [[nodiscard]] std::int64_t rect_sum(const Rect& r) const;

    /// Rectangle sum without bounds checks; `r` must lie inside the source image.
    [[nodiscard]] std::int64_t rect_sum_unchecked(int x, int y, int w, int h) const
    {
        const std::int64_t* top = sums_.data() + static_cast<std::size_t>(y) * width_;
        const std::int64_t* bot = top + static_cast<std::size_t>(h) * width_;
        return bot[x + w] - top[x + w] - bot[x] + top[x];
    }

    [[nodiscard]] std::span<const std::int64_t> sums() const { return sums_; }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::int64_t> sums_;
};

inline IntegralImage integral_build(const GrayImage& img) { return IntegralImage(img); }

inline std::int64_t rect_sum(const IntegralImage& ii, const Rect& r) { return ii.rect_sum(r); }

}  // namespace pedscan
