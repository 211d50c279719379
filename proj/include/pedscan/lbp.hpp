#pragma once

#include "pedscan/image.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace pedscan {

/// Batch geometry for LBP. Each of the nine neighborhood elements is the sum of
/// a batch_w x batch_h pixel rectangle; neighborhoods are placed every `stride`
/// pixels (stride 1 = dense map, stride == batch edge = non-overlapping tiling).
struct LbpConfig {
    int batch_w = 2;
    int batch_h = 2;
    int stride = 1;

    void validate() const;
};

/// One 8-bit code per neighborhood position. Position (gx, gy) is the
/// neighborhood whose top-left pixel is (gx * stride, gy * stride).
struct LbpCodeMap {
    int grid_w = 0;
    int grid_h = 0;
    std::vector<std::uint8_t> codes;

    [[nodiscard]] std::uint8_t at(int gx, int gy) const
    {
        return codes[static_cast<std::size_t>(gy) * grid_w + gx];
    }

    friend bool operator==(const LbpCodeMap&, const LbpCodeMap&) = default;
};

/// Elementary-operation tallies used to check the cost model of the batch strategy.
/// `integral_cells` counts pixels folded into an integral image (one per pixel),
/// `pixel_adds` counts explicit additions when summing batches pixel by pixel,
/// `comparisons` counts neighbor-vs-center tests, and `rect_sums` counts O(1)
/// integral-image rectangle lookups.
struct LbpOpCount {
    std::uint64_t integral_cells = 0;
    std::uint64_t pixel_adds = 0;
    std::uint64_t comparisons = 0;
    std::uint64_t rect_sums = 0;

    /// Cost in the model where an integral pass is one op per pixel and each
    /// comparison or explicit add is one op.
    [[nodiscard]] std::uint64_t cost() const { return integral_cells + pixel_adds + comparisons; }
};

/// Bit k is set iff neighbor k is strictly greater than the center. Neighbor
/// order is TL, T, TR, R, BR, B, BL, L with TL in the most significant bit.
std::uint8_t lbp_code(std::span<const std::int64_t, 8> neighbor_sums, std::int64_t center_sum);

/// Grid dimensions of the code map for an image of the given size.
/// Throws std::invalid_argument when the image cannot host one neighborhood.
std::pair<int, int> lbp_grid_size(int img_w, int img_h, const LbpConfig& cfg);

/// Builds one integral image and reads every batch sum from it.
LbpCodeMap lbp_map_integral(const GrayImage& img, const LbpConfig& cfg, LbpOpCount* ops = nullptr);

/// Reference path: every batch sum is an explicit pixel loop.
LbpCodeMap lbp_map_direct(const GrayImage& img, const LbpConfig& cfg, LbpOpCount* ops = nullptr);

/// Classic single-pixel LBP at every pixel with replicate-border padding
/// (output is width x height). The original per-pixel strategy.
LbpCodeMap lbp_map_pixelwise(const GrayImage& img, LbpOpCount* ops = nullptr);

/// A batch-LBP feature inside a detection window: neighborhood top-left (x, y)
/// with square batches of edge `scale`.
struct LbpFeatureId {
    int x = 0;
    int y = 0;
    int scale = 2;

    friend bool operator==(const LbpFeatureId&, const LbpFeatureId&) = default;
};

/// Every feature whose 3x3 batch neighborhood fits in the window, ordered by (scale, y, x).
std::vector<LbpFeatureId> feature_pool(int window_w, int window_h, std::span<const int> scales);

/// Code of `feature` for the window whose top-left is (ox, oy) in the integral image's source.
inline std::uint8_t feature_code(const IntegralImage& ii, int ox, int oy, const LbpFeatureId& f)
{
    // 4x4 lattice of integral samples shared by the nine batches.
    const int s = f.scale;
    const int x0 = ox + f.x;
    const int y0 = oy + f.y;
    std::array<std::int64_t, 16> p{};
    for (int j = 0; j < 4; ++j) {
        for (int i = 0; i < 4; ++i) p[static_cast<std::size_t>(j * 4 + i)] = ii.at(y0 + j * s, x0 + i * s);
    }
    auto batch = [&](int bx, int by) {
        const auto k = static_cast<std::size_t>(by * 4 + bx);
        return p[k + 5] - p[k + 4] - p[k + 1] + p[k];
    };
    const std::int64_t c = batch(1, 1);
    std::uint8_t code = 0;
    code |= static_cast<std::uint8_t>((batch(0, 0) > c) << 7);
    code |= static_cast<std::uint8_t>((batch(1, 0) > c) << 6);
    code |= static_cast<std::uint8_t>((batch(2, 0) > c) << 5);
    code |= static_cast<std::uint8_t>((batch(2, 1) > c) << 4);
    code |= static_cast<std::uint8_t>((batch(2, 2) > c) << 3);
    code |= static_cast<std::uint8_t>((batch(1, 2) > c) << 2);
    code |= static_cast<std::uint8_t>((batch(0, 2) > c) << 1);
    code |= static_cast<std::uint8_t>(batch(0, 1) > c);
    return code;
}

}  // namespace pedscan
