#include "pedscan/lbp.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace pedscan {

namespace {

// Batch offsets (in batch units) in TL, T, TR, R, BR, B, BL, L order.
constexpr std::array<std::array<int, 2>, 8> kNeighbors{{
    {0, 0}, {1, 0}, {2, 0}, {2, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1},
}};

template <typename BatchSum>
LbpCodeMap build_map(int grid_w, int grid_h, const LbpConfig& cfg, BatchSum&& batch_sum, LbpOpCount* ops)
{
    LbpCodeMap map{grid_w, grid_h, std::vector<std::uint8_t>(static_cast<std::size_t>(grid_w) * grid_h)};
    std::array<std::int64_t, 8> neighbors{};
    for (int gy = 0; gy < grid_h; ++gy) {
        for (int gx = 0; gx < grid_w; ++gx) {
            const int x0 = gx * cfg.stride;
            const int y0 = gy * cfg.stride;
            for (std::size_t k = 0; k < 8; ++k) {
                neighbors[k] = batch_sum(x0 + kNeighbors[k][0] * cfg.batch_w, y0 + kNeighbors[k][1] * cfg.batch_h);
            }
            const std::int64_t center = batch_sum(x0 + cfg.batch_w, y0 + cfg.batch_h);
            map.codes[static_cast<std::size_t>(gy) * grid_w + gx] = lbp_code(neighbors, center);
        }
    }
    if (ops) ops->comparisons += 8ULL * map.codes.size();
    return map;
}

}  // namespace

void LbpConfig::validate() const
{
    if (batch_w < 1 || batch_h < 1) throw std::invalid_argument("LBP batch dimensions must be >= 1");
    if (stride < 1) throw std::invalid_argument("LBP stride must be >= 1");
}

std::uint8_t lbp_code(std::span<const std::int64_t, 8> neighbor_sums, std::int64_t center_sum)
{
    std::uint8_t code = 0;
    for (std::size_t k = 0; k < 8; ++k) {
        code = static_cast<std::uint8_t>((code << 1) | (neighbor_sums[k] > center_sum ? 1 : 0));
    }
    return code;
}

std::pair<int, int> lbp_grid_size(int img_w, int img_h, const LbpConfig& cfg)
{
    cfg.validate();
    const int span_w = 3 * cfg.batch_w;
    const int span_h = 3 * cfg.batch_h;
    if (img_w < span_w || img_h < span_h) {
        throw std::invalid_argument("image " + std::to_string(img_w) + "x" + std::to_string(img_h) +
                                    " smaller than one LBP neighborhood " + std::to_string(span_w) + "x" +
                                    std::to_string(span_h));
    }
    return {(img_w - span_w) / cfg.stride + 1, (img_h - span_h) / cfg.stride + 1};
}

LbpCodeMap lbp_map_integral(const GrayImage& img, const LbpConfig& cfg, LbpOpCount* ops)
{
    const auto [grid_w, grid_h] = lbp_grid_size(img.width(), img.height(), cfg);
    const IntegralImage ii(img);
    if (ops) ops->integral_cells += img.size();
    auto map = build_map(
        grid_w, grid_h, cfg,
        [&](int x, int y) { return ii.rect_sum_unchecked(x, y, cfg.batch_w, cfg.batch_h); }, ops);
    if (ops) ops->rect_sums += 9ULL * map.codes.size();
    return map;
}

LbpCodeMap lbp_map_direct(const GrayImage& img, const LbpConfig& cfg, LbpOpCount* ops)
{
    const auto [grid_w, grid_h] = lbp_grid_size(img.width(), img.height(), cfg);
    auto map = build_map(
        grid_w, grid_h, cfg,
        [&](int x, int y) {
            std::int64_t sum = 0;
            for (int yy = y; yy < y + cfg.batch_h; ++yy) {
                for (int xx = x; xx < x + cfg.batch_w; ++xx) sum += img.at(xx, yy);
            }
            return sum;
        },
        ops);
    if (ops) ops->pixel_adds += 9ULL * map.codes.size() * static_cast<std::uint64_t>(cfg.batch_w * cfg.batch_h - 1);
    return map;
}

LbpCodeMap lbp_map_pixelwise(const GrayImage& img, LbpOpCount* ops)
{
    if (img.empty()) throw std::invalid_argument("pixelwise LBP of an empty image");
    const int w = img.width();
    const int h = img.height();
    LbpCodeMap map{w, h, std::vector<std::uint8_t>(img.size())};
    std::array<std::int64_t, 8> neighbors{};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (std::size_t k = 0; k < 8; ++k) {
                const int nx = std::clamp(x + kNeighbors[k][0] - 1, 0, w - 1);
                const int ny = std::clamp(y + kNeighbors[k][1] - 1, 0, h - 1);
                neighbors[k] = img.at(nx, ny);
            }
            map.codes[static_cast<std::size_t>(y) * w + x] = lbp_code(neighbors, img.at(x, y));
        }
    }
    if (ops) ops->comparisons += 8ULL * map.codes.size();
    return map;
}

std::vector<LbpFeatureId> feature_pool(int window_w, int window_h, std::span<const int> scales)
{
    std::vector<int> ordered(scales.begin(), scales.end());
    std::sort(ordered.begin(), ordered.end());
    ordered.erase(std::unique(ordered.begin(), ordered.end()), ordered.end());

    std::vector<LbpFeatureId> pool;
    for (const int s : ordered) {
        if (s < 1) throw std::invalid_argument("LBP feature scale must be >= 1");
        for (int y = 0; y + 3 * s <= window_h; ++y) {
            for (int x = 0; x + 3 * s <= window_w; ++x) pool.push_back({x, y, s});
        }
    }
    return pool;
}

}  // namespace pedscan
