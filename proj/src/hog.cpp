#include "pedscan/hog.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pedscan {

void HogConfig::validate() const
{
    if (cell < 1 || block_cells < 1 || block_stride < 1 || n_bins < 2 || n_bins > 255) {
        throw std::invalid_argument("invalid HOG cell/block/bin configuration");
    }
    if (window_w % cell != 0 || window_h % cell != 0) {
        throw std::invalid_argument("HOG window must be divisible by the cell size");
    }
    if (block_stride % cell != 0) throw std::invalid_argument("HOG block stride must be a multiple of the cell size");
    if (window_w < block_size() || window_h < block_size() || (window_w - block_size()) % block_stride != 0 ||
        (window_h - block_size()) % block_stride != 0) {
        throw std::invalid_argument("HOG block stride must tile the window");
    }
}

GradientVote gradient_vote(int dx, int dy, int n_bins)
{
    // Unsigned orientation: fold into the upper half-plane before the arctangent
    // so (dx, dy) and (-dx, -dy) produce bit-identical votes.
    if (dy < 0 || (dy == 0 && dx < 0)) {
        dx = -dx;
        dy = -dy;
    }
    const double magnitude = std::sqrt(static_cast<double>(dx) * dx + static_cast<double>(dy) * dy);
    double angle = std::atan2(static_cast<double>(dy), static_cast<double>(dx)) * (180.0 / std::numbers::pi);
    if (angle >= 180.0) angle -= 180.0;

    const double t = angle / (180.0 / n_bins) - 0.5;
    const double base = std::floor(t);
    const double frac = t - base;
    const int bin0 = ((static_cast<int>(base) % n_bins) + n_bins) % n_bins;

    GradientVote v;
    v.bin0 = static_cast<std::uint8_t>(bin0);
    v.bin1 = static_cast<std::uint8_t>((bin0 + 1) % n_bins);
    v.w0 = magnitude * (1.0 - frac);
    v.w1 = magnitude * frac;
    return v;
}

GradientLut::GradientLut(int n_bins) : n_bins_(n_bins)
{
    if (n_bins < 2 || n_bins > 255) throw std::invalid_argument("gradient LUT needs 2..255 bins");
    table_.resize(static_cast<std::size_t>(kSide) * kSide);
    for (int dy = -kRange; dy <= kRange; ++dy) {
        for (int dx = -kRange; dx <= kRange; ++dx) {
            table_[static_cast<std::size_t>(dy + kRange) * kSide + static_cast<std::size_t>(dx + kRange)] =
                gradient_vote(dx, dy, n_bins);
        }
    }
}

GradientLut lut_build(const HogConfig& cfg) { return GradientLut(cfg.n_bins); }

std::pair<int, int> gradients(const GrayImage& img, int x, int y)
{
    const int w = img.width();
    const int h = img.height();
    const int dx = int{img.at(std::min(x + 1, w - 1), y)} - int{img.at(std::max(x - 1, 0), y)};
    const int dy = int{img.at(x, std::min(y + 1, h - 1))} - int{img.at(x, std::max(y - 1, 0))};
    return {dx, dy};
}

namespace {

// Accumulates votes of the pixels in [x0, x0 + cells_x*cell) x [y0, y0 + cells_y*cell)
// into cell histograms, visiting pixels row-major.
template <typename VoteFn>
void accumulate_cells(const GrayImage& img, int x0, int y0, int cells_x, int cells_y, int cell, int n_bins,
                      VoteFn&& vote, std::vector<double>& hist)
{
    hist.assign(static_cast<std::size_t>(cells_x) * cells_y * n_bins, 0.0);
    const int w = img.width();
    const int h = img.height();
    const int x1 = x0 + cells_x * cell;
    const int y1 = y0 + cells_y * cell;
    for (int y = y0; y < y1; ++y) {
        const auto row = img.row(y);
        const auto up = img.row(std::max(y - 1, 0));
        const auto down = img.row(std::min(y + 1, h - 1));
        double* cell_row = hist.data() + static_cast<std::size_t>((y - y0) / cell) * cells_x * n_bins;
        for (int x = x0; x < x1; ++x) {
            const int dx = int{row[static_cast<std::size_t>(std::min(x + 1, w - 1))]} -
                           int{row[static_cast<std::size_t>(std::max(x - 1, 0))]};
            const int dy = int{down[static_cast<std::size_t>(x)]} - int{up[static_cast<std::size_t>(x)]};
            const GradientVote& v = vote(dx, dy);
            double* bins = cell_row + static_cast<std::size_t>((x - x0) / cell) * n_bins;
            bins[v.bin0] += v.w0;
            bins[v.bin1] += v.w1;
        }
    }
}

void gather_block(const std::vector<double>& hist, int cells_x, int n_bins, int block_cells, int cx, int cy,
                  double* out)
{
    for (int by = 0; by < block_cells; ++by) {
        for (int bx = 0; bx < block_cells; ++bx) {
            const double* src = hist.data() + (static_cast<std::size_t>(cy + by) * cells_x + (cx + bx)) * n_bins;
            out = std::copy(src, src + n_bins, out);
        }
    }
}

template <typename VoteFn>
HogDescriptor describe(const GrayImage& img, const Rect& origin, const HogConfig& cfg, VoteFn&& vote)
{
    cfg.validate();
    if (origin.w != cfg.window_w || origin.h != cfg.window_h) {
        throw std::invalid_argument("HOG window rect does not match the configured window size");
    }
    if (!img.contains(origin)) throw std::out_of_range("HOG window outside image");

    const int cells_x = cfg.window_w / cfg.cell;
    const int cells_y = cfg.window_h / cfg.cell;
    std::vector<double> hist;
    accumulate_cells(img, origin.x, origin.y, cells_x, cells_y, cfg.cell, cfg.n_bins, vote, hist);

    HogDescriptor desc(static_cast<std::size_t>(cfg.descriptor_length()));
    const int step_cells = cfg.block_stride / cfg.cell;
    const auto block_len = static_cast<std::size_t>(cfg.block_length());
    double* out = desc.data();
    for (int by = 0; by < cfg.blocks_y(); ++by) {
        for (int bx = 0; bx < cfg.blocks_x(); ++bx) {
            gather_block(hist, cells_x, cfg.n_bins, cfg.block_cells, bx * step_cells, by * step_cells, out);
            normalize_block_l2hys({out, block_len});
            out += block_len;
        }
    }
    return desc;
}

}  // namespace

void normalize_block_l2hys(std::span<double> block)
{
    constexpr double kClip = 0.2;
    double sq = 0.0;
    for (const double v : block) sq += v * v;
    if (sq <= 0.0) {
        std::fill(block.begin(), block.end(), 0.0);
        return;
    }
    double inv = 1.0 / std::sqrt(sq);
    sq = 0.0;
    for (double& v : block) {
        v = std::min(v * inv, kClip);
        sq += v * v;
    }
    inv = 1.0 / std::sqrt(sq);
    for (double& v : block) v *= inv;
}

HogDescriptor window_descriptor(const GrayImage& img, const Rect& origin, const HogConfig& cfg,
                                const GradientLut& lut)
{
    if (lut.n_bins() != cfg.n_bins) throw std::invalid_argument("gradient LUT bin count does not match config");
    return describe(img, origin, cfg, [&](int dx, int dy) -> const GradientVote& { return lut.at(dx, dy); });
}

HogDescriptor window_descriptor_direct(const GrayImage& img, const Rect& origin, const HogConfig& cfg)
{
    GradientVote scratch;
    return describe(img, origin, cfg, [&](int dx, int dy) -> const GradientVote& {
        scratch = gradient_vote(dx, dy, cfg.n_bins);
        return scratch;
    });
}

std::vector<double> window_cell_histograms(const GrayImage& img, const Rect& origin, const HogConfig& cfg,
                                           const GradientLut& lut)
{
    cfg.validate();
    if (!img.contains(origin) || origin.w != cfg.window_w || origin.h != cfg.window_h) {
        throw std::out_of_range("HOG window outside image or of the wrong size");
    }
    std::vector<double> hist;
    accumulate_cells(img, origin.x, origin.y, cfg.window_w / cfg.cell, cfg.window_h / cfg.cell, cfg.cell,
                     cfg.n_bins, [&](int dx, int dy) -> const GradientVote& { return lut.at(dx, dy); }, hist);
    return hist;
}

HogLevelCache::HogLevelCache(const GrayImage& img, const HogConfig& cfg, const GradientLut* lut, int offset_x,
                             int offset_y)
    : cfg_(cfg), offset_x_(offset_x), offset_y_(offset_y)
{
    cfg.validate();
    if (offset_x < 0 || offset_y < 0 || offset_x >= cfg.cell || offset_y >= cfg.cell) {
        throw std::invalid_argument("HOG cache offset must lie within one cell");
    }
    if (lut && lut->n_bins() != cfg.n_bins) throw std::invalid_argument("gradient LUT bin count does not match config");

    cells_x_ = std::max(0, (img.width() - offset_x) / cfg.cell);
    cells_y_ = std::max(0, (img.height() - offset_y) / cfg.cell);
    block_pos_x_ = std::max(0, cells_x_ - cfg.block_cells + 1);
    block_pos_y_ = std::max(0, cells_y_ - cfg.block_cells + 1);
    if (block_pos_x_ == 0 || block_pos_y_ == 0) return;

    std::vector<double> hist;
    if (lut) {
        accumulate_cells(img, offset_x, offset_y, cells_x_, cells_y_, cfg.cell, cfg.n_bins,
                         [&](int dx, int dy) -> const GradientVote& { return lut->at(dx, dy); }, hist);
    } else {
        GradientVote scratch;
        accumulate_cells(img, offset_x, offset_y, cells_x_, cells_y_, cfg.cell, cfg.n_bins,
                         [&](int dx, int dy) -> const GradientVote& {
                             scratch = gradient_vote(dx, dy, cfg.n_bins);
                             return scratch;
                         },
                         hist);
    }

    const auto block_len = static_cast<std::size_t>(cfg.block_length());
    blocks_.resize(static_cast<std::size_t>(block_pos_x_) * block_pos_y_ * block_len);
    double* out = blocks_.data();
    for (int cy = 0; cy < block_pos_y_; ++cy) {
        for (int cx = 0; cx < block_pos_x_; ++cx) {
            gather_block(hist, cells_x_, cfg.n_bins, cfg.block_cells, cx, cy, out);
            normalize_block_l2hys({out, block_len});
            out += block_len;
        }
    }
}

void HogLevelCache::descriptor_at(int x, int y, std::span<double> out) const
{
    if ((x - offset_x_) % cfg_.cell != 0 || (y - offset_y_) % cfg_.cell != 0 || x < offset_x_ || y < offset_y_) {
        throw std::invalid_argument("window origin is not aligned with this HOG cache");
    }
    const int cx0 = (x - offset_x_) / cfg_.cell;
    const int cy0 = (y - offset_y_) / cfg_.cell;
    const int step_cells = cfg_.block_stride / cfg_.cell;
    if (cx0 + (cfg_.blocks_x() - 1) * step_cells >= block_pos_x_ ||
        cy0 + (cfg_.blocks_y() - 1) * step_cells >= block_pos_y_) {
        throw std::out_of_range("HOG window outside cached image");
    }
    if (out.size() != static_cast<std::size_t>(cfg_.descriptor_length())) {
        throw std::invalid_argument("descriptor buffer has the wrong length");
    }
    const auto block_len = static_cast<std::size_t>(cfg_.block_length());
    double* dst = out.data();
    for (int by = 0; by < cfg_.blocks_y(); ++by) {
        for (int bx = 0; bx < cfg_.blocks_x(); ++bx) {
            const auto pos = static_cast<std::size_t>(cy0 + by * step_cells) * block_pos_x_ + (cx0 + bx * step_cells);
            const double* src = blocks_.data() + pos * block_len;
            dst = std::copy(src, src + block_len, dst);
        }
    }
}

}  // namespace pedscan
