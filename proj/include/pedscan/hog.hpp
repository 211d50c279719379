#pragma once

#include "pedscan/image.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace pedscan {

/// Window/cell/block geometry of the HOG descriptor. Orientation bins are
/// unsigned over [0, 180) degrees with centers at (k + 0.5) * 180 / n_bins.
struct HogConfig {
    int window_w = 32;
    int window_h = 64;
    int cell = 8;
    int block_cells = 2;
    int block_stride = 8;
    int n_bins = 9;

    void validate() const;

    [[nodiscard]] int block_size() const { return cell * block_cells; }
    [[nodiscard]] int blocks_x() const { return (window_w - block_size()) / block_stride + 1; }
    [[nodiscard]] int blocks_y() const { return (window_h - block_size()) / block_stride + 1; }
    [[nodiscard]] int block_length() const { return block_cells * block_cells * n_bins; }
    [[nodiscard]] int descriptor_length() const { return blocks_x() * blocks_y() * block_length(); }

    friend bool operator==(const HogConfig&, const HogConfig&) = default;
};

/// Linear-interpolated vote of one gradient into two adjacent orientation bins.
struct GradientVote {
    std::uint8_t bin0 = 0;
    std::uint8_t bin1 = 0;
    double w0 = 0.0;
    double w1 = 0.0;
};

/// Computes the vote with a runtime square root and arctangent. Negating both
/// components yields the identical vote.
GradientVote gradient_vote(int dx, int dy, int n_bins);

/// Precomputed votes for every (dx, dy) in [-255, 255]^2.
class GradientLut {
public:
    static constexpr int kRange = 255;
    static constexpr int kSide = 2 * kRange + 1;

    GradientLut() = default;
    explicit GradientLut(int n_bins);

    [[nodiscard]] const GradientVote& at(int dx, int dy) const
    {
        return table_[static_cast<std::size_t>(dy + kRange) * kSide + static_cast<std::size_t>(dx + kRange)];
    }
    [[nodiscard]] int n_bins() const { return n_bins_; }
    [[nodiscard]] std::size_t entries() const { return table_.size(); }

private:
    int n_bins_ = 0;
    std::vector<GradientVote> table_;
};

GradientLut lut_build(const HogConfig& cfg);

/// Central differences with replicate-border padding; results lie in [-255, 255].
std::pair<int, int> gradients(const GrayImage& img, int x, int y);

using HogDescriptor = std::vector<double>;

/// LUT path.
HogDescriptor window_descriptor(const GrayImage& img, const Rect& origin, const HogConfig& cfg,
                                const GradientLut& lut);

/// Runtime sqrt/atan2 path; same contract as window_descriptor.
HogDescriptor window_descriptor_direct(const GrayImage& img, const Rect& origin, const HogConfig& cfg);

/// Raw (unnormalized) cell histograms of a window, cells row-major, bins ascending.
std::vector<double> window_cell_histograms(const GrayImage& img, const Rect& origin, const HogConfig& cfg,
                                           const GradientLut& lut);

/// L2-Hys in place: L2-normalize, clip at 0.2, renormalize. Zero blocks stay zero.
void normalize_block_l2hys(std::span<double> block);

/// Cell histograms and normalized blocks for a whole image, computed once and
/// shared by every window whose top-left is congruent to (offset_x, offset_y)
/// modulo the cell size. descriptor_at() is bit-identical to window_descriptor()
/// (or window_descriptor_direct() when constructed without a LUT).
class HogLevelCache {
public:
    HogLevelCache(const GrayImage& img, const HogConfig& cfg, const GradientLut* lut, int offset_x = 0,
                  int offset_y = 0);

    /// Fills `out` (descriptor_length entries) for the window at (x, y).
    void descriptor_at(int x, int y, std::span<double> out) const;

    [[nodiscard]] int offset_x() const { return offset_x_; }
    [[nodiscard]] int offset_y() const { return offset_y_; }

private:
    HogConfig cfg_;
    int offset_x_ = 0;
    int offset_y_ = 0;
    int cells_x_ = 0;
    int cells_y_ = 0;
    int block_pos_x_ = 0;
    int block_pos_y_ = 0;
    std::vector<double> blocks_;  // normalized block at every cell position
};

}  // namespace pedscan
