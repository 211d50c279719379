#pragma once

#include "pedscan/classify.hpp"
#include "pedscan/image.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace pedscan {

struct DetectConfig {
    int window_w = 32;
    int window_h = 64;
    int step = 8;
    double scale_factor = 1.2;
    int max_levels = 64;
    double score_threshold = 0.0;
    double nms_overlap = 0.5;
    bool hog_lut = true;   // false: runtime sqrt/atan2 gradient votes
    unsigned threads = 0;  // 0 = PEDSCAN_THREADS / hardware

    void validate() const;
};

struct Detection {
    Rect rect;
    double score = 0.0;
    int level = 0;

    friend bool operator==(const Detection&, const Detection&) = default;
};

struct PyramidLevel {
    GrayImage image;
    double scale = 1.0;
};

struct Pyramid {
    std::vector<PyramidLevel> levels;
};

/// Level k is the original resized to round(w / f^k) x round(h / f^k); stops
/// at max_levels or the first level smaller than the window.
Pyramid pyramid_build(const GrayImage& img, const DetectConfig& cfg);

/// Number of window positions the scan visits on a level of the given size.
std::uint64_t window_count(int level_w, int level_h, const DetectConfig& cfg);

/// Scores every window at multiples of `step` (row-major) and keeps those
/// scoring strictly above `threshold`. Rects are in level coordinates.
std::vector<Detection> scan(const GrayImage& level_img, const DetectorModel& model, int step, double threshold,
                            int level = 0, bool hog_lut = true, std::uint64_t* windows = nullptr);

/// Scales a level rect back to the original image, rounding to nearest and clamping into bounds.
Rect map_to_original(const Rect& r, double scale, int orig_w, int orig_h);

double iou(const Rect& a, const Rect& b);

/// Greedy suppression: highest score first (ties: smaller y, x, level); keeps a
/// detection iff its IoU with every kept one is <= overlap_thresh.
std::vector<Detection> nms(std::vector<Detection> detections, double overlap_thresh);

struct DetectStats {
    std::uint64_t windows = 0;
    std::size_t levels = 0;
};

/// Full pipeline: pyramid, scan per level, map to original, canonical sort, NMS.
/// An image smaller than the window yields no detections.
std::vector<Detection> detect(const GrayImage& img, const DetectorModel& model, const DetectConfig& cfg,
                              DetectStats* stats = nullptr);

/// Hard negatives: detections on person-free images, highest score first, at most `cap`,
/// cropped and resized to the window size.
std::vector<GrayImage> bootstrap_mine(const DetectorModel& model, std::span<const GrayImage> negative_images,
                                      const DetectConfig& cfg, std::size_t cap);

struct BootstrapRound {
    int round = 0;
    std::size_t negatives = 0;     // negatives used to train this round's model
    double training_error = 0.0;
    double background_fppi = 0.0;  // detections per person-free image
    std::size_t mined = 0;         // hard negatives appended after this round
};

struct TrainResult {
    DetectorModel model;
    std::vector<BootstrapRound> trace;
};

/// Trains, then alternates mining on `background` and retraining with the mined
/// windows appended, for cfg.bootstrap_rounds rounds or until the background
/// FPPI reaches cfg.target_fppi.
TrainResult train_with_bootstrap(ModelType type, std::span<const GrayImage> pos, std::vector<GrayImage> neg,
                                 std::span<const GrayImage> background, const TrainConfig& cfg,
                                 const DetectConfig& detect_cfg, const HogConfig& hog = {});

}  // namespace pedscan
