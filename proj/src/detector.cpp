#include "pedscan/detector.hpp"
#include "pedscan/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace pedscan {

void DetectConfig::validate() const
{
    if (window_w < 1 || window_h < 1) throw std::invalid_argument("window must be at least 1x1");
    if (step < 1) throw std::invalid_argument("step must be >= 1");
    if (!(scale_factor > 1.0) || !std::isfinite(scale_factor)) throw std::invalid_argument("scale factor must be > 1");
    if (max_levels < 1) throw std::invalid_argument("max levels must be >= 1");
    if (!(nms_overlap >= 0.0 && nms_overlap <= 1.0)) throw std::invalid_argument("NMS overlap must be in [0, 1]");
}

Pyramid pyramid_build(const GrayImage& img, const DetectConfig& cfg)
{
    cfg.validate();
    if (img.width() < cfg.window_w || img.height() < cfg.window_h) {
        throw std::invalid_argument("image smaller than the detection window");
    }
    Pyramid p;
    p.levels.push_back({img, 1.0});
    for (int k = 1; static_cast<int>(p.levels.size()) < cfg.max_levels; ++k) {
        const double scale = std::pow(cfg.scale_factor, k);
        const int w = static_cast<int>(std::lround(img.width() / scale));
        const int h = static_cast<int>(std::lround(img.height() / scale));
        if (w < cfg.window_w || h < cfg.window_h) break;
        const auto& prev = p.levels.back().image;
        if (w == prev.width() && h == prev.height()) continue;
        p.levels.push_back({resize(img, w, h), scale});
    }
    return p;
}

std::uint64_t window_count(int level_w, int level_h, const DetectConfig& cfg)
{
    if (level_w < cfg.window_w || level_h < cfg.window_h) return 0;
    const auto nx = static_cast<std::uint64_t>((level_w - cfg.window_w) / cfg.step + 1);
    const auto ny = static_cast<std::uint64_t>((level_h - cfg.window_h) / cfg.step + 1);
    return nx * ny;
}

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

const GradientLut& shared_lut(const HogConfig& cfg)
{
    // One table per bin count, built on first use and immutable afterwards.
    static const GradientLut nine = GradientLut(9);
    if (cfg.n_bins == 9) return nine;
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<GradientLut>> others;
    std::lock_guard lock(mutex);
    auto& slot = others[cfg.n_bins];
    if (!slot) slot = std::make_unique<GradientLut>(cfg.n_bins);
    return *slot;
}

template <typename ScoreFn>
void scan_positions(int level_w, int level_h, int ww, int wh, int step, double threshold, int level, ScoreFn&& score,
                    std::vector<Detection>& out, std::uint64_t& windows)
{
    for (int y = 0; y + wh <= level_h; y += step) {
        for (int x = 0; x + ww <= level_w; x += step) {
            ++windows;
            const double s = score(x, y);
            if (s > threshold) out.push_back({{x, y, ww, wh}, s, level});
        }
    }
}

}  // namespace

std::vector<Detection> scan(const GrayImage& level_img, const DetectorModel& model, int step, double threshold,
                            int level, bool hog_lut, std::uint64_t* windows)
{
    if (step < 1) throw std::invalid_argument("step must be >= 1");
    const auto [ww, wh] = model_window(model);
    std::vector<Detection> out;
    std::uint64_t count = 0;
    if (level_img.width() < ww || level_img.height() < wh) return out;

    std::visit(Overloaded{
                   [&](const HogSvmModel& m) {
                       const GradientLut* lut = hog_lut ? &shared_lut(m.hog) : nullptr;
                       std::map<std::pair<int, int>, HogLevelCache> caches;
                       HogDescriptor desc(static_cast<std::size_t>(m.hog.descriptor_length()));
                       scan_positions(level_img.width(), level_img.height(), ww, wh, step, threshold, level,
                                      [&](int x, int y) {
                                          const std::pair key{x % m.hog.cell, y % m.hog.cell};
                                          auto it = caches.find(key);
                                          if (it == caches.end()) {
                                              it = caches.try_emplace(key, level_img, m.hog, lut, key.first, key.second)
                                                       .first;
                                          }
                                          it->second.descriptor_at(x, y, desc);
                                          return svm_score(m.svm, desc);
                                      },
                                      out, count);
                   },
                   [&](const LbpBoostModel& m) {
                       const IntegralImage ii(level_img);
                       scan_positions(level_img.width(), level_img.height(), ww, wh, step, threshold, level,
                                      [&](int x, int y) { return adaboost_score_at(m.boost, ii, x, y); }, out, count);
                   },
               },
               model);
    if (windows) *windows += count;
    return out;
}

Rect map_to_original(const Rect& r, double scale, int orig_w, int orig_h)
{
    auto scaled = [&](int v) { return static_cast<int>(std::lround(v * scale)); };
    Rect m{scaled(r.x), scaled(r.y), scaled(r.w), scaled(r.h)};
    m.x = std::clamp(m.x, 0, std::max(0, orig_w - 1));
    m.y = std::clamp(m.y, 0, std::max(0, orig_h - 1));
    m.w = std::clamp(m.w, 1, std::max(1, orig_w - m.x));
    m.h = std::clamp(m.h, 1, std::max(1, orig_h - m.y));
    return m;
}

double iou(const Rect& a, const Rect& b)
{
    const auto inter = static_cast<double>(intersection_area(a, b));
    const double uni = static_cast<double>(a.area()) + static_cast<double>(b.area()) - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

std::vector<Detection> nms(std::vector<Detection> detections, double overlap_thresh)
{
    std::stable_sort(detections.begin(), detections.end(), [](const Detection& a, const Detection& b) {
        if (a.score != b.score) return a.score > b.score;
        return std::tie(a.rect.y, a.rect.x, a.level, a.rect.h, a.rect.w) <
               std::tie(b.rect.y, b.rect.x, b.level, b.rect.h, b.rect.w);
    });
    std::vector<Detection> kept;
    for (const auto& d : detections) {
        const bool overlaps = std::any_of(kept.begin(), kept.end(),
                                          [&](const Detection& k) { return iou(k.rect, d.rect) > overlap_thresh; });
        if (!overlaps) kept.push_back(d);
    }
    return kept;
}

std::vector<Detection> detect(const GrayImage& img, const DetectorModel& model, const DetectConfig& cfg,
                              DetectStats* stats)
{
    cfg.validate();
    const auto [ww, wh] = model_window(model);
    if (ww != cfg.window_w || wh != cfg.window_h) {
        throw std::invalid_argument("detection window does not match the model window");
    }
    if (img.width() < ww || img.height() < wh) {
        if (stats) *stats = {};
        return {};
    }
    const Pyramid pyramid = pyramid_build(img, cfg);
    const std::size_t n = pyramid.levels.size();

    std::vector<std::vector<Detection>> per_level(n);
    std::vector<std::uint64_t> counts(n, 0);
    const unsigned threads = cfg.threads > 0 ? cfg.threads : worker_count();
    parallel_for(n, threads, [&](std::size_t k) {
        const auto& level = pyramid.levels[k];
        auto raw = scan(level.image, model, cfg.step, cfg.score_threshold, static_cast<int>(k), cfg.hog_lut,
                        &counts[k]);
        for (auto& d : raw) d.rect = map_to_original(d.rect, level.scale, img.width(), img.height());
        per_level[k] = std::move(raw);
    });

    std::vector<Detection> merged;
    for (auto& v : per_level) merged.insert(merged.end(), v.begin(), v.end());
    std::stable_sort(merged.begin(), merged.end(), [](const Detection& a, const Detection& b) {
        return std::tie(a.level, a.rect.y, a.rect.x) < std::tie(b.level, b.rect.y, b.rect.x);
    });

    if (stats) {
        stats->levels = n;
        for (const auto c : counts) stats->windows += c;
    }
    return nms(std::move(merged), cfg.nms_overlap);
}

std::vector<GrayImage> bootstrap_mine(const DetectorModel& model, std::span<const GrayImage> negative_images,
                                      const DetectConfig& cfg, std::size_t cap)
{
    if (cap == 0) return {};
    struct Hit {
        double score;
        std::size_t image;
        Rect rect;
    };
    std::vector<Hit> hits;
    for (std::size_t i = 0; i < negative_images.size(); ++i) {
        const auto& img = negative_images[i];
        if (img.width() < cfg.window_w || img.height() < cfg.window_h) continue;
        for (const auto& d : detect(img, model, cfg)) hits.push_back({d.score, i, d.rect});
    }
    std::stable_sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
        if (a.score != b.score) return a.score > b.score;
        return std::tie(a.image, a.rect.y, a.rect.x, a.rect.h, a.rect.w) <
               std::tie(b.image, b.rect.y, b.rect.x, b.rect.h, b.rect.w);
    });
    if (hits.size() > cap) hits.resize(cap);

    std::vector<GrayImage> patches;
    patches.reserve(hits.size());
    for (const auto& h : hits) {
        patches.push_back(resize(crop(negative_images[h.image], h.rect), cfg.window_w, cfg.window_h));
    }
    return patches;
}

TrainResult train_with_bootstrap(ModelType type, std::span<const GrayImage> pos, std::vector<GrayImage> neg,
                                 std::span<const GrayImage> background, const TrainConfig& cfg,
                                 const DetectConfig& detect_cfg, const HogConfig& hog)
{
    cfg.validate();
    const std::size_t cap =
        cfg.negatives_per_round > 0 ? static_cast<std::size_t>(cfg.negatives_per_round) : neg.size();

    TrainResult result{train_model(type, pos, neg, cfg, hog), {}};
    for (int round = 0;; ++round) {
        DetectConfig dc = detect_cfg;
        dc.score_threshold = model_default_threshold(result.model);

        BootstrapRound info;
        info.round = round;
        info.negatives = neg.size();
        info.training_error = training_error(result.model, pos, neg, dc.score_threshold);

        std::size_t false_positives = 0;
        std::size_t usable = 0;
        for (const auto& img : background) {
            if (img.width() < dc.window_w || img.height() < dc.window_h) continue;
            ++usable;
            false_positives += detect(img, result.model, dc).size();
        }
        info.background_fppi = usable > 0 ? static_cast<double>(false_positives) / static_cast<double>(usable) : 0.0;

        const bool last = round >= cfg.bootstrap_rounds || usable == 0 || info.background_fppi <= cfg.target_fppi;
        if (last) {
            result.trace.push_back(info);
            break;
        }
        auto mined = bootstrap_mine(result.model, background, dc, cap);
        info.mined = mined.size();
        result.trace.push_back(info);
        if (mined.empty()) break;
        neg.insert(neg.end(), std::make_move_iterator(mined.begin()), std::make_move_iterator(mined.end()));
        result.model = train_model(type, pos, neg, cfg, hog);
    }
    return result;
}

}  // namespace pedscan
