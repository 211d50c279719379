#include "fixtures.hpp"
#include "pedscan/detector.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace pedscan;

namespace {

// An AdaBoost model that fires only when every one of its features sees the exact
// code it had on `pattern`; the score is then the round count.
LbpBoostModel pattern_model(const GrayImage& pattern, int n_features)
{
    const std::vector<int> scales{1, 2};
    const auto pool = feature_pool(32, 64, scales);
    const IntegralImage ii(pattern);
    LbpBoostModel m;
    m.scales = scales;
    m.boost.decision_threshold = n_features - 0.5;
    for (int k = 0; k < n_features; ++k) {
        const auto& f = pool[static_cast<std::size_t>(k) * pool.size() / static_cast<std::size_t>(n_features)];
        WeakLearner wl{f, {}};
        wl.votes.fill(-1);
        wl.votes[feature_code(ii, 0, 0, f)] = 1;
        m.boost.rounds.push_back({wl, 1.0});
    }
    return m;
}

DetectConfig config_for(const DetectorModel& m)
{
    DetectConfig cfg;
    cfg.score_threshold = model_default_threshold(m);
    return cfg;
}

}  // namespace

TEST_CASE("pyramid recurrence")
{
    DetectConfig cfg;
    cfg.scale_factor = 2.0;
    const auto p = pyramid_build(GrayImage(128, 256), cfg);
    REQUIRE(p.levels.size() == 3);
    CHECK(p.levels[0].image.width() == 128);
    CHECK(p.levels[1].image.width() == 64);
    CHECK(p.levels[2].image.width() == 32);
    CHECK(p.levels[2].image.height() == 64);
    CHECK(p.levels[2].scale == 4.0);

    const DetectConfig dflt;
    const auto q = pyramid_build(GrayImage(640, 480), dflt);
    for (std::size_t k = 0; k < q.levels.size(); ++k) {
        const double s = std::pow(1.2, static_cast<double>(k));
        CHECK(q.levels[k].image.width() == std::lround(640 / s));
        CHECK(q.levels[k].image.height() == std::lround(480 / s));
        CHECK(q.levels[k].image.width() >= 32);
        CHECK(q.levels[k].image.height() >= 64);
    }
    CHECK(std::lround(480 / std::pow(1.2, static_cast<double>(q.levels.size()))) < 64);

    DetectConfig capped;
    capped.max_levels = 2;
    CHECK(pyramid_build(GrayImage(640, 480), capped).levels.size() == 2);
    CHECK_THROWS_AS(pyramid_build(GrayImage(20, 20), dflt), std::invalid_argument);
}

TEST_CASE("scan counts windows by the closed form")
{
    HogSvmModel zero;
    zero.svm.weights.assign(756, 0.0);
    const DetectorModel hog = zero;
    const DetectorModel lbp = LbpBoostModel{};
    for (const auto& [w, h] : {std::pair{32, 64}, std::pair{33, 70}, std::pair{100, 64}, std::pair{97, 131}}) {
        for (const int step : {1, 4, 8, 13}) {
            DetectConfig cfg;
            cfg.step = step;
            const auto img = fixtures::random_image(w, h, static_cast<std::uint64_t>(w * h));
            for (const auto* model : {&hog, &lbp}) {
                std::uint64_t counted = 0;
                scan(img, *model, step, 0.0, 0, true, &counted);
                CHECK(counted == window_count(w, h, cfg));
            }
        }
    }
    std::uint64_t one = 0;
    scan(GrayImage(32, 64, 9), hog, 5, -1.0, 0, true, &one);
    CHECK(one == 1);
    CHECK(window_count(20, 64, DetectConfig{}) == 0);
}

TEST_CASE("scan threshold is strict")
{
    HogSvmModel m;
    m.svm.weights.assign(756, 0.0);
    m.svm.bias = 0.5;
    const auto img = fixtures::random_image(48, 80, 1);
    CHECK(scan(img, m, 8, std::numeric_limits<double>::infinity()).empty());
    CHECK(scan(img, m, 8, 0.5).empty());
    CHECK(scan(img, m, 8, 0.49).size() == 9);
}

TEST_CASE("map_to_original rounds and clamps")
{
    CHECK(map_to_original({10, 20, 32, 64}, 1.0, 100, 100) == Rect{10, 20, 32, 64});
    CHECK(map_to_original({5, 5, 32, 64}, 1.44, 200, 200) == Rect{7, 7, 46, 92});
    CHECK(map_to_original({60, 0, 32, 64}, 1.5, 100, 90) == Rect{90, 0, 10, 90});
}

TEST_CASE("nms")
{
    const std::vector<Detection> single{{{1, 2, 32, 64}, 0.3, 0}};
    CHECK(nms(single, 0.5) == single);

    const std::vector<Detection> pair{{{0, 0, 32, 64}, 1.0, 0}, {{2, 0, 32, 64}, 2.0, 0}, {{100, 0, 32, 64}, 0.1, 1}};
    const auto kept = nms(pair, 0.5);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].score == 2.0);
    CHECK(kept[1].rect.x == 100);

    const std::vector<Detection> tie{{{4, 0, 32, 64}, 1.0, 0}, {{0, 0, 32, 64}, 1.0, 0}};
    const auto t = nms(tie, 0.5);
    REQUIRE(t.size() == 1);
    CHECK(t[0].rect.x == 0);
}

TEST_CASE("nms output is an antichain that covers every suppressed box")
{
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<Detection> dets;
        for (int k = 0; k < 40; ++k) {
            const int w = 20 + static_cast<int>(rng() % 30);
            dets.push_back({{static_cast<int>(rng() % 80), static_cast<int>(rng() % 80), w, 2 * w},
                            static_cast<double>(rng() % 10),
                            static_cast<int>(rng() % 3)});
        }
        const double thr = 0.3;
        const auto kept = nms(dets, thr);
        for (std::size_t i = 0; i < kept.size(); ++i) {
            for (std::size_t j = i + 1; j < kept.size(); ++j) CHECK(iou(kept[i].rect, kept[j].rect) <= thr);
        }
        for (const auto& d : dets) {
            const bool survived = std::find(kept.begin(), kept.end(), d) != kept.end();
            if (survived) continue;
            const bool covered = std::any_of(kept.begin(), kept.end(), [&](const Detection& k) {
                return iou(k.rect, d.rect) > thr && k.score >= d.score;
            });
            CHECK(covered);
        }
        auto shuffled = dets;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        CHECK(nms(shuffled, thr) == kept);
    }
}

TEST_CASE("detect on blank input with an untrained SVM")
{
    HogSvmModel zero;
    zero.svm.weights.assign(756, 0.0);
    DetectConfig cfg;
    cfg.score_threshold = 0.1;
    CHECK(detect(GrayImage(200, 150, 128), zero, cfg).empty());
    CHECK(detect(GrayImage(20, 20, 128), zero, cfg).empty());
}

TEST_CASE("detect finds exactly the planted pattern")
{
    const auto pattern = fixtures::random_image(32, 64, 77);
    const DetectorModel model = pattern_model(pattern, 24);
    GrayImage scene = fixtures::clutter(160, 120, 5);
    const Rect plant{48, 24, 32, 64};
    fixtures::paste(scene, pattern, plant.x, plant.y);

    DetectStats stats;
    const auto dets = detect(scene, model, config_for(model), &stats);
    REQUIRE(dets.size() == 1);
    CHECK(dets[0].rect == plant);
    CHECK(dets[0].score == 24.0);
    CHECK(iou(dets[0].rect, plant) > 0.5);
    CHECK(stats.levels >= 2);
}

TEST_CASE("detect is identical across worker counts")
{
    std::vector<GrayImage> pos;
    std::vector<GrayImage> neg;
    for (int i = 0; i < 20; ++i) {
        pos.push_back(fixtures::pedestrian(40 + i));
        neg.push_back(fixtures::clutter(32, 64, 90 + i, 4));
    }
    const auto scene = fixtures::clutter(240, 180, 11);
    for (const auto type : {ModelType::HogSvm, ModelType::LbpAdaBoost}) {
        TrainConfig tc;
        tc.n_rounds = 10;
        const auto model = train_model(type, pos, neg, tc);
        DetectConfig cfg = config_for(model);
        cfg.score_threshold = -1e9;  // every window is a raw hit, so NMS has work to do
        cfg.threads = 1;
        const auto a = detect(scene, model, cfg);
        cfg.threads = 4;
        const auto b = detect(scene, model, cfg);
        CHECK(a == b);
        CHECK(!a.empty());
    }
}

TEST_CASE("LUT and direct HOG paths give the same detections")
{
    std::vector<GrayImage> pos;
    std::vector<GrayImage> neg;
    for (int i = 0; i < 20; ++i) {
        pos.push_back(fixtures::pedestrian(400 + i));
        neg.push_back(fixtures::clutter(32, 64, 900 + i, 4));
    }
    const auto model = train_model(ModelType::HogSvm, pos, neg, {});
    GrayImage scene = fixtures::clutter(200, 160, 3);
    fixtures::paste(scene, fixtures::pedestrian(5), 64, 40);
    DetectConfig cfg;
    const auto a = detect(scene, model, cfg);
    cfg.hog_lut = false;
    const auto b = detect(scene, model, cfg);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].rect == b[i].rect);
        CHECK(a[i].score == doctest::Approx(b[i].score).epsilon(1e-9));
    }
}
