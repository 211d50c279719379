#include "fixtures.hpp"
#include "pedscan/hog.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace pedscan;

namespace {

struct Vote {
    int bin0, bin1;
    double w0, w1;
};

// Textbook unsigned-orientation vote, written independently of the library.
Vote oracle_vote(int dx, int dy)
{
    const double mag = std::hypot(dx, dy);
    double deg = std::atan2(dy, dx) * 180.0 / std::numbers::pi;
    if (deg < 0) deg += 180.0;
    if (deg >= 180.0) deg -= 180.0;
    const double t = deg / 20.0 - 0.5;
    const double fl = std::floor(t);
    const int b0 = (static_cast<int>(fl) + 9) % 9;
    return {b0, (b0 + 1) % 9, mag * (1.0 - (t - fl)), mag * (t - fl)};
}

// Independent descriptor: gradients with replicate border, per-pixel votes,
// 8x8 cells, 2x2-cell blocks at stride 8, L2-Hys.
std::vector<double> oracle_descriptor(const GrayImage& img, int ox, int oy)
{
    auto px = [&](int x, int y) {
        return int{img.at(std::clamp(x, 0, img.width() - 1), std::clamp(y, 0, img.height() - 1))};
    };
    double cells[8][4][9] = {};
    for (int y = 0; y < 64; ++y) {
        for (int x = 0; x < 32; ++x) {
            const int gx = ox + x;
            const int gy = oy + y;
            const auto v = oracle_vote(px(gx + 1, gy) - px(gx - 1, gy), px(gx, gy + 1) - px(gx, gy - 1));
            cells[y / 8][x / 8][v.bin0] += v.w0;
            cells[y / 8][x / 8][v.bin1] += v.w1;
        }
    }
    std::vector<double> out;
    for (int by = 0; by < 7; ++by) {
        for (int bx = 0; bx < 3; ++bx) {
            std::vector<double> block;
            for (int cy = 0; cy < 2; ++cy) {
                for (int cx = 0; cx < 2; ++cx) {
                    for (int b = 0; b < 9; ++b) block.push_back(cells[by + cy][bx + cx][b]);
                }
            }
            for (int pass = 0; pass < 2; ++pass) {
                double n = 0;
                for (const double v : block) n += v * v;
                n = std::sqrt(n);
                for (auto& v : block) {
                    v = n > 0 ? v / n : 0.0;
                    if (pass == 0) v = std::min(v, 0.2);
                }
            }
            out.insert(out.end(), block.begin(), block.end());
        }
    }
    return out;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b)
{
    REQUIRE(a.size() == b.size());
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("config geometry")
{
    const HogConfig cfg;
    CHECK(cfg.blocks_x() == 3);
    CHECK(cfg.blocks_y() == 7);
    CHECK(cfg.descriptor_length() == 756);
    HogConfig bad;
    bad.block_stride = 5;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("gradient votes")
{
    const GradientLut lut(9);
    CHECK(lut.entries() == 511u * 511u);
    const auto& zero = lut.at(0, 0);
    CHECK(zero.w0 == 0.0);
    CHECK(zero.w1 == 0.0);

    const auto& horiz = lut.at(255, 0);
    CHECK(horiz.bin0 == 8);
    CHECK(horiz.bin1 == 0);
    CHECK(horiz.w0 == doctest::Approx(127.5));
    CHECK(horiz.w1 == doctest::Approx(127.5));

    const auto& vert = lut.at(0, 255);
    CHECK(vert.bin0 == 4);
    CHECK(vert.w0 == doctest::Approx(255.0));
    CHECK(vert.w1 == doctest::Approx(0.0));

    std::mt19937_64 rng(5);
    for (int k = 0; k < 20000; ++k) {
        const int dx = static_cast<int>(rng() % 511) - 255;
        const int dy = static_cast<int>(rng() % 511) - 255;
        const auto& v = lut.at(dx, dy);
        const auto o = oracle_vote(dx, dy);
        // A vote landing exactly on a bin center may be reported with either neighbor at weight 0.
        std::array<double, 9> g{}, e{};
        g[v.bin0] += v.w0;
        g[v.bin1] += v.w1;
        e[static_cast<std::size_t>(o.bin0)] += o.w0;
        e[static_cast<std::size_t>(o.bin1)] += o.w1;
        for (std::size_t b = 0; b < 9; ++b) CHECK(g[b] == doctest::Approx(e[b]).epsilon(1e-12));

        const auto d = gradient_vote(dx, dy, 9);
        CHECK(d.bin0 == v.bin0);
        CHECK(d.w0 == v.w0);
        const auto neg = gradient_vote(-dx, -dy, 9);
        CHECK(neg.bin0 == d.bin0);
        CHECK(neg.bin1 == d.bin1);
        CHECK(neg.w0 == d.w0);
        CHECK(neg.w1 == d.w1);
    }
}

TEST_CASE("gradients")
{
    const GrayImage flat(10, 10, 40);
    for (int y = 0; y < 10; ++y) {
        for (int x = 0; x < 10; ++x) CHECK(gradients(flat, x, y) == std::pair{0, 0});
    }
    GrayImage step(10, 10, 0);
    for (int y = 0; y < 10; ++y) {
        for (int x = 5; x < 10; ++x) step.at(x, y) = 255;
    }
    CHECK(gradients(step, 5, 3) == std::pair{255, 0});
    CHECK(gradients(step, 4, 3) == std::pair{255, 0});
    GrayImage rotated(10, 10, 0);
    for (int y = 5; y < 10; ++y) {
        for (int x = 0; x < 10; ++x) rotated.at(x, y) = 255;
    }
    CHECK(gradients(rotated, 3, 5) == std::pair{0, 255});
    CHECK(gradients(step, 0, 0) == std::pair{0, 0});
}

TEST_CASE("constant windows give zero descriptors")
{
    const GrayImage flat(40, 80, 120);
    const HogConfig cfg;
    const GradientLut lut(9);
    for (const double v : window_descriptor(flat, {3, 5, 32, 64}, cfg, lut)) CHECK(v == 0.0);
    for (const double v : window_descriptor_direct(flat, {0, 0, 32, 64}, cfg)) CHECK(v == 0.0);
    CHECK_THROWS_AS(window_descriptor(flat, {10, 20, 32, 64}, cfg, lut), std::out_of_range);
}

TEST_CASE("descriptors match the independent oracle and each other")
{
    const HogConfig cfg;
    const GradientLut lut(9);
    const auto img = fixtures::random_image(60, 90, 17);
    std::mt19937_64 rng(2);
    for (int k = 0; k < 25; ++k) {
        const int x = static_cast<int>(rng() % 29);
        const int y = static_cast<int>(rng() % 27);
        const auto a = window_descriptor(img, {x, y, 32, 64}, cfg, lut);
        const auto b = window_descriptor_direct(img, {x, y, 32, 64}, cfg);
        CHECK(a.size() == 756);
        CHECK(max_abs_diff(a, b) <= 1e-6);
        CHECK(max_abs_diff(a, oracle_descriptor(img, x, y)) <= 1e-9);
    }
}

TEST_CASE("block norms are at most one")
{
    const HogConfig cfg;
    const auto img = fixtures::random_image(32, 64, 23);
    const auto d = window_descriptor_direct(img, {0, 0, 32, 64}, cfg);
    for (std::size_t b = 0; b < d.size(); b += 36) {
        double n = 0;
        for (std::size_t i = b; i < b + 36; ++i) n += d[i] * d[i];
        CHECK(std::sqrt(n) <= 1.0 + 1e-6);
    }
}

TEST_CASE("L2-Hys on hand values")
{
    std::vector<double> zero(4, 0.0);
    normalize_block_l2hys(zero);
    for (const double v : zero) CHECK(v == 0.0);

    std::vector<double> spike{1.0, 0.0, 0.0, 0.0};
    normalize_block_l2hys(spike);
    CHECK(spike[0] == doctest::Approx(1.0));

    std::vector<double> mixed{3.0, 4.0};
    normalize_block_l2hys(mixed);  // -> (0.6, 0.8) -> clip (0.2, 0.2) -> (1/sqrt2, 1/sqrt2)
    CHECK(mixed[0] == doctest::Approx(std::sqrt(0.5)));
    CHECK(mixed[1] == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("votes are conserved into cell histograms")
{
    const HogConfig cfg;
    const GradientLut lut(9);
    const auto img = fixtures::random_image(50, 70, 31);
    const auto hist = window_cell_histograms(img, {7, 4, 32, 64}, cfg, lut);
    CHECK(hist.size() == 4 * 8 * 9);
    double total = 0;
    for (const double v : hist) total += v;
    double mags = 0;
    for (int y = 4; y < 68; ++y) {
        for (int x = 7; x < 39; ++x) {
            const auto [dx, dy] = gradients(img, x, y);
            mags += std::hypot(dx, dy);
        }
    }
    CHECK(total == doctest::Approx(mags).epsilon(1e-6));
}

TEST_CASE("level cache reproduces per-window descriptors")
{
    const HogConfig cfg;
    const GradientLut lut(9);
    const auto img = fixtures::random_image(80, 100, 41);
    std::vector<double> out(756);
    for (const auto& [ox, oy] : {std::pair{0, 0}, std::pair{3, 5}}) {
        const HogLevelCache with_lut(img, cfg, &lut, ox, oy);
        const HogLevelCache direct(img, cfg, nullptr, ox, oy);
        for (int y = oy; y + 64 <= 100; y += 8) {
            for (int x = ox; x + 32 <= 80; x += 8) {
                with_lut.descriptor_at(x, y, out);
                CHECK(out == window_descriptor(img, {x, y, 32, 64}, cfg, lut));
                direct.descriptor_at(x, y, out);
                CHECK(out == window_descriptor_direct(img, {x, y, 32, 64}, cfg));
            }
        }
    }
}
