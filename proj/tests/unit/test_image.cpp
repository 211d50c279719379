#include "fixtures.hpp"
#include "pedscan/image.hpp"

#include <doctest.h>

#include <random>

using namespace pedscan;

TEST_CASE("to_grayscale applies BT.601 luma with rounding")
{
    const std::vector<std::uint8_t> black(3 * 4, 0);
    CHECK(to_grayscale(2, 2, black) == GrayImage(2, 2, 0));
    const std::vector<std::uint8_t> white(3 * 4, 255);
    CHECK(to_grayscale(2, 2, white) == GrayImage(2, 2, 255));
    const std::vector<std::uint8_t> one{100, 200, 50};
    CHECK(to_grayscale(1, 1, one).at(0, 0) == 153);
    CHECK_THROWS_AS(to_grayscale(2, 2, one), std::invalid_argument);
}

TEST_CASE("to_grayscale is a per-pixel map")
{
    std::mt19937_64 rng(3);
    std::vector<std::uint8_t> rgb(3 * 20);
    for (auto& v : rgb) v = static_cast<std::uint8_t>(rng() & 0xFF);
    const auto gray = to_grayscale(20, 1, rgb);
    for (int i = 0; i < 20; ++i) {
        const std::vector<std::uint8_t> px(rgb.begin() + 3 * i, rgb.begin() + 3 * i + 3);
        CHECK(to_grayscale(1, 1, px).at(0, 0) == gray.at(i, 0));
    }
}

TEST_CASE("resize")
{
    SUBCASE("constant stays constant")
    {
        CHECK(resize(GrayImage(7, 5, 91), 13, 3) == GrayImage(13, 3, 91));
    }
    SUBCASE("96x160 to 32x64")
    {
        const auto out = resize(fixtures::random_image(96, 160, 1), 32, 64);
        CHECK(out.width() == 32);
        CHECK(out.height() == 64);
    }
    SUBCASE("corners of an upsampled checkerboard keep their values")
    {
        const GrayImage board(2, 2, std::vector<std::uint8_t>{0, 255, 255, 0});
        const auto up = resize(board, 4, 4);
        CHECK(up.at(0, 0) == 0);
        CHECK(up.at(3, 0) == 255);
        CHECK(up.at(0, 3) == 255);
        CHECK(up.at(3, 3) == 0);
        // Corner-aligned: interior sample (1,0) sits at source x = 1/3.
        CHECK(up.at(1, 0) == 85);
    }
    SUBCASE("same size is the identity, so resizing twice changes nothing")
    {
        const auto img = fixtures::random_image(17, 9, 2);
        CHECK(resize(img, 17, 9) == img);
        const auto once = resize(img, 11, 23);
        CHECK(resize(once, 11, 23) == once);
    }
    CHECK_THROWS(resize(GrayImage(), 4, 4));
    CHECK_THROWS(resize(GrayImage(3, 3), 0, 4));
}

TEST_CASE("crop copies the covered pixels")
{
    const auto img = fixtures::random_image(10, 8, 5);
    const auto c = crop(img, {2, 3, 4, 2});
    REQUIRE(c.width() == 4);
    for (int y = 0; y < 2; ++y) {
        for (int x = 0; x < 4; ++x) CHECK(c.at(x, y) == img.at(x + 2, y + 3));
    }
    CHECK_THROWS_AS(crop(img, {8, 0, 3, 1}), std::out_of_range);
}

TEST_CASE("integral image small cases")
{
    const auto zero = integral_build(GrayImage(3, 4, 0));
    for (const auto v : zero.sums()) CHECK(v == 0);

    const GrayImage m(2, 2, std::vector<std::uint8_t>{1, 2, 3, 4});
    const auto ii = integral_build(m);
    CHECK(ii.width() == 3);
    CHECK(ii.height() == 3);
    CHECK(ii.at(2, 2) == 10);
    CHECK(rect_sum(ii, {0, 0, 2, 2}) == 10);
    CHECK(rect_sum(integral_build(GrayImage(1, 1, 7)), {0, 0, 1, 1}) == 7);
    CHECK_THROWS_AS(rect_sum(ii, {1, 1, 2, 1}), std::out_of_range);
    CHECK_THROWS_AS(rect_sum(ii, {0, 0, 0, 1}), std::out_of_range);
}

TEST_CASE("integral image matches a brute-force double sum")
{
    const auto img = fixtures::random_image(16, 16, 11);
    const auto ii = integral_build(img);
    for (int i = 0; i <= 16; ++i) {
        for (int j = 0; j <= 16; ++j) {
            std::int64_t s = 0;
            for (int y = 0; y < i; ++y) {
                for (int x = 0; x < j; ++x) s += img.at(x, y);
            }
            CHECK(ii.at(i, j) == s);
        }
    }
    for (int i = 1; i <= 16; ++i) {
        for (int j = 1; j <= 16; ++j) {
            CHECK(ii.at(i, j) >= ii.at(i - 1, j));
            CHECK(ii.at(i, j) >= ii.at(i, j - 1));
        }
    }
}

TEST_CASE("integral sums fit 255 per pixel on a large image")
{
    const auto ii = integral_build(GrayImage(4000, 3000, 255));
    CHECK(ii.at(3000, 4000) == std::int64_t{255} * 4000 * 3000);
}

TEST_CASE("rect_sum on random rects")
{
    const auto img = fixtures::random_image(32, 32, 12);
    const auto ii = integral_build(img);
    std::mt19937_64 rng(99);
    for (int k = 0; k < 50; ++k) {
        const int w = 1 + static_cast<int>(rng() % 32);
        const int h = 1 + static_cast<int>(rng() % 32);
        const int x = static_cast<int>(rng() % static_cast<std::uint64_t>(33 - w));
        const int y = static_cast<int>(rng() % static_cast<std::uint64_t>(33 - h));
        std::int64_t s = 0;
        for (int yy = y; yy < y + h; ++yy) {
            for (int xx = x; xx < x + w; ++xx) s += img.at(xx, yy);
        }
        CHECK(rect_sum(ii, {x, y, w, h}) == s);
    }
}

TEST_CASE("intersection_area")
{
    CHECK(intersection_area({0, 0, 4, 4}, {2, 2, 4, 4}) == 4);
    CHECK(intersection_area({0, 0, 4, 4}, {4, 0, 4, 4}) == 0);
    CHECK(intersection_area({0, 0, 10, 10}, {2, 3, 1, 1}) == 1);
}
