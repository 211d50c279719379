#include "fixtures.hpp"

#include "pedscan/cli/image_io.hpp"

#include <algorithm>
#include <fstream>
#include <random>

namespace pedscan::fixtures {

namespace fs = std::filesystem;

GrayImage random_image(int w, int h, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h);
    for (auto& p : px) p = static_cast<std::uint8_t>(rng() & 0xFF);
    return GrayImage(w, h, std::move(px));
}

GrayImage clutter(int w, int h, std::uint64_t seed, int coarseness)
{
    const int cw = std::max(2, w / coarseness);
    const int ch = std::max(2, h / coarseness);
    return resize(random_image(cw, ch, seed), w, h);
}

namespace {

void fill_rect(GrayImage& img, int x0, int y0, int x1, int y1, int value)
{
    for (int y = std::max(0, y0); y < std::min(img.height(), y1); ++y) {
        for (int x = std::max(0, x0); x < std::min(img.width(), x1); ++x) {
            img.at(x, y) = static_cast<std::uint8_t>(std::clamp(value, 0, 255));
        }
    }
}

}  // namespace

GrayImage pedestrian(std::uint64_t seed, int w, int h)
{
    std::mt19937_64 rng(seed);
    auto pick = [&](int lo, int hi) { return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1)); };

    // Drawn on the 32x64 canvas, then resized when another size is requested.
    GrayImage img(32, 64);
    for (auto& p : img.pixels()) p = static_cast<std::uint8_t>(30 + rng() % 30);
    const int fg = pick(170, 230);
    const int dx = pick(-1, 1);
    const int dy = pick(-1, 1);
    fill_rect(img, 13 + dx, 5 + dy, 19 + dx, 12 + dy, fg);   // head
    fill_rect(img, 10 + dx, 14 + dy, 22 + dx, 36 + dy, fg);  // torso
    fill_rect(img, 7 + dx, 15 + dy, 9 + dx, 32 + dy, fg);    // arms
    fill_rect(img, 23 + dx, 15 + dy, 25 + dx, 32 + dy, fg);
    const int stride = pick(0, 2);
    fill_rect(img, 10 + dx - stride, 36 + dy, 15 + dx - stride, 59 + dy, fg);  // legs
    fill_rect(img, 17 + dx + stride, 36 + dy, 22 + dx + stride, 59 + dy, fg);
    return (w == 32 && h == 64) ? img : resize(img, w, h);
}

GrayImage distractor_scene(int w, int h, std::uint64_t seed)
{
    GrayImage img = clutter(w, h, seed, 10);
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    const int n = 4 + static_cast<int>(rng() % 5);
    for (int k = 0; k < n; ++k) {
        const int bw = 4 + static_cast<int>(rng() % 14);
        const int bh = 20 + static_cast<int>(rng() % 60);
        const int x = static_cast<int>(rng() % static_cast<std::uint64_t>(std::max(1, w - bw)));
        const int y = static_cast<int>(rng() % static_cast<std::uint64_t>(std::max(1, h - bh)));
        fill_rect(img, x, y, x + bw, y + bh, 160 + static_cast<int>(rng() % 90));
    }
    return img;
}

void paste(GrayImage& dst, const GrayImage& src, int x, int y)
{
    for (int j = 0; j < src.height(); ++j) {
        for (int i = 0; i < src.width(); ++i) dst.at(x + i, y + j) = src.at(i, j);
    }
}

fs::path scratch_dir(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / ("pedscan_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

namespace {

std::string inria_annotation(const std::string& file, int w, int h, const std::vector<Rect>& boxes)
{
    std::string s = "# PASCAL Annotation Version 1.00\n\nImage filename : \"" + file + "\"\n";
    s += "Image size (X x Y x C) : " + std::to_string(w) + " x " + std::to_string(h) + " x 1\n";
    for (std::size_t k = 0; k < boxes.size(); ++k) {
        const auto& b = boxes[k];
        s += "Bounding box for object " + std::to_string(k + 1) + " \"PASperson\" (Xmin, Ymin) - (Xmax, Ymax) : (" +
             std::to_string(b.x) + ", " + std::to_string(b.y) + ") - (" + std::to_string(b.right() - 1) + ", " +
             std::to_string(b.bottom() - 1) + ")\n";
    }
    return s;
}

}  // namespace

Corpus write_corpus(const fs::path& dir, const CorpusSpec& spec)
{
    fs::create_directories(dir / "img");
    fs::create_directories(dir / "ann");
    Corpus corpus;
    corpus.manifest = dir / "manifest.tsv";
    std::ofstream manifest(corpus.manifest);
    std::uint64_t s = spec.seed * 1000;

    auto emit = [&](const std::string& split, int index, int n_people) {
        const std::string stem = split + "_" + std::to_string(index);
        GrayImage img = clutter(spec.width, spec.height, ++s, 16);
        std::vector<Rect> boxes;
        for (int p = 0; p < n_people; ++p) {
            const bool large = (index + p) % 2 == 1;
            const int w = large ? 48 : 32;
            const int h = large ? 96 : 64;
            const int slot = spec.width / std::max(1, n_people);
            const int x = p * slot + static_cast<int>(s % static_cast<std::uint64_t>(std::max(1, slot - w)));
            const int y = static_cast<int>((s * 7) % static_cast<std::uint64_t>(spec.height - h + 1));
            paste(img, pedestrian(++s, w, h), x, y);
            boxes.push_back({x, y, w, h});
        }
        const auto image_rel = "img/" + stem + ".pgm";
        cli::write_pgm(dir / image_rel, img);
        std::string ann_rel = "-";
        if (n_people > 0) {
            ann_rel = "ann/" + stem + ".txt";
            std::ofstream(dir / ann_rel) << inria_annotation(image_rel, spec.width, spec.height, boxes);
        }
        manifest << split << '\t' << image_rel << '\t' << ann_rel << '\n';
        return std::make_pair(dir / image_rel, boxes);
    };

    for (int i = 0; i < spec.train_images; ++i) emit("train", i, 1 + i % 2);
    for (int i = 0; i < spec.background_images; ++i) emit("train", spec.train_images + i, 0);
    for (int i = 0; i < spec.test_images; ++i) {
        auto [path, boxes] = emit("test", i, 1);
        corpus.test_images.push_back(path);
        corpus.test_labels.push_back(boxes.front());
    }
    return corpus;
}

EvalFixture eval_fixture()
{
    EvalFixture f;
    f.dataset = {{"a", {{0, 0, 40, 80}, {100, 0, 40, 80}}}, {"b", {{10, 10, 40, 80}}}, {"c", {{0, 0, 40, 80}}}};
    f.detections["a"] = {{{0, 0, 40, 80}, 0.9, 0}, {{200, 0, 40, 80}, 0.4, 0}};
    f.detections["b"] = {{{10, 10, 40, 80}, 0.8, 0}, {{12, 10, 40, 80}, 0.7, 0}};
    f.detections["c"] = {{{0, 0, 40, 80}, 0.6, 0}};
    return f;
}

}  // namespace pedscan::fixtures
