#pragma once

#include "pedscan/eval.hpp"
#include "pedscan/image.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace pedscan::fixtures {

/// Uniform random pixels.
GrayImage random_image(int w, int h, std::uint64_t seed);

/// Smooth clutter: coarse random noise upsampled bilinearly.
GrayImage clutter(int w, int h, std::uint64_t seed, int coarseness = 8);

/// A bright stick figure (head, torso, legs) on a dark noisy ground, with
/// small seeded jitter in position and contrast.
GrayImage pedestrian(std::uint64_t seed, int w = 32, int h = 64);

/// Person-free scene: clutter plus tall bright bars and blobs that resemble
/// parts of a figure, so an untuned detector fires on it.
GrayImage distractor_scene(int w, int h, std::uint64_t seed);

/// Copies `src` into `dst` with its top-left at (x, y).
void paste(GrayImage& dst, const GrayImage& src, int x, int y);

/// A fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

struct CorpusSpec {
    int train_images = 6;
    int test_images = 3;
    int background_images = 2;
    int width = 160;
    int height = 128;
    std::uint64_t seed = 7;
};

struct Corpus {
    std::filesystem::path manifest;
    std::vector<std::filesystem::path> test_images;
    std::vector<Rect> test_labels;  // one planted figure per test image
};

/// Writes PGM images with one or two planted figures each, INRIA-style annotations,
/// and a manifest. Background images are person-free train entries.
Corpus write_corpus(const std::filesystem::path& dir, const CorpusSpec& spec = {});

/// Three hand-built images with 4 labels: one label missed, two false positives
/// (one of them a duplicate on an already matched label).
struct EvalFixture {
    std::vector<AnnotatedImage> dataset;
    std::map<std::string, std::vector<Detection>> detections;
};
EvalFixture eval_fixture();

}  // namespace pedscan::fixtures
