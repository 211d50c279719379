#pragma once

#include "pedscan/image.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pedscan {

/// A labelled person in original image coordinates.
struct GroundTruthBox {
    std::string image_id;
    Rect rect;
    bool difficult = false;

    friend bool operator==(const GroundTruthBox&, const GroundTruthBox&) = default;
};

/// Person boxes of one annotation file plus the image size it declares
/// (0 x 0 when the format did not state one).
struct ImageAnnotation {
    std::string image_id;
    int width = 0;
    int height = 0;
    std::vector<GroundTruthBox> boxes;
};

/// VOC 2007/2012 XML. Keeps only objects named "person"; converts the 1-based
/// inclusive (xmin, ymin, xmax, ymax) corners to Rect and clamps into the declared size.
/// Throws FormatError on malformed XML, a missing <size>, or xmax <= xmin / ymax <= ymin.
ImageAnnotation parse_voc_document(std::string_view xml_text);
std::vector<GroundTruthBox> parse_voc_annotation(std::string_view xml_text);

/// INRIA plain-text annotation. One box per "Bounding box" line of a PASperson
/// object; corners are inclusive, so w = xmax - xmin + 1.
ImageAnnotation parse_inria_document(std::string_view text);
std::vector<GroundTruthBox> parse_inria_annotation(std::string_view text);

/// Parses either format, chosen by the path extension (.xml = VOC).
ImageAnnotation parse_annotation_file(const std::filesystem::path& path);

/// Crops each box and resizes it to window_w x window_h, ignoring aspect ratio.
std::vector<GrayImage> extract_positives(const GrayImage& img, std::span<const GroundTruthBox> boxes,
                                         int window_w = 32, int window_h = 64);

/// Uniformly random windows (random image, random scale in [0.5, 2] of the
/// window, random position) whose overlap with every person box is below 20%
/// of the window area, resized to the window size. Deterministic in `seed`.
std::vector<GrayImage> sample_negatives(std::span<const GrayImage> images,
                                        std::span<const std::vector<GroundTruthBox>> boxes_per_image,
                                        std::size_t count, std::uint64_t seed, int window_w = 32,
                                        int window_h = 64);

inline constexpr double kNegativeOverlapLimit = 0.2;

/// A sampled negative window before cropping.
struct NegativeWindow {
    std::size_t image = 0;
    Rect rect;
};

/// The window plan behind sample_negatives; needs only image sizes, so callers
/// can decode each image once and crop its planned windows.
std::vector<NegativeWindow> plan_negative_windows(std::span<const std::pair<int, int>> image_sizes,
                                                  std::span<const std::vector<GroundTruthBox>> boxes_per_image,
                                                  std::size_t count, std::uint64_t seed, int window_w = 32,
                                                  int window_h = 64);

enum class Split { Train, Test };

std::string_view split_name(Split split);

/// One manifest line: `<split>\t<image-path>\t<annotation-path>`. An annotation
/// path of "-" (or empty) marks a person-free image. Relative paths are
/// resolved against the manifest's directory.
struct ManifestEntry {
    Split split = Split::Train;
    std::filesystem::path image_path;
    std::filesystem::path annotation_path;

    [[nodiscard]] bool person_free() const { return annotation_path.empty(); }
};

std::vector<ManifestEntry> parse_manifest(std::string_view text, const std::filesystem::path& base_dir = {});
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);

/// Whether VOC objects flagged difficult count toward label statistics.
enum class DifficultPolicy { Keep, Drop };

/// Counts of images containing at least one counted person label, and of the labels.
/// n_total is the corpus-wide label count (train + test).
struct DatasetStats {
    std::size_t n_train_images = 0;
    std::size_t n_train_labels = 0;
    std::size_t n_test_images = 0;
    std::size_t n_test_labels = 0;
    std::size_t n_total = 0;

    friend bool operator==(const DatasetStats&, const DatasetStats&) = default;
};

DatasetStats stats(std::span<const ImageAnnotation> train, std::span<const ImageAnnotation> test,
                   DifficultPolicy policy = DifficultPolicy::Drop);

}  // namespace pedscan
