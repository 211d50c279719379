#include "pedscan/dataset.hpp"
#include "pedscan/errors.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>
#include <stdexcept>

namespace pedscan {

namespace {

namespace pt = boost::property_tree;

int voc_coordinate(const pt::ptree& box, const char* key)
{
    const auto text = box.get_optional<std::string>(key);
    if (!text) throw FormatError(std::string("VOC bndbox missing <") + key + ">");
    try {
        return static_cast<int>(std::lround(std::stod(*text)));
    } catch (const std::exception&) {
        throw FormatError(std::string("VOC bndbox <") + key + "> is not a number: " + *text);
    }
}

// Converts inclusive corners to a Rect clamped into [0, width) x [0, height) when the size is known.
Rect inclusive_corners_to_rect(int x0, int y0, int x1, int y1, int width, int height)
{
    if (width > 0 && height > 0) {
        x0 = std::clamp(x0, 0, width - 1);
        y0 = std::clamp(y0, 0, height - 1);
        x1 = std::clamp(x1, 0, width - 1);
        y1 = std::clamp(y1, 0, height - 1);
    }
    return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

ImageAnnotation parse_voc_document(std::string_view xml_text)
{
    pt::ptree tree;
    try {
        std::istringstream in{std::string(xml_text)};
        pt::read_xml(in, tree);
    } catch (const pt::xml_parser_error& e) {
        throw FormatError(std::string("malformed VOC XML: ") + e.what());
    }
    const auto root = tree.get_child_optional("annotation");
    if (!root) throw FormatError("VOC XML has no <annotation> root");

    ImageAnnotation ann;
    ann.image_id = root->get<std::string>("filename", "");
    const auto size = root->get_child_optional("size");
    if (!size) throw FormatError("VOC annotation missing <size>");
    ann.width = size->get<int>("width", 0);
    ann.height = size->get<int>("height", 0);
    if (ann.width <= 0 || ann.height <= 0) throw FormatError("VOC <size> has no positive width/height");

    for (const auto& [tag, obj] : *root) {
        if (tag != "object") continue;
        if (trim(obj.get<std::string>("name", "")) != "person") continue;
        const auto box = obj.get_child_optional("bndbox");
        if (!box) throw FormatError("VOC person object without <bndbox>");
        const int xmin = voc_coordinate(*box, "xmin");
        const int ymin = voc_coordinate(*box, "ymin");
        const int xmax = voc_coordinate(*box, "xmax");
        const int ymax = voc_coordinate(*box, "ymax");
        if (xmax <= xmin || ymax <= ymin) throw FormatError("degenerate VOC box");
        GroundTruthBox gt;
        gt.image_id = ann.image_id;
        gt.rect = inclusive_corners_to_rect(xmin - 1, ymin - 1, xmax - 1, ymax - 1, ann.width, ann.height);
        gt.difficult = obj.get<int>("difficult", 0) != 0;
        ann.boxes.push_back(std::move(gt));
    }
    return ann;
}

std::vector<GroundTruthBox> parse_voc_annotation(std::string_view xml_text)
{
    return parse_voc_document(xml_text).boxes;
}

ImageAnnotation parse_inria_document(std::string_view text)
{
    static const std::regex kBox(R"(\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)\s*-\s*\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\))");
    static const std::regex kSize(R"(Image size[^:]*:\s*(\d+)\s*x\s*(\d+))");
    static const std::regex kFile(R"(Image filename\s*:\s*\"([^\"]*)\")");
    static const std::regex kClass(R"rx(object\s+\d+\s+"([^"]*)")rx");

    ImageAnnotation ann;
    std::vector<std::array<int, 4>> corners;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty() && line.front() == '#') continue;
        std::smatch m;
        if (std::regex_search(line, m, kFile)) {
            ann.image_id = m[1];
            continue;
        }
        if (std::regex_search(line, m, kSize)) {
            ann.width = std::stoi(m[1]);
            ann.height = std::stoi(m[2]);
            continue;
        }
        if (line.find("Bounding box") == std::string::npos) continue;
        if (std::regex_search(line, m, kClass) && m[1] != "PASperson") continue;
        if (!std::regex_search(line, m, kBox)) throw FormatError("unparseable INRIA bounding box line: " + line);
        corners.push_back({std::stoi(m[1]), std::stoi(m[2]), std::stoi(m[3]), std::stoi(m[4])});
    }
    for (const auto& [x0, y0, x1, y1] : corners) {
        if (x1 < x0 || y1 < y0) throw FormatError("degenerate INRIA bounding box");
        ann.boxes.push_back({ann.image_id, inclusive_corners_to_rect(x0, y0, x1, y1, ann.width, ann.height), false});
    }
    return ann;
}

std::vector<GroundTruthBox> parse_inria_annotation(std::string_view text) { return parse_inria_document(text).boxes; }

ImageAnnotation parse_annotation_file(const std::filesystem::path& path)
{
    const auto text = read_file(path);
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".xml" ? parse_voc_document(text) : parse_inria_document(text);
}

std::vector<GrayImage> extract_positives(const GrayImage& img, std::span<const GroundTruthBox> boxes, int window_w,
                                         int window_h)
{
    std::vector<GrayImage> out;
    out.reserve(boxes.size());
    for (const auto& b : boxes) {
        if (!img.contains(b.rect)) throw std::out_of_range("person box outside image " + b.image_id);
        out.push_back(resize(crop(img, b.rect), window_w, window_h));
    }
    return out;
}

std::vector<NegativeWindow> plan_negative_windows(std::span<const std::pair<int, int>> image_sizes,
                                                  std::span<const std::vector<GroundTruthBox>> boxes_per_image,
                                                  std::size_t count, std::uint64_t seed, int window_w, int window_h)
{
    if (count == 0) return {};
    if (boxes_per_image.size() != image_sizes.size()) {
        throw std::invalid_argument("negative sampler needs one box list per image");
    }
    constexpr double kMinScale = 0.5;
    constexpr double kMaxScale = 2.0;
    const int min_w = static_cast<int>(std::lround(window_w * kMinScale));
    const int min_h = static_cast<int>(std::lround(window_h * kMinScale));
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < image_sizes.size(); ++i) {
        if (image_sizes[i].first >= min_w && image_sizes[i].second >= min_h) eligible.push_back(i);
    }
    if (eligible.empty()) throw std::invalid_argument("no image is large enough to host a negative window");

    std::mt19937_64 rng(seed);
    auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

    std::vector<NegativeWindow> plan;
    plan.reserve(count);
    const std::size_t max_attempts = 10000 + 1000 * count;
    for (std::size_t attempt = 0; plan.size() < count; ++attempt) {
        if (attempt >= max_attempts) throw std::runtime_error("could not find enough person-free negative windows");
        const std::size_t idx = eligible[rng() % eligible.size()];
        const double scale = kMinScale + (kMaxScale - kMinScale) * unit();
        const int w = static_cast<int>(std::lround(window_w * scale));
        const int h = static_cast<int>(std::lround(window_h * scale));
        const auto [img_w, img_h] = image_sizes[idx];
        if (w > img_w || h > img_h) continue;
        const Rect win{static_cast<int>(rng() % static_cast<std::uint64_t>(img_w - w + 1)),
                       static_cast<int>(rng() % static_cast<std::uint64_t>(img_h - h + 1)), w, h};
        const bool clear = std::all_of(boxes_per_image[idx].begin(), boxes_per_image[idx].end(), [&](const auto& b) {
            return static_cast<double>(intersection_area(win, b.rect)) < kNegativeOverlapLimit * win.area();
        });
        if (clear) plan.push_back({idx, win});
    }
    return plan;
}

std::vector<GrayImage> sample_negatives(std::span<const GrayImage> images,
                                        std::span<const std::vector<GroundTruthBox>> boxes_per_image,
                                        std::size_t count, std::uint64_t seed, int window_w, int window_h)
{
    std::vector<std::pair<int, int>> sizes;
    sizes.reserve(images.size());
    for (const auto& img : images) sizes.emplace_back(img.width(), img.height());
    std::vector<GrayImage> out;
    for (const auto& nw : plan_negative_windows(sizes, boxes_per_image, count, seed, window_w, window_h)) {
        out.push_back(resize(crop(images[nw.image], nw.rect), window_w, window_h));
    }
    return out;
}

std::string_view split_name(Split split) { return split == Split::Train ? "train" : "test"; }

std::vector<ManifestEntry> parse_manifest(std::string_view text, const std::filesystem::path& base_dir)
{
    std::vector<ManifestEntry> entries;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty() || line.front() == '#') continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (;;) {
            const auto tab = line.find('\t', start);
            fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        if (fields.size() < 2 || fields.size() > 3) {
            throw FormatError("manifest line " + std::to_string(line_no) + ": expected 3 tab-separated fields");
        }
        ManifestEntry e;
        if (fields[0] == "train") {
            e.split = Split::Train;
        } else if (fields[0] == "test") {
            e.split = Split::Test;
        } else {
            throw FormatError("manifest line " + std::to_string(line_no) + ": unknown split '" + fields[0] + "'");
        }
        if (fields[1].empty()) throw FormatError("manifest line " + std::to_string(line_no) + ": empty image path");
        e.image_path = resolve(fields[1]);
        if (fields.size() == 3 && !fields[2].empty() && fields[2] != "-") e.annotation_path = resolve(fields[2]);
        entries.push_back(std::move(e));
    }
    return entries;
}

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path)
{
    return parse_manifest(read_file(path), path.parent_path());
}

DatasetStats stats(std::span<const ImageAnnotation> train, std::span<const ImageAnnotation> test,
                   DifficultPolicy policy)
{
    auto count = [&](std::span<const ImageAnnotation> split, std::size_t& images, std::size_t& labels) {
        for (const auto& ann : split) {
            const auto n = static_cast<std::size_t>(std::count_if(ann.boxes.begin(), ann.boxes.end(), [&](const auto& b) {
                return policy == DifficultPolicy::Keep || !b.difficult;
            }));
            labels += n;
            images += n > 0 ? 1 : 0;
        }
    };
    DatasetStats s;
    count(train, s.n_train_images, s.n_train_labels);
    count(test, s.n_test_images, s.n_test_labels);
    s.n_total = s.n_train_labels + s.n_test_labels;
    return s;
}

}  // namespace pedscan
