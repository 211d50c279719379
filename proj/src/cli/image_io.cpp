#include "pedscan/cli/image_io.hpp"
#include "pedscan/errors.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <fstream>
#include <vector>

namespace pedscan::cli {

GrayImage load_gray(const std::filesystem::path& path)
{
    const cv::Mat mat = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
    if (mat.empty()) throw FormatError("cannot decode image " + path.string());
    if (mat.depth() != CV_8U) throw FormatError("only 8-bit images are supported: " + path.string());

    const int w = mat.cols;
    const int h = mat.rows;
    const int channels = mat.channels();
    if (channels == 1) {
        std::vector<std::uint8_t> data(static_cast<std::size_t>(w) * h);
        for (int y = 0; y < h; ++y) {
            const auto* src = mat.ptr<std::uint8_t>(y);
            std::copy(src, src + w, data.begin() + static_cast<std::ptrdiff_t>(y) * w);
        }
        return GrayImage(w, h, std::move(data));
    }
    if (channels != 3 && channels != 4) throw FormatError("unsupported channel count in " + path.string());

    // OpenCV stores BGR(A); reorder to interleaved RGB.
    std::vector<std::uint8_t> rgb(static_cast<std::size_t>(w) * h * 3);
    for (int y = 0; y < h; ++y) {
        const auto* src = mat.ptr<std::uint8_t>(y);
        auto* dst = rgb.data() + static_cast<std::size_t>(y) * w * 3;
        for (int x = 0; x < w; ++x) {
            dst[3 * x] = src[channels * x + 2];
            dst[3 * x + 1] = src[channels * x + 1];
            dst[3 * x + 2] = src[channels * x];
        }
    }
    return to_grayscale(w, h, rgb);
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path.string());
    out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
    const auto px = img.pixels();
    out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
    if (!out) throw FormatError("short write to " + path.string());
}

}  // namespace pedscan::cli
