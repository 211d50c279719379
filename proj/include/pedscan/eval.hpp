#pragma once

#include "pedscan/detector.hpp"
#include "pedscan/image.hpp"

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pedscan {

/// Coverage: intersection strictly greater than half the labelled area.
/// Iou: PASCAL-style intersection-over-union strictly greater than 0.5.
enum class MatchRule { Coverage, Iou };

std::string_view match_rule_name(MatchRule rule);
MatchRule parse_match_rule(std::string_view name);

bool is_match(const Rect& label, const Rect& det, MatchRule rule = MatchRule::Coverage);

/// Indices into the label and detection inputs of one image.
struct MatchResult {
    std::vector<std::pair<std::size_t, std::size_t>> matches;  // (label, detection)
    std::vector<std::size_t> false_positives;
    std::vector<std::size_t> missed;
};

/// Greedy one-to-one assignment: detections in descending score order each
/// claim the best-overlapping unclaimed label they match.
MatchResult match_one_image(std::span<const Rect> labels, std::span<const Detection> detections,
                            MatchRule rule = MatchRule::Coverage);

struct AnnotatedImage {
    std::string image_id;
    std::vector<Rect> labels;
};

struct EvalReport {
    MatchRule rule = MatchRule::Coverage;
    std::size_t n_images = 0;
    std::size_t total_fp = 0;
    std::size_t total_missed = 0;
    std::size_t total_labels = 0;
    std::size_t match_count = 0;
    double avg_fppi = 0.0;
    double miss_rate = 0.0;
    double avg_time_ms = 0.0;
};

/// Aggregates match_one_image over the corpus. Detections keyed by an image id
/// absent from `dataset` raise std::invalid_argument. `timings_ms` may be empty.
EvalReport evaluate(std::span<const AnnotatedImage> dataset,
                    const std::map<std::string, std::vector<Detection>>& detections,
                    const std::map<std::string, double>& timings_ms = {}, MatchRule rule = MatchRule::Coverage);

struct SpeedQualityPoint {
    double avg_time_ms = 0.0;
    std::size_t match_count = 0;
};

inline SpeedQualityPoint speed_quality_point(const EvalReport& report)
{
    return {report.avg_time_ms, report.match_count};
}

/// `model,rule,n_images,avg_fppi,miss_rate,match_count,avg_time_ms`
std::string report_csv_header();
std::string report_csv_row(std::string_view model, const EvalReport& report);

std::string series_csv_header();
std::string series_csv_row(std::string_view model, const EvalReport& report);

}  // namespace pedscan
