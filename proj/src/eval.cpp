#include "pedscan/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace pedscan {

std::string_view match_rule_name(MatchRule rule) { return rule == MatchRule::Coverage ? "coverage" : "iou"; }

MatchRule parse_match_rule(std::string_view name)
{
    if (name == "coverage") return MatchRule::Coverage;
    if (name == "iou") return MatchRule::Iou;
    throw std::invalid_argument("unknown match rule '" + std::string(name) + "'");
}

bool is_match(const Rect& label, const Rect& det, MatchRule rule)
{
    const long long inter = intersection_area(label, det);
    if (rule == MatchRule::Coverage) return 2 * inter > label.area();
    const long long uni = label.area() + det.area() - inter;
    return 2 * inter > uni;
}

namespace {

// Quantity a detection maximizes when choosing among the labels it matches.
double overlap_score(const Rect& label, const Rect& det, MatchRule rule)
{
    return rule == MatchRule::Coverage ? static_cast<double>(intersection_area(label, det)) : iou(label, det);
}

}  // namespace

MatchResult match_one_image(std::span<const Rect> labels, std::span<const Detection> detections, MatchRule rule)
{
    std::vector<std::size_t> order(detections.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return detections[a].score > detections[b].score; });

    MatchResult result;
    std::vector<bool> claimed(labels.size(), false);
    for (const std::size_t d : order) {
        std::size_t best = labels.size();
        double best_overlap = -1.0;
        for (std::size_t l = 0; l < labels.size(); ++l) {
            if (claimed[l] || !is_match(labels[l], detections[d].rect, rule)) continue;
            const double ov = overlap_score(labels[l], detections[d].rect, rule);
            if (ov > best_overlap) {
                best_overlap = ov;
                best = l;
            }
        }
        if (best < labels.size()) {
            claimed[best] = true;
            result.matches.emplace_back(best, d);
        } else {
            result.false_positives.push_back(d);
        }
    }
    std::sort(result.false_positives.begin(), result.false_positives.end());
    for (std::size_t l = 0; l < labels.size(); ++l) {
        if (!claimed[l]) result.missed.push_back(l);
    }
    return result;
}

EvalReport evaluate(std::span<const AnnotatedImage> dataset,
                    const std::map<std::string, std::vector<Detection>>& detections,
                    const std::map<std::string, double>& timings_ms, MatchRule rule)
{
    std::map<std::string, const AnnotatedImage*> by_id;
    for (const auto& img : dataset) by_id.emplace(img.image_id, &img);
    for (const auto& [id, dets] : detections) {
        if (!by_id.contains(id)) throw std::invalid_argument("detections reference unknown image '" + id + "'");
    }

    EvalReport report;
    report.rule = rule;
    report.n_images = dataset.size();
    static const std::vector<Detection> kNone;
    for (const auto& img : dataset) {
        const auto it = detections.find(img.image_id);
        const auto& dets = it != detections.end() ? it->second : kNone;
        const auto m = match_one_image(img.labels, dets, rule);
        report.total_fp += m.false_positives.size();
        report.total_missed += m.missed.size();
        report.total_labels += img.labels.size();
        report.match_count += m.matches.size();
    }
    if (report.n_images > 0) report.avg_fppi = static_cast<double>(report.total_fp) / static_cast<double>(report.n_images);
    if (report.total_labels > 0) {
        report.miss_rate = static_cast<double>(report.total_missed) / static_cast<double>(report.total_labels);
    }
    if (!timings_ms.empty()) {
        double total = 0.0;
        for (const auto& [id, ms] : timings_ms) total += ms;
        report.avg_time_ms = total / static_cast<double>(timings_ms.size());
    }
    return report;
}

namespace {

std::string fixed(double v, int digits)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace

std::string report_csv_header() { return "model,rule,n_images,avg_fppi,miss_rate,match_count,avg_time_ms"; }

std::string report_csv_row(std::string_view model, const EvalReport& r)
{
    return std::string(model) + "," + std::string(match_rule_name(r.rule)) + "," + std::to_string(r.n_images) + "," +
           fixed(r.avg_fppi, 6) + "," + fixed(r.miss_rate, 6) + "," + std::to_string(r.match_count) + "," +
           fixed(r.avg_time_ms, 3);
}

std::string series_csv_header() { return "model,rule,avg_time_ms,match_count"; }

std::string series_csv_row(std::string_view model, const EvalReport& r)
{
    const auto p = speed_quality_point(r);
    return std::string(model) + "," + std::string(match_rule_name(r.rule)) + "," + fixed(p.avg_time_ms, 3) + "," +
           std::to_string(p.match_count);
}

}  // namespace pedscan
