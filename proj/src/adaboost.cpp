#include "pedscan/classify.hpp"
#include "pedscan/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pedscan {

double adaboost_alpha(double weighted_error) { return 0.5 * std::log((1.0 - weighted_error) / weighted_error); }

namespace {

struct Candidate {
    double error = std::numeric_limits<double>::infinity();
    std::array<std::int8_t, 256> votes{};
};

// Weighted-majority vote table for one feature; ties vote -1.
Candidate fit_lookup_table(std::span<const std::uint8_t> codes, std::span<const double> weights,
                           std::span<const std::int8_t> labels)
{
    std::array<double, 256> wpos{};
    std::array<double, 256> wneg{};
    for (std::size_t i = 0; i < codes.size(); ++i) {
        (labels[i] > 0 ? wpos : wneg)[codes[i]] += weights[i];
    }
    Candidate c;
    c.error = 0.0;
    for (std::size_t k = 0; k < 256; ++k) {
        const bool positive = wpos[k] > wneg[k];
        c.votes[k] = positive ? 1 : -1;
        c.error += positive ? wneg[k] : wpos[k];
    }
    return c;
}

}  // namespace

AdaBoostModel adaboost_train(std::span<const GrayImage> pos, std::span<const GrayImage> neg,
                             std::span<const LbpFeatureId> pool, const TrainConfig& cfg, AdaBoostTrace* trace)
{
    cfg.validate();
    if (pos.empty() || neg.empty()) throw std::invalid_argument("AdaBoost training needs at least one sample per class");
    if (pool.empty()) throw std::invalid_argument("AdaBoost feature pool is empty");

    const int ww = pos.front().width();
    const int wh = pos.front().height();
    const std::size_t n = pos.size() + neg.size();
    std::vector<const GrayImage*> samples;
    samples.reserve(n);
    for (const auto& p : pos) samples.push_back(&p);
    for (const auto& p : neg) samples.push_back(&p);
    for (const auto* s : samples) {
        if (s->width() != ww || s->height() != wh) throw std::invalid_argument("AdaBoost samples differ in size");
    }
    if (std::all_of(samples.begin(), samples.end(), [&](const GrayImage* s) { return *s == *samples.front(); })) {
        throw std::invalid_argument("AdaBoost samples are all identical");
    }
    for (const auto& f : pool) {
        if (f.scale < 1 || f.x < 0 || f.y < 0 || f.x + 3 * f.scale > ww || f.y + 3 * f.scale > wh) {
            throw std::invalid_argument("LBP feature does not fit in the training window");
        }
    }

    std::vector<std::int8_t> labels(n);
    std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(pos.size()), std::int8_t{1});
    std::fill(labels.begin() + static_cast<std::ptrdiff_t>(pos.size()), labels.end(), std::int8_t{-1});

    // codes[f * n + i]: code of feature f on sample i.
    const unsigned threads = worker_count();
    std::vector<std::uint8_t> codes(pool.size() * n);
    parallel_for(n, threads, [&](std::size_t i) {
        const IntegralImage ii(*samples[i]);
        for (std::size_t f = 0; f < pool.size(); ++f) codes[f * n + i] = feature_code(ii, 0, 0, pool[f]);
    });

    std::vector<double> weights(n, 1.0 / static_cast<double>(n));
    std::vector<double> strong(n, 0.0);
    AdaBoostModel model;
    model.window_w = ww;
    model.window_h = wh;

    std::vector<Candidate> candidates(pool.size());
    for (int round = 0; round < cfg.n_rounds; ++round) {
        parallel_for(pool.size(), threads, [&](std::size_t f) {
            candidates[f] = fit_lookup_table({codes.data() + f * n, n}, weights, labels);
        });
        std::size_t best = 0;
        for (std::size_t f = 1; f < pool.size(); ++f) {
            if (candidates[f].error < candidates[best].error) best = f;
        }

        double eps = candidates[best].error;
        if (eps >= 0.5) {
            if (model.rounds.empty()) throw std::invalid_argument("no weak learner beats chance on this training set");
            break;
        }
        const bool perfect = eps <= 0.0;
        if (perfect) eps = 1.0 / (2.0 * static_cast<double>(n));
        const double alpha = adaboost_alpha(eps);

        WeakLearner learner{pool[best], candidates[best].votes};
        model.rounds.push_back({learner, alpha});

        const std::uint8_t* fc = codes.data() + best * n;
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double h = learner.votes[fc[i]];
            strong[i] += alpha * h;
            weights[i] *= std::exp(-alpha * labels[i] * h);
            sum += weights[i];
        }
        for (double& w : weights) w /= sum;

        if (trace) {
            std::size_t wrong = 0;
            double loss = 0.0;
            double wsum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const bool predicted_pos = strong[i] > model.decision_threshold;
                wrong += predicted_pos != (labels[i] > 0) ? 1 : 0;
                loss += std::exp(-labels[i] * strong[i]);
                wsum += weights[i];
            }
            trace->weighted_error.push_back(candidates[best].error);
            trace->alpha.push_back(alpha);
            trace->training_error.push_back(static_cast<double>(wrong) / static_cast<double>(n));
            trace->exp_loss.push_back(loss / static_cast<double>(n));
            trace->weight_sum.push_back(wsum);
        }
        if (perfect) break;
    }
    return model;
}

double adaboost_score(const AdaBoostModel& model, const GrayImage& window)
{
    if (window.width() != model.window_w || window.height() != model.window_h) {
        throw std::invalid_argument("window size does not match the AdaBoost model");
    }
    const IntegralImage ii(window);
    return adaboost_score_at(model, ii, 0, 0);
}

}  // namespace pedscan
