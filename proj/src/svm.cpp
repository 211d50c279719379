#include "pedscan/classify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace pedscan {

void TrainConfig::validate() const
{
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be > 0");
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (n_rounds < 1) throw std::invalid_argument("AdaBoost rounds must be >= 1");
    if (bootstrap_rounds < 0) throw std::invalid_argument("bootstrap rounds must be >= 0");
    if (negatives_per_round < 0) throw std::invalid_argument("negatives per round must be >= 0");
    if (lbp_scales.empty()) throw std::invalid_argument("at least one LBP scale is required");
}

namespace {

struct Sample {
    const HogDescriptor* x;
    double y;
};

void check_samples(std::span<const HogDescriptor> set, std::size_t dim)
{
    for (const auto& x : set) {
        if (x.size() != dim) throw std::invalid_argument("SVM training descriptors differ in length");
        for (const double v : x) {
            if (!std::isfinite(v)) throw std::invalid_argument("non-finite descriptor entry");
        }
    }
}

}  // namespace

LinearSvmModel svm_train(std::span<const HogDescriptor> pos, std::span<const HogDescriptor> neg,
                         const TrainConfig& cfg)
{
    cfg.validate();
    if (pos.empty() || neg.empty()) throw std::invalid_argument("SVM training needs at least one sample per class");
    const std::size_t dim = pos.front().size();
    check_samples(pos, dim);
    check_samples(neg, dim);

    std::vector<Sample> samples;
    samples.reserve(pos.size() + neg.size());
    for (const auto& x : pos) samples.push_back({&x, 1.0});
    for (const auto& x : neg) samples.push_back({&x, -1.0});

    std::vector<double> w(dim, 0.0);
    double b = 0.0;
    const double radius = 1.0 / std::sqrt(cfg.lambda);
    std::mt19937_64 rng(cfg.seed);
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    std::uint64_t t = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        // Fisher-Yates with raw engine output keeps the order identical across standard libraries.
        for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng() % (i + 1)]);

        for (const std::size_t idx : order) {
            ++t;
            const Sample& s = samples[idx];
            const double eta = 1.0 / (cfg.lambda * static_cast<double>(t));
            const double margin = s.y * (std::inner_product(w.begin(), w.end(), s.x->begin(), 0.0) + b);
            const double shrink = 1.0 - eta * cfg.lambda;
            for (double& v : w) v *= shrink;
            b *= shrink;
            if (margin < 1.0) {
                const double step = eta * s.y;
                for (std::size_t k = 0; k < dim; ++k) w[k] += step * (*s.x)[k];
                b += step;
            }
            const double norm = std::sqrt(std::inner_product(w.begin(), w.end(), w.begin(), 0.0) + b * b);
            if (norm > radius) {
                const double scale = radius / norm;
                for (double& v : w) v *= scale;
                b *= scale;
            }
        }
    }
    return {std::move(w), b, cfg.lambda, cfg.epochs, cfg.seed};
}

double svm_score(const LinearSvmModel& model, std::span<const double> x)
{
    if (x.size() != model.weights.size()) {
        throw std::invalid_argument("descriptor length " + std::to_string(x.size()) + " does not match SVM weights " +
                                    std::to_string(model.weights.size()));
    }
    return std::inner_product(model.weights.begin(), model.weights.end(), x.begin(), 0.0) + model.bias;
}

double svm_objective(const LinearSvmModel& model, std::span<const HogDescriptor> pos,
                     std::span<const HogDescriptor> neg, double lambda)
{
    double hinge = 0.0;
    for (const auto& x : pos) hinge += std::max(0.0, 1.0 - svm_score(model, x));
    for (const auto& x : neg) hinge += std::max(0.0, 1.0 + svm_score(model, x));
    const double n = static_cast<double>(pos.size() + neg.size());
    const double reg = std::inner_product(model.weights.begin(), model.weights.end(), model.weights.begin(), 0.0) +
                       model.bias * model.bias;
    return 0.5 * lambda * reg + (n > 0 ? hinge / n : 0.0);
}

}  // namespace pedscan
