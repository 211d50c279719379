#pragma once

#include "pedscan/hog.hpp"
#include "pedscan/image.hpp"
#include "pedscan/lbp.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace pedscan {

struct TrainConfig {
    double lambda = 1e-4;         // SVM regularization
    int epochs = 20;              // SVM passes over the data
    int n_rounds = 50;            // AdaBoost rounds
    int bootstrap_rounds = 2;     // hard-negative mining rounds after the first pass
    int negatives_per_round = 0;  // mining cap; 0 = initial negative count
    double target_fppi = 0.0;     // stop mining once background FPPI is at or below this
    std::uint64_t seed = 1;
    std::vector<int> lbp_scales{2};

    void validate() const;
};

struct LinearSvmModel {
    std::vector<double> weights;
    double bias = 0.0;
    double lambda = 0.0;
    int epochs = 0;
    std::uint64_t seed = 0;

    friend bool operator==(const LinearSvmModel&, const LinearSvmModel&) = default;
};

/// Pegasos primal subgradient descent on hinge loss + (lambda/2)(|w|^2 + b^2).
/// The bias is trained as the weight of a constant 1 feature. Samples are
/// reshuffled every epoch from `cfg.seed`.
LinearSvmModel svm_train(std::span<const HogDescriptor> pos, std::span<const HogDescriptor> neg,
                         const TrainConfig& cfg);

/// w.x + b.
double svm_score(const LinearSvmModel& model, std::span<const double> x);

/// Regularized hinge objective the trainer minimizes.
double svm_objective(const LinearSvmModel& model, std::span<const HogDescriptor> pos,
                     std::span<const HogDescriptor> neg, double lambda);

struct WeakLearner {
    LbpFeatureId feature;
    std::array<std::int8_t, 256> votes{};  // +1 / -1 per code

    friend bool operator==(const WeakLearner&, const WeakLearner&) = default;
};

struct AdaBoostRound {
    WeakLearner learner;
    double alpha = 0.0;

    friend bool operator==(const AdaBoostRound&, const AdaBoostRound&) = default;
};

struct AdaBoostModel {
    int window_w = 32;
    int window_h = 64;
    std::vector<AdaBoostRound> rounds;
    double decision_threshold = 0.0;

    friend bool operator==(const AdaBoostModel&, const AdaBoostModel&) = default;
};

/// Per-round diagnostics recorded by adaboost_train.
struct AdaBoostTrace {
    std::vector<double> weighted_error;
    std::vector<double> alpha;
    std::vector<double> training_error;  // strong classifier after each round
    std::vector<double> exp_loss;        // mean exp(-y F) after each round
    std::vector<double> weight_sum;      // sample weights after renormalization
};

/// alpha = 0.5 * ln((1 - eps) / eps).
double adaboost_alpha(double weighted_error);

/// Discrete AdaBoost over 256-entry lookup-table weak learners on single
/// batch-LBP codes. Stops early when no learner beats chance or one is perfect.
AdaBoostModel adaboost_train(std::span<const GrayImage> pos, std::span<const GrayImage> neg,
                             std::span<const LbpFeatureId> pool, const TrainConfig& cfg,
                             AdaBoostTrace* trace = nullptr);

/// Sum of alpha * vote over rounds for a window-sized image.
double adaboost_score(const AdaBoostModel& model, const GrayImage& window);

/// Same score for the window at (ox, oy) inside the integral image's source.
inline double adaboost_score_at(const AdaBoostModel& model, const IntegralImage& ii, int ox, int oy)
{
    double score = 0.0;
    for (const auto& r : model.rounds) score += r.alpha * r.learner.votes[feature_code(ii, ox, oy, r.learner.feature)];
    return score;
}

struct HogSvmModel {
    HogConfig hog;
    LinearSvmModel svm;

    friend bool operator==(const HogSvmModel&, const HogSvmModel&) = default;
};

struct LbpBoostModel {
    std::vector<int> scales{2};
    AdaBoostModel boost;

    friend bool operator==(const LbpBoostModel&, const LbpBoostModel&) = default;
};

using DetectorModel = std::variant<HogSvmModel, LbpBoostModel>;

enum class ModelType { HogSvm, LbpAdaBoost };

std::string_view model_type_name(ModelType type);
ModelType parse_model_type(std::string_view name);
ModelType model_type(const DetectorModel& model);
std::pair<int, int> model_window(const DetectorModel& model);
/// Score threshold the model was trained for (0 for the SVM).
double model_default_threshold(const DetectorModel& model);

/// Score of a window-sized patch under either model.
double score_patch(const DetectorModel& model, const GrayImage& patch, const GradientLut* lut = nullptr);

/// Trains a model of `type` on window-sized patches.
DetectorModel train_model(ModelType type, std::span<const GrayImage> pos, std::span<const GrayImage> neg,
                          const TrainConfig& cfg, const HogConfig& hog = {});

/// Fraction of patches misclassified with score > threshold as positive.
double training_error(const DetectorModel& model, std::span<const GrayImage> pos, std::span<const GrayImage> neg,
                      double threshold);

}  // namespace pedscan
