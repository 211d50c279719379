#include "pedscan/classify.hpp"
#include "pedscan/parallel.hpp"

#include <optional>
#include <stdexcept>
#include <string>

namespace pedscan {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::string_view model_type_name(ModelType type)
{
    return type == ModelType::HogSvm ? "hog_svm" : "lbp_adaboost";
}

ModelType parse_model_type(std::string_view name)
{
    if (name == "hog_svm") return ModelType::HogSvm;
    if (name == "lbp_adaboost") return ModelType::LbpAdaBoost;
    throw std::invalid_argument("unknown model type '" + std::string(name) + "'");
}

ModelType model_type(const DetectorModel& model)
{
    return std::holds_alternative<HogSvmModel>(model) ? ModelType::HogSvm : ModelType::LbpAdaBoost;
}

std::pair<int, int> model_window(const DetectorModel& model)
{
    return std::visit(Overloaded{
                          [](const HogSvmModel& m) { return std::pair{m.hog.window_w, m.hog.window_h}; },
                          [](const LbpBoostModel& m) { return std::pair{m.boost.window_w, m.boost.window_h}; },
                      },
                      model);
}

double model_default_threshold(const DetectorModel& model)
{
    if (const auto* m = std::get_if<LbpBoostModel>(&model)) return m->boost.decision_threshold;
    return 0.0;
}

double score_patch(const DetectorModel& model, const GrayImage& patch, const GradientLut* lut)
{
    return std::visit(Overloaded{
                          [&](const HogSvmModel& m) {
                              const Rect window{0, 0, m.hog.window_w, m.hog.window_h};
                              const auto desc = lut ? window_descriptor(patch, window, m.hog, *lut)
                                                    : window_descriptor(patch, window, m.hog, lut_build(m.hog));
                              return svm_score(m.svm, desc);
                          },
                          [&](const LbpBoostModel& m) { return adaboost_score(m.boost, patch); },
                      },
                      model);
}

DetectorModel train_model(ModelType type, std::span<const GrayImage> pos, std::span<const GrayImage> neg,
                          const TrainConfig& cfg, const HogConfig& hog)
{
    cfg.validate();
    if (type == ModelType::HogSvm) {
        hog.validate();
        const auto lut = lut_build(hog);
        auto describe_all = [&](std::span<const GrayImage> patches) {
            std::vector<HogDescriptor> out(patches.size());
            parallel_for(patches.size(), worker_count(), [&](std::size_t i) {
                out[i] = window_descriptor(patches[i], {0, 0, hog.window_w, hog.window_h}, hog, lut);
            });
            return out;
        };
        const auto pd = describe_all(pos);
        const auto nd = describe_all(neg);
        return HogSvmModel{hog, svm_train(pd, nd, cfg)};
    }

    if (pos.empty()) throw std::invalid_argument("AdaBoost training needs at least one positive sample");
    const auto pool = feature_pool(pos.front().width(), pos.front().height(), cfg.lbp_scales);
    LbpBoostModel m;
    m.scales = cfg.lbp_scales;
    m.boost = adaboost_train(pos, neg, pool, cfg);
    return m;
}

double training_error(const DetectorModel& model, std::span<const GrayImage> pos, std::span<const GrayImage> neg,
                      double threshold)
{
    const std::size_t n = pos.size() + neg.size();
    if (n == 0) return 0.0;
    std::optional<GradientLut> lut;
    if (const auto* m = std::get_if<HogSvmModel>(&model)) lut = lut_build(m->hog);
    const GradientLut* lut_ptr = lut ? &*lut : nullptr;
    std::size_t wrong = 0;
    for (const auto& p : pos) wrong += score_patch(model, p, lut_ptr) > threshold ? 0 : 1;
    for (const auto& p : neg) wrong += score_patch(model, p, lut_ptr) > threshold ? 1 : 0;
    return static_cast<double>(wrong) / static_cast<double>(n);
}

}  // namespace pedscan
