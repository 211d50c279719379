#include "pedscan/cli/model_io.hpp"
#include "pedscan/errors.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace pedscan::cli {

namespace {

using Json = nlohmann::ordered_json;

std::string encode_votes(const std::array<std::int8_t, 256>& votes)
{
    std::string s(256, '-');
    for (std::size_t k = 0; k < 256; ++k) s[k] = votes[k] > 0 ? '+' : '-';
    return s;
}

std::array<std::int8_t, 256> decode_votes(const std::string& s)
{
    if (s.size() != 256) throw FormatError("vote table must have exactly 256 entries");
    std::array<std::int8_t, 256> votes{};
    for (std::size_t k = 0; k < 256; ++k) {
        if (s[k] != '+' && s[k] != '-') throw FormatError("vote table entries must be '+' or '-'");
        votes[k] = s[k] == '+' ? 1 : -1;
    }
    return votes;
}

Json window_json(int w, int h) { return Json::array({w, h}); }

}  // namespace

std::string save_model(const ModelFile& file)
{
    Json j;
    j["format_version"] = file.format_version;
    j["model_type"] = std::string(model_type_name(model_type(file.model)));
    Json meta;
    meta["seed"] = file.meta.seed;
    meta["manifest_digest"] = file.meta.manifest_digest;

    if (const auto* m = std::get_if<HogSvmModel>(&file.model)) {
        j["config"] = {{"window", window_json(m->hog.window_w, m->hog.window_h)},
                       {"cell", m->hog.cell},
                       {"block_cells", m->hog.block_cells},
                       {"block_stride", m->hog.block_stride},
                       {"n_bins", m->hog.n_bins}};
        j["parameters"] = {{"bias", m->svm.bias}, {"weights", m->svm.weights}};
        meta["lambda"] = m->svm.lambda;
        meta["epochs"] = m->svm.epochs;
        meta["trainer_seed"] = m->svm.seed;
    } else {
        const auto& b = std::get<LbpBoostModel>(file.model);
        j["config"] = {{"window", window_json(b.boost.window_w, b.boost.window_h)}, {"scales", b.scales}};
        Json rounds = Json::array();
        for (const auto& r : b.boost.rounds) {
            rounds.push_back({{"feature", {r.learner.feature.x, r.learner.feature.y, r.learner.feature.scale}},
                              {"alpha", r.alpha},
                              {"votes", encode_votes(r.learner.votes)}});
        }
        j["parameters"] = {{"decision_threshold", b.boost.decision_threshold}, {"rounds", std::move(rounds)}};
    }
    j["training_meta"] = std::move(meta);
    return j.dump(1) + "\n";
}

ModelFile load_model(std::string_view text)
{
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw FormatError(std::string("model file is not valid JSON: ") + e.what());
    }
    try {
        ModelFile file;
        file.format_version = j.at("format_version").get<int>();
        if (file.format_version != kModelFormatVersion) {
            throw ModelVersionError("model format version " + std::to_string(file.format_version) +
                                    " is not supported (expected " + std::to_string(kModelFormatVersion) + ")");
        }
        const auto& meta = j.at("training_meta");
        file.meta.seed = meta.at("seed").get<std::uint64_t>();
        file.meta.manifest_digest = meta.at("manifest_digest").get<std::string>();

        const auto& cfg = j.at("config");
        const auto& params = j.at("parameters");
        const auto window = cfg.at("window").get<std::array<int, 2>>();
        const ModelType type = parse_model_type(j.at("model_type").get<std::string>());
        if (type == ModelType::HogSvm) {
            HogSvmModel m;
            m.hog.window_w = window[0];
            m.hog.window_h = window[1];
            m.hog.cell = cfg.at("cell").get<int>();
            m.hog.block_cells = cfg.at("block_cells").get<int>();
            m.hog.block_stride = cfg.at("block_stride").get<int>();
            m.hog.n_bins = cfg.at("n_bins").get<int>();
            m.hog.validate();
            m.svm.bias = params.at("bias").get<double>();
            m.svm.weights = params.at("weights").get<std::vector<double>>();
            m.svm.lambda = meta.at("lambda").get<double>();
            m.svm.epochs = meta.at("epochs").get<int>();
            m.svm.seed = meta.at("trainer_seed").get<std::uint64_t>();
            if (m.svm.weights.size() != static_cast<std::size_t>(m.hog.descriptor_length())) {
                throw FormatError("SVM weight count does not match the HOG descriptor length");
            }
            file.model = std::move(m);
        } else {
            LbpBoostModel b;
            b.boost.window_w = window[0];
            b.boost.window_h = window[1];
            b.scales = cfg.at("scales").get<std::vector<int>>();
            b.boost.decision_threshold = params.at("decision_threshold").get<double>();
            for (const auto& r : params.at("rounds")) {
                const auto f = r.at("feature").get<std::array<int, 3>>();
                AdaBoostRound round;
                round.learner.feature = {f[0], f[1], f[2]};
                if (f[2] < 1 || f[0] < 0 || f[1] < 0 || f[0] + 3 * f[2] > window[0] || f[1] + 3 * f[2] > window[1]) {
                    throw FormatError("LBP feature does not fit in the model window");
                }
                round.alpha = r.at("alpha").get<double>();
                round.learner.votes = decode_votes(r.at("votes").get<std::string>());
                b.boost.rounds.push_back(round);
            }
            file.model = std::move(b);
        }
        return file;
    } catch (const Json::exception& e) {
        throw FormatError(std::string("malformed model file: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("malformed model file: ") + e.what());
    }
}

ModelFile read_model_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot read model file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_model(ss.str());
}

void write_model_file(const std::filesystem::path& path, const ModelFile& file)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write model file " + path.string());
    out << save_model(file);
}

std::string digest_hex(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace pedscan::cli
