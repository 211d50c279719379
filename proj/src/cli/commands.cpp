#include "pedscan/cli/commands.hpp"
#include "pedscan/cli/image_io.hpp"
#include "pedscan/cli/model_io.hpp"
#include "pedscan/dataset.hpp"
#include "pedscan/detector.hpp"
#include "pedscan/errors.hpp"
#include "pedscan/eval.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <regex>
#include <sstream>

namespace pedscan::cli {

namespace fs = std::filesystem;

namespace {

struct WindowSize {
    int w = 32;
    int h = 64;
};

WindowSize parse_size(const std::string& text, const char* what)
{
    static const std::regex kSize(R"((\d+)x(\d+))");
    std::smatch m;
    if (!std::regex_match(text, m, kSize)) throw std::invalid_argument(std::string(what) + " must look like WxH");
    WindowSize s{std::stoi(m[1]), std::stoi(m[2])};
    if (s.w < 1 || s.h < 1) throw std::invalid_argument(std::string(what) + " must be positive");
    return s;
}

std::string read_text(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path.string());
    out << text;
}

std::string fixed(double v, int digits)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string numbered(const char* dir, std::size_t i)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s/%06zu.pgm", dir, i);
    return buf;
}

std::vector<GroundTruthBox> counted_boxes(const ImageAnnotation& ann, DifficultPolicy policy)
{
    std::vector<GroundTruthBox> out;
    for (const auto& b : ann.boxes) {
        if (policy == DifficultPolicy::Drop && b.difficult) continue;
        out.push_back(b);
    }
    return out;
}

// Detector flags shared by train, detect, eval and bench.
struct DetectFlags {
    std::string window = "32x64";
    int step = 8;
    double scale_factor = 1.2;
    int max_levels = 64;
    std::optional<double> threshold;
    double nms = 0.5;
    bool no_lut = false;
    unsigned threads = 0;

    void add_to(CLI::App& app, bool with_threshold)
    {
        app.add_option("--window", window, "Detection window WxH")->capture_default_str();
        app.add_option("--step", step, "Window stride in pixels")->capture_default_str();
        app.add_option("--scale-factor", scale_factor, "Pyramid downscale factor per level")->capture_default_str();
        app.add_option("--max-levels", max_levels, "Maximum pyramid levels")->capture_default_str();
        app.add_option("--nms", nms, "IoU above which NMS suppresses")->capture_default_str();
        app.add_flag("--no-lut", no_lut, "Compute HOG votes with runtime sqrt/atan2");
        app.add_option("--threads", threads, "Worker threads (0 = PEDSCAN_THREADS or all cores)");
        if (with_threshold) app.add_option("--threshold", threshold, "Score threshold (default: the model's)");
    }

    [[nodiscard]] DetectConfig config(const DetectorModel* model) const
    {
        DetectConfig cfg;
        const auto win = parse_size(window, "--window");
        cfg.window_w = win.w;
        cfg.window_h = win.h;
        if (model) {
            const auto [mw, mh] = model_window(*model);
            if (mw != cfg.window_w || mh != cfg.window_h) {
                throw std::invalid_argument("--window " + window + " does not match the model window " +
                                            std::to_string(mw) + "x" + std::to_string(mh));
            }
        }
        cfg.step = step;
        cfg.scale_factor = scale_factor;
        cfg.max_levels = max_levels;
        cfg.nms_overlap = nms;
        cfg.hog_lut = !no_lut;
        cfg.threads = threads;
        cfg.score_threshold = threshold ? *threshold : (model ? model_default_threshold(*model) : 0.0);
        cfg.validate();
        return cfg;
    }
};

// ---------------------------------------------------------------- prepare

struct PrepareArgs {
    std::string manifest;
    std::string out_dir;
    std::uint64_t seed = 1;
    std::string window = "32x64";
    double negative_ratio = 2.0;
    bool keep_difficult = false;
};

int cmd_prepare(const PrepareArgs& a, std::ostream& out)
{
    const auto win = parse_size(a.window, "--window");
    if (!(a.negative_ratio >= 0.0)) throw std::invalid_argument("--negative-ratio must be >= 0");
    const auto policy = a.keep_difficult ? DifficultPolicy::Keep : DifficultPolicy::Drop;

    const std::string manifest_text = read_text(a.manifest);
    const auto entries = parse_manifest(manifest_text, fs::path(a.manifest).parent_path());

    std::vector<ImageAnnotation> annotations(entries.size());
    std::vector<ImageAnnotation> train_ann;
    std::vector<ImageAnnotation> test_ann;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (!entries[i].person_free()) annotations[i] = parse_annotation_file(entries[i].annotation_path);
        annotations[i].image_id = entries[i].image_path.string();
        for (auto& b : annotations[i].boxes) b.image_id = annotations[i].image_id;
        (entries[i].split == Split::Train ? train_ann : test_ann).push_back(annotations[i]);
    }
    const DatasetStats st = stats(train_ann, test_ann, policy);

    fs::create_directories(fs::path(a.out_dir) / "pos");
    fs::create_directories(fs::path(a.out_dir) / "neg");

    // Training images are decoded once for positives and sizes, and once more to crop negatives,
    // so only one full-size image is resident at a time.
    std::vector<std::size_t> train_idx;
    std::vector<std::pair<int, int>> sizes;
    std::vector<std::vector<GroundTruthBox>> boxes;
    std::vector<std::string> index_lines;
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (entries[i].split != Split::Train) continue;
        const GrayImage img = load_gray(entries[i].image_path);
        train_idx.push_back(i);
        sizes.emplace_back(img.width(), img.height());
        boxes.push_back(annotations[i].boxes);
        const Rect bounds{0, 0, img.width(), img.height()};
        for (const auto& b : counted_boxes(annotations[i], policy)) {
            const Rect r{std::max(b.rect.x, 0), std::max(b.rect.y, 0),
                         std::min(b.rect.right(), bounds.right()) - std::max(b.rect.x, 0),
                         std::min(b.rect.bottom(), bounds.bottom()) - std::max(b.rect.y, 0)};
            if (r.w < 1 || r.h < 1) continue;
            const auto rel = numbered("pos", n_pos++);
            write_pgm(fs::path(a.out_dir) / rel, resize(crop(img, r), win.w, win.h));
            index_lines.push_back("pos\t" + rel);
        }
        if (entries[i].person_free()) index_lines.push_back("bg\t" + fs::absolute(entries[i].image_path).string());
    }

    const auto n_neg = static_cast<std::size_t>(std::llround(a.negative_ratio * static_cast<double>(n_pos)));
    std::vector<NegativeWindow> plan;
    if (n_neg > 0) plan = plan_negative_windows(sizes, boxes, n_neg, a.seed, win.w, win.h);
    std::vector<std::size_t> order(plan.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(), [&](auto l, auto r) { return plan[l].image < plan[r].image; });
    std::optional<std::size_t> loaded;
    GrayImage current;
    for (const auto k : order) {
        if (loaded != plan[k].image) {
            current = load_gray(entries[train_idx[plan[k].image]].image_path);
            loaded = plan[k].image;
        }
        write_pgm(fs::path(a.out_dir) / numbered("neg", k), resize(crop(current, plan[k].rect), win.w, win.h));
    }
    for (std::size_t k = 0; k < plan.size(); ++k) index_lines.push_back("neg\t" + numbered("neg", k));

    std::string index;
    for (const auto& line : index_lines) index += line + "\n";
    write_text(fs::path(a.out_dir) / "index.tsv", index);
    std::ostringstream meta;
    meta << "window\t" << win.w << 'x' << win.h << "\nseed\t" << a.seed << "\nmanifest_digest\t"
         << digest_hex(manifest_text) << "\n";
    write_text(fs::path(a.out_dir) / "meta.tsv", meta.str());

    out << "split\timages\tlabels\n"
        << "train\t" << st.n_train_images << '\t' << st.n_train_labels << '\n'
        << "test\t" << st.n_test_images << '\t' << st.n_test_labels << '\n'
        << "total\t" << st.n_train_images + st.n_test_images << '\t' << st.n_total << '\n'
        << "positives\t" << n_pos << "\nnegatives\t" << plan.size() << "\nindex_digest\t" << digest_hex(index)
        << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
    std::string samples;
    std::string out;
    std::string model_type;
    TrainConfig cfg;
    DetectFlags detect;
};

struct SampleSet {
    std::vector<GrayImage> pos;
    std::vector<GrayImage> neg;
    std::vector<GrayImage> background;
    std::string manifest_digest;
    WindowSize window;
};

SampleSet load_samples(const fs::path& dir)
{
    SampleSet s;
    std::istringstream meta(read_text(dir / "meta.tsv"));
    for (std::string line; std::getline(meta, line);) {
        const auto tab = line.find('\t');
        if (tab == std::string::npos) continue;
        const auto key = line.substr(0, tab);
        const auto value = line.substr(tab + 1);
        if (key == "window") s.window = parse_size(value, "sample window");
        if (key == "manifest_digest") s.manifest_digest = value;
    }
    std::istringstream index(read_text(dir / "index.tsv"));
    for (std::string line; std::getline(index, line);) {
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw FormatError("malformed sample index line: " + line);
        const auto kind = line.substr(0, tab);
        fs::path path = line.substr(tab + 1);
        if (path.is_relative()) path = dir / path;
        if (kind == "pos" || kind == "neg") {
            auto img = load_gray(path);
            if (img.width() != s.window.w || img.height() != s.window.h) {
                throw FormatError("sample " + path.string() + " does not match the sample window");
            }
            (kind == "pos" ? s.pos : s.neg).push_back(std::move(img));
        } else if (kind == "bg") {
            s.background.push_back(load_gray(path));
        } else {
            throw FormatError("unknown sample kind '" + kind + "'");
        }
    }
    return s;
}

int cmd_train(TrainArgs& a, std::ostream& out)
{
    const ModelType type = parse_model_type(a.model_type);
    a.cfg.validate();
    const auto samples = load_samples(a.samples);
    if (samples.pos.empty() || samples.neg.empty()) {
        throw FormatError("training needs at least one positive and one negative sample");
    }
    a.detect.window = std::to_string(samples.window.w) + "x" + std::to_string(samples.window.h);
    const DetectConfig dc = a.detect.config(nullptr);

    HogConfig hog;
    hog.window_w = samples.window.w;
    hog.window_h = samples.window.h;
    const auto result = train_with_bootstrap(type, samples.pos, samples.neg, samples.background, a.cfg, dc, hog);

    ModelFile file{kModelFormatVersion, result.model, {a.cfg.seed, samples.manifest_digest}};
    const std::string text = save_model(file);
    write_text(a.out, text);

    out << "round\tnegatives\ttraining_error\tbackground_fppi\tmined\n";
    for (const auto& r : result.trace) {
        out << r.round << '\t' << r.negatives << '\t' << fixed(r.training_error, 6) << '\t'
            << fixed(r.background_fppi, 6) << '\t' << r.mined << '\n';
    }
    out << "training_error\t" << fixed(result.trace.back().training_error, 6) << "\nmodel_digest\t"
        << digest_hex(text) << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------- detect

struct DetectArgs {
    std::string model;
    std::vector<std::string> images;
    DetectFlags detect;
    bool time = false;
};

std::string detection_line(const std::string& id, const Detection& d)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "\t%d\t%d\t%d\t%d\t%.6f\n", d.rect.x, d.rect.y, d.rect.w, d.rect.h, d.score);
    return id + buf;
}

double elapsed_ms(std::chrono::steady_clock::time_point since)
{
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

int cmd_detect(const DetectArgs& a, std::ostream& out)
{
    const ModelFile file = read_model_file(a.model);
    const DetectConfig cfg = a.detect.config(&file.model);
    for (const auto& path : a.images) {
        const GrayImage img = load_gray(path);
        const auto t0 = std::chrono::steady_clock::now();
        const auto dets = detect(img, file.model, cfg);
        const double ms = elapsed_ms(t0);
        for (const auto& d : dets) out << detection_line(path, d);
        if (a.time) out << "# time\t" << path << '\t' << fixed(ms, 3) << '\n';
    }
    return kExitOk;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
    std::string model;
    std::string manifest;
    std::vector<std::string> rules{"coverage"};
    std::string out;
    std::string series;
    bool keep_difficult = false;
    bool time = false;
    DetectFlags detect;
};

int cmd_eval(const EvalArgs& a, std::ostream& out)
{
    std::vector<MatchRule> rules;
    for (const auto& r : a.rules) rules.push_back(parse_match_rule(r));
    const ModelFile file = read_model_file(a.model);
    const DetectConfig cfg = a.detect.config(&file.model);
    const auto policy = a.keep_difficult ? DifficultPolicy::Keep : DifficultPolicy::Drop;

    const auto entries = load_manifest(a.manifest);
    std::vector<AnnotatedImage> dataset;
    std::map<std::string, std::vector<Detection>> detections;
    std::map<std::string, double> timings;
    for (const auto& e : entries) {
        if (e.split != Split::Test) continue;
        AnnotatedImage ai{e.image_path.string(), {}};
        if (!e.person_free()) {
            for (const auto& b : counted_boxes(parse_annotation_file(e.annotation_path), policy)) {
                ai.labels.push_back(b.rect);
            }
        }
        const GrayImage img = load_gray(e.image_path);
        const auto t0 = std::chrono::steady_clock::now();
        detections[ai.image_id] = detect(img, file.model, cfg);
        if (a.time) timings[ai.image_id] = elapsed_ms(t0);
        dataset.push_back(std::move(ai));
    }
    if (dataset.empty()) throw FormatError("manifest has no test split");

    const auto name = model_type_name(model_type(file.model));
    std::string report = report_csv_header() + "\n";
    std::string series = series_csv_header() + "\n";
    for (const auto rule : rules) {
        const auto r = evaluate(dataset, detections, timings, rule);
        report += report_csv_row(name, r) + "\n";
        series += series_csv_row(name, r) + "\n";
    }
    if (a.out.empty()) {
        out << report;
    } else {
        write_text(a.out, report);
    }
    if (!a.series.empty()) write_text(a.series, series);
    return kExitOk;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
    std::string model;
    std::string size = "640x480";
    int frames = 10;
    std::string image;
    std::uint64_t seed = 1;
    bool compare_lut = false;
    std::string out;
    DetectFlags detect;
};

std::string cpu_model()
{
    std::ifstream in("/proc/cpuinfo");
    for (std::string line; std::getline(in, line);) {
        if (line.rfind("model name", 0) != 0) continue;
        const auto colon = line.find(':');
        if (colon == std::string::npos) break;
        auto v = line.substr(colon + 1);
        v.erase(0, v.find_first_not_of(' '));
        return v;
    }
    return "unknown";
}

std::string csv_quote(const std::string& s)
{
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string q = "\"";
    for (const char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

// Smooth pseudo-random texture: coarse noise upsampled bilinearly.
GrayImage synthetic_frame(int w, int h, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    const int cw = std::max(2, w / 8);
    const int ch = std::max(2, h / 8);
    std::vector<std::uint8_t> px(static_cast<std::size_t>(cw) * ch);
    for (auto& p : px) p = static_cast<std::uint8_t>(rng() & 0xFF);
    return resize(GrayImage(cw, ch, std::move(px)), w, h);
}

struct BenchTiming {
    double total_ms = 0.0;
    std::uint64_t windows = 0;
};

BenchTiming time_frames(const std::vector<GrayImage>& frames, const DetectorModel& model, const DetectConfig& cfg)
{
    BenchTiming t;
    for (const auto& f : frames) {
        DetectStats st;
        const auto t0 = std::chrono::steady_clock::now();
        const auto dets = detect(f, model, cfg, &st);
        t.total_ms += elapsed_ms(t0);
        t.windows = st.windows;
    }
    return t;
}

int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream& err)
{
    if (a.frames < 1) throw std::invalid_argument("--frames must be >= 1");
    const ModelFile file = read_model_file(a.model);
    const DetectConfig cfg = a.detect.config(&file.model);

    std::vector<GrayImage> frames;
    if (!a.image.empty()) {
        const GrayImage img = load_gray(a.image);
        frames.assign(static_cast<std::size_t>(a.frames), img);
    } else {
        const auto s = parse_size(a.size, "--size");
        for (int i = 0; i < a.frames; ++i) frames.push_back(synthetic_frame(s.w, s.h, a.seed + i));
    }

    const auto t = time_frames(frames, file.model, cfg);
    const double fps = static_cast<double>(a.frames) / (t.total_ms / 1000.0);
    const auto name = model_type_name(model_type(file.model));
    std::ostringstream csv;
    csv << "model_type,image_size,frames,total_ms,fps,window_count,cpu_model\n"
        << name << ',' << frames.front().width() << 'x' << frames.front().height() << ',' << a.frames << ','
        << fixed(t.total_ms, 3) << ',' << fixed(fps, 3) << ',' << t.windows << ',' << csv_quote(cpu_model()) << '\n';
    if (a.out.empty()) {
        out << csv.str();
    } else {
        write_text(a.out, csv.str());
    }

    if (a.compare_lut) {
        if (model_type(file.model) != ModelType::HogSvm) {
            err << "--compare-lut applies to hog_svm models only\n";
        } else {
            DetectConfig direct = cfg;
            direct.hog_lut = false;
            DetectConfig lut = cfg;
            lut.hog_lut = true;
            const double direct_ms = time_frames(frames, file.model, direct).total_ms;
            const double lut_ms = time_frames(frames, file.model, lut).total_ms;
            err << "lut_ms\t" << fixed(lut_ms, 3) << "\ndirect_ms\t" << fixed(direct_ms, 3) << "\nlut_speedup\t"
                << fixed(direct_ms / lut_ms, 4) << '\n';
        }
    }
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"CPU pedestrian detection toolkit", "pedscan"};
    app.require_subcommand(1);

    PrepareArgs prep;
    auto* prepare = app.add_subcommand("prepare", "Extract training patches and print dataset statistics");
    prepare->add_option("manifest", prep.manifest, "Manifest file")->required();
    prepare->add_option("--out", prep.out_dir, "Output sample directory")->required();
    prepare->add_option("--seed", prep.seed, "Negative sampling seed")->capture_default_str();
    prepare->add_option("--window", prep.window, "Patch size WxH")->capture_default_str();
    prepare->add_option("--negative-ratio", prep.negative_ratio, "Negatives per positive")->capture_default_str();
    prepare->add_flag("--keep-difficult", prep.keep_difficult, "Count VOC objects flagged difficult");

    TrainArgs tr;
    auto* train = app.add_subcommand("train", "Train a detector model from prepared samples");
    train->add_option("samples", tr.samples, "Directory written by prepare")->required();
    train->add_option("--model-type", tr.model_type, "hog_svm or lbp_adaboost")->required();
    train->add_option("--out", tr.out, "Model file to write")->required();
    train->add_option("--rounds", tr.cfg.n_rounds, "AdaBoost rounds")->capture_default_str();
    train->add_option("--bootstrap-rounds", tr.cfg.bootstrap_rounds, "Hard-negative mining rounds")
        ->capture_default_str();
    train->add_option("--negatives-per-round", tr.cfg.negatives_per_round, "Mining cap (0 = initial negatives)");
    train->add_option("--target-fppi", tr.cfg.target_fppi, "Stop mining at or below this background FPPI");
    train->add_option("--seed", tr.cfg.seed, "Training seed")->capture_default_str();
    train->add_option("--lambda", tr.cfg.lambda, "SVM regularization")->capture_default_str();
    train->add_option("--epochs", tr.cfg.epochs, "SVM epochs")->capture_default_str();
    train->add_option("--lbp-scales", tr.cfg.lbp_scales, "LBP batch sizes in the feature pool")->delimiter(',');
    tr.detect.add_to(*train, false);

    DetectArgs det;
    auto* detect_cmd = app.add_subcommand("detect", "Detect pedestrians and print one line per detection");
    detect_cmd->add_option("model", det.model, "Model file")->required();
    detect_cmd->add_option("images", det.images, "Images to scan")->required();
    detect_cmd->add_flag("--time", det.time, "Append per-image milliseconds");
    det.detect.add_to(*detect_cmd, true);

    EvalArgs ev;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model on the test split of a manifest");
    eval_cmd->add_option("model", ev.model, "Model file")->required();
    eval_cmd->add_option("manifest", ev.manifest, "Manifest file")->required();
    eval_cmd->add_option("--rule", ev.rules, "Match rule: coverage or iou (repeatable)")->capture_default_str();
    eval_cmd->add_option("--out", ev.out, "Report CSV path (default: stdout)");
    eval_cmd->add_option("--series", ev.series, "Speed/quality series CSV path");
    eval_cmd->add_flag("--keep-difficult", ev.keep_difficult, "Score VOC objects flagged difficult");
    eval_cmd->add_flag("--time", ev.time, "Record per-image detection time");
    ev.detect.add_to(*eval_cmd, true);

    BenchArgs bn;
    auto* bench = app.add_subcommand("bench", "Time full detection on synthetic or loaded frames");
    bench->add_option("model", bn.model, "Model file")->required();
    bench->add_option("--size", bn.size, "Synthetic frame size WxH")->capture_default_str();
    bench->add_option("--frames", bn.frames, "Frames to time")->capture_default_str();
    bench->add_option("--image", bn.image, "Time this image instead of synthetic frames");
    bench->add_option("--seed", bn.seed, "Synthetic frame seed")->capture_default_str();
    bench->add_flag("--compare-lut", bn.compare_lut, "Also time the direct HOG path and print the ratio");
    bench->add_option("--out", bn.out, "CSV path (default: stdout)");
    bn.detect.add_to(*bench, true);

    std::vector<std::string> argv_store{"pedscan"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : argv_store) argv.push_back(s.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitBadArguments;
    }

    try {
        if (*prepare) return cmd_prepare(prep, out);
        if (*train) return cmd_train(tr, out);
        if (*detect_cmd) return cmd_detect(det, out);
        if (*eval_cmd) return cmd_eval(ev, out);
        return cmd_bench(bn, out, err);
    } catch (const ModelVersionError& e) {
        err << "pedscan: " << e.what() << '\n';
        return kExitVersionMismatch;
    } catch (const FormatError& e) {
        err << "pedscan: " << e.what() << '\n';
        return kExitFormatError;
    } catch (const std::invalid_argument& e) {
        err << "pedscan: " << e.what() << '\n';
        return kExitBadArguments;
    } catch (const std::exception& e) {
        err << "pedscan: " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace pedscan::cli
