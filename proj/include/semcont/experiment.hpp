#pragma once

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "semcont/continuity.hpp"
#include "semcont/errors.hpp"
#include "semcont/explain.hpp"
#include "semcont/fsio.hpp"
#include "semcont/model_io.hpp"
#include "semcont/report.hpp"
#include "semcont/series_io.hpp"
#include "semcont/shapes.hpp"
#include "semcont/version.hpp"

namespace semcont {

inline std::string fnv1a64_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// ---------------------------------------------------------------------------
// Experiment configuration: flat "key = value" lines, '#' comments. Unknown
// keys are rejected by name so typos cannot silently change an experiment.

struct ExperimentConfig {
    // training
    int train_n_per_class = 500;
    int holdout_per_class = 50;
    std::uint64_t data_seed = 1;
    TrainConfig train;
    std::string model_path;  // reuse instead of training when non-empty

    // series generation
    int series_frames = 100;
    double rotation_total_deg = 120.0;
    double shape_fill = 0.1;
    double shape_background = 0.9;
    double shape_circumradius = 20.0;
    std::vector<std::string> series{"rotation", "contrast", "transition"};

    // evaluation
    std::vector<std::string> explainers{"rise", "lime", "kernelshap", "gradcam"};
    std::vector<DistanceKind> distances{DistanceKind::msd, DistanceKind::wasserstein1};
    std::vector<ContinuityMode> modes{ContinuityMode::variation_indexed,
                                      ContinuityMode::confidence_indexed};
    double window_rotation_theta_max = 0.0;  // 0 disables the windowed table
    ExplainerConfig explainer;
    int strip_stride = 10;

    nlohmann::json echo;  // key/value pairs as parsed, for provenance
};

namespace experiment_detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const std::size_t comma = s.find(',', pos);
        const std::string item =
            trim(comma == std::string::npos ? s.substr(pos) : s.substr(pos, comma - pos));
        if (!item.empty()) out.push_back(item);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

inline double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw config_error("config key '" + key + "': expected a number, got '" + v + "'");
    }
}

inline long long to_int(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const long long i = std::stoll(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        throw config_error("config key '" + key + "': expected an integer, got '" + v + "'");
    }
}

}  // namespace experiment_detail

inline ExperimentConfig parse_experiment_config(const std::string& text) {
    using experiment_detail::split_list;
    using experiment_detail::to_double;
    using experiment_detail::to_int;
    using experiment_detail::trim;

    ExperimentConfig cfg;
    cfg.echo = nlohmann::json::object();

    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string line =
            nl == std::string::npos ? text.substr(pos) : text.substr(pos, nl - pos);
        pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("config line " + std::to_string(line_no) +
                               ": expected 'key = value', got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw config_error("config line " + std::to_string(line_no) +
                               ": empty key or value");
        cfg.echo[key] = value;

        if (key == "train.n_per_class") cfg.train_n_per_class = static_cast<int>(to_int(key, value));
        else if (key == "train.holdout_per_class") cfg.holdout_per_class = static_cast<int>(to_int(key, value));
        else if (key == "train.data_seed") cfg.data_seed = static_cast<std::uint64_t>(to_int(key, value));
        else if (key == "train.seed") cfg.train.seed = static_cast<std::uint64_t>(to_int(key, value));
        else if (key == "train.epochs") cfg.train.epochs = static_cast<int>(to_int(key, value));
        else if (key == "train.batch_size") cfg.train.batch_size = static_cast<int>(to_int(key, value));
        else if (key == "train.learning_rate") cfg.train.learning_rate = static_cast<float>(to_double(key, value));
        else if (key == "train.optimizer") {
            if (value == "adam") cfg.train.optimizer = Optimizer::adam;
            else if (value == "sgd") cfg.train.optimizer = Optimizer::sgd;
            else throw config_error("config key 'train.optimizer': unknown optimizer '" + value + "'");
        }
        else if (key == "model.path") cfg.model_path = value;
        else if (key == "series.frames") cfg.series_frames = static_cast<int>(to_int(key, value));
        else if (key == "rotation.total_deg") cfg.rotation_total_deg = to_double(key, value);
        else if (key == "shape.fill") cfg.shape_fill = to_double(key, value);
        else if (key == "shape.background") cfg.shape_background = to_double(key, value);
        else if (key == "shape.circumradius") cfg.shape_circumradius = to_double(key, value);
        else if (key == "series") {
            cfg.series = split_list(value);
            for (const std::string& s : cfg.series)
                if (s != "rotation" && s != "contrast" && s != "transition")
                    throw config_error("config key 'series': unknown series kind '" + s + "'");
        }
        else if (key == "explainers") {
            cfg.explainers = split_list(value);
            for (const std::string& e : cfg.explainers)
                if (e != "rise" && e != "lime" && e != "kernelshap" && e != "gradcam")
                    throw config_error("config key 'explainers': unknown explainer '" + e + "'");
        }
        else if (key == "distances") {
            cfg.distances.clear();
            for (const std::string& d : split_list(value)) {
                try {
                    cfg.distances.push_back(distance_kind_from_string(d));
                } catch (const config_error&) {
                    throw config_error("config key 'distances': unknown distance '" + d + "'");
                }
            }
        }
        else if (key == "modes") {
            cfg.modes.clear();
            for (const std::string& m : split_list(value)) {
                if (m == "variation") cfg.modes.push_back(ContinuityMode::variation_indexed);
                else if (m == "confidence") cfg.modes.push_back(ContinuityMode::confidence_indexed);
                else throw config_error("config key 'modes': unknown mode '" + m + "'");
            }
        }
        else if (key == "window.rotation_theta_max") cfg.window_rotation_theta_max = to_double(key, value);
        else if (key == "rise.n_masks") cfg.explainer.rise.n_masks = static_cast<int>(to_int(key, value));
        else if (key == "rise.cell_grid") cfg.explainer.rise.cell_grid = static_cast<int>(to_int(key, value));
        else if (key == "rise.keep_prob") cfg.explainer.rise.keep_prob = to_double(key, value);
        else if (key == "rise.seed") cfg.explainer.rise.seed = static_cast<std::uint64_t>(to_int(key, value));
        else if (key == "lime.segment_grid") cfg.explainer.lime.segment_grid = static_cast<int>(to_int(key, value));
        else if (key == "lime.n_samples") cfg.explainer.lime.n_samples = static_cast<int>(to_int(key, value));
        else if (key == "lime.kernel_width") cfg.explainer.lime.kernel_width = to_double(key, value);
        else if (key == "lime.ridge_lambda") cfg.explainer.lime.ridge_lambda = to_double(key, value);
        else if (key == "lime.seed") cfg.explainer.lime.seed = static_cast<std::uint64_t>(to_int(key, value));
        else if (key == "kernelshap.segment_grid") cfg.explainer.kernelshap.segment_grid = static_cast<int>(to_int(key, value));
        else if (key == "kernelshap.n_samples") cfg.explainer.kernelshap.n_samples = static_cast<int>(to_int(key, value));
        else if (key == "kernelshap.ridge_lambda") cfg.explainer.kernelshap.ridge_lambda = to_double(key, value);
        else if (key == "kernelshap.seed") cfg.explainer.kernelshap.seed = static_cast<std::uint64_t>(to_int(key, value));
        else if (key == "gradcam.layer") cfg.explainer.gradcam.layer = value;
        else if (key == "strip.stride") cfg.strip_stride = static_cast<int>(to_int(key, value));
        else throw config_error("unknown config key '" + key + "'");
    }

    if (cfg.train_n_per_class < 1) throw config_error("config: train.n_per_class must be >= 1");
    if (cfg.holdout_per_class < 0) throw config_error("config: train.holdout_per_class must be >= 0");
    if (cfg.series_frames < 2) throw config_error("config: series.frames must be >= 2");
    if (cfg.series.empty()) throw config_error("config: series list is empty");
    if (cfg.explainers.empty()) throw config_error("config: explainers list is empty");
    if (cfg.distances.empty()) throw config_error("config: distances list is empty");
    if (cfg.modes.empty()) throw config_error("config: modes list is empty");
    if (cfg.strip_stride < 1) throw config_error("config: strip.stride must be >= 1");

    // explainers inherit the series background as their perturbation baseline
    cfg.explainer.rise.baseline = static_cast<float>(cfg.shape_background);
    cfg.explainer.lime.baseline = static_cast<float>(cfg.shape_background);
    cfg.explainer.kernelshap.baseline = static_cast<float>(cfg.shape_background);
    return cfg;
}

// ---------------------------------------------------------------------------
// Full experiment run: datasets, model, saliency archives, evaluations,
// tables, plots, strips, manifest. Idempotent: a complete directory produced
// from the same config bytes is left untouched.

struct ExperimentResult {
    std::filesystem::path out_dir;
    bool skipped = false;  // complete directory already present
    std::string model_hash;
    double holdout_accuracy = -1.0;
};

inline ShapeSpec experiment_triangle_base(const ExperimentConfig& cfg) {
    ShapeSpec base;
    base.kind = ShapeKind::triangle;
    base.fill_level = cfg.shape_fill;
    base.background_level = cfg.shape_background;
    base.circumradius_px = cfg.shape_circumradius;
    return base;
}

inline ShapeSpec experiment_circle_base(const ExperimentConfig& cfg) {
    ShapeSpec base = experiment_triangle_base(cfg);
    base.kind = ShapeKind::circle;
    return base;
}

inline VariationSeries make_experiment_series(const ExperimentConfig& cfg,
                                              const std::string& kind) {
    if (kind == "rotation")
        return make_rotation_series(experiment_triangle_base(cfg), cfg.series_frames,
                                    cfg.rotation_total_deg);
    if (kind == "contrast")
        return make_contrast_series(experiment_triangle_base(cfg), cfg.series_frames);
    if (kind == "transition")
        return make_transition_series(experiment_circle_base(cfg), cfg.series_frames);
    throw config_error("unknown series kind '" + kind + "'");
}

inline ExperimentResult run_experiment(const std::filesystem::path& config_path,
                                       const std::filesystem::path& out_dir) {
    const std::string config_bytes = read_file_bytes(config_path);
    const ExperimentConfig cfg = parse_experiment_config(config_bytes);
    const std::string config_hash = fnv1a64_hex(config_bytes);

    ExperimentResult result;
    result.out_dir = out_dir;

    const std::filesystem::path manifest_path = out_dir / "manifest.json";
    if (std::filesystem::exists(manifest_path)) {
        try {
            const nlohmann::json old = nlohmann::json::parse(read_file_bytes(manifest_path));
            if (old.value("complete", false) && old.value("config_hash", "") == config_hash) {
                result.skipped = true;
                result.model_hash = old.value("model_hash", "");
                result.holdout_accuracy = old.value("holdout_accuracy", -1.0);
                return result;
            }
        } catch (const std::exception&) {
            // unreadable manifest: fall through and regenerate
        }
    }
    std::filesystem::create_directories(out_dir);

    // datasets and model
    ModelSnapshot model;
    if (!cfg.model_path.empty()) {
        model = load_model(cfg.model_path);
    } else {
        const std::vector<LabeledImage> all =
            make_training_set(cfg.train_n_per_class + cfg.holdout_per_class, cfg.data_seed);
        const std::size_t n_train = 2 * static_cast<std::size_t>(cfg.train_n_per_class);
        const std::vector<LabeledImage> train_set(all.begin(),
                                                  all.begin() + static_cast<std::ptrdiff_t>(n_train));
        const std::vector<LabeledImage> holdout_set(
            all.begin() + static_cast<std::ptrdiff_t>(n_train), all.end());
        save_training_set(train_set, out_dir / "data" / "train");
        if (!holdout_set.empty()) save_training_set(holdout_set, out_dir / "data" / "holdout");
        model = train(ModelSnapshot::init(cfg.train.seed), train_set, cfg.train);
        if (!holdout_set.empty()) result.holdout_accuracy = accuracy(model, holdout_set);
    }
    const std::filesystem::path model_file = out_dir / "model.scmn";
    save_model(model, model_file);
    result.model_hash = fnv1a64_hex(read_file_bytes(model_file));

    ReportProvenance provenance;
    provenance.model_hash = result.model_hash;
    provenance.config_echo = cfg.echo;
    provenance.timestamp = utc_timestamp();
    provenance.seeds = {{"data", cfg.data_seed},
                        {"train", cfg.train.seed},
                        {"rise", cfg.explainer.rise.seed},
                        {"lime", cfg.explainer.lime.seed},
                        {"kernelshap", cfg.explainer.kernelshap.seed}};

    nlohmann::json artifacts = nlohmann::json::array();
    auto note_artifact = [&](const std::filesystem::path& p) {
        artifacts.push_back(std::filesystem::relative(p, out_dir).generic_string());
    };

    for (const std::string& series_kind : cfg.series) {
        const VariationSeries series = make_experiment_series(cfg, series_kind);
        save_series(series, out_dir / "series" / series_kind);
        note_artifact(out_dir / "series" / series_kind / "manifest.json");

        std::vector<SeriesEvaluation> evals;
        ContinuityReport report;
        report.series_id = series.id;
        report.provenance = provenance;

        for (const std::string& explainer : cfg.explainers) {
            std::vector<SaliencyMap> maps;
            const std::filesystem::path saliency_dir =
                out_dir / "saliency" / series_kind / explainer;
            const SeriesEvaluation eval = evaluate_series(
                model, series, explainer, cfg.explainer, cfg.distances,
                [&](int frame, const SaliencyMap& map) {
                    char name[32];
                    std::snprintf(name, sizeof(name), "frame_%04d", frame);
                    save_saliency(map, saliency_dir / name);
                    maps.push_back(map);
                });
            const std::filesystem::path eval_path =
                out_dir / "evals" / (series_kind + "_" + explainer + ".json");
            save_evaluation(eval, eval_path);
            note_artifact(eval_path);
            evals.push_back(eval);

            const std::filesystem::path strip_path =
                out_dir / "strips" / (series_kind + "_" + explainer + ".pgm");
            emit_saliency_strip(maps, cfg.strip_stride, strip_path);
            note_artifact(strip_path);
        }

        for (ContinuityMode mode : cfg.modes) {
            ContinuityReport mode_report = report;
            for (std::size_t i = 0; i < evals.size(); ++i)
                mode_report.runs.push_back(
                    {series.id, cfg.explainers[i], check_explainer_continuity(evals[i], mode)});
            const std::string mode_tag =
                mode == ContinuityMode::variation_indexed ? "variation" : "confidence";
            const std::filesystem::path csv =
                out_dir / "tables" / (series_kind + "_" + mode_tag + ".csv");
            const std::filesystem::path tjson =
                out_dir / "tables" / (series_kind + "_" + mode_tag + ".json");
            emit_table(mode_report, csv, tjson);
            note_artifact(csv);
            note_artifact(tjson);

            const std::filesystem::path report_path =
                out_dir / "reports" / (series_kind + "_" + mode_tag + ".json");
            atomic_write_file(report_path, report_to_json(mode_report).dump(2) + "\n");
            note_artifact(report_path);

            const std::filesystem::path svg =
                out_dir / "plots" / (series_kind + "_" + mode_tag + ".svg");
            emit_relational_plot(evals, svg,
                                 mode == ContinuityMode::variation_indexed ? "theta"
                                                                           : "confidence_change");
            note_artifact(svg);
        }

        if (series_kind == "rotation" && cfg.window_rotation_theta_max > 0.0) {
            ContinuityReport windowed = report;
            for (std::size_t i = 0; i < evals.size(); ++i) {
                const SeriesEvaluation we =
                    apply_theta_window(evals[i], cfg.window_rotation_theta_max);
                windowed.runs.push_back(
                    {series.id, cfg.explainers[i],
                     check_explainer_continuity(we, ContinuityMode::variation_indexed)});
            }
            char tag[64];
            std::snprintf(tag, sizeof(tag), "rotation_variation_window%g",
                          cfg.window_rotation_theta_max);
            const std::filesystem::path csv = out_dir / "tables" / (std::string(tag) + ".csv");
            const std::filesystem::path tjson = out_dir / "tables" / (std::string(tag) + ".json");
            emit_table(windowed, csv, tjson);
            note_artifact(csv);
            note_artifact(tjson);
            const std::filesystem::path report_path =
                out_dir / "reports" / (std::string(tag) + ".json");
            atomic_write_file(report_path, report_to_json(windowed).dump(2) + "\n");
            note_artifact(report_path);
        }
    }

    nlohmann::json manifest;
    manifest["complete"] = true;
    manifest["config_hash"] = config_hash;
    manifest["config"] = cfg.echo;
    manifest["model_hash"] = result.model_hash;
    manifest["holdout_accuracy"] = result.holdout_accuracy;
    manifest["tool_version"] = kToolVersion;
    manifest["timestamp"] = provenance.timestamp;
    manifest["seeds"] = provenance.seeds;
    manifest["artifacts"] = artifacts;
    atomic_write_file(manifest_path, manifest.dump(2) + "\n");
    return result;
}

}  // namespace semcont
