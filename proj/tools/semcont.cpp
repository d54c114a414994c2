#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "semcont/blackbox.hpp"
#include "semcont/continuity.hpp"
#include "semcont/experiment.hpp"
#include "semcont/explain.hpp"
#include "semcont/model_io.hpp"
#include "semcont/report.hpp"
#include "semcont/series_io.hpp"
#include "semcont/shapes.hpp"
#include "semcont/version.hpp"

namespace fs = std::filesystem;
using namespace semcont;

namespace {

struct GenOptions {
    std::string kind;
    std::string out;
    int frames = 100;
    double total_deg = 120.0;
    std::uint64_t seed = 1;
    int n_per_class = 500;
    double fill = 0.1;
    double background = 0.9;
    double circumradius = 20.0;
};

int cmd_gen(const GenOptions& opt) {
    ShapeSpec base;
    base.fill_level = opt.fill;
    base.background_level = opt.background;
    base.circumradius_px = opt.circumradius;
    if (opt.kind == "train") {
        const auto set = make_training_set(opt.n_per_class, opt.seed);
        save_training_set(set, opt.out);
        std::printf("wrote %zu labeled images to %s\n", set.size(), opt.out.c_str());
        return 0;
    }
    VariationSeries series;
    if (opt.kind == "rotation") {
        base.kind = ShapeKind::triangle;
        series = make_rotation_series(base, opt.frames, opt.total_deg);
    } else if (opt.kind == "contrast") {
        base.kind = ShapeKind::triangle;
        series = make_contrast_series(base, opt.frames);
    } else if (opt.kind == "transition") {
        base.kind = ShapeKind::circle;
        series = make_transition_series(base, opt.frames);
    } else {
        throw config_error("gen: unknown kind '" + opt.kind + "'");
    }
    save_series(series, opt.out);
    std::printf("wrote series %s (%zu frames) to %s\n", series.id.c_str(),
                series.frames.size(), opt.out.c_str());
    return 0;
}

struct TrainOptions {
    std::string data;
    std::string out;
    TrainConfig cfg;
    std::string optimizer = "adam";
};

int cmd_train(const TrainOptions& opt) {
    TrainConfig cfg = opt.cfg;
    if (opt.optimizer == "adam") cfg.optimizer = Optimizer::adam;
    else if (opt.optimizer == "sgd") cfg.optimizer = Optimizer::sgd;
    else throw config_error("train: unknown optimizer '" + opt.optimizer + "'");

    const auto dataset = load_training_set(opt.data);
    TrainLog log;
    const ModelSnapshot model = train(ModelSnapshot::init(cfg.seed), dataset, cfg, &log);
    save_model(model, opt.out);
    std::printf("trained on %zu images for %d epoch(s); final train accuracy %.4f\n",
                dataset.size(), cfg.epochs, log.final_accuracy);
    std::printf("model written to %s\n", opt.out.c_str());
    return 0;
}

struct ExplainerOptions {
    std::string model_path;
    std::string series_dir;
    std::string explainer;
    std::optional<std::uint64_t> seed;
    std::string blackbox_cmd;
};

// Shared model/model_fn resolution for explain and eval. The loaded model is
// kept alive by the caller-held optional.
struct ResolvedModel {
    std::optional<ModelSnapshot> model;
    ModelFn fn;
    const ModelSnapshot* ptr = nullptr;
};

ResolvedModel resolve_model(const ExplainerOptions& opt) {
    ResolvedModel r;
    if (!opt.blackbox_cmd.empty()) {
        if (opt.explainer == "gradcam")
            throw config_error("gradcam requires the native model; --blackbox supports "
                               "rise, lime and kernelshap only");
        r.fn = blackbox_model_fn(opt.blackbox_cmd);
        return r;
    }
    r.model = load_model(opt.model_path);
    r.ptr = &*r.model;
    r.fn = model_fn_of(*r.model);
    return r;
}

ExplainerConfig explainer_config_for(const VariationSeries& series,
                                     const std::optional<std::uint64_t>& seed) {
    ExplainerConfig cfg;
    const float baseline = static_cast<float>(series.base.background_level);
    cfg.rise.baseline = baseline;
    cfg.lime.baseline = baseline;
    cfg.kernelshap.baseline = baseline;
    if (seed) {
        cfg.rise.seed = *seed;
        cfg.lime.seed = *seed;
        cfg.kernelshap.seed = *seed;
    }
    return cfg;
}

int cmd_explain(const ExplainerOptions& opt, const std::string& out_dir) {
    const VariationSeries series = load_series(opt.series_dir);
    const ResolvedModel rm = resolve_model(opt);
    const ExplainerConfig cfg = explainer_config_for(series, opt.seed);
    for (std::size_t i = 0; i < series.frames.size(); ++i) {
        const SaliencyMap map = explain(opt.explainer, rm.ptr, rm.fn, series.frames[i], cfg);
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%04zu", i);
        save_saliency(map, fs::path(out_dir) / name);
    }
    std::printf("wrote %zu %s saliency maps to %s\n", series.frames.size(),
                opt.explainer.c_str(), out_dir.c_str());
    return 0;
}

struct EvalOptions {
    ExplainerOptions base;
    std::string mode = "variation";
    std::string window;
    std::string out;
};

int cmd_eval(const EvalOptions& opt) {
    const VariationSeries series = load_series(opt.base.series_dir);
    const ResolvedModel rm = resolve_model(opt.base);
    const ExplainerConfig cfg = explainer_config_for(series, opt.base.seed);
    SeriesEvaluation eval = evaluate_series(
        rm.fn, rm.ptr, series, opt.base.explainer, cfg,
        {DistanceKind::msd, DistanceKind::wasserstein1});
    if (!opt.window.empty()) {
        const std::size_t colon = opt.window.find(':');
        if (colon == std::string::npos)
            throw config_error("eval: --window expects A:B (inclusive frame indices)");
        eval = apply_window(eval, std::stoi(opt.window.substr(0, colon)),
                            std::stoi(opt.window.substr(colon + 1)));
    }
    save_evaluation(eval, opt.out);

    const ContinuityMode mode = opt.mode == "confidence"
                                    ? ContinuityMode::confidence_indexed
                                    : ContinuityMode::variation_indexed;
    const ContinuityVerdict verdict = check_explainer_continuity(eval, mode);
    std::printf("%s\n", verdict.summary.c_str());
    for (const std::string& note : verdict.notes) std::printf("note: %s\n", note.c_str());
    std::printf("evaluation written to %s\n", opt.out.c_str());
    return 0;
}

struct ReportOptions {
    std::vector<std::string> eval_files;
    std::string out_dir;
    std::string mode = "variation";
};

int cmd_report(const ReportOptions& opt) {
    if (opt.eval_files.empty()) throw config_error("report: need at least one --evals file");
    std::vector<SeriesEvaluation> evals;
    for (const std::string& f : opt.eval_files) evals.push_back(load_evaluation(f));
    for (const SeriesEvaluation& e : evals)
        if (e.series_id != evals.front().series_id)
            throw data_error("report: evaluations mix series '" + evals.front().series_id +
                             "' and '" + e.series_id + "'");

    const ContinuityMode mode = opt.mode == "confidence"
                                    ? ContinuityMode::confidence_indexed
                                    : ContinuityMode::variation_indexed;
    ContinuityReport report;
    report.series_id = evals.front().series_id;
    report.provenance.timestamp = utc_timestamp();
    for (const SeriesEvaluation& e : evals)
        report.runs.push_back({e.series_id, e.explainer_id,
                               check_explainer_continuity(e, mode)});

    const fs::path out(opt.out_dir);
    const std::string stem = report.series_id + "_" + opt.mode;
    emit_table(report, out / (stem + ".csv"), out / (stem + ".json"));
    emit_relational_plot(evals, out / (stem + ".svg"),
                         mode == ContinuityMode::variation_indexed ? "theta"
                                                                   : "confidence_change");
    atomic_write_file(out / (stem + "_report.json"), report_to_json(report).dump(2) + "\n");
    std::printf("report written to %s (%s.csv/.json/.svg)\n", opt.out_dir.c_str(),
                stem.c_str());
    return 0;
}

int cmd_run(const std::string& config, const std::string& out) {
    const ExperimentResult result = run_experiment(config, out);
    if (result.skipped) {
        std::printf("directory %s already complete for this config; nothing to do\n",
                    out.c_str());
        return 0;
    }
    std::printf("experiment complete in %s\n", out.c_str());
    std::printf("model hash %s\n", result.model_hash.c_str());
    if (result.holdout_accuracy >= 0.0)
        std::printf("holdout accuracy %.4f\n", result.holdout_accuracy);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semantic-continuity evaluation of attribution explainers"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    GenOptions gen_opt;
    CLI::App* gen = app.add_subcommand("gen", "Generate a variation series or training set");
    gen->add_option("--kind", gen_opt.kind, "rotation|contrast|transition|train")->required();
    gen->add_option("--out", gen_opt.out, "output directory")->required();
    gen->add_option("--frames", gen_opt.frames, "frames per series");
    gen->add_option("--total-deg", gen_opt.total_deg, "rotation span in degrees");
    gen->add_option("--seed", gen_opt.seed, "RNG seed (train kind)");
    gen->add_option("--n-per-class", gen_opt.n_per_class, "images per class (train kind)");
    gen->add_option("--fill", gen_opt.fill, "shape fill level");
    gen->add_option("--background", gen_opt.background, "background level");
    gen->add_option("--circumradius", gen_opt.circumradius, "shape circumradius in pixels");

    TrainOptions train_opt;
    CLI::App* train_cmd = app.add_subcommand("train", "Train the micro-CNN on labeled images");
    train_cmd->add_option("--data", train_opt.data, "training set directory")->required();
    train_cmd->add_option("--out", train_opt.out, "model file to write")->required();
    train_cmd->add_option("--epochs", train_opt.cfg.epochs, "training epochs");
    train_cmd->add_option("--batch-size", train_opt.cfg.batch_size, "minibatch size");
    train_cmd->add_option("--lr", train_opt.cfg.learning_rate, "learning rate");
    train_cmd->add_option("--seed", train_opt.cfg.seed, "init and shuffle seed");
    train_cmd->add_option("--optimizer", train_opt.optimizer, "adam|sgd");

    ExplainerOptions explain_opt;
    std::string explain_out;
    CLI::App* explain_cmd =
        app.add_subcommand("explain", "Write saliency maps for every series frame");
    explain_cmd->add_option("--model", explain_opt.model_path, "model file");
    explain_cmd->add_option("--series", explain_opt.series_dir, "series directory")->required();
    explain_cmd->add_option("--explainer", explain_opt.explainer,
                            "rise|lime|kernelshap|gradcam")->required();
    explain_cmd->add_option("--out", explain_out, "output directory")->required();
    std::uint64_t explain_seed = 0;
    CLI::Option* explain_seed_opt =
        explain_cmd->add_option("--seed", explain_seed, "explainer seed override");
    explain_cmd->add_option("--blackbox", explain_opt.blackbox_cmd,
                            "external classifier command (line-delimited JSON)");

    EvalOptions eval_opt;
    CLI::App* eval_cmd =
        app.add_subcommand("eval", "Evaluate explainer continuity over a series");
    eval_cmd->add_option("--model", eval_opt.base.model_path, "model file");
    eval_cmd->add_option("--series", eval_opt.base.series_dir, "series directory")->required();
    eval_cmd->add_option("--explainer", eval_opt.base.explainer,
                         "rise|lime|kernelshap|gradcam")->required();
    eval_cmd->add_option("--mode", eval_opt.mode, "variation|confidence");
    eval_cmd->add_option("--window", eval_opt.window, "A:B inclusive frame window");
    eval_cmd->add_option("--out", eval_opt.out, "evaluation JSON to write")->required();
    std::uint64_t eval_seed = 0;
    CLI::Option* eval_seed_opt =
        eval_cmd->add_option("--seed", eval_seed, "explainer seed override");
    eval_cmd->add_option("--blackbox", eval_opt.base.blackbox_cmd,
                         "external classifier command (line-delimited JSON)");

    ReportOptions report_opt;
    CLI::App* report_cmd =
        app.add_subcommand("report", "Emit correlation table and relational plot");
    report_cmd->add_option("--evals", report_opt.eval_files, "evaluation JSON files")
        ->required()
        ->expected(-1);
    report_cmd->add_option("--out", report_opt.out_dir, "output directory")->required();
    report_cmd->add_option("--mode", report_opt.mode, "variation|confidence");

    std::string run_config, run_out;
    CLI::App* run_cmd = app.add_subcommand("run", "Run a full experiment from a config file");
    run_cmd->add_option("--config", run_config, "experiment config file")->required();
    run_cmd->add_option("--out", run_out, "artifact directory")->required();

    try {
        app.parse(argc, argv);
        if (*explain_seed_opt) explain_opt.seed = explain_seed;
        if (*eval_seed_opt) eval_opt.base.seed = eval_seed;

        if (gen->parsed()) return cmd_gen(gen_opt);
        if (train_cmd->parsed()) return cmd_train(train_opt);
        if (explain_cmd->parsed()) {
            if (explain_opt.model_path.empty() && explain_opt.blackbox_cmd.empty())
                throw config_error("explain: need --model or --blackbox");
            return cmd_explain(explain_opt, explain_out);
        }
        if (eval_cmd->parsed()) {
            if (eval_opt.base.model_path.empty() && eval_opt.base.blackbox_cmd.empty())
                throw config_error("eval: need --model or --blackbox");
            if (eval_opt.mode != "variation" && eval_opt.mode != "confidence")
                throw config_error("eval: --mode must be variation or confidence");
            return cmd_eval(eval_opt);
        }
        if (report_cmd->parsed()) {
            if (report_opt.mode != "variation" && report_opt.mode != "confidence")
                throw config_error("report: --mode must be variation or confidence");
            return cmd_report(report_opt);
        }
        if (run_cmd->parsed()) return cmd_run(run_config, run_out);
        std::fprintf(stderr, "no subcommand given\n");
        return 2;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const data_error& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const numeric_error& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
