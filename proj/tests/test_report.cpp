#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "semcont/experiment.hpp"
#include "semcont/report.hpp"
#include "semcont/rng.hpp"

using namespace semcont;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) { return read_file_bytes(p); }

std::vector<std::string> csv_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t nl = text.find('\n', pos);
        lines.push_back(text.substr(pos, nl - pos));
        if (nl == std::string::npos) break;
        pos = nl + 1;
    }
    return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t pos = 0;
    while (pos <= line.size()) {
        const std::size_t comma = line.find(',', pos);
        cells.push_back(comma == std::string::npos ? line.substr(pos)
                                                   : line.substr(pos, comma - pos));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return cells;
}

CorrelationCell sig_cell(CorrMethod method, double coef, double p = 0.001) {
    CorrelationResult r;
    r.method = method;
    r.coefficient = coef;
    r.p_value = p;
    r.n = 20;
    r.significant = p < 0.05;
    CorrelationCell cell;
    cell.result = r;
    return cell;
}

CorrelationCell dash_cell() {
    CorrelationCell cell;
    cell.note = "constant saliency distances";
    return cell;
}

ContinuityVerdict verdict_with(double pearson, double spearman, double kendall,
                               bool significant = true) {
    ContinuityVerdict v;
    v.mode = ContinuityMode::variation_indexed;
    const double p = significant ? 0.001 : 0.4;
    for (const std::string& kind : {"msd", "wasserstein1"}) {
        v.correlations[kind]["pearson"] = sig_cell(CorrMethod::pearson, pearson, p);
        v.correlations[kind]["spearman"] = sig_cell(CorrMethod::spearman, spearman, p);
        v.correlations[kind]["kendall"] = sig_cell(CorrMethod::kendall, kendall, p);
        v.concordant_pair_fraction[kind] = 1.0;
    }
    v.predictor.kendall = sig_cell(CorrMethod::kendall, 0.2, 0.3).result;
    v.predictor.expected_direction = 0;
    v.predictor.continuous = true;
    v.summary = "synthetic";
    return v;
}

ContinuityVerdict dash_verdict() {
    ContinuityVerdict v;
    v.mode = ContinuityMode::variation_indexed;
    for (const std::string& kind : {"msd", "wasserstein1"}) {
        v.correlations[kind]["pearson"] = dash_cell();
        v.correlations[kind]["spearman"] = dash_cell();
        v.correlations[kind]["kendall"] = dash_cell();
        v.concordant_pair_fraction[kind] = 0.0;
    }
    v.predictor.indeterminate = true;
    v.notes.push_back("constant confidence: predictor continuity indeterminate");
    v.summary = "synthetic dashes";
    return v;
}

ContinuityReport sample_report() {
    ContinuityReport report;
    report.series_id = "rotation_demo";
    report.provenance.model_hash = "00ff00ff00ff00ff";
    report.provenance.seeds = {{"rise", 7}, {"lime", 8}};
    report.provenance.config_echo = {{"series.frames", "20"}};
    report.provenance.timestamp = "2026-01-01T00:00:00Z";
    report.runs.push_back({"rotation_demo", "rise", verdict_with(0.80, 0.85, 0.70)});
    report.runs.push_back({"rotation_demo", "lime", dash_verdict()});
    report.runs.push_back({"rotation_demo", "gradcam", verdict_with(0.95, 0.99, 0.90)});
    return report;
}

SeriesEvaluation plot_eval(const std::string& explainer, std::uint64_t seed,
                           bool monotone = false) {
    Rng rng(seed);
    SeriesEvaluation eval;
    eval.series_id = "plotdemo";
    eval.series_kind = "rotation";
    eval.explainer_id = explainer;
    const int n = 8;
    for (int i = 0; i < n; ++i) {
        eval.thetas.push_back(static_cast<double>(i));
        eval.confidences.push_back(0.4 + 0.05 * static_cast<double>(i));
        eval.confidence_changes.push_back(0.05 * static_cast<double>(i));
        eval.image_msd_to_reference.push_back(0.001 * static_cast<double>(i));
    }
    for (const std::string& kind : {"msd", "wasserstein1"}) {
        std::vector<double> d{0.0};
        for (int i = 1; i < n; ++i)
            d.push_back(monotone ? 0.1 * static_cast<double>(i) : rng.uniform());
        eval.saliency_distances[kind] = d;
    }
    eval.validate();
    return eval;
}

// first points="..." attribute in the SVG, parsed into (x, y) pairs
std::vector<std::pair<double, double>> first_polyline(const std::string& svg) {
    const std::size_t at = svg.find("points=\"");
    REQUIRE(at != std::string::npos);
    const std::size_t end = svg.find('"', at + 8);
    std::vector<std::pair<double, double>> pts;
    std::size_t pos = at + 8;
    while (pos < end) {
        std::size_t next = svg.find(' ', pos);
        if (next == std::string::npos || next > end) next = end;
        const std::string pair = svg.substr(pos, next - pos);
        const std::size_t comma = pair.find(',');
        pts.emplace_back(std::stod(pair.substr(0, comma)), std::stod(pair.substr(comma + 1)));
        pos = next + 1;
    }
    return pts;
}

int count_occurrences(const std::string& text, const std::string& needle) {
    int n = 0;
    std::size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        ++n;
        pos += needle.size();
    }
    return n;
}

}  // namespace

// ---------------------------------------------------------------------------
// Correlation tables

TEST_CASE("table csv lays out methods by metrics by explainers") {
    const fs::path dir = fresh_dir("semcont_report_table");
    emit_table(sample_report(), dir / "t.csv", dir / "t.json");

    const std::vector<std::string> lines = csv_lines(slurp(dir / "t.csv"));
    REQUIRE(lines.size() >= 7);
    CHECK(lines[0] == "Correlation,Metric,rise,lime,gradcam");

    int data_rows = 0;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        ++data_rows;
        const std::vector<std::string> cells = split_csv(lines[i]);
        REQUIRE(cells.size() == 5);
        CHECK((cells[0] == "pearson" || cells[0] == "spearman" || cells[0] == "kendall"));
        CHECK((cells[1] == "msd" || cells[1] == "wasserstein1"));
        CHECK(cells[3] == "-");  // the dash-verdict explainer column
        CHECK(cells[2] != "-");
        CHECK(cells[4] != "-");
    }
    CHECK(data_rows == 6);

    const nlohmann::json meta = nlohmann::json::parse(slurp(dir / "t.json"));
    CHECK(meta.at("explainers") == nlohmann::json({"rise", "lime", "gradcam"}));
    CHECK(meta.at("rows").size() == 6);
    for (const auto& row : meta.at("rows")) {
        CHECK(row.at("row_max") == "gradcam");
        CHECK(row.at("cells").at("lime").at("display") == "-");
        const auto& rise = row.at("cells").at("rise");
        CHECK(rise.at("significant").get<bool>());
        CHECK(rise.at("display") != "-");
    }
    fs::remove_all(dir);
}

TEST_CASE("non-significant cells render as dashes even with coefficients") {
    ContinuityReport report;
    report.series_id = "s";
    report.runs.push_back({"s", "rise", verdict_with(0.9, 0.9, 0.9, false)});

    const fs::path dir = fresh_dir("semcont_report_dash");
    emit_table(report, dir / "t.csv", dir / "t.json");
    const std::vector<std::string> lines = csv_lines(slurp(dir / "t.csv"));
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        CHECK(split_csv(lines[i]).back() == "-");
    }
    const nlohmann::json meta = nlohmann::json::parse(slurp(dir / "t.json"));
    for (const auto& row : meta.at("rows")) {
        CHECK_FALSE(row.contains("row_max"));
        // the measured coefficient stays available in the JSON cell
        CHECK(row.at("cells").at("rise").at("coefficient").get<double>() == 0.9);
        CHECK_FALSE(row.at("cells").at("rise").at("significant").get<bool>());
    }
    fs::remove_all(dir);

    CHECK_THROWS_AS(emit_table(ContinuityReport{}, dir / "x.csv", dir / "x.json"), data_error);
}

TEST_CASE("report json round-trips losslessly") {
    const ContinuityReport report = sample_report();
    const nlohmann::json j = report_to_json(report);
    const ContinuityReport back = report_from_json(j);
    CHECK(report_to_json(back) == j);

    nlohmann::json missing = j;
    missing.erase("runs");
    CHECK_THROWS_AS(report_from_json(missing), data_error);

    nlohmann::json stale = j;
    stale["format_version"] = 99;
    CHECK_THROWS_AS(report_from_json(stale), data_error);
}

// ---------------------------------------------------------------------------
// Relational plots

TEST_CASE("relational plot is byte-deterministic and structured") {
    const fs::path dir = fresh_dir("semcont_report_plot");
    const std::vector<SeriesEvaluation> evals{plot_eval("rise", 1), plot_eval("gradcam", 2)};

    emit_relational_plot(evals, dir / "a.svg");
    emit_relational_plot(evals, dir / "b.svg");
    const std::string svg = slurp(dir / "a.svg");
    CHECK(svg == slurp(dir / "b.svg"));

    CHECK(svg.rfind("<svg ", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    // one polyline per explainer x distance kind, plus the confidence overlay
    CHECK(count_occurrences(svg, "<polyline") == 5);
    CHECK(svg.find("rise / msd") != std::string::npos);
    CHECK(svg.find("gradcam / wasserstein1") != std::string::npos);
    CHECK(svg.find("confidence") != std::string::npos);
    CHECK(svg.find("variation indicator") != std::string::npos);

    // every plotted point stays inside the axis box (all variables normalized)
    for (const auto& [x, y] : first_polyline(svg)) {
        CHECK(x >= 59.9);
        CHECK(x <= 60.1 + 530.0);
        CHECK(y >= 19.9);
        CHECK(y <= 20.1 + 430.0);
    }
    fs::remove_all(dir);
}

TEST_CASE("monotone distances draw a strictly descending polyline") {
    const fs::path dir = fresh_dir("semcont_report_plot_mono");
    emit_relational_plot({plot_eval("rise", 3, true)}, dir / "m.svg", "theta", false);
    const auto pts = first_polyline(slurp(dir / "m.svg"));
    REQUIRE(pts.size() == 8);
    for (std::size_t i = 1; i < pts.size(); ++i) {
        CHECK(pts[i].first > pts[i - 1].first);
        CHECK(pts[i].second < pts[i - 1].second);  // SVG y grows downward
    }
    fs::remove_all(dir);
}

TEST_CASE("plot rejects mixed series and unknown axes") {
    SeriesEvaluation other = plot_eval("rise", 4);
    other.series_id = "different";
    const fs::path dir = fresh_dir("semcont_report_plot_bad");
    CHECK_THROWS_AS(emit_relational_plot({plot_eval("rise", 5), other}, dir / "x.svg"),
                    data_error);
    CHECK_THROWS_AS(emit_relational_plot({}, dir / "x.svg"), data_error);
    CHECK_THROWS_AS(emit_relational_plot({plot_eval("rise", 6)}, dir / "x.svg", "frame"),
                    config_error);
    fs::remove_all(dir);
}

// ---------------------------------------------------------------------------
// Saliency strips

TEST_CASE("strip montage keeps every stride-th map") {
    Rng rng(88);
    std::vector<SaliencyMap> maps;
    for (int i = 0; i < 7; ++i) {
        SaliencyMap m(8, 8, "rise");
        for (float& v : m.values) v = static_cast<float>(rng.uniform());
        maps.push_back(m);
    }

    const fs::path dir = fresh_dir("semcont_report_strip");
    emit_saliency_strip(maps, 3, dir / "s.pgm");
    const Image montage = decode_pgm(slurp(dir / "s.pgm"));
    const int panels = (7 + 2) / 3;
    CHECK(montage.width == panels * 8 + (panels - 1) * 2);
    CHECK(montage.height == 8);

    emit_saliency_strip(maps, 7, dir / "one.pgm");
    CHECK(decode_pgm(slurp(dir / "one.pgm")).width == 8);

    emit_saliency_strip(maps, 3, dir / "again.pgm");
    CHECK(slurp(dir / "s.pgm") == slurp(dir / "again.pgm"));

    CHECK_THROWS_AS(emit_saliency_strip(maps, 0, dir / "x.pgm"), config_error);
    CHECK_THROWS_AS(emit_saliency_strip({}, 1, dir / "x.pgm"), data_error);
    std::vector<SaliencyMap> mixed = maps;
    mixed.push_back(SaliencyMap(4, 4, "rise"));
    CHECK_THROWS_AS(emit_saliency_strip(mixed, 1, dir / "x.pgm"), data_error);
    fs::remove_all(dir);
}

TEST_CASE("strip panels are normalized with dark meaning salient") {
    SaliencyMap peak(4, 4, "gradcam");
    peak.values.assign(16, 0.2f);
    peak.values[5] = 0.9f;  // (1,1) is the most salient pixel
    SaliencyMap flat(4, 4, "gradcam");
    flat.values.assign(16, 0.7f);

    const fs::path dir = fresh_dir("semcont_report_strip_norm");
    emit_saliency_strip({peak, flat}, 1, dir / "s.pgm");
    const Image montage = decode_pgm(slurp(dir / "s.pgm"));
    CHECK(montage.at(1, 1) == 0.0f);          // normalized max renders black
    CHECK(montage.at(0, 0) == 1.0f);          // normalized min renders white
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) CHECK(montage.at(y, 6 + x) == 1.0f);  // flat panel
    fs::remove_all(dir);
}

// ---------------------------------------------------------------------------
// Experiment config parsing

TEST_CASE("experiment config parses keys and rejects unknown ones") {
    const std::string text =
        "# comment line\n"
        "train.n_per_class = 25\n"
        "train.seed = 9\n"
        "series.frames = 12   # trailing comment\n"
        "series = rotation, contrast\n"
        "explainers = rise,gradcam\n"
        "distances = msd\n"
        "modes = variation\n"
        "shape.background = 0.8\n"
        "rise.n_masks = 64\n";
    const ExperimentConfig cfg = parse_experiment_config(text);
    CHECK(cfg.train_n_per_class == 25);
    CHECK(cfg.train.seed == 9);
    CHECK(cfg.series_frames == 12);
    CHECK(cfg.series == std::vector<std::string>{"rotation", "contrast"});
    CHECK(cfg.explainers == std::vector<std::string>{"rise", "gradcam"});
    CHECK(cfg.distances == std::vector<DistanceKind>{DistanceKind::msd});
    CHECK(cfg.explainer.rise.n_masks == 64);
    CHECK(cfg.explainer.rise.baseline == 0.8f);
    CHECK(cfg.explainer.lime.baseline == 0.8f);
    CHECK(cfg.echo.at("train.seed") == "9");

    const auto message_of = [](const std::string& bad) {
        try {
            parse_experiment_config(bad);
        } catch (const config_error& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message_of("train.lr = 0.1\n").find("train.lr") != std::string::npos);
    CHECK(message_of("explainers = rise, saliencynet\n").find("saliencynet") !=
          std::string::npos);
    CHECK(message_of("train.epochs = four\n").find("four") != std::string::npos);
    CHECK(message_of("train.epochs\n").find("key = value") != std::string::npos);
    CHECK(message_of("series =\n").find("empty") != std::string::npos);
    CHECK_THROWS_AS(parse_experiment_config("strip.stride = 0\n"), config_error);
    CHECK_THROWS_AS(parse_experiment_config("modes = sideways\n"), config_error);
}

// ---------------------------------------------------------------------------
// Orchestrated runs

TEST_CASE("tiny experiment run produces a complete deterministic artifact tree") {
    const std::string config_text =
        "train.n_per_class = 12\n"
        "train.holdout_per_class = 4\n"
        "train.data_seed = 3\n"
        "train.seed = 3\n"
        "train.epochs = 3\n"
        "series.frames = 8\n"
        "series = rotation\n"
        "explainers = rise,gradcam\n"
        "distances = msd\n"
        "modes = variation\n"
        "window.rotation_theta_max = 45\n"
        "rise.n_masks = 30\n"
        "rise.seed = 5\n"
        "strip.stride = 3\n";
    const fs::path dir = fresh_dir("semcont_report_run");
    const fs::path config_path = dir / "exp.cfg";
    atomic_write_file(config_path, config_text);

    const ExperimentResult first = run_experiment(config_path, dir / "a");
    CHECK_FALSE(first.skipped);
    CHECK(first.model_hash.size() == 16);
    CHECK(first.holdout_accuracy >= 0.0);

    for (const char* rel :
         {"manifest.json", "model.scmn", "series/rotation/manifest.json",
          "evals/rotation_rise.json", "evals/rotation_gradcam.json",
          "tables/rotation_variation.csv", "tables/rotation_variation.json",
          "tables/rotation_variation_window45.csv", "reports/rotation_variation.json",
          "plots/rotation_variation.svg", "strips/rotation_rise.pgm",
          "strips/rotation_gradcam.pgm", "saliency/rotation/rise/frame_0007.json"})
        CHECK_MESSAGE(fs::exists(dir / "a" / rel), rel);

    const nlohmann::json manifest =
        nlohmann::json::parse(slurp(dir / "a" / "manifest.json"));
    CHECK(manifest.at("complete").get<bool>());
    CHECK(manifest.at("model_hash") == first.model_hash);
    CHECK(manifest.at("seeds").at("rise") == 5);
    CHECK(manifest.at("artifacts").size() >= 10);

    const ExperimentResult again = run_experiment(config_path, dir / "a");
    CHECK(again.skipped);
    CHECK(again.model_hash == first.model_hash);

    // a separate directory from the same config matches byte-for-byte on
    // every table and plot
    const ExperimentResult second = run_experiment(config_path, dir / "b");
    CHECK_FALSE(second.skipped);
    CHECK(second.model_hash == first.model_hash);
    for (const char* rel :
         {"tables/rotation_variation.csv", "tables/rotation_variation.json",
          "tables/rotation_variation_window45.csv", "plots/rotation_variation.svg",
          "strips/rotation_rise.pgm"})
        CHECK_MESSAGE(slurp(dir / "a" / rel) == slurp(dir / "b" / rel), rel);

    fs::remove_all(dir);
}
