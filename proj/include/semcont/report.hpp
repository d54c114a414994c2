#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "semcont/continuity.hpp"
#include "semcont/errors.hpp"
#include "semcont/fsio.hpp"
#include "semcont/saliency.hpp"
#include "semcont/series_io.hpp"
#include "semcont/version.hpp"

namespace semcont {

inline constexpr int kReportFormatVersion = 1;

struct ReportRun {
    std::string series_id;
    std::string explainer_id;
    ContinuityVerdict verdict;
};

struct ReportProvenance {
    std::string model_hash;
    std::map<std::string, std::uint64_t> seeds;
    nlohmann::json config_echo;
    std::string tool_version = kToolVersion;
    std::string timestamp;  // run manifest only; table/plot files never carry it
};

// All verdicts for one series (one table's worth), plus provenance.
struct ContinuityReport {
    std::string series_id;
    std::vector<ReportRun> runs;
    ReportProvenance provenance;
};

namespace report_detail {

inline std::string format_coefficient(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    // avoid the "-0.000" display
    if (std::string(buf) == "-0.000") return "0.000";
    return buf;
}

inline std::string format_double(double v, const char* fmt = "%.6g") {
    char buf[48];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

}  // namespace report_detail

// ---------------------------------------------------------------------------
// Verdict <-> JSON (needed for the lossless report round-trip)

inline nlohmann::json correlation_result_to_json(const CorrelationResult& r) {
    return {{"method", to_string(r.method)}, {"coefficient", r.coefficient},
            {"p_value", r.p_value},          {"n", r.n},
            {"significant", r.significant}};
}

inline CorrelationResult correlation_result_from_json(const nlohmann::json& j) {
    CorrelationResult r;
    const std::string m = j.at("method").get<std::string>();
    r.method = m == "pearson" ? CorrMethod::pearson
                              : (m == "spearman" ? CorrMethod::spearman : CorrMethod::kendall);
    r.coefficient = j.at("coefficient").get<double>();
    r.p_value = j.at("p_value").get<double>();
    r.n = j.at("n").get<std::size_t>();
    r.significant = j.at("significant").get<bool>();
    return r;
}

inline nlohmann::json verdict_to_json(const ContinuityVerdict& v) {
    nlohmann::json j;
    j["mode"] = to_string(v.mode);
    nlohmann::json corr = nlohmann::json::object();
    for (const auto& [kind, methods] : v.correlations) {
        nlohmann::json per_kind = nlohmann::json::object();
        for (const auto& [method, cell] : methods) {
            nlohmann::json c;
            if (cell.result) c["result"] = correlation_result_to_json(*cell.result);
            if (!cell.note.empty()) c["note"] = cell.note;
            per_kind[method] = c;
        }
        corr[kind] = per_kind;
    }
    j["correlations"] = corr;
    j["concordant_pair_fraction"] = v.concordant_pair_fraction;
    nlohmann::json pred;
    pred["indeterminate"] = v.predictor.indeterminate;
    pred["expected_direction"] = v.predictor.expected_direction;
    pred["continuous"] = v.predictor.continuous;
    if (v.predictor.kendall) pred["kendall"] = correlation_result_to_json(*v.predictor.kendall);
    j["predictor"] = pred;
    j["notes"] = v.notes;
    j["summary"] = v.summary;
    return j;
}

inline ContinuityVerdict verdict_from_json(const nlohmann::json& j) {
    ContinuityVerdict v;
    v.mode = j.at("mode").get<std::string>() == "confidence_indexed"
                 ? ContinuityMode::confidence_indexed
                 : ContinuityMode::variation_indexed;
    for (const auto& [kind, methods] : j.at("correlations").items()) {
        for (const auto& [method, c] : methods.items()) {
            CorrelationCell cell;
            if (c.contains("result")) cell.result = correlation_result_from_json(c.at("result"));
            cell.note = c.value("note", "");
            v.correlations[kind][method] = cell;
        }
    }
    v.concordant_pair_fraction =
        j.at("concordant_pair_fraction").get<std::map<std::string, double>>();
    const auto& pred = j.at("predictor");
    v.predictor.indeterminate = pred.at("indeterminate").get<bool>();
    v.predictor.expected_direction = pred.at("expected_direction").get<int>();
    v.predictor.continuous = pred.at("continuous").get<bool>();
    if (pred.contains("kendall"))
        v.predictor.kendall = correlation_result_from_json(pred.at("kendall"));
    v.notes = j.at("notes").get<std::vector<std::string>>();
    v.summary = j.at("summary").get<std::string>();
    return v;
}

inline nlohmann::json report_to_json(const ContinuityReport& report) {
    nlohmann::json j;
    j["format_version"] = kReportFormatVersion;
    j["series_id"] = report.series_id;
    nlohmann::json runs = nlohmann::json::array();
    for (const ReportRun& run : report.runs)
        runs.push_back({{"series_id", run.series_id},
                        {"explainer_id", run.explainer_id},
                        {"verdict", verdict_to_json(run.verdict)}});
    j["runs"] = runs;
    nlohmann::json prov;
    prov["model_hash"] = report.provenance.model_hash;
    prov["seeds"] = report.provenance.seeds;
    prov["config"] = report.provenance.config_echo.is_null() ? nlohmann::json::object()
                                                             : report.provenance.config_echo;
    prov["tool_version"] = report.provenance.tool_version;
    prov["timestamp"] = report.provenance.timestamp;
    j["provenance"] = prov;
    return j;
}

inline ContinuityReport report_from_json(const nlohmann::json& j) {
    ContinuityReport report;
    try {
        if (j.at("format_version").get<int>() != kReportFormatVersion)
            throw data_error("report: unsupported format version");
        report.series_id = j.at("series_id").get<std::string>();
        for (const auto& run_json : j.at("runs")) {
            ReportRun run;
            run.series_id = run_json.at("series_id").get<std::string>();
            run.explainer_id = run_json.at("explainer_id").get<std::string>();
            run.verdict = verdict_from_json(run_json.at("verdict"));
            report.runs.push_back(std::move(run));
        }
        const auto& prov = j.at("provenance");
        report.provenance.model_hash = prov.at("model_hash").get<std::string>();
        report.provenance.seeds =
            prov.at("seeds").get<std::map<std::string, std::uint64_t>>();
        report.provenance.config_echo = prov.value("config", nlohmann::json::object());
        report.provenance.tool_version = prov.at("tool_version").get<std::string>();
        report.provenance.timestamp = prov.at("timestamp").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw data_error(std::string("report: malformed: ") + e.what());
    }
    return report;
}

// ---------------------------------------------------------------------------
// Correlation table: rows (method x distance metric), columns (explainer).
// Cells show the coefficient, or "-" when not significant or undefined.

inline void emit_table(const ContinuityReport& report, const std::filesystem::path& csv_path,
                       const std::filesystem::path& json_path) {
    if (report.runs.empty()) throw data_error("emit_table: empty report");

    std::vector<std::string> explainers;
    for (const ReportRun& run : report.runs) explainers.push_back(run.explainer_id);

    std::vector<std::string> kinds;
    for (const auto& [kind, methods] : report.runs.front().verdict.correlations)
        kinds.push_back(kind);
    const std::vector<std::string> methods{"pearson", "spearman", "kendall"};

    std::string csv = "Correlation,Metric";
    for (const std::string& e : explainers) csv += "," + e;
    csv += "\n";

    nlohmann::json jrows = nlohmann::json::array();
    for (const std::string& method : methods) {
        for (const std::string& kind : kinds) {
            csv += method + "," + kind;
            nlohmann::json row;
            row["correlation"] = method;
            row["metric"] = kind;
            nlohmann::json cells = nlohmann::json::object();
            double best = -2.0;
            std::string best_explainer;
            for (const ReportRun& run : report.runs) {
                const auto kind_it = run.verdict.correlations.find(kind);
                nlohmann::json cell;
                std::string display = "-";
                if (kind_it != run.verdict.correlations.end()) {
                    const auto method_it = kind_it->second.find(method);
                    if (method_it != kind_it->second.end() && method_it->second.result) {
                        const CorrelationResult& r = *method_it->second.result;
                        cell["coefficient"] = r.coefficient;
                        cell["p_value"] = r.p_value;
                        cell["significant"] = r.significant;
                        if (r.significant) {
                            display = report_detail::format_coefficient(r.coefficient);
                            if (r.coefficient > best) {
                                best = r.coefficient;
                                best_explainer = run.explainer_id;
                            }
                        }
                    } else if (method_it != kind_it->second.end()) {
                        cell["note"] = method_it->second.note;
                    }
                }
                cell["display"] = display;
                cells[run.explainer_id] = cell;
                csv += "," + display;
            }
            row["cells"] = cells;
            if (!best_explainer.empty()) row["row_max"] = best_explainer;
            jrows.push_back(row);
            csv += "\n";
        }
    }

    nlohmann::json out;
    out["format_version"] = kReportFormatVersion;
    out["series_id"] = report.series_id;
    out["explainers"] = explainers;
    out["rows"] = jrows;
    out["model_hash"] = report.provenance.model_hash;
    out["tool_version"] = report.provenance.tool_version;

    atomic_write_file(csv_path, csv);
    atomic_write_file(json_path, out.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Relational plot: hand-emitted SVG, one polyline per (explainer x distance
// kind), every variable min-max normalized to [0,1].

namespace report_detail {

inline const std::vector<std::string>& palette() {
    static const std::vector<std::string> colors{"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                                 "#ff7f0e", "#8c564b", "#17becf", "#e377c2"};
    return colors;
}

inline std::vector<double> minmax_normalize(const std::vector<double>& v) {
    std::vector<double> out(v.size(), 0.0);
    if (v.empty()) return out;
    const auto [mn_it, mx_it] = std::minmax_element(v.begin(), v.end());
    const double mn = *mn_it, mx = *mx_it;
    if (mx == mn) return out;
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - mn) / (mx - mn);
    return out;
}

inline std::string polyline_points(const std::vector<double>& xs, const std::vector<double>& ys,
                                   double x0, double y0, double w, double h) {
    std::string pts;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%s%.2f,%.2f", i ? " " : "", x0 + xs[i] * w,
                      y0 + h - ys[i] * h);
        pts += buf;
    }
    return pts;
}

}  // namespace report_detail

// x_axis: "theta" or "confidence_change". include_confidence adds a dashed
// confidence overlay per the figure convention.
inline void emit_relational_plot(const std::vector<SeriesEvaluation>& evals,
                                 const std::filesystem::path& svg_path,
                                 const std::string& x_axis = "theta",
                                 bool include_confidence = true) {
    if (evals.empty()) throw data_error("emit_relational_plot: no evaluations");
    for (const SeriesEvaluation& e : evals)
        if (e.series_id != evals.front().series_id)
            throw data_error("emit_relational_plot: evaluations mix series '" +
                             evals.front().series_id + "' and '" + e.series_id + "'");
    if (x_axis != "theta" && x_axis != "confidence_change")
        throw config_error("emit_relational_plot: unknown x axis '" + x_axis + "'");

    constexpr double kW = 800, kH = 500;
    constexpr double kLeft = 60, kTop = 20, kRight = 210, kBottom = 50;
    const double plot_w = kW - kLeft - kRight;
    const double plot_h = kH - kTop - kBottom;

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 500\" "
           "font-family=\"sans-serif\" font-size=\"12\">\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"500\" fill=\"white\"/>\n";
    {
        char buf[256];
        std::snprintf(buf, sizeof(buf),
                      "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"none\" "
                      "stroke=\"#333\"/>\n",
                      kLeft, kTop, plot_w, plot_h);
        svg += buf;
    }

    // axis ticks at 0, 0.5, 1 on both axes (normalized space)
    for (double t : {0.0, 0.5, 1.0}) {
        char buf[512];
        const double x = kLeft + t * plot_w;
        const double y = kTop + plot_h - t * plot_h;
        std::snprintf(buf, sizeof(buf),
                      "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#333\"/>\n"
                      "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">%.1f</text>\n",
                      x, kTop + plot_h, x, kTop + plot_h + 5, x, kTop + plot_h + 20, t);
        svg += buf;
        std::snprintf(buf, sizeof(buf),
                      "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#333\"/>\n"
                      "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\">%.1f</text>\n",
                      kLeft - 5, y, kLeft, y, kLeft - 8, y + 4, t);
        svg += buf;
    }
    {
        char buf[256];
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">%s (normalized)</text>\n",
                      kLeft + plot_w / 2, kH - 12,
                      x_axis == "theta" ? "variation indicator" : "confidence change");
        svg += buf;
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"15\" y=\"%.1f\" text-anchor=\"middle\" "
                      "transform=\"rotate(-90 15 %.1f)\">distance (normalized)</text>\n",
                      kTop + plot_h / 2, kTop + plot_h / 2);
        svg += buf;
    }

    std::size_t color_index = 0;
    double legend_y = kTop + 10;
    auto legend_entry = [&](const std::string& label, const std::string& color, bool dashed) {
        char buf[512];
        std::snprintf(buf, sizeof(buf),
                      "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"%s\" "
                      "stroke-width=\"2\"%s/>\n"
                      "<text x=\"%.1f\" y=\"%.1f\">%s</text>\n",
                      kW - kRight + 15, legend_y, kW - kRight + 45, legend_y, color.c_str(),
                      dashed ? " stroke-dasharray=\"6 3\"" : "", kW - kRight + 52, legend_y + 4,
                      label.c_str());
        svg += buf;
        legend_y += 18;
    };

    for (const SeriesEvaluation& eval : evals) {
        const std::vector<double>& raw_x =
            x_axis == "theta" ? eval.thetas : eval.confidence_changes;
        const std::vector<double> xs = report_detail::minmax_normalize(raw_x);
        for (const auto& [kind, distances] : eval.saliency_distances) {
            const std::vector<double> ys = report_detail::minmax_normalize(distances);
            const std::string color =
                report_detail::palette()[color_index % report_detail::palette().size()];
            ++color_index;
            char buf[128];
            std::snprintf(buf, sizeof(buf),
                          "<polyline fill=\"none\" stroke=\"%s\" stroke-width=\"2\" points=\"",
                          color.c_str());
            svg += buf;
            svg += report_detail::polyline_points(xs, ys, kLeft, kTop, plot_w, plot_h);
            svg += "\"/>\n";
            legend_entry(eval.explainer_id + " / " + kind, color, false);
        }
    }

    if (include_confidence) {
        const SeriesEvaluation& eval = evals.front();
        const std::vector<double> xs = report_detail::minmax_normalize(
            x_axis == "theta" ? eval.thetas : eval.confidence_changes);
        const std::vector<double> ys = report_detail::minmax_normalize(eval.confidences);
        svg += "<polyline fill=\"none\" stroke=\"#555\" stroke-width=\"2\" "
               "stroke-dasharray=\"6 3\" points=\"";
        svg += report_detail::polyline_points(xs, ys, kLeft, kTop, plot_w, plot_h);
        svg += "\"/>\n";
        legend_entry("confidence", "#555", true);
    }

    svg += "</svg>\n";
    atomic_write_file(svg_path, svg);
}

// ---------------------------------------------------------------------------
// Saliency strip: grayscale PGM montage of every stride-th map, each panel
// min-max normalized, darker = higher attribution.

inline void emit_saliency_strip(const std::vector<SaliencyMap>& maps, int stride,
                                const std::filesystem::path& pgm_path) {
    if (maps.empty()) throw data_error("emit_saliency_strip: no maps");
    if (stride < 1) throw config_error("emit_saliency_strip: stride must be >= 1");
    const int w = maps.front().width, h = maps.front().height;
    for (const SaliencyMap& m : maps)
        if (m.width != w || m.height != h)
            throw data_error("emit_saliency_strip: mixed map dimensions");

    std::vector<const SaliencyMap*> picked;
    for (std::size_t i = 0; i < maps.size(); i += static_cast<std::size_t>(stride))
        picked.push_back(&maps[i]);

    constexpr int kGutter = 2;
    const int panels = static_cast<int>(picked.size());
    const int out_w = panels * w + (panels - 1) * kGutter;
    Image montage(out_w, h, 1.0f);
    for (int p = 0; p < panels; ++p) {
        const SaliencyMap norm = normalize_map(*picked[static_cast<std::size_t>(p)]);
        const int x0 = p * (w + kGutter);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                montage.at(y, x0 + x) = 1.0f - norm.at(y, x);
    }
    atomic_write_file(pgm_path, encode_pgm(montage));
}

}  // namespace semcont
