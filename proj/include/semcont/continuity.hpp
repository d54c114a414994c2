#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "semcont/distances.hpp"
#include "semcont/errors.hpp"
#include "semcont/explain.hpp"
#include "semcont/fsio.hpp"
#include "semcont/nn.hpp"
#include "semcont/saliency.hpp"
#include "semcont/shapes.hpp"
#include "semcont/stats.hpp"

namespace semcont {

inline constexpr int kEvaluationFormatVersion = 1;

// Per-frame measurements of one (series, explainer) pair, anchored at frame 0.
struct SeriesEvaluation {
    std::string series_id;
    std::string series_kind;
    std::string explainer_id;
    std::vector<double> thetas;
    std::vector<double> confidences;
    std::vector<double> confidence_changes;             // |conf_i - conf_0|
    std::map<std::string, std::vector<double>> saliency_distances;  // per DistanceKind name
    std::vector<double> image_msd_to_reference;         // pixel-space MSD, plot alternative
    int empty_explanations = 0;
    std::optional<std::pair<int, int>> window;          // inclusive frame range
    nlohmann::json explainer_config;

    std::size_t frames() const { return thetas.size(); }

    void validate() const {
        const std::size_t n = thetas.size();
        if (confidences.size() != n || confidence_changes.size() != n ||
            image_msd_to_reference.size() != n)
            throw data_error("evaluation " + series_id + ": per-frame list length mismatch");
        for (const auto& [kind, d] : saliency_distances)
            if (d.size() != n)
                throw data_error("evaluation " + series_id + ": " + kind +
                                 " distance list length mismatch");
        if (n > 0) {
            if (confidence_changes[0] != 0.0)
                throw data_error("evaluation " + series_id + ": confidence_changes[0] != 0");
            for (const auto& [kind, d] : saliency_distances)
                if (d[0] != 0.0)
                    throw data_error("evaluation " + series_id + ": " + kind +
                                     " distance at reference frame != 0");
        }
    }
};

enum class ContinuityMode { variation_indexed, confidence_indexed };

inline std::string to_string(ContinuityMode m) {
    return m == ContinuityMode::variation_indexed ? "variation_indexed" : "confidence_indexed";
}

// One correlation table slot; empty result means the dash state (constant
// input made the coefficient undefined).
struct CorrelationCell {
    std::optional<CorrelationResult> result;
    std::string note;
};

// Predictor-side check: Kendall of confidence against theta, plus the
// declared direction the confidence should move for this series kind.
struct PredictorContinuity {
    std::optional<CorrelationResult> kendall;
    bool indeterminate = false;  // constant confidence
    int expected_direction = 0;  // +1 rising, -1 falling, 0 none declared
    bool continuous = false;
};

struct ContinuityVerdict {
    ContinuityMode mode = ContinuityMode::variation_indexed;
    std::map<std::string, std::map<std::string, CorrelationCell>> correlations;
    std::map<std::string, double> concordant_pair_fraction;
    PredictorContinuity predictor;
    std::vector<std::string> notes;
    std::string summary;
};

// Confidence direction each series kind is expected to induce: morphing a
// circle into a triangle should raise triangle confidence, fading a triangle
// into the background should lower it, rotating a triangle declares none.
inline int expected_confidence_direction(const std::string& series_kind) {
    if (series_kind == "transition") return 1;
    if (series_kind == "contrast") return -1;
    return 0;
}

// Runs model and explainer over every frame; distances are between
// normalize_map'd saliency maps, reference-anchored at frame 0. on_map, when
// set, receives each frame's raw saliency map as it is produced.
inline SeriesEvaluation evaluate_series(
    const ModelFn& model_fn, const ModelSnapshot* model, const VariationSeries& series,
    const std::string& explainer, const ExplainerConfig& cfg,
    const std::vector<DistanceKind>& distance_kinds,
    const std::function<void(int, const SaliencyMap&)>& on_map = {}) {
    series.validate();
    if (distance_kinds.empty())
        throw config_error("evaluate_series: need at least one distance kind");

    SeriesEvaluation eval;
    eval.series_id = series.id;
    eval.series_kind = to_string(series.kind);
    eval.explainer_id = explainer;
    eval.thetas = series.thetas;

    const std::size_t n = series.frames.size();
    eval.confidences.resize(n);
    eval.confidence_changes.resize(n);
    eval.image_msd_to_reference.resize(n);
    for (DistanceKind kind : distance_kinds)
        eval.saliency_distances[to_string(kind)].assign(n, 0.0);

    SaliencyMap reference_norm;
    for (std::size_t i = 0; i < n; ++i) {
        const Image& frame = series.frames[i];
        // RISE reuses one mask set for the whole series (masks are generated
        // once and shared across images, as in its reference implementation);
        // LIME and KernelSHAP draw fresh but reproducible samples per frame,
        // matching how those explainers sample on every call
        ExplainerConfig frame_cfg = cfg;
        frame_cfg.lime.seed = cfg.lime.seed + i;
        frame_cfg.kernelshap.seed = cfg.kernelshap.seed + i;
        double conf;
        SaliencyMap map;
        try {
            conf = explain_detail::checked_confidence(model_fn, frame, "evaluate_series");
            map = explain(explainer, model, model_fn, frame, frame_cfg);
        } catch (const config_error&) {
            throw;
        } catch (const std::exception& e) {
            throw numeric_error("evaluate_series: " + explainer + " failed on frame " +
                                std::to_string(i) + " of " + series.id + ": " + e.what());
        }
        eval.confidences[i] = conf;
        eval.confidence_changes[i] = std::abs(conf - eval.confidences[0]);
        eval.image_msd_to_reference[i] = image_msd(frame, series.frames[0]);
        if (map.empty_explanation) ++eval.empty_explanations;
        if (eval.explainer_config.is_null()) eval.explainer_config = map.config_echo;
        if (on_map) on_map(static_cast<int>(i), map);

        const SaliencyMap norm = normalize_map(map);
        if (i == 0) {
            reference_norm = norm;
            continue;
        }
        for (DistanceKind kind : distance_kinds)
            eval.saliency_distances[to_string(kind)][i] =
                saliency_distance(kind, norm, reference_norm);
    }
    eval.confidence_changes[0] = 0.0;
    eval.validate();
    return eval;
}

inline SeriesEvaluation evaluate_series(
    const ModelSnapshot& model, const VariationSeries& series, const std::string& explainer,
    const ExplainerConfig& cfg, const std::vector<DistanceKind>& distance_kinds,
    const std::function<void(int, const SaliencyMap&)>& on_map = {}) {
    return evaluate_series(model_fn_of(model), &model, series, explainer, cfg, distance_kinds,
                           on_map);
}

inline PredictorContinuity check_predictor_continuity(const SeriesEvaluation& eval) {
    if (eval.frames() < 3)
        throw data_error("check_predictor_continuity: need at least 3 frames");
    PredictorContinuity out;
    out.expected_direction = expected_confidence_direction(eval.series_kind);
    try {
        out.kendall = kendall(eval.thetas, eval.confidences);
    } catch (const constant_input_error&) {
        out.indeterminate = true;
        out.continuous = false;
        return out;
    }
    const CorrelationResult& k = *out.kendall;
    if (out.expected_direction > 0)
        out.continuous = k.significant && k.coefficient > 0.0;
    else if (out.expected_direction < 0)
        out.continuous = k.significant && k.coefficient < 0.0;
    else
        out.continuous = !k.significant || std::abs(k.coefficient) <= 0.3;
    return out;
}

namespace continuity_detail {

// Fraction of index pairs where the x and distance orderings agree strictly.
inline double concordant_fraction(const std::vector<double>& x, const std::vector<double>& d) {
    const std::size_t n = x.size();
    std::size_t concordant = 0, total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            ++total;
            if ((x[j] - x[i]) * (d[j] - d[i]) > 0.0) ++concordant;
        }
    }
    return total == 0 ? 0.0 : static_cast<double>(concordant) / static_cast<double>(total);
}

}  // namespace continuity_detail

inline ContinuityVerdict check_explainer_continuity(const SeriesEvaluation& eval,
                                                    ContinuityMode mode) {
    eval.validate();
    if (eval.frames() < 3)
        throw data_error("check_explainer_continuity: need at least 3 frames");

    ContinuityVerdict verdict;
    verdict.mode = mode;
    const std::vector<double>& x =
        mode == ContinuityMode::variation_indexed ? eval.thetas : eval.confidence_changes;

    for (const auto& [kind, distances] : eval.saliency_distances) {
        verdict.concordant_pair_fraction[kind] =
            continuity_detail::concordant_fraction(x, distances);
        for (CorrMethod method :
             {CorrMethod::pearson, CorrMethod::spearman, CorrMethod::kendall}) {
            CorrelationCell cell;
            try {
                cell.result = correlate(method, x, distances);
            } catch (const constant_input_error& e) {
                cell.note = e.what();
            }
            verdict.correlations[kind][to_string(method)] = cell;
        }
    }

    verdict.predictor = check_predictor_continuity(eval);

    if (eval.empty_explanations > 0)
        verdict.notes.push_back(std::to_string(eval.empty_explanations) +
                                " empty explanation(s) kept as all-zero maps");
    if (verdict.predictor.indeterminate)
        verdict.notes.push_back("constant confidence: predictor continuity indeterminate");
    if (eval.window)
        verdict.notes.push_back("window applied: frames [" +
                                std::to_string(eval.window->first) + "," +
                                std::to_string(eval.window->second) + "]");

    std::string summary = eval.explainer_id + " on " + eval.series_id + " (" +
                          to_string(mode) + "):";
    for (const auto& [kind, methods] : verdict.correlations) {
        const auto& cell = methods.at("kendall");
        if (!cell.result) {
            summary += " " + kind + "=-";
            continue;
        }
        const bool positive_significant = cell.result->significant &&
                                          cell.result->coefficient > 0.0;
        char buf[64];
        std::snprintf(buf, sizeof(buf), " %s tau=%.3f%s", kind.c_str(),
                      cell.result->coefficient, positive_significant ? " (monotone)" : "");
        summary += buf;
    }
    verdict.summary = summary;
    return verdict;
}

// Restricted copy over the inclusive frame range; the reference frame must
// stay included so anchoring is preserved.
inline SeriesEvaluation apply_window(const SeriesEvaluation& eval, int first, int last) {
    eval.validate();
    const int n = static_cast<int>(eval.frames());
    if (first != 0)
        throw config_error("apply_window: window must keep the reference frame (first == 0)");
    if (last < first || last >= n)
        throw config_error("apply_window: range [" + std::to_string(first) + "," +
                           std::to_string(last) + "] out of bounds for " + std::to_string(n) +
                           " frames");
    if (last - first + 1 < 3) throw config_error("apply_window: window must span >= 3 frames");

    SeriesEvaluation out = eval;
    const auto cut = [first, last](std::vector<double>& v) {
        v = std::vector<double>(v.begin() + first, v.begin() + last + 1);
    };
    cut(out.thetas);
    cut(out.confidences);
    cut(out.confidence_changes);
    cut(out.image_msd_to_reference);
    for (auto& [kind, d] : out.saliency_distances) cut(d);
    out.window = std::make_pair(first, last);
    out.validate();
    return out;
}

// Largest window [0, i] with theta_i <= theta_max.
inline SeriesEvaluation apply_theta_window(const SeriesEvaluation& eval, double theta_max) {
    int last = -1;
    for (std::size_t i = 0; i < eval.thetas.size(); ++i)
        if (eval.thetas[i] <= theta_max) last = static_cast<int>(i);
    if (last < 0) throw config_error("apply_theta_window: no frame within theta_max");
    return apply_window(eval, 0, last);
}

// ---------------------------------------------------------------------------
// Evaluation artifact

inline nlohmann::json evaluation_to_json(const SeriesEvaluation& eval) {
    eval.validate();
    nlohmann::json j;
    j["format_version"] = kEvaluationFormatVersion;
    j["series_id"] = eval.series_id;
    j["series_kind"] = eval.series_kind;
    j["explainer_id"] = eval.explainer_id;
    j["thetas"] = eval.thetas;
    j["confidences"] = eval.confidences;
    j["confidence_changes"] = eval.confidence_changes;
    j["saliency_distances"] = eval.saliency_distances;
    j["image_msd_to_reference"] = eval.image_msd_to_reference;
    j["empty_explanations"] = eval.empty_explanations;
    if (eval.window) j["window"] = {eval.window->first, eval.window->second};
    j["explainer_config"] =
        eval.explainer_config.is_null() ? nlohmann::json::object() : eval.explainer_config;
    return j;
}

inline void save_evaluation(const SeriesEvaluation& eval, const std::filesystem::path& path) {
    atomic_write_file(path, evaluation_to_json(eval).dump(2) + "\n");
}

inline SeriesEvaluation evaluation_from_json(const nlohmann::json& j) {
    SeriesEvaluation eval;
    try {
        if (j.at("format_version").get<int>() != kEvaluationFormatVersion)
            throw data_error("evaluation artifact: unsupported format version");
        eval.series_id = j.at("series_id").get<std::string>();
        eval.series_kind = j.at("series_kind").get<std::string>();
        eval.explainer_id = j.at("explainer_id").get<std::string>();
        eval.thetas = j.at("thetas").get<std::vector<double>>();
        eval.confidences = j.at("confidences").get<std::vector<double>>();
        eval.confidence_changes = j.at("confidence_changes").get<std::vector<double>>();
        eval.saliency_distances =
            j.at("saliency_distances").get<std::map<std::string, std::vector<double>>>();
        eval.image_msd_to_reference =
            j.at("image_msd_to_reference").get<std::vector<double>>();
        eval.empty_explanations = j.at("empty_explanations").get<int>();
        if (j.contains("window"))
            eval.window = std::make_pair(j.at("window").at(0).get<int>(),
                                         j.at("window").at(1).get<int>());
        eval.explainer_config = j.value("explainer_config", nlohmann::json::object());
    } catch (const nlohmann::json::exception& e) {
        throw data_error(std::string("evaluation artifact: malformed: ") + e.what());
    }
    eval.validate();
    return eval;
}

inline SeriesEvaluation load_evaluation(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file_bytes(path));
    } catch (const nlohmann::json::exception& e) {
        throw data_error("evaluation artifact " + path.string() + ": " + e.what());
    }
    return evaluation_from_json(j);
}

}  // namespace semcont
