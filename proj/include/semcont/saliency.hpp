#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "semcont/errors.hpp"
#include "semcont/fsio.hpp"

namespace semcont {

// Real-valued heatmap over the explained image, one value per pixel.
struct SaliencyMap {
    int width = 0;
    int height = 0;
    std::vector<float> values;  // row-major
    std::string explainer_id;
    std::string target_class = "positive";
    std::optional<std::uint64_t> rng_seed;
    bool empty_explanation = false;  // all-zero map from a zero-gradient case
    nlohmann::json config_echo;

    SaliencyMap() = default;
    SaliencyMap(int w, int h, std::string id)
        : width(w), height(h),
          values(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0.0f),
          explainer_id(std::move(id)) {}

    float& at(int y, int x) { return values[static_cast<std::size_t>(y) * width + x]; }
    float at(int y, int x) const { return values[static_cast<std::size_t>(y) * width + x]; }
    std::size_t size() const { return values.size(); }

    void require_finite() const {
        for (float v : values)
            if (!std::isfinite(v))
                throw numeric_error("saliency map (" + explainer_id + "): non-finite value");
    }
};

// Min-max rescale to [0,1]; a constant map becomes all zeros.
inline SaliencyMap normalize_map(const SaliencyMap& map) {
    map.require_finite();
    SaliencyMap out = map;
    if (map.values.empty()) return out;
    const auto [mn_it, mx_it] = std::minmax_element(map.values.begin(), map.values.end());
    const double mn = *mn_it, mx = *mx_it;
    if (mx == mn) {
        std::fill(out.values.begin(), out.values.end(), 0.0f);
        return out;
    }
    const double span = mx - mn;
    for (float& v : out.values) v = static_cast<float>((static_cast<double>(v) - mn) / span);
    return out;
}

// Bilinear resize with half-pixel (cell-centered) sampling and edge clamping.
// Used to blow mask grids up to image scale.
inline std::vector<float> bilinear_resize_halfpixel(const std::vector<float>& src, int sw, int sh,
                                                    int dw, int dh) {
    std::vector<float> dst(static_cast<std::size_t>(dw) * dh);
    const double sx_scale = static_cast<double>(sw) / dw;
    const double sy_scale = static_cast<double>(sh) / dh;
    for (int y = 0; y < dh; ++y) {
        double sy = (y + 0.5) * sy_scale - 0.5;
        sy = std::clamp(sy, 0.0, static_cast<double>(sh - 1));
        const int y0 = static_cast<int>(sy);
        const int y1 = std::min(y0 + 1, sh - 1);
        const double fy = sy - y0;
        for (int x = 0; x < dw; ++x) {
            double sx = (x + 0.5) * sx_scale - 0.5;
            sx = std::clamp(sx, 0.0, static_cast<double>(sw - 1));
            const int x0 = static_cast<int>(sx);
            const int x1 = std::min(x0 + 1, sw - 1);
            const double fx = sx - x0;
            const double top = src[y0 * sw + x0] * (1.0 - fx) + src[y0 * sw + x1] * fx;
            const double bot = src[y1 * sw + x0] * (1.0 - fx) + src[y1 * sw + x1] * fx;
            dst[static_cast<std::size_t>(y) * dw + x] =
                static_cast<float>(top * (1.0 - fy) + bot * fy);
        }
    }
    return dst;
}

// Bilinear resize mapping corners onto corners. Used to lift conv-resolution
// maps to input resolution.
inline std::vector<float> bilinear_resize_aligncorners(const std::vector<float>& src, int sw,
                                                       int sh, int dw, int dh) {
    std::vector<float> dst(static_cast<std::size_t>(dw) * dh);
    const double sx_scale = dw > 1 ? static_cast<double>(sw - 1) / (dw - 1) : 0.0;
    const double sy_scale = dh > 1 ? static_cast<double>(sh - 1) / (dh - 1) : 0.0;
    for (int y = 0; y < dh; ++y) {
        const double sy = y * sy_scale;
        const int y0 = std::min(static_cast<int>(sy), sh - 1);
        const int y1 = std::min(y0 + 1, sh - 1);
        const double fy = sy - y0;
        for (int x = 0; x < dw; ++x) {
            const double sx = x * sx_scale;
            const int x0 = std::min(static_cast<int>(sx), sw - 1);
            const int x1 = std::min(x0 + 1, sw - 1);
            const double fx = sx - x0;
            const double top = src[y0 * sw + x0] * (1.0 - fx) + src[y0 * sw + x1] * fx;
            const double bot = src[y1 * sw + x0] * (1.0 - fx) + src[y1 * sw + x1] * fx;
            dst[static_cast<std::size_t>(y) * dw + x] =
                static_cast<float>(top * (1.0 - fy) + bot * fy);
        }
    }
    return dst;
}

// Saliency file = JSON sidecar (metadata) next to a raw little-endian f32
// blob, row-major. Paths: <stem>.json and <stem>.f32.
inline void save_saliency(const SaliencyMap& map, const std::filesystem::path& stem) {
    map.require_finite();
    nlohmann::json meta;
    meta["explainer_id"] = map.explainer_id;
    meta["target_class"] = map.target_class;
    meta["width"] = map.width;
    meta["height"] = map.height;
    meta["empty_explanation"] = map.empty_explanation;
    if (map.rng_seed) meta["rng_seed"] = *map.rng_seed;
    meta["config"] = map.config_echo.is_null() ? nlohmann::json::object() : map.config_echo;

    std::filesystem::path json_path = stem;
    json_path += ".json";
    std::filesystem::path blob_path = stem;
    blob_path += ".f32";

    std::string blob;
    blob.reserve(map.values.size() * 4);
    for (float v : map.values) wire::put_f32(blob, v);
    atomic_write_file(blob_path, blob);
    atomic_write_file(json_path, meta.dump(2) + "\n");
}

inline SaliencyMap load_saliency(const std::filesystem::path& stem) {
    std::filesystem::path json_path = stem;
    json_path += ".json";
    std::filesystem::path blob_path = stem;
    blob_path += ".f32";

    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(read_file_bytes(json_path));
    } catch (const nlohmann::json::exception& e) {
        throw data_error("saliency sidecar " + json_path.string() + ": " + e.what());
    }
    SaliencyMap map;
    try {
        map.width = meta.at("width").get<int>();
        map.height = meta.at("height").get<int>();
        map.explainer_id = meta.at("explainer_id").get<std::string>();
        map.target_class = meta.at("target_class").get<std::string>();
        map.empty_explanation = meta.value("empty_explanation", false);
        if (meta.contains("rng_seed")) map.rng_seed = meta.at("rng_seed").get<std::uint64_t>();
        map.config_echo = meta.value("config", nlohmann::json::object());
    } catch (const nlohmann::json::exception& e) {
        throw data_error("saliency sidecar " + json_path.string() + ": " + e.what());
    }
    if (map.width <= 0 || map.height <= 0)
        throw data_error("saliency sidecar " + json_path.string() + ": bad dimensions");

    const std::string blob = read_file_bytes(blob_path);
    const std::size_t expect = static_cast<std::size_t>(map.width) * map.height;
    if (blob.size() != expect * 4)
        throw data_error("saliency blob " + blob_path.string() + ": expected " +
                         std::to_string(expect * 4) + " bytes, got " +
                         std::to_string(blob.size()));
    wire::Reader r(blob, "saliency blob " + blob_path.string());
    map.values.resize(expect);
    for (float& v : map.values) v = r.f32();
    map.require_finite();
    return map;
}

}  // namespace semcont
