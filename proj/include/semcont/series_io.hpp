#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "semcont/errors.hpp"
#include "semcont/fsio.hpp"
#include "semcont/image.hpp"
#include "semcont/shapes.hpp"

namespace semcont {

inline constexpr int kSeriesFormatVersion = 1;

inline std::string to_string(ShapeKind k) {
    switch (k) {
        case ShapeKind::triangle: return "triangle";
        case ShapeKind::circle: return "circle";
        case ShapeKind::morph: return "morph";
    }
    return "?";
}

inline ShapeKind shape_kind_from_string(const std::string& s) {
    if (s == "triangle") return ShapeKind::triangle;
    if (s == "circle") return ShapeKind::circle;
    if (s == "morph") return ShapeKind::morph;
    throw data_error("unknown shape kind '" + s + "'");
}

inline SeriesKind series_kind_from_string(const std::string& s) {
    if (s == "rotation") return SeriesKind::rotation;
    if (s == "contrast") return SeriesKind::contrast;
    if (s == "transition") return SeriesKind::transition;
    throw data_error("unknown series kind '" + s + "'");
}

inline nlohmann::json shape_spec_to_json(const ShapeSpec& s) {
    return {{"kind", to_string(s.kind)},          {"morph_t", s.morph_t},
            {"rotation_deg", s.rotation_deg},     {"fill_level", s.fill_level},
            {"background_level", s.background_level}, {"circumradius_px", s.circumradius_px},
            {"center_x", s.center_x},             {"center_y", s.center_y}};
}

inline ShapeSpec shape_spec_from_json(const nlohmann::json& j) {
    ShapeSpec s;
    s.kind = shape_kind_from_string(j.at("kind").get<std::string>());
    s.morph_t = j.at("morph_t").get<double>();
    s.rotation_deg = j.at("rotation_deg").get<double>();
    s.fill_level = j.at("fill_level").get<double>();
    s.background_level = j.at("background_level").get<double>();
    s.circumradius_px = j.at("circumradius_px").get<double>();
    s.center_x = j.at("center_x").get<double>();
    s.center_y = j.at("center_y").get<double>();
    return s;
}

// ---------------------------------------------------------------------------
// Frame files: PGM (P5, maxval 255) as the interchange approximation plus a
// raw little-endian f32 sidecar holding the exact pixels.

inline std::string encode_pgm(const Image& img) {
    std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) +
                      "\n255\n";
    out.reserve(out.size() + img.pixels.size());
    for (float v : img.pixels) {
        const double clamped = v < 0.0f ? 0.0 : (v > 1.0f ? 1.0 : static_cast<double>(v));
        out.push_back(static_cast<char>(static_cast<unsigned char>(
            std::lround(clamped * 255.0))));
    }
    return out;
}

inline Image decode_pgm(const std::string& bytes, const std::string& what = "pgm") {
    std::size_t pos = 0;
    auto token = [&]() -> std::string {
        while (pos < bytes.size()) {
            if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
                ++pos;
            } else if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else {
                break;
            }
        }
        const std::size_t start = pos;
        while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
        if (start == pos) throw data_error(what + ": truncated header");
        return bytes.substr(start, pos - start);
    };
    if (token() != "P5") throw data_error(what + ": not a P5 image");
    const int w = std::stoi(token());
    const int h = std::stoi(token());
    const int maxval = std::stoi(token());
    if (w <= 0 || h <= 0 || maxval != 255) throw data_error(what + ": unsupported header");
    ++pos;  // the single whitespace byte after maxval
    const std::size_t n = static_cast<std::size_t>(w) * h;
    if (bytes.size() - pos < n) throw data_error(what + ": truncated pixel data");
    Image img(w, h);
    for (std::size_t i = 0; i < n; ++i)
        img.pixels[i] = static_cast<float>(static_cast<unsigned char>(bytes[pos + i])) / 255.0f;
    return img;
}

inline void save_frame(const Image& img, const std::filesystem::path& pgm_path) {
    atomic_write_file(pgm_path, encode_pgm(img));
    std::string blob;
    blob.reserve(img.pixels.size() * 4);
    for (float v : img.pixels) wire::put_f32(blob, v);
    std::filesystem::path f32_path = pgm_path;
    f32_path.replace_extension(".f32");
    atomic_write_file(f32_path, blob);
}

inline Image load_frame(const std::filesystem::path& pgm_path, int expect_w, int expect_h) {
    std::filesystem::path f32_path = pgm_path;
    f32_path.replace_extension(".f32");
    Image img;
    if (std::filesystem::exists(f32_path)) {
        const std::string blob = read_file_bytes(f32_path);
        const std::size_t n = static_cast<std::size_t>(expect_w) * expect_h;
        if (blob.size() != n * 4)
            throw data_error("frame " + f32_path.string() + ": expected " +
                             std::to_string(n * 4) + " bytes, got " +
                             std::to_string(blob.size()));
        wire::Reader r(blob, "frame " + f32_path.string());
        img.width = expect_w;
        img.height = expect_h;
        img.pixels.resize(n);
        for (float& v : img.pixels) v = r.f32();
    } else {
        img = decode_pgm(read_file_bytes(pgm_path), "frame " + pgm_path.string());
    }
    if (img.width != expect_w || img.height != expect_h)
        throw data_error("frame " + pgm_path.string() + ": unexpected dimensions");
    return img;
}

// ---------------------------------------------------------------------------
// Series directory: manifest.json + frame_NNNN.pgm/.f32

inline std::string frame_file_name(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "frame_%04zu.pgm", index);
    return buf;
}

inline void save_series(const VariationSeries& series, const std::filesystem::path& dir) {
    series.validate();
    std::filesystem::create_directories(dir);
    nlohmann::json manifest;
    manifest["format_version"] = kSeriesFormatVersion;
    manifest["kind"] = to_string(series.kind);
    manifest["id"] = series.id;
    manifest["thetas"] = series.thetas;
    manifest["width"] = series.frames[0].width;
    manifest["height"] = series.frames[0].height;
    manifest["base"] = shape_spec_to_json(series.base);
    manifest["params"] = series.params;
    nlohmann::json files = nlohmann::json::array();
    for (std::size_t i = 0; i < series.frames.size(); ++i) {
        const std::string name = frame_file_name(i);
        files.push_back(name);
        save_frame(series.frames[i], dir / name);
    }
    manifest["frame_files"] = files;
    atomic_write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

inline VariationSeries load_series(const std::filesystem::path& dir) {
    const std::filesystem::path manifest_path = dir / "manifest.json";
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(read_file_bytes(manifest_path));
    } catch (const nlohmann::json::exception& e) {
        throw data_error("series manifest " + manifest_path.string() + ": " + e.what());
    }
    VariationSeries series;
    int w = 0, h = 0;
    std::vector<std::string> files;
    try {
        if (manifest.at("format_version").get<int>() != kSeriesFormatVersion)
            throw data_error("series manifest " + manifest_path.string() +
                             ": unsupported format version");
        series.kind = series_kind_from_string(manifest.at("kind").get<std::string>());
        series.id = manifest.at("id").get<std::string>();
        series.thetas = manifest.at("thetas").get<std::vector<double>>();
        series.base = shape_spec_from_json(manifest.at("base"));
        series.params = manifest.at("params").get<std::map<std::string, double>>();
        w = manifest.at("width").get<int>();
        h = manifest.at("height").get<int>();
        files = manifest.at("frame_files").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw data_error("series manifest " + manifest_path.string() + ": malformed: " +
                         e.what());
    }
    if (files.size() != series.thetas.size())
        throw data_error("series manifest " + manifest_path.string() +
                         ": frame count does not match theta count");
    for (const std::string& name : files) series.frames.push_back(load_frame(dir / name, w, h));
    if (!series.frames.empty()) series.reference = series.frames[0];
    series.validate();
    return series;
}

// ---------------------------------------------------------------------------
// Labeled training images share the frame format plus a labels manifest.

inline void save_training_set(const std::vector<LabeledImage>& set,
                              const std::filesystem::path& dir) {
    if (set.empty()) throw data_error("save_training_set: empty set");
    std::filesystem::create_directories(dir);
    nlohmann::json manifest;
    manifest["format_version"] = kSeriesFormatVersion;
    manifest["kind"] = "train";
    manifest["width"] = set[0].image.width;
    manifest["height"] = set[0].image.height;
    nlohmann::json files = nlohmann::json::array();
    nlohmann::json labels = nlohmann::json::array();
    for (std::size_t i = 0; i < set.size(); ++i) {
        const std::string name = frame_file_name(i);
        files.push_back(name);
        labels.push_back(set[i].label);
        save_frame(set[i].image, dir / name);
    }
    manifest["frame_files"] = files;
    manifest["labels"] = labels;
    atomic_write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

inline std::vector<LabeledImage> load_training_set(const std::filesystem::path& dir) {
    const std::filesystem::path manifest_path = dir / "manifest.json";
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(read_file_bytes(manifest_path));
    } catch (const nlohmann::json::exception& e) {
        throw data_error("training manifest " + manifest_path.string() + ": " + e.what());
    }
    std::vector<std::string> files;
    std::vector<int> labels;
    int w = 0, h = 0;
    try {
        if (manifest.at("kind").get<std::string>() != "train")
            throw data_error("training manifest " + manifest_path.string() +
                             ": not a training set");
        w = manifest.at("width").get<int>();
        h = manifest.at("height").get<int>();
        files = manifest.at("frame_files").get<std::vector<std::string>>();
        labels = manifest.at("labels").get<std::vector<int>>();
    } catch (const nlohmann::json::exception& e) {
        throw data_error("training manifest " + manifest_path.string() + ": malformed: " +
                         e.what());
    }
    if (files.size() != labels.size())
        throw data_error("training manifest " + manifest_path.string() +
                         ": file/label count mismatch");
    std::vector<LabeledImage> set;
    set.reserve(files.size());
    for (std::size_t i = 0; i < files.size(); ++i)
        set.push_back({load_frame(dir / files[i], w, h), labels[i]});
    return set;
}

}  // namespace semcont
