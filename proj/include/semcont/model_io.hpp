#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "semcont/errors.hpp"
#include "semcont/fsio.hpp"
#include "semcont/nn.hpp"

namespace semcont {

// Model file layout: "SCMN" magic, u32 format version, u64 header length,
// UTF-8 JSON header, then the parameter tensors as little-endian f32 in the
// canonical order given by ModelSnapshot::named_params().
inline constexpr std::uint32_t kModelFormatVersion = 1;
inline constexpr char kModelMagic[4] = {'S', 'C', 'M', 'N'};

inline void save_model(const ModelSnapshot& model, const std::filesystem::path& path) {
    nlohmann::json header;
    header["format_version"] = kModelFormatVersion;
    header["input"] = {model.input_width, model.input_height};
    header["class_names"] = model.class_names;
    header["init_seed"] = model.init_seed;
    nlohmann::json params = nlohmann::json::array();
    std::size_t total = 0;
    for (const auto& [name, t] : model.named_params()) {
        params.push_back({{"name", name}, {"shape", t->shape}});
        total += t->size();
    }
    header["params"] = params;
    header["blob_floats"] = total;
    const std::string header_bytes = header.dump();

    std::string out;
    out.reserve(16 + header_bytes.size() + total * 4);
    out.append(kModelMagic, 4);
    wire::put_u32(out, kModelFormatVersion);
    wire::put_u64(out, header_bytes.size());
    out += header_bytes;
    for (const auto& [name, t] : model.named_params()) {
        (void)name;
        for (float v : t->data) wire::put_f32(out, v);
    }
    atomic_write_file(path, out);
}

inline ModelSnapshot load_model(const std::filesystem::path& path) {
    const std::string bytes = read_file_bytes(path);
    wire::Reader r(bytes, "model file " + path.string());
    if (r.raw(4) != std::string(kModelMagic, 4))
        throw data_error("model file " + path.string() + ": bad magic, not a model file");
    const std::uint32_t version = r.u32();
    if (version != kModelFormatVersion)
        throw data_error("model file " + path.string() + ": unsupported format version " +
                         std::to_string(version));
    const std::uint64_t header_len = r.u64();
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(r.raw(header_len));
    } catch (const nlohmann::json::exception& e) {
        throw data_error("model file " + path.string() + ": corrupt header: " + e.what());
    }

    ModelSnapshot model = ModelSnapshot::zeros();
    try {
        model.input_width = header.at("input").at(0).get<int>();
        model.input_height = header.at("input").at(1).get<int>();
        model.init_seed = header.at("init_seed").get<std::uint64_t>();
        const auto names = header.at("class_names").get<std::vector<std::string>>();
        if (names.size() != 2)
            throw data_error("model file " + path.string() + ": expected 2 class names");
        model.class_names = {names[0], names[1]};

        const auto& params = header.at("params");
        auto slots = model.named_params();
        if (params.size() != slots.size())
            throw data_error("model file " + path.string() + ": expected " +
                             std::to_string(slots.size()) + " parameter tensors, header lists " +
                             std::to_string(params.size()));
        for (std::size_t i = 0; i < slots.size(); ++i) {
            const std::string name = params.at(i).at("name").get<std::string>();
            const auto shape = params.at(i).at("shape").get<std::vector<std::size_t>>();
            if (name != slots[i].first || shape != slots[i].second->shape)
                throw data_error("model file " + path.string() + ": parameter " +
                                 std::to_string(i) + " expected " + slots[i].first +
                                 ", header has " + name + " with different name or shape");
        }
    } catch (const nlohmann::json::exception& e) {
        throw data_error("model file " + path.string() + ": malformed header: " + e.what());
    }

    for (auto& [name, t] : model.named_params()) {
        (void)name;
        for (float& v : t->data) v = r.f32();
    }
    if (r.pos != bytes.size())
        throw data_error("model file " + path.string() + ": trailing bytes after blob");
    for (const auto& [name, t] : model.named_params())
        t->require_finite(std::string("model parameter ") + name);
    return model;
}

}  // namespace semcont
