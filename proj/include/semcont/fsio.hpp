#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "semcont/errors.hpp"

namespace semcont {

// All artifact writes go through here: write to <path>.tmp, then rename, so a
// crash never leaves a half-written file at the final path.
inline void atomic_write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw data_error("cannot open for writing: " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) throw data_error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline std::string read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open: " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw data_error("read failed: " + path.string());
    return bytes;
}

// Little-endian scalar packing for the binary blobs.
namespace wire {

inline void put_u32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline void put_u64(std::string& out, std::uint64_t v) {
    put_u32(out, static_cast<std::uint32_t>(v & 0xffffffffu));
    put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

inline void put_f32(std::string& out, float f) {
    std::uint32_t bits;
    static_assert(sizeof(bits) == sizeof(f));
    __builtin_memcpy(&bits, &f, sizeof(bits));
    put_u32(out, bits);
}

struct Reader {
    const std::string& bytes;
    std::size_t pos = 0;
    std::string what;

    Reader(const std::string& b, std::string context) : bytes(b), what(std::move(context)) {}

    void need(std::size_t n) const {
        if (pos + n > bytes.size()) throw data_error(what + ": truncated file");
    }

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i)
            v = (v << 8) | static_cast<std::uint8_t>(bytes[pos + static_cast<std::size_t>(i)]);
        pos += 4;
        return v;
    }

    std::uint64_t u64() {
        const std::uint64_t lo = u32();
        const std::uint64_t hi = u32();
        return lo | (hi << 32);
    }

    float f32() {
        const std::uint32_t bits = u32();
        float f;
        __builtin_memcpy(&f, &bits, sizeof(f));
        return f;
    }

    std::string raw(std::size_t n) {
        need(n);
        std::string s = bytes.substr(pos, n);
        pos += n;
        return s;
    }
};

}  // namespace wire
}  // namespace semcont
