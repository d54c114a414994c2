#pragma once

#include <sys/wait.h>
#include <unistd.h>

#include <csignal>
#include <cstdio>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "semcont/errors.hpp"
#include "semcont/explain.hpp"
#include "semcont/image.hpp"

namespace semcont {

inline std::string base64_encode(const unsigned char* data, std::size_t len) {
    static const char* alphabet =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((len + 2) / 3 * 4);
    for (std::size_t i = 0; i < len; i += 3) {
        const unsigned b0 = data[i];
        const unsigned b1 = i + 1 < len ? data[i + 1] : 0;
        const unsigned b2 = i + 2 < len ? data[i + 2] : 0;
        out.push_back(alphabet[b0 >> 2]);
        out.push_back(alphabet[((b0 & 0x3) << 4) | (b1 >> 4)]);
        out.push_back(i + 1 < len ? alphabet[((b1 & 0xf) << 2) | (b2 >> 6)] : '=');
        out.push_back(i + 2 < len ? alphabet[b2 & 0x3f] : '=');
    }
    return out;
}

inline std::vector<unsigned char> base64_decode(const std::string& text) {
    auto value_of = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    std::vector<unsigned char> out;
    int buffer = 0, bits = 0;
    for (char c : text) {
        if (c == '=' || c == '\n' || c == '\r') continue;
        const int v = value_of(c);
        if (v < 0) throw data_error("base64: invalid character");
        buffer = (buffer << 6) | v;
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<unsigned char>((buffer >> bits) & 0xff));
        }
    }
    return out;
}

// External classifier spoken to over line-delimited JSON on a child process'
// stdin/stdout. One request per image; responses matched by id. Requests are
// serialized with a mutex so explainer-internal parallelism stays safe.
class BlackBoxClassifier {
public:
    explicit BlackBoxClassifier(const std::string& command) {
        // a child that exits mid-conversation must surface as a data_error
        // from the next write, not terminate the process via SIGPIPE
        std::signal(SIGPIPE, SIG_IGN);
        int to_child[2], from_child[2];
        if (pipe(to_child) != 0 || pipe(from_child) != 0)
            throw data_error("blackbox: cannot create pipes");
        pid_ = fork();
        if (pid_ < 0) throw data_error("blackbox: fork failed");
        if (pid_ == 0) {
            dup2(to_child[0], STDIN_FILENO);
            dup2(from_child[1], STDOUT_FILENO);
            close(to_child[0]);
            close(to_child[1]);
            close(from_child[0]);
            close(from_child[1]);
            execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
            _exit(127);
        }
        close(to_child[0]);
        close(from_child[1]);
        to_child_ = fdopen(to_child[1], "w");
        from_child_ = fdopen(from_child[0], "r");
        if (!to_child_ || !from_child_) throw data_error("blackbox: cannot open pipe streams");
    }

    BlackBoxClassifier(const BlackBoxClassifier&) = delete;
    BlackBoxClassifier& operator=(const BlackBoxClassifier&) = delete;

    ~BlackBoxClassifier() {
        if (to_child_) fclose(to_child_);
        if (from_child_) fclose(from_child_);
        if (pid_ > 0) {
            int status = 0;
            waitpid(pid_, &status, 0);
        }
    }

    double confidence(const Image& image) {
        std::lock_guard<std::mutex> lock(mutex_);
        const long id = next_id_++;

        std::string bytes(image.pixels.size() * 4, '\0');
        for (std::size_t i = 0; i < image.pixels.size(); ++i) {
            std::uint32_t bits;
            __builtin_memcpy(&bits, &image.pixels[i], 4);
            bytes[4 * i + 0] = static_cast<char>(bits & 0xff);
            bytes[4 * i + 1] = static_cast<char>((bits >> 8) & 0xff);
            bytes[4 * i + 2] = static_cast<char>((bits >> 16) & 0xff);
            bytes[4 * i + 3] = static_cast<char>((bits >> 24) & 0xff);
        }
        nlohmann::json request;
        request["id"] = id;
        request["pixels_f32_b64"] =
            base64_encode(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size());
        request["w"] = image.width;
        request["h"] = image.height;
        const std::string line = request.dump() + "\n";
        if (std::fwrite(line.data(), 1, line.size(), to_child_) != line.size() ||
            std::fflush(to_child_) != 0)
            throw data_error("blackbox: external classifier stopped reading");

        std::string response;
        int c;
        while ((c = std::fgetc(from_child_)) != EOF && c != '\n')
            response.push_back(static_cast<char>(c));
        if (response.empty() && c == EOF)
            throw data_error("blackbox: external classifier closed the stream");
        try {
            const nlohmann::json reply = nlohmann::json::parse(response);
            if (reply.at("id").get<long>() != id)
                throw data_error("blackbox: response id does not match request");
            return reply.at("confidence").get<double>();
        } catch (const nlohmann::json::exception& e) {
            throw data_error(std::string("blackbox: malformed response: ") + e.what());
        }
    }

private:
    pid_t pid_ = -1;
    FILE* to_child_ = nullptr;
    FILE* from_child_ = nullptr;
    std::mutex mutex_;
    long next_id_ = 0;
};

// ModelFn view over an external classifier; the classifier outlives all
// copies of the returned callable.
inline ModelFn blackbox_model_fn(const std::string& command) {
    auto classifier = std::make_shared<BlackBoxClassifier>(command);
    return [classifier](const Image& image) { return classifier->confidence(image); };
}

}  // namespace semcont
