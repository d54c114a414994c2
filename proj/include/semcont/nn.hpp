#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "semcont/errors.hpp"
#include "semcont/image.hpp"
#include "semcont/rng.hpp"
#include "semcont/tensor.hpp"

namespace semcont {

// Fixed micro-CNN: conv(8,3x3) ReLU pool2 -> conv(16,3x3) ReLU pool2 -> dense(1) -> sigmoid.
// Valid convolutions, stride 1, non-overlapping 2x2 max pools.
namespace arch {
constexpr int kInput = 64;
constexpr int kKernel = 3;
constexpr int kConv1Filters = 8;
constexpr int kConv1Out = kInput - kKernel + 1;  // 62
constexpr int kPool1Out = kConv1Out / 2;         // 31
constexpr int kConv2Filters = 16;
constexpr int kConv2Out = kPool1Out - kKernel + 1;  // 29
constexpr int kPool2Out = kConv2Out / 2;            // 14
constexpr int kFlat = kConv2Filters * kPool2Out * kPool2Out;  // 3136
}  // namespace arch

// Numerically stable sigmoid kept strictly inside (0,1) so downstream
// logs of confidence never blow up.
inline double sigmoid(double z) {
    double s;
    if (z >= 0.0) {
        s = 1.0 / (1.0 + std::exp(-z));
    } else {
        const double e = std::exp(z);
        s = e / (1.0 + e);
    }
    if (s >= 1.0) s = 1.0 - 1e-16;
    if (s <= 0.0) s = 1e-300;
    return s;
}

// Immutable after training/loading; forward and gradient calls are pure.
struct ModelSnapshot {
    Tensor conv1_w;  // [8,1,3,3]
    Tensor conv1_b;  // [8]
    Tensor conv2_w;  // [16,8,3,3]
    Tensor conv2_b;  // [16]
    Tensor dense_w;  // [1,3136]
    Tensor dense_b;  // [1]
    int input_width = arch::kInput;
    int input_height = arch::kInput;
    std::array<std::string, 2> class_names{"circle", "triangle"};
    std::uint64_t init_seed = 0;

    static ModelSnapshot zeros() {
        using std::size_t;
        ModelSnapshot m;
        m.conv1_w = Tensor::zeros({arch::kConv1Filters, 1, arch::kKernel, arch::kKernel});
        m.conv1_b = Tensor::zeros({arch::kConv1Filters});
        m.conv2_w = Tensor::zeros(
            {arch::kConv2Filters, arch::kConv1Filters, arch::kKernel, arch::kKernel});
        m.conv2_b = Tensor::zeros({arch::kConv2Filters});
        m.dense_w = Tensor::zeros({1, arch::kFlat});
        m.dense_b = Tensor::zeros({1});
        return m;
    }

    // Uniform(-sqrt(1/fan_in), +sqrt(1/fan_in)) on weights and biases.
    static ModelSnapshot init(std::uint64_t seed) {
        ModelSnapshot m = zeros();
        m.init_seed = seed;
        Rng rng(seed);
        auto fill = [&rng](Tensor& t, int fan_in) {
            const double bound = std::sqrt(1.0 / fan_in);
            for (float& v : t.data) v = static_cast<float>(rng.uniform(-bound, bound));
        };
        fill(m.conv1_w, 9);
        fill(m.conv1_b, 9);
        fill(m.conv2_w, 72);
        fill(m.conv2_b, 72);
        fill(m.dense_w, arch::kFlat);
        fill(m.dense_b, arch::kFlat);
        return m;
    }

    // Canonical parameter order; also the model-file blob order.
    std::vector<std::pair<std::string, Tensor*>> named_params() {
        return {{"conv1_w", &conv1_w}, {"conv1_b", &conv1_b}, {"conv2_w", &conv2_w},
                {"conv2_b", &conv2_b}, {"dense_w", &dense_w}, {"dense_b", &dense_b}};
    }
    std::vector<std::pair<std::string, const Tensor*>> named_params() const {
        return {{"conv1_w", &conv1_w}, {"conv1_b", &conv1_b}, {"conv2_w", &conv2_w},
                {"conv2_b", &conv2_b}, {"dense_w", &dense_w}, {"dense_b", &dense_b}};
    }

    bool params_equal(const ModelSnapshot& other) const {
        auto a = named_params();
        auto b = other.named_params();
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a[i].second->data != b[i].second->data) return false;
        return true;
    }
};

struct ForwardTrace {
    double confidence = 0.5;
    double logit = 0.0;
    std::map<std::string, Tensor> activations;  // post-ReLU "conv1", "conv2"
};

namespace detail {

// Scratch for one forward/backward; reused via thread_local to keep the hot
// path allocation-free. Safe under concurrent callers.
struct NnWorkspace {
    std::vector<float> conv1_pre, conv1_post;  // 8x62x62
    std::vector<float> pool1;                  // 8x31x31
    std::vector<int> pool1_arg;
    std::vector<float> conv2_pre, conv2_post;  // 16x29x29
    std::vector<float> pool2;                  // 16x14x14 (the dense input)
    std::vector<int> pool2_arg;
    float logit = 0.0f;

    NnWorkspace() {
        using namespace arch;
        conv1_pre.resize(kConv1Filters * kConv1Out * kConv1Out);
        conv1_post.resize(conv1_pre.size());
        pool1.resize(kConv1Filters * kPool1Out * kPool1Out);
        pool1_arg.resize(pool1.size());
        conv2_pre.resize(kConv2Filters * kConv2Out * kConv2Out);
        conv2_post.resize(conv2_pre.size());
        pool2.resize(kFlat);
        pool2_arg.resize(pool2.size());
    }
};

inline NnWorkspace& workspace() {
    thread_local NnWorkspace ws;
    return ws;
}

inline void check_input(const ModelSnapshot& model, const Image& image) {
    if (image.width != model.input_width || image.height != model.input_height)
        throw data_error("forward: image dims " + std::to_string(image.width) + "x" +
                         std::to_string(image.height) + " do not match model input");
    for (float v : image.pixels)
        if (!(v >= 0.0f && v <= 1.0f)) throw data_error("forward: pixel outside [0,1]");
}

inline void maxpool2x2(const std::vector<float>& in, int channels, int in_side,
                       std::vector<float>& out, std::vector<int>& argmax) {
    const int out_side = in_side / 2;
    for (int c = 0; c < channels; ++c) {
        const float* src = in.data() + static_cast<std::size_t>(c) * in_side * in_side;
        float* dst = out.data() + static_cast<std::size_t>(c) * out_side * out_side;
        int* arg = argmax.data() + static_cast<std::size_t>(c) * out_side * out_side;
        for (int y = 0; y < out_side; ++y) {
            for (int x = 0; x < out_side; ++x) {
                const int base = (2 * y) * in_side + 2 * x;
                int best = base;
                float bv = src[base];
                if (src[base + 1] > bv) { bv = src[base + 1]; best = base + 1; }
                if (src[base + in_side] > bv) { bv = src[base + in_side]; best = base + in_side; }
                if (src[base + in_side + 1] > bv) { bv = src[base + in_side + 1]; best = base + in_side + 1; }
                dst[y * out_side + x] = bv;
                arg[y * out_side + x] = best;
            }
        }
    }
}

inline void forward_into(const ModelSnapshot& model, const Image& image, NnWorkspace& ws) {
    using namespace arch;
    check_input(model, image);

    // conv1 (single input channel), inner loop contiguous in x
    for (int f = 0; f < kConv1Filters; ++f) {
        float* out = ws.conv1_pre.data() + static_cast<std::size_t>(f) * kConv1Out * kConv1Out;
        std::fill(out, out + kConv1Out * kConv1Out, model.conv1_b[f]);
        for (int ky = 0; ky < kKernel; ++ky) {
            for (int kx = 0; kx < kKernel; ++kx) {
                const float w = model.conv1_w[(f * kKernel + ky) * kKernel + kx];
                for (int y = 0; y < kConv1Out; ++y) {
                    const float* src = image.pixels.data() + (y + ky) * kInput + kx;
                    float* row = out + y * kConv1Out;
                    for (int x = 0; x < kConv1Out; ++x) row[x] += w * src[x];
                }
            }
        }
    }
    for (std::size_t i = 0; i < ws.conv1_pre.size(); ++i)
        ws.conv1_post[i] = ws.conv1_pre[i] > 0.0f ? ws.conv1_pre[i] : 0.0f;
    maxpool2x2(ws.conv1_post, kConv1Filters, kConv1Out, ws.pool1, ws.pool1_arg);

    // conv2
    for (int f = 0; f < kConv2Filters; ++f) {
        float* out = ws.conv2_pre.data() + static_cast<std::size_t>(f) * kConv2Out * kConv2Out;
        std::fill(out, out + kConv2Out * kConv2Out, model.conv2_b[f]);
        for (int c = 0; c < kConv1Filters; ++c) {
            const float* in = ws.pool1.data() + static_cast<std::size_t>(c) * kPool1Out * kPool1Out;
            for (int ky = 0; ky < kKernel; ++ky) {
                for (int kx = 0; kx < kKernel; ++kx) {
                    const float w =
                        model.conv2_w[((f * kConv1Filters + c) * kKernel + ky) * kKernel + kx];
                    for (int y = 0; y < kConv2Out; ++y) {
                        const float* src = in + (y + ky) * kPool1Out + kx;
                        float* row = out + y * kConv2Out;
                        for (int x = 0; x < kConv2Out; ++x) row[x] += w * src[x];
                    }
                }
            }
        }
    }
    for (std::size_t i = 0; i < ws.conv2_pre.size(); ++i)
        ws.conv2_post[i] = ws.conv2_pre[i] > 0.0f ? ws.conv2_pre[i] : 0.0f;
    maxpool2x2(ws.conv2_post, kConv2Filters, kConv2Out, ws.pool2, ws.pool2_arg);

    float z = model.dense_b[0];
    for (int i = 0; i < kFlat; ++i) z += model.dense_w[i] * ws.pool2[i];
    if (!std::isfinite(z)) throw numeric_error("forward: non-finite logit");
    ws.logit = z;
}

}  // namespace detail

// Fast path used by the perturbation explainers: confidence only.
inline double forward_confidence(const ModelSnapshot& model, const Image& image) {
    auto& ws = detail::workspace();
    detail::forward_into(model, image, ws);
    return sigmoid(ws.logit);
}

inline ForwardTrace forward(const ModelSnapshot& model, const Image& image) {
    using namespace arch;
    auto& ws = detail::workspace();
    detail::forward_into(model, image, ws);
    ForwardTrace trace;
    trace.logit = ws.logit;
    trace.confidence = sigmoid(trace.logit);
    trace.activations.emplace(
        "conv1", Tensor({kConv1Filters, kConv1Out, kConv1Out}, ws.conv1_post));
    trace.activations.emplace(
        "conv2", Tensor({kConv2Filters, kConv2Out, kConv2Out}, ws.conv2_post));
    trace.activations.at("conv1").require_finite("conv1 activations");
    trace.activations.at("conv2").require_finite("conv2 activations");
    return trace;
}

// d(logit)/d(A) for the named post-ReLU activation tensor, same shape as A.
// "conv2": route dense weights back through pool2. "conv1": additionally
// through conv2's ReLU and kernels, then pool1.
inline Tensor grad_wrt_activations(const ModelSnapshot& model, const Image& image,
                                   const std::string& layer) {
    using namespace arch;
    if (layer != "conv1" && layer != "conv2")
        throw data_error("grad_wrt_activations: unknown layer '" + layer +
                         "' (known: conv1, conv2)");
    auto& ws = detail::workspace();
    detail::forward_into(model, image, ws);

    // logit = dense_w . pool2 + b, so d logit/d pool2[i] = dense_w[i];
    // unpool scatters onto each window's argmax.
    Tensor g2 = Tensor::zeros({kConv2Filters, kConv2Out, kConv2Out});
    for (int c = 0; c < kConv2Filters; ++c) {
        const std::size_t pooled_base = static_cast<std::size_t>(c) * kPool2Out * kPool2Out;
        const std::size_t full_base = static_cast<std::size_t>(c) * kConv2Out * kConv2Out;
        for (int i = 0; i < kPool2Out * kPool2Out; ++i)
            g2.data[full_base + ws.pool2_arg[pooled_base + i]] += model.dense_w[pooled_base + i];
    }
    if (layer == "conv2") return g2;

    // Through ReLU2 to pre-activations, then transposed conv2 to pool1 space.
    std::vector<float> gpre2(ws.conv2_pre.size());
    for (std::size_t i = 0; i < gpre2.size(); ++i)
        gpre2[i] = ws.conv2_pre[i] > 0.0f ? g2.data[i] : 0.0f;

    std::vector<float> gpool1(static_cast<std::size_t>(kConv1Filters) * kPool1Out * kPool1Out,
                              0.0f);
    for (int f = 0; f < kConv2Filters; ++f) {
        const float* g = gpre2.data() + static_cast<std::size_t>(f) * kConv2Out * kConv2Out;
        for (int c = 0; c < kConv1Filters; ++c) {
            float* dst = gpool1.data() + static_cast<std::size_t>(c) * kPool1Out * kPool1Out;
            for (int ky = 0; ky < kKernel; ++ky) {
                for (int kx = 0; kx < kKernel; ++kx) {
                    const float w =
                        model.conv2_w[((f * kConv1Filters + c) * kKernel + ky) * kKernel + kx];
                    for (int y = 0; y < kConv2Out; ++y) {
                        float* row = dst + (y + ky) * kPool1Out + kx;
                        const float* grow = g + y * kConv2Out;
                        for (int x = 0; x < kConv2Out; ++x) row[x] += w * grow[x];
                    }
                }
            }
        }
    }

    Tensor g1 = Tensor::zeros({kConv1Filters, kConv1Out, kConv1Out});
    for (int c = 0; c < kConv1Filters; ++c) {
        const std::size_t pooled_base = static_cast<std::size_t>(c) * kPool1Out * kPool1Out;
        const std::size_t full_base = static_cast<std::size_t>(c) * kConv1Out * kConv1Out;
        for (int i = 0; i < kPool1Out * kPool1Out; ++i)
            g1.data[full_base + ws.pool1_arg[pooled_base + i]] += gpool1[pooled_base + i];
    }
    return g1;
}

enum class Optimizer { sgd, adam };

struct TrainConfig {
    int epochs = 20;
    int batch_size = 32;
    float learning_rate = 1e-3f;
    std::uint64_t seed = 0;
    Optimizer optimizer = Optimizer::adam;
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float adam_eps = 1e-8f;
};

struct TrainLog {
    std::vector<double> epoch_loss;
    std::vector<double> epoch_accuracy;
    double final_accuracy = 0.0;
};

struct LabeledImage;  // from shapes.hpp; train() is templated on the sample range

namespace detail {

struct Gradients {
    std::vector<float> conv1_w, conv1_b, conv2_w, conv2_b, dense_w, dense_b;

    explicit Gradients(const ModelSnapshot& m)
        : conv1_w(m.conv1_w.size()), conv1_b(m.conv1_b.size()), conv2_w(m.conv2_w.size()),
          conv2_b(m.conv2_b.size()), dense_w(m.dense_w.size()), dense_b(m.dense_b.size()) {}

    void zero() {
        auto z = [](std::vector<float>& v) { std::fill(v.begin(), v.end(), 0.0f); };
        z(conv1_w); z(conv1_b); z(conv2_w); z(conv2_b); z(dense_w); z(dense_b);
    }

    std::vector<std::vector<float>*> buffers() {
        return {&conv1_w, &conv1_b, &conv2_w, &conv2_b, &dense_w, &dense_b};
    }
};

// Accumulates d loss/d params for one sample into grads. Returns the sample's
// BCE loss, computed in the logit-stable form.
inline double backward_sample(const ModelSnapshot& model, const Image& image, int label,
                              NnWorkspace& ws, Gradients& grads) {
    using namespace arch;
    forward_into(model, image, ws);
    const double z = ws.logit;
    const double y = label;
    const double loss = std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
    const float dz = static_cast<float>(sigmoid(z) - y);

    // dense
    for (int i = 0; i < kFlat; ++i) grads.dense_w[i] += dz * ws.pool2[i];
    grads.dense_b[0] += dz;

    // through pool2 and ReLU2 to conv2 pre-activations
    std::vector<float> gpre2(ws.conv2_pre.size(), 0.0f);
    for (int c = 0; c < kConv2Filters; ++c) {
        const std::size_t pb = static_cast<std::size_t>(c) * kPool2Out * kPool2Out;
        const std::size_t fb = static_cast<std::size_t>(c) * kConv2Out * kConv2Out;
        for (int i = 0; i < kPool2Out * kPool2Out; ++i) {
            const std::size_t pos = fb + ws.pool2_arg[pb + i];
            if (ws.conv2_pre[pos] > 0.0f) gpre2[pos] += dz * model.dense_w[pb + i];
        }
    }

    // conv2 weight/bias grads and grad into pool1
    std::vector<float> gpool1(static_cast<std::size_t>(kConv1Filters) * kPool1Out * kPool1Out,
                              0.0f);
    for (int f = 0; f < kConv2Filters; ++f) {
        const float* g = gpre2.data() + static_cast<std::size_t>(f) * kConv2Out * kConv2Out;
        float gb = 0.0f;
        for (int i = 0; i < kConv2Out * kConv2Out; ++i) gb += g[i];
        grads.conv2_b[f] += gb;
        for (int c = 0; c < kConv1Filters; ++c) {
            const float* in = ws.pool1.data() + static_cast<std::size_t>(c) * kPool1Out * kPool1Out;
            float* dst = gpool1.data() + static_cast<std::size_t>(c) * kPool1Out * kPool1Out;
            for (int ky = 0; ky < kKernel; ++ky) {
                for (int kx = 0; kx < kKernel; ++kx) {
                    const std::size_t widx =
                        ((static_cast<std::size_t>(f) * kConv1Filters + c) * kKernel + ky) *
                            kKernel + kx;
                    const float w = model.conv2_w[widx];
                    float gw = 0.0f;
                    for (int y = 0; y < kConv2Out; ++y) {
                        const float* src = in + (y + ky) * kPool1Out + kx;
                        float* drow = dst + (y + ky) * kPool1Out + kx;
                        const float* grow = g + y * kConv2Out;
                        for (int x = 0; x < kConv2Out; ++x) {
                            gw += src[x] * grow[x];
                            drow[x] += w * grow[x];
                        }
                    }
                    grads.conv2_w[widx] += gw;
                }
            }
        }
    }

    // through pool1 and ReLU1 to conv1 pre-activations
    std::vector<float> gpre1(ws.conv1_pre.size(), 0.0f);
    for (int c = 0; c < kConv1Filters; ++c) {
        const std::size_t pb = static_cast<std::size_t>(c) * kPool1Out * kPool1Out;
        const std::size_t fb = static_cast<std::size_t>(c) * kConv1Out * kConv1Out;
        for (int i = 0; i < kPool1Out * kPool1Out; ++i) {
            const std::size_t pos = fb + ws.pool1_arg[pb + i];
            if (ws.conv1_pre[pos] > 0.0f) gpre1[pos] += gpool1[pb + i];
        }
    }

    // conv1 weight/bias grads
    for (int f = 0; f < kConv1Filters; ++f) {
        const float* g = gpre1.data() + static_cast<std::size_t>(f) * kConv1Out * kConv1Out;
        float gb = 0.0f;
        for (int i = 0; i < kConv1Out * kConv1Out; ++i) gb += g[i];
        grads.conv1_b[f] += gb;
        for (int ky = 0; ky < kKernel; ++ky) {
            for (int kx = 0; kx < kKernel; ++kx) {
                float gw = 0.0f;
                for (int y = 0; y < kConv1Out; ++y) {
                    const float* src = image.pixels.data() + (y + ky) * kInput + kx;
                    const float* grow = g + y * kConv1Out;
                    for (int x = 0; x < kConv1Out; ++x) gw += src[x] * grow[x];
                }
                grads.conv1_w[(f * kKernel + ky) * kKernel + kx] += gw;
            }
        }
    }

    return loss;
}

struct AdamState {
    std::vector<std::vector<float>> m, v;
    long step = 0;

    explicit AdamState(ModelSnapshot& model) {
        for (auto& [name, t] : model.named_params()) {
            (void)name;
            m.emplace_back(t->size(), 0.0f);
            v.emplace_back(t->size(), 0.0f);
        }
    }
};

}  // namespace detail

// Trains in place on (image, label in {0,1}) samples; deterministic given the
// seed. Throws on a single-class dataset and on divergence (non-finite loss).
template <typename Samples>
inline ModelSnapshot train(ModelSnapshot model, const Samples& dataset, const TrainConfig& cfg,
                           TrainLog* log = nullptr) {
    if (dataset.empty()) throw data_error("train: empty dataset");
    if (cfg.epochs < 1) throw config_error("train: epochs must be >= 1");
    if (cfg.batch_size < 1) throw config_error("train: batch_size must be >= 1");
    if (cfg.learning_rate < 0.0f) throw config_error("train: learning_rate must be >= 0");
    bool has0 = false, has1 = false;
    for (const auto& s : dataset) {
        if (s.label == 0) has0 = true;
        else if (s.label == 1) has1 = true;
        else throw data_error("train: labels must be in {0,1}");
    }
    if (!has0 || !has1) throw data_error("train: both classes must be present");

    Rng rng(cfg.seed);
    auto& ws = detail::workspace();
    detail::Gradients grads(model);
    detail::AdamState adam(model);

    std::vector<std::size_t> order(dataset.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        // Fisher-Yates on the deterministic stream
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.uniform_int(i)]);

        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            grads.zero();
            for (std::size_t k = start; k < end; ++k) {
                const auto& sample = dataset[order[k]];
                const double loss =
                    detail::backward_sample(model, sample.image, sample.label, ws, grads);
                if (!std::isfinite(loss))
                    throw numeric_error("train: loss diverged (non-finite) at epoch " +
                                        std::to_string(epoch));
                loss_sum += loss;
                const bool predicted = sigmoid(ws.logit) > 0.5;
                if (predicted == (sample.label == 1)) ++correct;
            }

            const float scale = 1.0f / static_cast<float>(end - start);
            auto params = model.named_params();
            auto bufs = grads.buffers();
            if (cfg.optimizer == Optimizer::adam) {
                ++adam.step;
                const float bc1 = 1.0f - std::pow(cfg.beta1, static_cast<float>(adam.step));
                const float bc2 = 1.0f - std::pow(cfg.beta2, static_cast<float>(adam.step));
                for (std::size_t p = 0; p < params.size(); ++p) {
                    float* w = params[p].second->data.data();
                    const float* gbuf = bufs[p]->data();
                    float* m = adam.m[p].data();
                    float* v = adam.v[p].data();
                    for (std::size_t i = 0; i < params[p].second->size(); ++i) {
                        const float g = gbuf[i] * scale;
                        m[i] = cfg.beta1 * m[i] + (1.0f - cfg.beta1) * g;
                        v[i] = cfg.beta2 * v[i] + (1.0f - cfg.beta2) * g * g;
                        const float mhat = m[i] / bc1;
                        const float vhat = v[i] / bc2;
                        w[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_eps);
                    }
                }
            } else {
                for (std::size_t p = 0; p < params.size(); ++p) {
                    float* w = params[p].second->data.data();
                    const float* gbuf = bufs[p]->data();
                    for (std::size_t i = 0; i < params[p].second->size(); ++i)
                        w[i] -= cfg.learning_rate * gbuf[i] * scale;
                }
            }
        }

        if (log) {
            log->epoch_loss.push_back(loss_sum / static_cast<double>(dataset.size()));
            log->epoch_accuracy.push_back(static_cast<double>(correct) /
                                          static_cast<double>(dataset.size()));
        }
    }

    // final pass accuracy on the training set
    std::size_t correct = 0;
    for (const auto& s : dataset)
        if ((forward_confidence(model, s.image) > 0.5) == (s.label == 1)) ++correct;
    if (log) log->final_accuracy = static_cast<double>(correct) / dataset.size();
    return model;
}

// Classification accuracy of a model over labeled samples.
template <typename Samples>
inline double accuracy(const ModelSnapshot& model, const Samples& dataset) {
    if (dataset.empty()) return 0.0;
    std::size_t correct = 0;
    for (const auto& s : dataset)
        if ((forward_confidence(model, s.image) > 0.5) == (s.label == 1)) ++correct;
    return static_cast<double>(correct) / dataset.size();
}

}  // namespace semcont
