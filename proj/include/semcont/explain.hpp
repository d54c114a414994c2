#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "semcont/errors.hpp"
#include "semcont/image.hpp"
#include "semcont/nn.hpp"
#include "semcont/parallel.hpp"
#include "semcont/rng.hpp"
#include "semcont/saliency.hpp"

namespace semcont {

using ModelFn = std::function<double(const Image&)>;

inline ModelFn model_fn_of(const ModelSnapshot& model) {
    return [&model](const Image& img) { return forward_confidence(model, img); };
}

struct RiseConfig {
    int n_masks = 1000;
    int cell_grid = 7;          // cells per side
    double keep_prob = 0.5;
    float baseline = 0.9f;      // fill level for masked-out content
    std::uint64_t seed = 0;

    void validate() const {
        if (n_masks < 1) throw config_error("rise: n_masks must be >= 1");
        if (cell_grid < 1) throw config_error("rise: cell_grid must be >= 1");
        if (!(keep_prob > 0.0 && keep_prob < 1.0) && keep_prob != 1.0)
            throw config_error("rise: keep_prob must be in (0,1]");
        if (!(baseline >= 0.0f && baseline <= 1.0f))
            throw config_error("rise: baseline must be in [0,1]");
    }

    nlohmann::json echo() const {
        return {{"n_masks", n_masks}, {"cell_grid", cell_grid}, {"keep_prob", keep_prob},
                {"baseline", baseline}, {"seed", seed}};
    }
};

struct LimeConfig {
    int segment_grid = 8;       // superpixels per side
    int n_samples = 500;
    double kernel_width = 0.25;
    double ridge_lambda = 1e-3;
    float baseline = 0.9f;
    bool exhaustive = false;    // enumerate all on/off vectors instead of sampling
    std::uint64_t seed = 0;

    void validate() const {
        if (segment_grid < 1) throw config_error("lime: segment_grid must be >= 1");
        if (n_samples < 1) throw config_error("lime: n_samples must be >= 1");
        if (!(kernel_width > 0.0)) throw config_error("lime: kernel_width must be > 0");
        if (ridge_lambda < 0.0) throw config_error("lime: ridge_lambda must be >= 0");
        if (!(baseline >= 0.0f && baseline <= 1.0f))
            throw config_error("lime: baseline must be in [0,1]");
    }

    nlohmann::json echo() const {
        return {{"segment_grid", segment_grid}, {"n_samples", n_samples},
                {"kernel_width", kernel_width}, {"ridge_lambda", ridge_lambda},
                {"baseline", baseline}, {"exhaustive", exhaustive}, {"seed", seed}};
    }
};

struct KernelShapConfig {
    int segment_grid = 8;
    int n_samples = 500;
    double ridge_lambda = 1e-3;
    float baseline = 0.9f;
    bool exhaustive = false;    // enumerate all proper coalitions with kernel weights
    std::uint64_t seed = 0;

    void validate() const {
        if (segment_grid < 1) throw config_error("kernelshap: segment_grid must be >= 1");
        if (n_samples < 1) throw config_error("kernelshap: n_samples must be >= 1");
        if (ridge_lambda < 0.0) throw config_error("kernelshap: ridge_lambda must be >= 0");
        if (!(baseline >= 0.0f && baseline <= 1.0f))
            throw config_error("kernelshap: baseline must be in [0,1]");
    }

    nlohmann::json echo() const {
        return {{"segment_grid", segment_grid}, {"n_samples", n_samples},
                {"ridge_lambda", ridge_lambda}, {"baseline", baseline},
                {"exhaustive", exhaustive}, {"seed", seed}};
    }
};

struct GradCamConfig {
    std::string layer = "conv2";

    nlohmann::json echo() const { return {{"layer", layer}, {"upsample", "bilinear"}}; }
};

// Bundle used by series-level evaluation and the CLI.
struct ExplainerConfig {
    RiseConfig rise;
    LimeConfig lime;
    KernelShapConfig kernelshap;
    GradCamConfig gradcam;
};

// ---------------------------------------------------------------------------
// Masks

struct MaskSet {
    std::vector<Image> masks;   // values in [0,1], image-sized
    int cell_grid = 0;
    double keep_prob = 0.0;
    std::uint64_t seed = 0;
};

// RISE mask recipe: Bernoulli(keep_prob) on a cell_grid x cell_grid lattice,
// bilinear blow-up to (grid+1) cells' worth of pixels, then a random integer
// crop shift inside one cell. Draw order per mask: grid cells row-major, then
// shift y, then shift x.
inline MaskSet make_rise_masks(int width, int height, const RiseConfig& cfg) {
    cfg.validate();
    MaskSet set;
    set.cell_grid = cfg.cell_grid;
    set.keep_prob = cfg.keep_prob;
    set.seed = cfg.seed;
    Rng rng(cfg.seed);

    const int g = cfg.cell_grid;
    const int cell_w = (width + g - 1) / g;
    const int cell_h = (height + g - 1) / g;
    const int up_w = (g + 1) * cell_w;
    const int up_h = (g + 1) * cell_h;

    std::vector<float> grid(static_cast<std::size_t>(g) * g);
    set.masks.reserve(cfg.n_masks);
    for (int m = 0; m < cfg.n_masks; ++m) {
        for (float& c : grid) c = rng.bernoulli(cfg.keep_prob) ? 1.0f : 0.0f;
        const int oy = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(cell_h)));
        const int ox = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(cell_w)));
        const std::vector<float> up = bilinear_resize_halfpixel(grid, g, g, up_w, up_h);
        Image mask(width, height);
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x)
                mask.at(y, x) = up[static_cast<std::size_t>(y + oy) * up_w + (x + ox)];
        set.masks.push_back(std::move(mask));
    }
    return set;
}

namespace explain_detail {

inline Image blend_with_baseline(const Image& image, const Image& mask, float baseline) {
    Image out(image.width, image.height);
    for (std::size_t i = 0; i < out.pixels.size(); ++i) {
        const float m = mask.pixels[i];
        out.pixels[i] = m * image.pixels[i] + (1.0f - m) * baseline;
    }
    return out;
}

inline double checked_confidence(const ModelFn& model_fn, const Image& img, const char* who) {
    const double c = model_fn(img);
    if (!std::isfinite(c))
        throw numeric_error(std::string(who) + ": model returned non-finite confidence");
    return c;
}

// Superpixel index of a pixel for a grid x grid partition.
inline int superpixel_of(int y, int x, int width, int height, int grid) {
    const int row = static_cast<int>(static_cast<long long>(y) * grid / height);
    const int col = static_cast<int>(static_cast<long long>(x) * grid / width);
    return row * grid + col;
}

inline Image coalition_image(const Image& image, const std::vector<std::uint8_t>& z, int grid,
                             float baseline) {
    Image out(image.width, image.height);
    for (int y = 0; y < image.height; ++y)
        for (int x = 0; x < image.width; ++x)
            out.at(y, x) = z[superpixel_of(y, x, image.width, image.height, grid)]
                               ? image.at(y, x)
                               : baseline;
    return out;
}

// Solves (A + lambda on flagged diagonal entries) beta = b in place by
// Gaussian elimination with partial pivoting; A is n x n row-major.
inline std::vector<double> solve_linear(std::vector<double> a, std::vector<double> b,
                                        std::size_t n, const char* who) {
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        double best = std::abs(a[col * n + col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double v = std::abs(a[r * n + col]);
            if (v > best) { best = v; pivot = r; }
        }
        if (!(best > 1e-12))
            throw numeric_error(std::string(who) + ": singular regression system");
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
            std::swap(b[col], b[pivot]);
        }
        const double inv = 1.0 / a[col * n + col];
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r * n + col] * inv;
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t ri = n; ri-- > 0;) {
        double acc = b[ri];
        for (std::size_t c = ri + 1; c < n; ++c) acc -= a[ri * n + c] * x[c];
        x[ri] = acc / a[ri * n + ri];
    }
    for (double v : x)
        if (!std::isfinite(v))
            throw numeric_error(std::string(who) + ": non-finite regression solution");
    return x;
}

inline SaliencyMap map_from_superpixel_values(const Image& image, int grid,
                                              const std::vector<double>& phi,
                                              std::string explainer_id) {
    SaliencyMap map(image.width, image.height, std::move(explainer_id));
    for (int y = 0; y < image.height; ++y)
        for (int x = 0; x < image.width; ++x)
            map.at(y, x) = static_cast<float>(
                phi[superpixel_of(y, x, image.width, image.height, grid)]);
    return map;
}

}  // namespace explain_detail

// ---------------------------------------------------------------------------
// RISE

inline SaliencyMap rise(const ModelFn& model_fn, const Image& image, const RiseConfig& cfg) {
    cfg.validate();
    const MaskSet set = make_rise_masks(image.width, image.height, cfg);
    const std::size_t n = set.masks.size();

    std::vector<double> conf(n);
    parallel_for(n, [&](std::size_t i) {
        const Image perturbed =
            explain_detail::blend_with_baseline(image, set.masks[i], cfg.baseline);
        conf[i] = explain_detail::checked_confidence(model_fn, perturbed, "rise");
    });

    // Fixed mask-order accumulation in double keeps the result independent of
    // the worker count.
    std::vector<double> acc(image.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const float* m = set.masks[i].pixels.data();
        const double c = conf[i];
        for (std::size_t p = 0; p < acc.size(); ++p) acc[p] += c * m[p];
    }
    const double scale = 1.0 / (static_cast<double>(n) * cfg.keep_prob);

    SaliencyMap map(image.width, image.height, "rise");
    map.rng_seed = cfg.seed;
    map.config_echo = cfg.echo();
    for (std::size_t p = 0; p < acc.size(); ++p)
        map.values[p] = static_cast<float>(acc[p] * scale);
    map.require_finite();
    return map;
}

// ---------------------------------------------------------------------------
// LIME

inline SaliencyMap lime(const ModelFn& model_fn, const Image& image, const LimeConfig& cfg) {
    cfg.validate();
    const int grid = cfg.segment_grid;
    const std::size_t m_sp = static_cast<std::size_t>(grid) * grid;

    std::vector<std::vector<std::uint8_t>> zs;
    if (cfg.exhaustive) {
        if (m_sp > 20) throw config_error("lime: exhaustive enumeration needs <= 20 superpixels");
        const std::size_t total = std::size_t{1} << m_sp;
        zs.reserve(total);
        for (std::size_t bits = 0; bits < total; ++bits) {
            std::vector<std::uint8_t> z(m_sp);
            for (std::size_t j = 0; j < m_sp; ++j) z[j] = (bits >> j) & 1u;
            zs.push_back(std::move(z));
        }
    } else {
        Rng rng(cfg.seed);
        zs.reserve(cfg.n_samples);
        for (int i = 0; i < cfg.n_samples; ++i) {
            std::vector<std::uint8_t> z(m_sp);
            for (std::size_t j = 0; j < m_sp; ++j) z[j] = rng.bernoulli(0.5) ? 1 : 0;
            zs.push_back(std::move(z));
        }
    }

    const std::size_t n = zs.size();
    std::vector<double> conf(n);
    parallel_for(n, [&](std::size_t i) {
        const Image perturbed =
            explain_detail::coalition_image(image, zs[i], grid, cfg.baseline);
        conf[i] = explain_detail::checked_confidence(model_fn, perturbed, "lime");
    });

    // Proximity weight: exp(-(1 - cos(z, all-ones))^2 / kernel_width^2); for
    // a binary z with k ones the cosine is sqrt(k / M).
    std::vector<double> weight(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t k = 0;
        for (std::uint8_t b : zs[i]) k += b;
        const double cos_sim =
            k == 0 ? 0.0 : std::sqrt(static_cast<double>(k) / static_cast<double>(m_sp));
        const double d = 1.0 - cos_sim;
        weight[i] = std::exp(-(d * d) / (cfg.kernel_width * cfg.kernel_width));
    }

    // Weighted ridge on [intercept | z], intercept unpenalized.
    const std::size_t dim = m_sp + 1;
    std::vector<double> ata(dim * dim, 0.0);
    std::vector<double> atb(dim, 0.0);
    std::vector<double> row(dim);
    for (std::size_t i = 0; i < n; ++i) {
        row[0] = 1.0;
        for (std::size_t j = 0; j < m_sp; ++j) row[j + 1] = zs[i][j];
        const double w = weight[i];
        for (std::size_t r = 0; r < dim; ++r) {
            if (row[r] == 0.0) continue;
            const double wr = w * row[r];
            for (std::size_t c = r; c < dim; ++c) ata[r * dim + c] += wr * row[c];
            atb[r] += wr * conf[i];
        }
    }
    for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < r; ++c) ata[r * dim + c] = ata[c * dim + r];
    for (std::size_t j = 1; j < dim; ++j) ata[j * dim + j] += cfg.ridge_lambda;

    const std::vector<double> beta =
        explain_detail::solve_linear(std::move(ata), std::move(atb), dim, "lime");
    const std::vector<double> phi(beta.begin() + 1, beta.end());

    SaliencyMap map = explain_detail::map_from_superpixel_values(image, grid, phi, "lime");
    map.rng_seed = cfg.seed;
    map.config_echo = cfg.echo();
    map.require_finite();
    return map;
}

// ---------------------------------------------------------------------------
// KernelSHAP

inline SaliencyMap kernelshap(const ModelFn& model_fn, const Image& image,
                              const KernelShapConfig& cfg) {
    cfg.validate();
    const int grid = cfg.segment_grid;
    const std::size_t m_sp = static_cast<std::size_t>(grid) * grid;
    if (m_sp < 2) throw config_error("kernelshap: need at least 2 superpixels");

    const double v_full =
        explain_detail::checked_confidence(model_fn, image, "kernelshap");
    const Image baseline_img(image.width, image.height, cfg.baseline);
    const double v_empty =
        explain_detail::checked_confidence(model_fn, baseline_img, "kernelshap");
    const double delta = v_full - v_empty;

    // Proper coalitions (never full, never empty) with regression weights.
    // Sampled mode realizes the Shapley kernel by sampling and uses unit
    // weights; exhaustive mode enumerates and weights explicitly.
    std::vector<std::vector<std::uint8_t>> zs;
    std::vector<double> weight;
    if (cfg.exhaustive) {
        if (m_sp > 20)
            throw config_error("kernelshap: exhaustive enumeration needs <= 20 superpixels");
        auto log_binom = [](std::size_t n_, std::size_t k_) {
            return std::lgamma(static_cast<double>(n_) + 1.0) -
                   std::lgamma(static_cast<double>(k_) + 1.0) -
                   std::lgamma(static_cast<double>(n_ - k_) + 1.0);
        };
        const std::size_t total = std::size_t{1} << m_sp;
        for (std::size_t bits = 1; bits + 1 < total; ++bits) {
            std::vector<std::uint8_t> z(m_sp);
            std::size_t k = 0;
            for (std::size_t j = 0; j < m_sp; ++j) {
                z[j] = (bits >> j) & 1u;
                k += z[j];
            }
            zs.push_back(std::move(z));
            const double pi = (static_cast<double>(m_sp) - 1.0) /
                              (std::exp(log_binom(m_sp, k)) * static_cast<double>(k) *
                               static_cast<double>(m_sp - k));
            weight.push_back(pi);
        }
    } else {
        // Coalition size k drawn with probability proportional to
        // (M-1)/(k(M-k)), the size marginal of the Shapley kernel; then a
        // uniform subset of that size via partial shuffle.
        std::vector<double> size_cdf(m_sp - 1);
        double total_q = 0.0;
        for (std::size_t k = 1; k < m_sp; ++k) {
            total_q += 1.0 / (static_cast<double>(k) * static_cast<double>(m_sp - k));
            size_cdf[k - 1] = total_q;
        }
        Rng rng(cfg.seed);
        std::vector<std::size_t> indices(m_sp);
        const int n_sampled = std::max(1, cfg.n_samples - 2);
        zs.reserve(static_cast<std::size_t>(n_sampled));
        for (int i = 0; i < n_sampled; ++i) {
            const double u = rng.uniform() * total_q;
            std::size_t k = 1;
            while (k < m_sp - 1 && size_cdf[k - 1] < u) ++k;
            for (std::size_t j = 0; j < m_sp; ++j) indices[j] = j;
            std::vector<std::uint8_t> z(m_sp, 0);
            for (std::size_t j = 0; j < k; ++j) {
                const std::size_t pick = j + rng.uniform_int(m_sp - j);
                std::swap(indices[j], indices[pick]);
                z[indices[j]] = 1;
            }
            zs.push_back(std::move(z));
            weight.push_back(1.0);
        }
    }

    const std::size_t n = zs.size();
    std::vector<double> conf(n);
    parallel_for(n, [&](std::size_t i) {
        const Image perturbed =
            explain_detail::coalition_image(image, zs[i], grid, cfg.baseline);
        conf[i] = explain_detail::checked_confidence(model_fn, perturbed, "kernelshap");
    });

    // Efficiency built in: phi_last = delta - sum(others), substituted into
    // the regression, so attributions always sum to v(full) - v(empty).
    const std::size_t dim = m_sp - 1;
    std::vector<double> ata(dim * dim, 0.0);
    std::vector<double> atb(dim, 0.0);
    std::vector<double> row(dim);
    for (std::size_t i = 0; i < n; ++i) {
        const double z_last = zs[i][m_sp - 1];
        for (std::size_t j = 0; j < dim; ++j) row[j] = static_cast<double>(zs[i][j]) - z_last;
        const double target = conf[i] - v_empty - z_last * delta;
        const double w = weight[i];
        for (std::size_t r = 0; r < dim; ++r) {
            if (row[r] == 0.0) continue;
            const double wr = w * row[r];
            for (std::size_t c = r; c < dim; ++c) ata[r * dim + c] += wr * row[c];
            atb[r] += wr * target;
        }
    }
    for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < r; ++c) ata[r * dim + c] = ata[c * dim + r];
    for (std::size_t j = 0; j < dim; ++j) ata[j * dim + j] += cfg.ridge_lambda;

    const std::vector<double> head =
        explain_detail::solve_linear(std::move(ata), std::move(atb), dim, "kernelshap");
    std::vector<double> phi(m_sp);
    double head_sum = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
        phi[j] = head[j];
        head_sum += head[j];
    }
    phi[m_sp - 1] = delta - head_sum;

    SaliencyMap map =
        explain_detail::map_from_superpixel_values(image, grid, phi, "kernelshap");
    map.rng_seed = cfg.seed;
    map.config_echo = cfg.echo();
    map.require_finite();
    return map;
}

// ---------------------------------------------------------------------------
// GradCAM

inline SaliencyMap gradcam(const ModelSnapshot& model, const Image& image,
                           const GradCamConfig& cfg) {
    const ForwardTrace trace = forward(model, image);
    const auto it = trace.activations.find(cfg.layer);
    if (it == trace.activations.end())
        throw data_error("gradcam: model has no layer '" + cfg.layer + "'");
    const Tensor& acts = it->second;
    const Tensor grads = grad_wrt_activations(model, image, cfg.layer);

    const std::size_t channels = acts.shape[0];
    const std::size_t side_h = acts.shape[1];
    const std::size_t side_w = acts.shape[2];
    const double cells = static_cast<double>(side_h * side_w);

    std::vector<float> combined(side_h * side_w, 0.0f);
    for (std::size_t k = 0; k < channels; ++k) {
        double alpha = 0.0;
        for (std::size_t i = 0; i < side_h * side_w; ++i)
            alpha += grads.data[k * side_h * side_w + i];
        alpha /= cells;
        for (std::size_t i = 0; i < side_h * side_w; ++i)
            combined[i] += static_cast<float>(alpha) * acts.data[k * side_h * side_w + i];
    }
    for (float& v : combined) v = v > 0.0f ? v : 0.0f;

    SaliencyMap map(image.width, image.height, "gradcam");
    map.config_echo = cfg.echo();
    map.values = bilinear_resize_aligncorners(combined, static_cast<int>(side_w),
                                              static_cast<int>(side_h), image.width,
                                              image.height);
    bool any = false;
    for (float v : map.values)
        if (v != 0.0f) { any = true; break; }
    map.empty_explanation = !any;
    map.require_finite();
    return map;
}

// ---------------------------------------------------------------------------
// Dispatch

inline const std::vector<std::string>& explainer_names() {
    static const std::vector<std::string> names{"rise", "lime", "kernelshap", "gradcam"};
    return names;
}

// Runs the named explainer. GradCAM needs the white-box model; the other
// three see only model_fn, which may wrap an external classifier.
inline SaliencyMap explain(const std::string& explainer, const ModelSnapshot* model,
                           const ModelFn& model_fn, const Image& image,
                           const ExplainerConfig& cfg) {
    if (explainer == "rise") return rise(model_fn, image, cfg.rise);
    if (explainer == "lime") return lime(model_fn, image, cfg.lime);
    if (explainer == "kernelshap") return kernelshap(model_fn, image, cfg.kernelshap);
    if (explainer == "gradcam") {
        if (!model)
            throw config_error("gradcam: requires the native model (no black-box support)");
        return gradcam(*model, image, cfg.gradcam);
    }
    throw config_error("unknown explainer '" + explainer +
                       "' (known: rise, lime, kernelshap, gradcam)");
}

}  // namespace semcont
