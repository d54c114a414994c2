#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <functional>
#include <vector>

#include "semcont/explain.hpp"
#include "semcont/nn.hpp"
#include "semcont/rng.hpp"
#include "semcont/saliency.hpp"
#include "semcont/shapes.hpp"

using namespace semcont;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Independent oracles. Everything in this namespace recomputes results from
// the mathematical definitions, sharing no arithmetic with the production
// explainers.

namespace oracle {

// Exact Shapley values of a set game by full subset enumeration.
std::vector<double> shapley_brute(int m, const std::function<double(unsigned)>& v) {
    std::vector<double> fact(static_cast<std::size_t>(m) + 1, 1.0);
    for (int i = 1; i <= m; ++i) fact[i] = fact[i - 1] * i;
    std::vector<double> phi(m, 0.0);
    for (unsigned s = 0; s < (1u << m); ++s)
        for (int j = 0; j < m; ++j) {
            if (s & (1u << j)) continue;
            const int k = __builtin_popcount(s);
            const double w = fact[k] * fact[m - 1 - k] / fact[m];
            phi[j] += w * (v(s | (1u << j)) - v(s));
        }
    return phi;
}

// Dense linear solve with partial pivoting, used for the weighted ridge
// reference solution.
std::vector<double> solve(std::vector<double> a, std::vector<double> b, std::size_t n) {
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a[r * n + col]) > std::fabs(a[pivot * n + col])) pivot = r;
        REQUIRE(std::fabs(a[pivot * n + col]) > 1e-12);
        for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
        std::swap(b[col], b[pivot]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r * n + col] / a[col * n + col];
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
    return x;
}

}  // namespace oracle

namespace {

ModelFn constant_model(double c) {
    return [c](const Image&) { return c; };
}

ModelFn mean_pixel_model() {
    return [](const Image& img) {
        double s = 0.0;
        for (float v : img.pixels) s += v;
        return s / static_cast<double>(img.pixels.size());
    };
}

Image random_image(int side, std::uint64_t seed) {
    Rng rng(seed);
    Image img(side, side);
    for (float& p : img.pixels) p = static_cast<float>(rng.uniform());
    return img;
}

Image circle_image(double rotation_deg = 0.0) {
    ShapeSpec spec;
    spec.kind = ShapeKind::circle;
    spec.rotation_deg = rotation_deg;
    return render(spec);
}

Image triangle_image() {
    ShapeSpec spec;
    spec.kind = ShapeKind::triangle;
    return render(spec);
}

// 4x4 image, 2x2 superpixels, every pixel 0.1; after coalition blending a
// superpixel reads 0.1 when kept and exactly the 0.9 baseline when dropped.
constexpr float kGameBaseline = 0.9f;

Image game_image() { return Image(4, 4, 0.1f); }

std::array<bool, 4> read_coalition(const Image& img) {
    return {img.at(0, 0) != kGameBaseline, img.at(0, 2) != kGameBaseline,
            img.at(2, 0) != kGameBaseline, img.at(2, 2) != kGameBaseline};
}

// Superpixel coefficients sit constant on their 2x2 blocks; read one
// representative pixel per block.
std::array<double, 4> corner_values(const SaliencyMap& map) {
    return {map.at(0, 0), map.at(0, 2), map.at(2, 0), map.at(2, 2)};
}

double game_value(unsigned bits, const std::function<double(const Image&)>& model) {
    std::vector<std::uint8_t> z(4);
    for (int j = 0; j < 4; ++j) z[j] = (bits >> j) & 1u;
    return model(explain_detail::coalition_image(game_image(), z, 2, kGameBaseline));
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("semcont_explain_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

// ---------------------------------------------------------------------------
// RISE

TEST_CASE("rise weighted mask sum matches an enumerated hand computation") {
    Image img(2, 2);
    img.at(0, 0) = 0.1f;
    img.at(0, 1) = 0.3f;
    img.at(1, 0) = 0.5f;
    img.at(1, 1) = 0.7f;

    RiseConfig cfg;
    cfg.n_masks = 4;
    cfg.cell_grid = 2;
    cfg.keep_prob = 0.5;
    cfg.baseline = 0.9f;
    cfg.seed = 11;

    const ModelFn model = mean_pixel_model();
    const MaskSet set = make_rise_masks(2, 2, cfg);
    REQUIRE(set.masks.size() == 4);
    for (const Image& m : set.masks)
        for (float v : m.pixels) {
            CHECK(v >= 0.0f);
            CHECK(v <= 1.0f);
        }

    std::vector<double> acc(4, 0.0);
    for (const Image& m : set.masks) {
        Image blended(2, 2);
        for (std::size_t p = 0; p < 4; ++p)
            blended.pixels[p] = m.pixels[p] * img.pixels[p] + (1.0f - m.pixels[p]) * 0.9f;
        const double conf = model(blended);
        for (std::size_t p = 0; p < 4; ++p) acc[p] += conf * m.pixels[p];
    }
    const double scale = 1.0 / (4.0 * 0.5);

    const SaliencyMap map = rise(model, img, cfg);
    CHECK(map.width == 2);
    CHECK(map.height == 2);
    CHECK(map.explainer_id == "rise");
    CHECK(map.rng_seed == std::uint64_t{11});
    for (std::size_t p = 0; p < 4; ++p)
        CHECK(map.values[p] == static_cast<float>(acc[p] * scale));
}

TEST_CASE("rise on a constant model is flat up to mask sampling noise") {
    const Image img(64, 64, 0.5f);
    const double c = 0.8;
    RiseConfig cfg;
    cfg.n_masks = 16000;
    cfg.seed = 7;

    const SaliencyMap map = rise(constant_model(c), img, cfg);
    const auto [mn, mx] = std::minmax_element(map.values.begin(), map.values.end());
    CHECK(static_cast<double>(*mx) - static_cast<double>(*mn) < 0.05 * c);

    double mean = 0.0;
    for (float v : map.values) mean += v;
    mean /= static_cast<double>(map.size());
    CHECK(std::fabs(mean - c) < 0.01 * c);
}

TEST_CASE("rise with one full-keep mask returns the image confidence everywhere") {
    const Image img = circle_image();
    RiseConfig cfg;
    cfg.n_masks = 1;
    cfg.keep_prob = 1.0;
    cfg.seed = 3;

    const ModelFn model = mean_pixel_model();
    const double conf = model(img);
    const SaliencyMap map = rise(model, img, cfg);
    for (float v : map.values) CHECK(v == doctest::Approx(conf).epsilon(1e-7));
    for (float v : map.values) CHECK(v == map.values[0]);
}

TEST_CASE("rise is linear in the model output") {
    const Image img = random_image(64, 21);
    RiseConfig cfg;
    cfg.n_masks = 300;
    cfg.seed = 5;

    const ModelFn f = mean_pixel_model();
    const double a = 2.5, b = 0.25;
    const ModelFn g = [&](const Image& x) { return a * f(x) + b; };

    const SaliencyMap mf = rise(f, img, cfg);
    const SaliencyMap mg = rise(g, img, cfg);

    const MaskSet set = make_rise_masks(64, 64, cfg);
    std::vector<double> mask_mean(img.size(), 0.0);
    for (const Image& m : set.masks)
        for (std::size_t p = 0; p < mask_mean.size(); ++p) mask_mean[p] += m.pixels[p];
    const double scale = 1.0 / (static_cast<double>(cfg.n_masks) * cfg.keep_prob);
    for (double& v : mask_mean) v *= scale;

    for (std::size_t p = 0; p < img.size(); ++p) {
        const double want = a * mf.values[p] + b * mask_mean[p];
        CHECK(mg.values[p] == doctest::Approx(want).epsilon(1e-5));
    }
}

// ---------------------------------------------------------------------------
// LIME

TEST_CASE("lime on a constant model attributes nothing") {
    const Image img = random_image(32, 8);
    LimeConfig cfg;
    cfg.segment_grid = 4;
    cfg.n_samples = 100;
    cfg.seed = 13;

    const SaliencyMap map = lime(constant_model(0.6), img, cfg);
    for (float v : map.values) CHECK(std::fabs(v) < 1e-6);
}

TEST_CASE("lime ranks the single informative superpixel first") {
    const Image img = game_image();
    LimeConfig cfg;
    cfg.segment_grid = 2;
    cfg.baseline = kGameBaseline;
    cfg.exhaustive = true;

    // confidence 1 exactly when superpixel 0 survives the perturbation
    const ModelFn model = [](const Image& x) {
        return read_coalition(x)[0] ? 1.0 : 0.0;
    };
    const SaliencyMap map = lime(model, img, cfg);
    const std::array<double, 4> coef = corner_values(map);
    for (int j = 1; j < 4; ++j) CHECK(coef[0] > coef[j] + 0.1);

    // reference: weighted ridge on the enumerated design matrix
    std::vector<double> ata(25, 0.0), atb(5, 0.0);
    for (unsigned bits = 0; bits < 16; ++bits) {
        const double k = __builtin_popcount(bits);
        const double cos_sim = k == 0.0 ? 0.0 : std::sqrt(k / 4.0);
        const double d = 1.0 - cos_sim;
        const double w = std::exp(-(d * d) / (cfg.kernel_width * cfg.kernel_width));
        const double y = (bits & 1u) ? 1.0 : 0.0;
        double row[5] = {1.0, static_cast<double>(bits & 1u), static_cast<double>((bits >> 1) & 1u),
                         static_cast<double>((bits >> 2) & 1u), static_cast<double>((bits >> 3) & 1u)};
        for (int r = 0; r < 5; ++r) {
            for (int c = 0; c < 5; ++c) ata[r * 5 + c] += w * row[r] * row[c];
            atb[r] += w * row[r] * y;
        }
    }
    for (int j = 1; j < 5; ++j) ata[j * 5 + j] += cfg.ridge_lambda;
    const std::vector<double> beta = oracle::solve(ata, atb, 5);
    for (int j = 0; j < 4; ++j)
        CHECK(coef[j] == doctest::Approx(beta[j + 1]).epsilon(1e-6));
}

TEST_CASE("lime surfaces a singular regression as a numeric error") {
    const Image img = random_image(32, 4);
    LimeConfig cfg;
    cfg.segment_grid = 4;
    cfg.n_samples = 1;
    cfg.ridge_lambda = 0.0;
    cfg.seed = 2;
    CHECK_THROWS_AS(lime(mean_pixel_model(), img, cfg), numeric_error);
}

TEST_CASE("lime exhaustive mode rejects grids too large to enumerate") {
    const Image img = random_image(64, 4);
    LimeConfig cfg;
    cfg.exhaustive = true;
    CHECK_THROWS_AS(lime(mean_pixel_model(), img, cfg), config_error);
}

// ---------------------------------------------------------------------------
// KernelSHAP

TEST_CASE("kernelshap recovers additive game coefficients exactly") {
    const std::array<double, 4> a{0.40, 0.15, 0.0, -0.20};
    const ModelFn model = [&](const Image& x) {
        const std::array<bool, 4> z = read_coalition(x);
        double v = 0.3;
        for (int j = 0; j < 4; ++j)
            if (z[j]) v += a[j];
        return v;
    };

    KernelShapConfig cfg;
    cfg.segment_grid = 2;
    cfg.baseline = kGameBaseline;
    cfg.ridge_lambda = 0.0;
    cfg.exhaustive = true;

    const SaliencyMap map = kernelshap(model, game_image(), cfg);
    const std::array<double, 4> phi = corner_values(map);
    const std::vector<double> brute =
        oracle::shapley_brute(4, [&](unsigned bits) { return game_value(bits, model); });

    double total = 0.0;
    for (int j = 0; j < 4; ++j) {
        CHECK(phi[j] == doctest::Approx(a[j]).epsilon(1e-6));
        CHECK(phi[j] == doctest::Approx(brute[j]).epsilon(1e-6));
        total += phi[j];
    }
    CHECK(std::fabs(phi[2]) < 1e-6);  // null player earns nothing
    const double v_full = game_value(0b1111, model);
    const double v_empty = game_value(0, model);
    CHECK(total == doctest::Approx(v_full - v_empty).epsilon(1e-6));
}

TEST_CASE("kernelshap on a constant model attributes nothing") {
    KernelShapConfig cfg;
    cfg.segment_grid = 2;
    cfg.baseline = kGameBaseline;
    cfg.exhaustive = true;
    const SaliencyMap ex = kernelshap(constant_model(0.7), game_image(), cfg);
    for (float v : ex.values) CHECK(std::fabs(v) < 1e-6);

    KernelShapConfig sampled;
    sampled.segment_grid = 4;
    sampled.n_samples = 80;
    sampled.seed = 6;
    const SaliencyMap sm = kernelshap(constant_model(0.7), random_image(32, 9), sampled);
    for (float v : sm.values) CHECK(std::fabs(v) < 1e-6);
}

TEST_CASE("kernelshap splits credit equally in a symmetric game") {
    const ModelFn model = [](const Image& x) {
        const std::array<bool, 4> z = read_coalition(x);
        double k = 0.0;
        for (bool b : z) k += b ? 1.0 : 0.0;
        return 0.2 * k + 0.1 * k * k;
    };
    KernelShapConfig cfg;
    cfg.segment_grid = 2;
    cfg.baseline = kGameBaseline;
    cfg.ridge_lambda = 0.0;
    cfg.exhaustive = true;

    const SaliencyMap map = kernelshap(model, game_image(), cfg);
    const std::array<double, 4> phi = corner_values(map);
    const std::vector<double> brute =
        oracle::shapley_brute(4, [&](unsigned bits) { return game_value(bits, model); });
    for (int j = 0; j < 4; ++j) {
        CHECK(phi[j] == doctest::Approx(phi[0]).epsilon(1e-6));
        CHECK(phi[j] == doctest::Approx(brute[j]).epsilon(1e-6));
    }
}

TEST_CASE("kernelshap sampled attributions sum to the confidence gap") {
    const Image img = circle_image();
    const ModelFn f = mean_pixel_model();
    const ModelFn model = [&](const Image& x) {
        return 1.0 / (1.0 + std::exp(-4.0 * (f(x) - 0.5)));
    };

    KernelShapConfig cfg;
    cfg.segment_grid = 8;
    cfg.n_samples = 500;
    cfg.seed = 31;
    const SaliencyMap map = kernelshap(model, img, cfg);

    double total = 0.0;
    for (int r = 0; r < 8; ++r)
        for (int c = 0; c < 8; ++c) total += map.at(r * 8, c * 8);
    const double v_full = model(img);
    const double v_empty = model(Image(64, 64, cfg.baseline));
    CHECK(std::fabs(total - (v_full - v_empty)) < 1e-4);
}

TEST_CASE("kernelshap needs at least two superpixels") {
    KernelShapConfig cfg;
    cfg.segment_grid = 1;
    CHECK_THROWS_AS(kernelshap(constant_model(0.5), game_image(), cfg), config_error);
}

// ---------------------------------------------------------------------------
// Seed determinism across the stochastic explainers

TEST_CASE("stochastic explainers are reproducible from their seeds") {
    const Image img = random_image(32, 17);
    const ModelFn model = mean_pixel_model();

    ExplainerConfig cfg;
    cfg.rise.n_masks = 50;
    cfg.rise.seed = 101;
    cfg.lime.segment_grid = 4;
    cfg.lime.n_samples = 60;
    cfg.lime.seed = 102;
    cfg.kernelshap.segment_grid = 4;
    cfg.kernelshap.n_samples = 60;
    cfg.kernelshap.seed = 103;

    for (const std::string name : {"rise", "lime", "kernelshap"}) {
        const SaliencyMap first = explain(name, nullptr, model, img, cfg);
        const SaliencyMap second = explain(name, nullptr, model, img, cfg);
        REQUIRE(first.values.size() == second.values.size());
        CHECK(std::memcmp(first.values.data(), second.values.data(),
                          first.values.size() * sizeof(float)) == 0);

        ExplainerConfig other = cfg;
        other.rise.seed += 7;
        other.lime.seed += 7;
        other.kernelshap.seed += 7;
        const SaliencyMap shifted = explain(name, nullptr, model, img, other);
        CHECK(std::memcmp(first.values.data(), shifted.values.data(),
                          first.values.size() * sizeof(float)) != 0);
    }
}

// ---------------------------------------------------------------------------
// GradCAM

TEST_CASE("gradcam flags an all-zero explanation instead of failing") {
    ModelSnapshot model = ModelSnapshot::init(3);
    std::fill(model.dense_w.data.begin(), model.dense_w.data.end(), 0.0f);
    std::fill(model.dense_b.data.begin(), model.dense_b.data.end(), 0.0f);

    const Image img = triangle_image();
    const SaliencyMap map = gradcam(model, img, GradCamConfig{});
    CHECK(map.empty_explanation);
    CHECK(map.width == 64);
    CHECK(map.height == 64);
    for (float v : map.values) CHECK(v == 0.0f);
}

TEST_CASE("gradcam is deterministic, nonnegative, and validates its layer") {
    const ModelSnapshot model = ModelSnapshot::init(9);
    const Image img = circle_image();

    const SaliencyMap first = gradcam(model, img, GradCamConfig{});
    const SaliencyMap second = gradcam(model, img, GradCamConfig{});
    CHECK(std::memcmp(first.values.data(), second.values.data(),
                      first.values.size() * sizeof(float)) == 0);
    for (float v : first.values) CHECK(v >= 0.0f);

    CHECK_THROWS_AS(gradcam(model, img, GradCamConfig{"dense"}), data_error);
}

TEST_CASE("gradcam matches a finite-difference channel-weighting reference") {
    // Positive biases keep every activation strictly positive, so the pooling
    // decisions below are stable under the probe step and central differences
    // are valid everywhere.
    ModelSnapshot model = ModelSnapshot::init(17);
    for (float& b : model.conv1_b.data) b += 1.0f;
    for (float& b : model.conv2_b.data) b += 2.0f;

    const Image img = random_image(64, 99);
    const ForwardTrace trace = forward(model, img);
    const Tensor& acts = trace.activations.at("conv2");
    REQUIRE(acts.shape == std::vector<std::size_t>({16, 29, 29}));
    for (float v : acts.data) REQUIRE(v > 0.0f);

    const int side = 29, pooled = 14;
    const double h = 1e-5;

    // Base pooling state per cell, plus the margin between the top two
    // entries; the finite-difference step must not flip any argmax.
    auto cell_entries = [&](int k, int py, int px, std::array<double, 4>& e) {
        for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx)
                e[dy * 2 + dx] = acts.data[(static_cast<std::size_t>(k) * side +
                                            (2 * py + dy)) * side + (2 * px + dx)];
    };
    double min_margin = 1e9;
    for (int k = 0; k < 16; ++k)
        for (int py = 0; py < pooled; ++py)
            for (int px = 0; px < pooled; ++px) {
                std::array<double, 4> e{};
                cell_entries(k, py, px, e);
                std::array<double, 4> s = e;
                std::sort(s.begin(), s.end());
                min_margin = std::min(min_margin, s[3] - s[2]);
            }
    REQUIRE(min_margin > 2.0 * h);

    // d logit / d activation by central difference: only the perturbed
    // position's pool cell changes, and the dense layer is linear in it.
    std::vector<double> alpha(16, 0.0);
    for (int k = 0; k < 16; ++k) {
        double acc = 0.0;
        for (int y = 0; y < side; ++y)
            for (int x = 0; x < side; ++x) {
                if (y >= 2 * pooled || x >= 2 * pooled) continue;  // outside any pool cell
                const int py = y / 2, px = x / 2;
                std::array<double, 4> e{};
                cell_entries(k, py, px, e);
                const int slot = (y % 2) * 2 + (x % 2);
                const double base = *std::max_element(e.begin(), e.end());
                std::array<double, 4> up = e, dn = e;
                up[slot] += h;
                dn[slot] -= h;
                const double wmax_up = *std::max_element(up.begin(), up.end());
                const double wmax_dn = *std::max_element(dn.begin(), dn.end());
                const double wj = model.dense_w.data[(static_cast<std::size_t>(k) * pooled +
                                                      py) * pooled + px];
                acc += wj * ((wmax_up - base) - (wmax_dn - base)) / (2.0 * h);
            }
        alpha[k] = acc / static_cast<double>(side * side);
    }

    std::vector<float> combined(static_cast<std::size_t>(side) * side, 0.0f);
    for (int k = 0; k < 16; ++k)
        for (int i = 0; i < side * side; ++i)
            combined[i] += static_cast<float>(alpha[k]) *
                           acts.data[static_cast<std::size_t>(k) * side * side + i];
    for (float& v : combined) v = v > 0.0f ? v : 0.0f;
    const std::vector<float> want = bilinear_resize_aligncorners(combined, side, side, 64, 64);

    const SaliencyMap map = gradcam(model, img, GradCamConfig{});
    CHECK_FALSE(map.empty_explanation);
    double worst = 0.0;
    for (std::size_t p = 0; p < map.values.size(); ++p) {
        const double scale = std::max(1.0, std::fabs(static_cast<double>(want[p])));
        worst = std::max(worst, std::fabs(static_cast<double>(map.values[p]) - want[p]) / scale);
    }
    CHECK(worst < 1e-3);
}

// ---------------------------------------------------------------------------
// Map normalization and persistence

TEST_CASE("normalize_map rescales to the unit interval") {
    SaliencyMap map(3, 1, "rise");
    map.values = {2.0f, 4.0f, 6.0f};
    const SaliencyMap norm = normalize_map(map);
    CHECK(norm.values[0] == 0.0f);
    CHECK(norm.values[1] == 0.5f);
    CHECK(norm.values[2] == 1.0f);

    SaliencyMap flat(4, 4, "rise");
    std::fill(flat.values.begin(), flat.values.end(), 5.0f);
    const SaliencyMap zeroed = normalize_map(flat);
    for (float v : zeroed.values) CHECK(v == 0.0f);

    const SaliencyMap again = normalize_map(norm);
    CHECK(std::memcmp(again.values.data(), norm.values.data(),
                      norm.values.size() * sizeof(float)) == 0);

    SaliencyMap bad(2, 1, "rise");
    bad.values = {0.0f, std::numeric_limits<float>::quiet_NaN()};
    CHECK_THROWS_AS(normalize_map(bad), numeric_error);
}

TEST_CASE("saliency files round-trip exactly") {
    const fs::path dir = fresh_dir("roundtrip");
    SaliencyMap map(5, 3, "kernelshap");
    Rng rng(77);
    for (float& v : map.values) v = static_cast<float>(rng.uniform(-2.0, 2.0));
    map.rng_seed = 424242;
    map.empty_explanation = true;
    map.config_echo = {{"segment_grid", 8}};

    save_saliency(map, dir / "frame_0000");
    const SaliencyMap back = load_saliency(dir / "frame_0000");
    CHECK(back.width == 5);
    CHECK(back.height == 3);
    CHECK(back.explainer_id == "kernelshap");
    CHECK(back.target_class == map.target_class);
    CHECK(back.empty_explanation);
    CHECK(back.rng_seed == std::optional<std::uint64_t>{424242});
    CHECK(back.config_echo["segment_grid"] == 8);
    CHECK(std::memcmp(back.values.data(), map.values.data(),
                      map.values.size() * sizeof(float)) == 0);

    fs::resize_file(dir / "frame_0000.f32", 4);
    CHECK_THROWS_AS(load_saliency(dir / "frame_0000"), data_error);

    save_saliency(map, dir / "frame_0001");
    fs::remove(dir / "frame_0001.f32");
    CHECK_THROWS_AS(load_saliency(dir / "frame_0001"), data_error);

    atomic_write_file(dir / "frame_0002.json", "{ not json");
    atomic_write_file(dir / "frame_0002.f32", "");
    CHECK_THROWS_AS(load_saliency(dir / "frame_0002"), data_error);

    fs::remove_all(dir);
}

TEST_CASE("explain dispatch validates explainer names and model needs") {
    const Image img = random_image(32, 30);
    ExplainerConfig cfg;
    cfg.rise.n_masks = 20;
    cfg.rise.seed = 1;

    CHECK_THROWS_AS(explain("shap", nullptr, mean_pixel_model(), img, cfg), config_error);
    CHECK_THROWS_AS(explain("gradcam", nullptr, mean_pixel_model(), img, cfg), config_error);

    const SaliencyMap direct = rise(mean_pixel_model(), img, cfg.rise);
    const SaliencyMap routed = explain("rise", nullptr, mean_pixel_model(), img, cfg);
    CHECK(std::memcmp(direct.values.data(), routed.values.data(),
                      direct.values.size() * sizeof(float)) == 0);
}
