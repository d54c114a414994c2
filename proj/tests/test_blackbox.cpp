#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstring>
#include <string>

#include "semcont/blackbox.hpp"
#include "semcont/continuity.hpp"
#include "semcont/explain.hpp"
#include "semcont/rng.hpp"
#include "semcont/shapes.hpp"

using namespace semcont;

namespace {

std::string g_stub_command;

Image random_image(int side, std::uint64_t seed) {
    Image img(side, side);
    Rng rng(seed);
    for (float& v : img.pixels) v = static_cast<float>(rng.uniform());
    return img;
}

ModelFn native_mean_model() {
    return [](const Image& img) {
        double sum = 0.0;
        for (float v : img.pixels) sum += v;
        return sum / static_cast<double>(img.pixels.size());
    };
}

}  // namespace

TEST_CASE("base64 survives a round trip on arbitrary bytes") {
    Rng rng(31);
    for (int len = 0; len < 64; ++len) {
        std::vector<unsigned char> bytes;
        for (int i = 0; i < len; ++i)
            bytes.push_back(static_cast<unsigned char>(rng.uniform_int(256)));
        const std::string text = base64_encode(bytes.data(), bytes.size());
        CHECK(base64_decode(text) == bytes);
        CHECK(text.size() == (static_cast<std::size_t>(len) + 2) / 3 * 4);
    }
    CHECK_THROWS_AS(base64_decode("ab!c"), data_error);
}

TEST_CASE("external classifier answers confidences over the pipe") {
    const ModelFn remote = blackbox_model_fn(g_stub_command);
    const ModelFn native = native_mean_model();
    for (std::uint64_t seed : {1, 2, 3}) {
        const Image img = random_image(16, seed);
        CHECK(remote(img) == native(img));
    }
    const Image flat(8, 8, 0.25f);
    CHECK(remote(flat) == doctest::Approx(0.25).epsilon(1e-7));
}

TEST_CASE("explainers see identical saliency through pipe and native models") {
    const Image img = random_image(12, 44);
    ExplainerConfig cfg;
    cfg.rise.n_masks = 25;
    cfg.rise.cell_grid = 3;
    cfg.rise.seed = 9;
    cfg.lime.segment_grid = 2;
    cfg.lime.n_samples = 30;
    cfg.lime.seed = 10;

    for (const std::string& explainer : {"rise", "lime"}) {
        const SaliencyMap remote =
            explain(explainer, nullptr, blackbox_model_fn(g_stub_command), img, cfg);
        const SaliencyMap native = explain(explainer, nullptr, native_mean_model(), img, cfg);
        REQUIRE(remote.values.size() == native.values.size());
        CHECK(std::memcmp(remote.values.data(), native.values.data(),
                          remote.values.size() * sizeof(float)) == 0);
    }
}

TEST_CASE("series evaluation works end-to-end over the pipe") {
    VariationSeries s;
    s.kind = SeriesKind::transition;
    s.id = "pipe_ramp";
    for (int i = 0; i < 4; ++i) {
        s.frames.emplace_back(12, 12, 0.2f + 0.1f * static_cast<float>(i));
        s.thetas.push_back(static_cast<double>(i));
    }
    s.reference = s.frames[0];

    ExplainerConfig cfg;
    cfg.rise.n_masks = 25;
    cfg.rise.cell_grid = 3;

    const SeriesEvaluation remote =
        evaluate_series(blackbox_model_fn(g_stub_command), nullptr, s, "rise", cfg,
                        {DistanceKind::msd});
    const SeriesEvaluation native = evaluate_series(native_mean_model(), nullptr, s, "rise",
                                                    cfg, {DistanceKind::msd});
    CHECK(remote.confidences == native.confidences);
    CHECK(remote.saliency_distances.at("msd") == native.saliency_distances.at("msd"));
}

TEST_CASE("gradient explainers cannot run against an opaque classifier") {
    const Image img(8, 8, 0.5f);
    CHECK_THROWS_AS(
        explain("gradcam", nullptr, blackbox_model_fn(g_stub_command), img, ExplainerConfig{}),
        config_error);
}

TEST_CASE("protocol failures surface as data errors") {
    const Image img(8, 8, 0.5f);

    const ModelFn gone = blackbox_model_fn(g_stub_command + " quit");
    CHECK_THROWS_AS(gone(img), data_error);

    const ModelFn noise = blackbox_model_fn(g_stub_command + " garbage");
    CHECK_THROWS_AS(noise(img), data_error);

    const ModelFn confused = blackbox_model_fn(g_stub_command + " wrongid");
    CHECK_THROWS_AS(confused(img), data_error);
}

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: %s <blackbox-stub-binary> [doctest args]\n", argv[0]);
        return 1;
    }
    g_stub_command = argv[1];

    doctest::Context context;
    context.applyCommandLine(argc - 1, argv + 1);
    return context.run();
}
