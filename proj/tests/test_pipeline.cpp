#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "mvq/pipeline.hpp"
#include "mvq/signal.hpp"

using namespace mvq;

namespace {

// Small, fast configuration on a synthetic clip: certified stable-real
// parameters at theta = 1 so decay is visible within seconds.
TrainConfig test_config(int n = 3, int k = 3, long frames = 120) {
    TrainConfig cfg;
    cfg.seed = 7;
    cfg.frames = frames;
    cfg.dt = 0.04;
    cfg.blur.eta = 0.01;
    cfg.blur.delta = 3.0;
    cfg.flow.smoothness = 0.5;
    cfg.flow.iterations = 30;
    cfg.dynamics.theta = 1.0;
    cfg.dynamics.mu = 5.0;
    cfg.dynamics.nu = 1.5;
    cfg.dynamics.gamma1 = 1.0;
    cfg.dynamics.gamma2 = 2.0;
    cfg.dynamics.k = 0.0125;
    cfg.dynamics.lambda_C = 1.0;
    cfg.reset.eps_factor = 300.0;
    cfg.reset.null_frames = 6;
    cfg.reset.barred.theta = 3.0;
    cfg.reset.barred.mu = 1.0;
    cfg.reset.barred.nu = 1.0;
    cfg.reset.barred.gamma1 = 1.0;
    cfg.reset.barred.gamma2 = 1.0;
    cfg.reset.barred.k = 0.0;
    LayerConfig layer;
    layer.n = n;
    layer.k = k;
    layer.lambda_M = 1e-4;
    layer.activation_frames = frames;
    cfg.layers = {layer};
    return cfg;
}

bool rows_equal(const MetricsRow& a, const MetricsRow& b) {
    return a.t == b.t && a.frame == b.frame && a.mi_frame == b.mi_frame && a.U == b.U &&
           a.ca_info == b.ca_info && a.ca_kinetic == b.ca_kinetic && a.ca_motion == b.ca_motion &&
           a.q_norm == b.q_norm && a.resets_per_1000 == b.resets_per_1000 &&
           a.reset_flag == b.reset_flag && a.tau == b.tau;
}

}  // namespace

TEST_CASE("config parsing") {
    SUBCASE("round trip through JSON") {
        TrainConfig cfg = test_config();
        TrainConfig back = parse_config(dump_config(cfg));
        CHECK(back.seed == cfg.seed);
        CHECK(back.frames == cfg.frames);
        CHECK(back.dynamics.mu == cfg.dynamics.mu);
        CHECK(back.layers.size() == 1);
        CHECK(back.layers[0].lambda_M == cfg.layers[0].lambda_M);
        CHECK(back.reset.barred.theta == cfg.reset.barred.theta);
    }
    SUBCASE("unknown keys are rejected") {
        std::string text = dump_config(test_config());
        text.insert(text.find_last_of('}'), ",\"bogus\": 1");
        CHECK_THROWS_WITH_AS(parse_config(text), doctest::Contains("unknown key"),
                             std::invalid_argument);
    }
    SUBCASE("unsupported version is rejected") {
        std::string text = dump_config(test_config());
        size_t at = text.find("\"version\": 1");
        text.replace(at, 12, "\"version\": 9");
        CHECK_THROWS_WITH_AS(parse_config(text), doctest::Contains("unsupported version"),
                             std::invalid_argument);
    }
    SUBCASE("layer_params derives eps = 300 n and the horizon") {
        TrainConfig cfg = test_config(5, 3, 250);
        DynamicsParams p = cfg.layer_params(0);
        CHECK(p.eps1 == 1500.0);
        CHECK(p.eps3 == 1500.0);
        CHECK(p.T == doctest::Approx(250 * 0.04));
        CHECK(p.lambda_M == 1e-4);
    }
}

TEST_CASE("train_layer basics") {
    auto clip = synth_translating_texture(11, 1.0, 0.0, 16, 16, 12, 1);

    SUBCASE("zero frames returns the initial state and an empty log") {
        TrainConfig cfg = test_config();
        TrainResult r = train_layer(cfg, 0, clip, nullptr, {}, 0);
        FilterState init = initial_state(r.shape, cfg.seed);
        CHECK(r.log.empty());
        CHECK((r.state.q - init.q).cwiseAbs().maxCoeff() == 0.0);
        CHECK(r.state.q1.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("fixed seed is bitwise reproducible") {
        TrainConfig cfg = test_config(3, 3, 40);
        TrainResult a = train_layer(cfg, 0, clip, nullptr, {});
        TrainResult b = train_layer(cfg, 0, clip, nullptr, {});
        REQUIRE(a.log.size() == b.log.size());
        for (size_t i = 0; i < a.log.size(); ++i) CHECK(rows_equal(a.log[i], b.log[i]));
        CHECK((a.state.q - b.state.q).cwiseAbs().maxCoeff() == 0.0);
        CHECK((a.state.q3 - b.state.q3).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("reset bookkeeping matches the tau-zeroing events") {
        TrainConfig cfg = test_config(3, 3, 150);
        // Provoke resets with tiny thresholds.
        cfg.reset.eps = {1e-8, 1e-8, 1e-8};
        TrainResult r = train_layer(cfg, 0, clip, nullptr, {});
        long flagged = 0;
        for (const MetricsRow& row : r.log) {
            if (row.reset_flag) {
                ++flagged;
                CHECK(row.tau == 0.0);
            }
        }
        CHECK(flagged == r.resets);
        CHECK(r.resets > 0);
    }
}

TEST_CASE("all-zero video under stable parameters: decay, no resets") {
    std::vector<ColorField> clip(4, ColorField(12, 10, 1));
    TrainConfig cfg = test_config(3, 3, 1500);
    cfg.blur.eta = 0.05;
    TrainResult r = train_layer(cfg, 0, clip, nullptr, {});
    CHECK(r.resets == 0);
    // After the transient the norm of q is non-increasing.
    for (size_t i = 800; i + 1 < r.log.size(); ++i)
        CHECK(r.log[i + 1].q_norm <= r.log[i].q_norm + 1e-9);
}

TEST_CASE("multilayer") {
    auto clip = synth_translating_texture(13, 1.0, 0.0, 16, 14, 10, 1);

    SUBCASE("one layer is identical to train_layer") {
        TrainConfig cfg = test_config(3, 3, 30);
        TrainResult direct = train_layer(cfg, 0, clip, nullptr, {});
        auto results = run_multilayer(cfg, clip, nullptr);
        REQUIRE(results.size() == 1);
        CHECK((results[0].state.q - direct.state.q).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("layer 2 depends only on the frozen layer-1 stream") {
        TrainConfig cfg = test_config(3, 3, 30);
        LayerConfig second;
        second.n = 2;
        second.k = 3;
        second.lambda_M = 0.0;
        second.activation_frames = 25;
        cfg.layers.push_back(second);

        auto results = run_multilayer(cfg, clip, nullptr);
        REQUIRE(results.size() == 2);

        std::vector<FrozenLayer> below{FrozenLayer{results[0].shape, results[0].state.q}};
        TrainResult replay = train_layer(cfg, 1, clip, nullptr, below);
        CHECK((replay.state.q - results[1].state.q).cwiseAbs().maxCoeff() == 0.0);
        CHECK((replay.state.q3 - results[1].state.q3).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("layer-2 input channels are layer-1 features") {
        TrainConfig cfg = test_config(4, 3, 10);
        LayerConfig second;
        second.n = 2;
        second.k = 3;
        second.activation_frames = 8;
        cfg.layers.push_back(second);
        auto results = run_multilayer(cfg, clip, nullptr);
        CHECK(results[1].shape.m == 4);
    }
}

TEST_CASE("best-lambda sweep keeps the highest batch MI") {
    auto clip = synth_translating_texture(17, 1.0, 0.0, 12, 14, 10, 1);
    TrainConfig cfg = test_config(3, 3, 25);
    std::vector<double> lambdas{0.0, 1e-6};
    auto picked = run_multilayer_best_lambda(cfg, clip, nullptr, lambdas);
    REQUIRE(picked.size() == 1);

    double best = -1.0;
    for (double lm : lambdas) {
        TrainConfig branch = cfg;
        branch.layers[0].lambda_M = lm;
        TrainResult r = train_layer(branch, 0, clip, nullptr, {});
        best = std::max(best, batch_mi(r.shape, r.state.q, clip, {}));
    }
    CHECK(batch_mi(picked[0].shape, picked[0].state.q, clip, {}) == doctest::Approx(best));
}

TEST_CASE("export_features") {
    auto clip = synth_translating_texture(19, 1.0, 0.0, 3, 10, 8, 1);
    FilterShape s1{5, 1, 3};
    FilterShape s2{4, 5, 3};
    std::vector<FrozenLayer> layers{
        FrozenLayer{s1, initial_state(s1, 2).q},
        FrozenLayer{s2, initial_state(s2, 3).q},
    };

    FeatureStack fs = export_features(layers, clip);
    CHECK(fs.feature_count == 9);
    CHECK(fs.frames == 3);

    // Per-layer blocks are probability vectors (f32 tolerance).
    for (int f = 0; f < fs.frames; ++f)
        for (int r = 0; r < fs.height; ++r)
            for (int c = 0; c < fs.width; ++c) {
                double sum1 = 0.0, sum2 = 0.0;
                for (int i = 0; i < 5; ++i) sum1 += fs.payload[fs.idx(f, r, c, i)];
                for (int i = 5; i < 9; ++i) sum2 += fs.payload[fs.idx(f, r, c, i)];
                CHECK(std::abs(sum1 - 1.0) <= 1e-6);
                CHECK(std::abs(sum2 - 1.0) <= 1e-6);
            }

    std::string path = (std::filesystem::temp_directory_path() / "mvq_feat.mvqf").string();
    save_feature_stack(path, fs);
    FeatureStack back = load_feature_stack(path);
    REQUIRE(back.payload.size() == fs.payload.size());
    for (size_t i = 0; i < fs.payload.size(); ++i) CHECK(back.payload[i] == fs.payload[i]);
    std::remove(path.c_str());

    SUBCASE("single layer gives n features per pixel") {
        FeatureStack one = export_features({layers[0]}, clip);
        CHECK(one.feature_count == 5);
    }
}

TEST_CASE("metrics invariants on a real run") {
    auto clip = synth_translating_texture(23, 1.0, 0.0, 16, 16, 12, 1);
    TrainConfig cfg = test_config(3, 3, 80);
    TrainResult r = train_layer(cfg, 0, clip, nullptr, {});
    long prev_frame = -1;
    for (const MetricsRow& row : r.log) {
        CHECK(row.mi_frame >= 0.0);
        CHECK(row.mi_frame <= 1.0 + 1e-9);
        CHECK(row.frame == prev_frame + 1);
        prev_frame = row.frame;
        CHECK(row.tau >= 0.0);
        CHECK(row.tau <= 1.0);
    }

    std::string path = (std::filesystem::temp_directory_path() / "mvq_metrics.csv").string();
    write_metrics_csv(path, r.log);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header ==
          "t,frame,mi_frame,U,ca_info,ca_kinetic,ca_motion,q_norm,resets_per_1000,reset_flag,tau");
    std::remove(path.c_str());
}
