#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "mvq/flow.hpp"
#include "mvq/io.hpp"
#include "mvq/rng.hpp"
#include "mvq/signal.hpp"

using namespace mvq;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

double rms(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s / v.size());
}

}  // namespace

TEST_CASE("horn_schunck: identical frames give zero flow") {
    auto clip = synth_translating_texture(1, 0.0, 0.0, 2, 16, 12, 1);
    FlowField f = horn_schunck(clip[0], clip[1], 1.0, 50, 0.04);
    for (size_t i = 0; i < f.vx.size(); ++i) {
        CHECK(f.vx[i] == 0.0);
        CHECK(f.vy[i] == 0.0);
    }
}

TEST_CASE("horn_schunck recovers a translating ramp") {
    const int W = 48, H = 32;
    const double dt = 0.04;
    ColorField prev(W, H, 1), next(W, H, 1);
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c) {
            prev.at(0, r, c) = static_cast<double>(c) / (2 * W);
            next.at(0, r, c) = static_cast<double>(c - 1) / (2 * W);  // shift +1 px right
        }
    FlowField f = horn_schunck(prev, next, 0.005, 200, dt);
    for (int r = 3; r < H - 3; ++r) {
        for (int c = 3; c < W - 3; ++c) {
            size_t i = f.idx(r, c);
            CHECK(std::abs(f.vx[i] - 1.0 / dt) <= 0.2 / dt);
            CHECK(std::abs(f.vy[i]) <= 0.2 / dt);
        }
    }
}

TEST_CASE("horn_schunck smoothness drives the field toward constant") {
    auto clip = synth_translating_texture(21, 1.0, 0.0, 2, 24, 18, 1);
    FlowField weak = horn_schunck(clip[0], clip[1], 0.05, 120, 0.04);
    FlowField strong = horn_schunck(clip[0], clip[1], 50.0, 120, 0.04);

    auto variance = [](const std::vector<double>& v) {
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= v.size();
        double var = 0.0;
        for (double x : v) var += (x - mean) * (x - mean);
        return var / v.size();
    };
    CHECK(variance(strong.vx) < variance(weak.vx));
    CHECK(variance(strong.vy) <= variance(weak.vy) + 1e-12);
}

TEST_CASE("horn_schunck is invariant to a constant intensity offset") {
    auto clip = synth_translating_texture(33, 1.0, 0.0, 2, 20, 14, 1);
    ColorField prev = clip[0], next = clip[1];
    for (double& v : prev.data) v = 0.5 * v;  // keep room for the offset
    for (double& v : next.data) v = 0.5 * v;
    ColorField prev_off = prev, next_off = next;
    for (double& v : prev_off.data) v += 0.25;
    for (double& v : next_off.data) v += 0.25;

    FlowField a = horn_schunck(prev, next, 0.5, 80, 0.04);
    FlowField b = horn_schunck(prev_off, next_off, 0.5, 80, 0.04);
    for (size_t i = 0; i < a.vx.size(); ++i) {
        CHECK(a.vx[i] == doctest::Approx(b.vx[i]).epsilon(1e-9));
        CHECK(a.vy[i] == doctest::Approx(b.vy[i]).epsilon(1e-9));
    }
}

TEST_CASE("horn_schunck rejects mismatched dimensions") {
    ColorField a(4, 4, 1), b(5, 4, 1);
    CHECK_THROWS_AS(horn_schunck(a, b, 1.0, 10, 0.04), std::invalid_argument);
}

TEST_CASE("material_derivative basics") {
    auto clip = synth_translating_texture(2, 0.0, 0.0, 2, 10, 8, 2);
    FlowField flow(10, 8);
    for (double& v : flow.vx) v = 3.0;

    SUBCASE("static frames give zero cdot") {
        auto [cdot, adv] = material_derivative(clip[0], clip[1], flow, 0.04);
        for (double v : cdot.data) CHECK(v == 0.0);
    }
    SUBCASE("zero flow gives zero adv") {
        FlowField zero(10, 8);
        auto [cdot, adv] = material_derivative(clip[0], clip[1], zero, 0.04);
        for (double v : adv.data) CHECK(v == 0.0);
    }
    SUBCASE("linearity in the frames for fixed flow") {
        ColorField prev = clip[0], cur = clip[1];
        Rng rng(4);
        for (double& v : cur.data) v = rng.uniform();
        auto [cdot1, adv1] = material_derivative(prev, cur, flow, 0.04);
        ColorField prev2 = prev, cur2 = cur;
        for (double& v : prev2.data) v *= 2.0;
        for (double& v : cur2.data) v *= 2.0;
        auto [cdot2, adv2] = material_derivative(prev2, cur2, flow, 0.04);
        for (size_t i = 0; i < cdot1.data.size(); ++i) {
            CHECK(cdot2.data[i] == doctest::Approx(2.0 * cdot1.data[i]).epsilon(1e-12));
            CHECK(adv2.data[i] == doctest::Approx(2.0 * adv1.data[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("material derivative vanishes along the true flow") {
    // Long-wavelength texture: central differences must resolve the gradient
    // well for the transport identity to show up numerically.
    const int W = 96, H = 12;
    const double dt = 0.04;
    std::vector<ColorField> clip;
    for (int t = 0; t < 2; ++t) {
        ColorField f(W, H, 1);
        for (int r = 0; r < H; ++r)
            for (int c = 0; c < W; ++c)
                f.at(0, r, c) =
                    0.5 + 0.45 * std::sin(2.0 * M_PI * (c - t) / W) * std::cos(2.0 * M_PI * r / H);
        clip.push_back(std::move(f));
    }
    FlowField flow(W, H);
    for (double& v : flow.vx) v = 1.0 / dt;  // ground truth, pixels/second

    auto [cdot, adv] = material_derivative(clip[0], clip[1], flow, dt);
    std::vector<double> resid, cd;
    for (int r = 2; r < H - 2; ++r) {
        for (int c = 2; c < W - 2; ++c) {
            resid.push_back(cdot.at(0, r, c) + adv.at(0, r, c));
            cd.push_back(cdot.at(0, r, c));
        }
    }
    CHECK(rms(resid) <= 0.05 * rms(cd));
}

TEST_CASE("flow file round trip and validation") {
    std::string path = temp_path("mvq_flow.mvf");

    SUBCASE("all-zero file decodes to zero flow") {
        {
            std::ofstream out(path, std::ios::binary);
            out.write("MVF1", 4);
            uint32_t hdr[3] = {3, 2, 2};
            out.write(reinterpret_cast<const char*>(hdr), 12);
            std::vector<float> payload(3 * 2 * 2 * 2, 0.0f);
            out.write(reinterpret_cast<const char*>(payload.data()),
                      static_cast<std::streamsize>(payload.size() * 4));
        }
        auto flows = load_flow_file(path);
        REQUIRE(flows.size() == 2);
        for (const auto& f : flows)
            for (size_t i = 0; i < f.vx.size(); ++i) {
                CHECK(f.vx[i] == 0.0);
                CHECK(f.vy[i] == 0.0);
            }
    }

    SUBCASE("write/read round trip is bitwise identical") {
        std::vector<FlowField> flows;
        Rng rng(77);
        for (int f = 0; f < 3; ++f) {
            FlowField fl(4, 3);
            for (size_t i = 0; i < fl.vx.size(); ++i) {
                fl.vx[i] = static_cast<float>(rng.uniform(-5, 5));
                fl.vy[i] = static_cast<float>(rng.uniform(-5, 5));
            }
            flows.push_back(fl);
        }
        save_flow_file(path, flows);
        auto back = load_flow_file(path);
        REQUIRE(back.size() == flows.size());
        for (size_t f = 0; f < flows.size(); ++f)
            for (size_t i = 0; i < flows[f].vx.size(); ++i) {
                CHECK(back[f].vx[i] == flows[f].vx[i]);
                CHECK(back[f].vy[i] == flows[f].vy[i]);
            }
    }

    SUBCASE("NaN payload is rejected with frame and pixel index") {
        {
            std::ofstream out(path, std::ios::binary);
            out.write("MVF1", 4);
            uint32_t hdr[3] = {3, 2, 2};
            out.write(reinterpret_cast<const char*>(hdr), 12);
            std::vector<float> payload(3 * 2 * 2 * 2, 0.0f);
            payload[3 * 2 * 2 + 3 * 2 + 1] = std::nanf("");  // frame 1, pixel (1,0), vy
            out.write(reinterpret_cast<const char*>(payload.data()),
                      static_cast<std::streamsize>(payload.size() * 4));
        }
        CHECK_THROWS_WITH_AS(load_flow_file(path),
                             doctest::Contains("NaN flow value in frame 1 at pixel (1,0)"),
                             std::runtime_error);
    }
    std::remove(path.c_str());
}
