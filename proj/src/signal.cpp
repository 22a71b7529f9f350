#include "mvq/signal.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "mvq/io.hpp"
#include "mvq/rng.hpp"

namespace mvq {

void require_same_shape(const Field& a, const Field& b, const std::string& where) {
    if (!a.same_shape(b))
        throw std::invalid_argument(where + ": field shape mismatch (" +
                                    std::to_string(a.width) + "x" + std::to_string(a.height) +
                                    "x" + std::to_string(a.channels) + " vs " +
                                    std::to_string(b.width) + "x" + std::to_string(b.height) +
                                    "x" + std::to_string(b.channels) + ")");
}

void validate_color_field(const ColorField& f, const std::string& where) {
    if (f.width < 1 || f.height < 1 || f.channels < 1)
        throw std::invalid_argument(where + ": empty color field");
    for (double v : f.data) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0)
            throw std::invalid_argument(where + ": intensity outside [0,1]");
    }
}

BlurSchedule advance_tau(const BlurSchedule& s) {
    BlurSchedule out = s;
    out.tau = 1.0 - (1.0 - s.tau) * (1.0 - s.eta);
    return out;
}

static std::vector<double> gauss_kernel(double sigma) {
    int radius = (sigma > 0.0) ? static_cast<int>(std::ceil(3.0 * sigma)) : 0;
    std::vector<double> w(static_cast<size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        double v = (radius == 0) ? 1.0 : std::exp(-0.5 * (i * i) / (sigma * sigma));
        w[static_cast<size_t>(i + radius)] = v;
        sum += v;
    }
    for (double& v : w) v /= sum;
    return w;
}

ColorField blur_frame(const ColorField& raw, const BlurSchedule& s) {
    if (s.tau < 0.0 || s.tau > 1.0)
        throw std::invalid_argument("blur_frame: tau outside [0,1]");
    if (s.tau == 1.0) return raw;
    ColorField out(raw.width, raw.height, raw.channels);
    if (s.tau == 0.0) return out;

    double sigma = (1.0 - s.tau) * s.delta;
    std::vector<double> w = gauss_kernel(sigma);
    int radius = (static_cast<int>(w.size()) - 1) / 2;

    ColorField tmp(raw.width, raw.height, raw.channels);
    for (int j = 0; j < raw.channels; ++j) {
        for (int r = 0; r < raw.height; ++r) {
            for (int c = 0; c < raw.width; ++c) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i)
                    acc += w[static_cast<size_t>(i + radius)] * raw.at_clamped(j, r, c + i);
                tmp.at(j, r, c) = acc;
            }
        }
        for (int r = 0; r < raw.height; ++r) {
            for (int c = 0; c < raw.width; ++c) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i)
                    acc += w[static_cast<size_t>(i + radius)] * tmp.at_clamped(j, r + i, c);
                out.at(j, r, c) = s.tau * acc;
            }
        }
    }
    return out;
}

AttentionMap uniform_attention(int width, int height) {
    if (width < 1 || height < 1)
        throw std::invalid_argument("uniform_attention: W*H must be >= 1");
    AttentionMap g;
    g.width = width;
    g.height = height;
    g.weights.assign(static_cast<size_t>(width) * height,
                     1.0 / (static_cast<double>(width) * height));
    return g;
}

std::vector<ColorField> synth_translating_texture(uint64_t seed, double vx, double vy,
                                                  int frames, int width, int height,
                                                  int channels) {
    if (frames < 1) throw std::invalid_argument("synth_translating_texture: frames must be >= 1");
    Rng rng(seed);

    // Band-limited texture: a few random sinusoids per channel, normalized
    // into [0,1]. Integer wavenumbers keep the cyclic shift exact.
    ColorField base(width, height, channels);
    const int waves = 6;
    for (int j = 0; j < channels; ++j) {
        std::vector<double> kx(waves), ky(waves), ph(waves), amp(waves);
        for (int w = 0; w < waves; ++w) {
            kx[w] = static_cast<double>(1 + static_cast<int>(rng.uniform() * 3.0));
            ky[w] = static_cast<double>(1 + static_cast<int>(rng.uniform() * 3.0));
            if (rng.uniform() < 0.5) kx[w] = -kx[w];
            ph[w] = rng.uniform() * 2.0 * M_PI;
            amp[w] = 0.5 + 0.5 * rng.uniform();
        }
        double lo = 1e300, hi = -1e300;
        for (int r = 0; r < height; ++r) {
            for (int c = 0; c < width; ++c) {
                double v = 0.0;
                for (int w = 0; w < waves; ++w)
                    v += amp[w] * std::sin(2.0 * M_PI * (kx[w] * c / width + ky[w] * r / height) +
                                           ph[w]);
                base.at(j, r, c) = v;
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
        double span = (hi > lo) ? (hi - lo) : 1.0;
        for (int r = 0; r < height; ++r)
            for (int c = 0; c < width; ++c)
                base.at(j, r, c) = (base.at(j, r, c) - lo) / span;
    }

    std::vector<ColorField> out;
    out.reserve(static_cast<size_t>(frames));
    for (int t = 0; t < frames; ++t) {
        int sc = static_cast<int>(std::lround(t * vx));
        int sr = static_cast<int>(std::lround(t * vy));
        ColorField f(width, height, channels);
        for (int j = 0; j < channels; ++j) {
            for (int r = 0; r < height; ++r) {
                for (int c = 0; c < width; ++c) {
                    int r0 = ((r - sr) % height + height) % height;
                    int c0 = ((c - sc) % width + width) % width;
                    f.at(j, r, c) = base.at(j, r0, c0);
                }
            }
        }
        out.push_back(std::move(f));
    }
    return out;
}

std::vector<ColorField> load_raw_video(const std::string& path) {
    auto in = io::open_input(path);
    size_t offset = 0;
    io::read_magic(in, "MVQ1", path, offset);
    uint32_t W = io::read_u32(in, path, offset);
    uint32_t H = io::read_u32(in, path, offset);
    uint32_t m = io::read_u32(in, path, offset);
    uint32_t F = io::read_u32(in, path, offset);
    if (W == 0 || H == 0 || m == 0)
        throw std::runtime_error(path + ": zero dimension in header (byte offset 4)");
    if (F == 0) throw std::runtime_error(path + ": zero frame count (byte offset 16)");

    size_t frame_bytes = static_cast<size_t>(W) * H * m;
    std::vector<ColorField> frames;
    frames.reserve(F);
    std::vector<char> buf(frame_bytes);
    for (uint32_t f = 0; f < F; ++f) {
        in.read(buf.data(), static_cast<std::streamsize>(frame_bytes));
        size_t got = static_cast<size_t>(in.gcount());
        if (got != frame_bytes) {
            throw std::runtime_error(
                path + ": truncated payload in frame " + std::to_string(f) + " at byte offset " +
                std::to_string(offset + got) + " (expected " + std::to_string(frame_bytes) +
                " frame bytes, got " + std::to_string(got) + ")");
        }
        offset += frame_bytes;
        ColorField cf(static_cast<int>(W), static_cast<int>(H), static_cast<int>(m));
        for (size_t i = 0; i < frame_bytes; ++i)
            cf.data[i] = static_cast<double>(static_cast<unsigned char>(buf[i])) / 255.0;
        frames.push_back(std::move(cf));
    }
    return frames;
}

void save_raw_video(const std::string& path, const std::vector<ColorField>& frames) {
    if (frames.empty()) throw std::invalid_argument("save_raw_video: no frames");
    auto out = io::open_output(path);
    const ColorField& f0 = frames[0];
    out.write("MVQ1", 4);
    io::write_u32(out, static_cast<uint32_t>(f0.width));
    io::write_u32(out, static_cast<uint32_t>(f0.height));
    io::write_u32(out, static_cast<uint32_t>(f0.channels));
    io::write_u32(out, static_cast<uint32_t>(frames.size()));
    for (const ColorField& f : frames) {
        require_same_shape(f0, f, "save_raw_video");
        for (double v : f.data) {
            int b = static_cast<int>(std::lround(v * 255.0));
            b = std::min(255, std::max(0, b));
            char byte = static_cast<char>(static_cast<unsigned char>(b));
            out.write(&byte, 1);
        }
    }
    if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace mvq
