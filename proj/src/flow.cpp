#include "mvq/flow.hpp"

#include <cmath>
#include <stdexcept>

#include "mvq/io.hpp"

namespace mvq {

// Channel mean, used to drive the flow estimate on multi-channel input.
static std::vector<double> luminance(const ColorField& f) {
    std::vector<double> out(static_cast<size_t>(f.width) * f.height, 0.0);
    for (int j = 0; j < f.channels; ++j)
        for (int r = 0; r < f.height; ++r)
            for (int c = 0; c < f.width; ++c)
                out[static_cast<size_t>(r) * f.width + c] += f.at(j, r, c) / f.channels;
    return out;
}

// Central difference inside, one-sided at the borders.
static inline double dx_at(const std::vector<double>& img, int W, int H, int r, int c) {
    (void)H;
    size_t i = static_cast<size_t>(r) * W + c;
    if (W == 1) return 0.0;
    if (c == 0) return img[i + 1] - img[i];
    if (c == W - 1) return img[i] - img[i - 1];
    return 0.5 * (img[i + 1] - img[i - 1]);
}

static inline double dy_at(const std::vector<double>& img, int W, int H, int r, int c) {
    size_t i = static_cast<size_t>(r) * W + c;
    if (H == 1) return 0.0;
    if (r == 0) return img[i + W] - img[i];
    if (r == H - 1) return img[i] - img[i - W];
    return 0.5 * (img[i + W] - img[i - W]);
}

FlowField horn_schunck(const ColorField& prev, const ColorField& next,
                       double smoothness, int iterations, double dt) {
    require_same_shape(prev, next, "horn_schunck");
    if (smoothness <= 0.0) throw std::invalid_argument("horn_schunck: smoothness must be > 0");
    if (iterations < 1) throw std::invalid_argument("horn_schunck: iterations must be >= 1");
    if (dt <= 0.0) throw std::invalid_argument("horn_schunck: dt must be > 0");

    const int W = prev.width, H = prev.height;
    std::vector<double> a = luminance(prev), b = luminance(next);
    std::vector<double> avg(a.size());
    for (size_t i = 0; i < a.size(); ++i) avg[i] = 0.5 * (a[i] + b[i]);

    std::vector<double> Ex(a.size()), Ey(a.size()), Et(a.size());
    for (int r = 0; r < H; ++r) {
        for (int c = 0; c < W; ++c) {
            size_t i = static_cast<size_t>(r) * W + c;
            Ex[i] = dx_at(avg, W, H, r, c);
            Ey[i] = dy_at(avg, W, H, r, c);
            Et[i] = b[i] - a[i];
        }
    }

    const double alpha2 = smoothness * smoothness;
    std::vector<double> u(a.size(), 0.0), v(a.size(), 0.0);
    std::vector<double> un(a.size()), vn(a.size());

    auto neighbor_mean = [&](const std::vector<double>& f, int r, int c) {
        // Horn-Schunck weighting: side neighbors 1/6, diagonals 1/12,
        // replicated at the borders.
        auto at = [&](int rr, int cc) {
            rr = std::min(H - 1, std::max(0, rr));
            cc = std::min(W - 1, std::max(0, cc));
            return f[static_cast<size_t>(rr) * W + cc];
        };
        return (at(r - 1, c) + at(r + 1, c) + at(r, c - 1) + at(r, c + 1)) / 6.0 +
               (at(r - 1, c - 1) + at(r - 1, c + 1) + at(r + 1, c - 1) + at(r + 1, c + 1)) / 12.0;
    };

    for (int it = 0; it < iterations; ++it) {
        for (int r = 0; r < H; ++r) {
            for (int c = 0; c < W; ++c) {
                size_t i = static_cast<size_t>(r) * W + c;
                double ubar = neighbor_mean(u, r, c);
                double vbar = neighbor_mean(v, r, c);
                double num = Ex[i] * ubar + Ey[i] * vbar + Et[i];
                double den = alpha2 + Ex[i] * Ex[i] + Ey[i] * Ey[i];
                un[i] = ubar - Ex[i] * num / den;
                vn[i] = vbar - Ey[i] * num / den;
            }
        }
        u.swap(un);
        v.swap(vn);
    }

    FlowField flow(W, H);
    for (size_t i = 0; i < u.size(); ++i) {
        flow.vx[i] = u[i] / dt;
        flow.vy[i] = v[i] / dt;
    }
    return flow;
}

std::pair<Field, Field> material_derivative(const ColorField& prev, const ColorField& cur,
                                            const FlowField& flow, double dt) {
    require_same_shape(prev, cur, "material_derivative");
    if (flow.width != cur.width || flow.height != cur.height)
        throw std::invalid_argument("material_derivative: flow dimensions mismatch");
    if (dt <= 0.0) throw std::invalid_argument("material_derivative: dt must be > 0");

    const int W = cur.width, H = cur.height, m = cur.channels;
    Field cdot(W, H, m), adv(W, H, m);
    for (int j = 0; j < m; ++j) {
        for (int r = 0; r < H; ++r) {
            for (int c = 0; c < W; ++c) {
                size_t i = flow.idx(r, c);
                cdot.at(j, r, c) = (cur.at(j, r, c) - prev.at(j, r, c)) / dt;
                double gx, gy;
                if (W == 1) gx = 0.0;
                else if (c == 0) gx = cur.at(j, r, 1) - cur.at(j, r, 0);
                else if (c == W - 1) gx = cur.at(j, r, c) - cur.at(j, r, c - 1);
                else gx = 0.5 * (cur.at(j, r, c + 1) - cur.at(j, r, c - 1));
                if (H == 1) gy = 0.0;
                else if (r == 0) gy = cur.at(j, 1, c) - cur.at(j, 0, c);
                else if (r == H - 1) gy = cur.at(j, r, c) - cur.at(j, r - 1, c);
                else gy = 0.5 * (cur.at(j, r + 1, c) - cur.at(j, r - 1, c));
                adv.at(j, r, c) = flow.vx[i] * gx + flow.vy[i] * gy;
            }
        }
    }
    return {std::move(cdot), std::move(adv)};
}

std::vector<FlowField> load_flow_file(const std::string& path) {
    auto in = io::open_input(path);
    size_t offset = 0;
    io::read_magic(in, "MVF1", path, offset);
    uint32_t W = io::read_u32(in, path, offset);
    uint32_t H = io::read_u32(in, path, offset);
    uint32_t F = io::read_u32(in, path, offset);
    if (W == 0 || H == 0)
        throw std::runtime_error(path + ": zero dimension in header (byte offset 4)");
    std::vector<FlowField> flows;
    flows.reserve(F);
    for (uint32_t f = 0; f < F; ++f) {
        FlowField fl(static_cast<int>(W), static_cast<int>(H));
        for (uint32_t r = 0; r < H; ++r) {
            for (uint32_t c = 0; c < W; ++c) {
                float x = io::read_f32(in, path, offset);
                float y = io::read_f32(in, path, offset);
                if (std::isnan(x) || std::isnan(y)) {
                    throw std::runtime_error(path + ": NaN flow value in frame " +
                                             std::to_string(f) + " at pixel (" +
                                             std::to_string(r) + "," + std::to_string(c) + ")");
                }
                size_t i = fl.idx(static_cast<int>(r), static_cast<int>(c));
                fl.vx[i] = x;
                fl.vy[i] = y;
            }
        }
        flows.push_back(std::move(fl));
    }
    return flows;
}

void save_flow_file(const std::string& path, const std::vector<FlowField>& flows) {
    if (flows.empty()) throw std::invalid_argument("save_flow_file: no flow fields");
    auto out = io::open_output(path);
    out.write("MVF1", 4);
    io::write_u32(out, static_cast<uint32_t>(flows[0].width));
    io::write_u32(out, static_cast<uint32_t>(flows[0].height));
    io::write_u32(out, static_cast<uint32_t>(flows.size()));
    for (const FlowField& f : flows) {
        if (f.width != flows[0].width || f.height != flows[0].height)
            throw std::invalid_argument("save_flow_file: inconsistent dimensions");
        for (size_t i = 0; i < f.vx.size(); ++i) {
            io::write_f32(out, static_cast<float>(f.vx[i]));
            io::write_f32(out, static_cast<float>(f.vy[i]));
        }
    }
    if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace mvq
