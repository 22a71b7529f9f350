#include "mvq/pipeline.hpp"

#include <cmath>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <future>
#include <stdexcept>

#include "mvq/rng.hpp"
#include "mvq/signal.hpp"

namespace mvq {

int worker_count() {
    const char* env = std::getenv("MVQ_THREADS");
    if (!env) return 1;
    int n = std::atoi(env);
    return n < 1 ? 1 : n;
}

FilterState initial_state(const FilterShape& shape, uint64_t seed) {
    Rng rng(seed);
    FilterState state = FilterState::zero(shape.q_dim());
    for (Eigen::Index i = 0; i < state.q.size(); ++i) state.q[i] = rng.uniform(-0.1, 0.1);
    return state;
}

ColorField layer_input(const std::vector<FrozenLayer>& below, const ColorField& frame) {
    if (below.empty()) return frame;
    ColorField field = frame;
    for (const FrozenLayer& layer : below) {
        FeatureField ff = activations(layer.shape, layer.q, field);
        ColorField next(field.width, field.height, layer.shape.n);
        next.data = std::move(ff.Phi);
        field = std::move(next);
    }
    return field;
}

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << "t,frame,mi_frame,U,ca_info,ca_kinetic,ca_motion,q_norm,resets_per_1000,"
           "reset_flag,tau\n";
    out.precision(17);
    for (const MetricsRow& r : rows) {
        out << r.t << ',' << r.frame << ',' << r.mi_frame << ',' << r.U << ',' << r.ca_info
            << ',' << r.ca_kinetic << ',' << r.ca_motion << ',' << r.q_norm << ','
            << r.resets_per_1000 << ',' << r.reset_flag << ',' << r.tau << '\n';
    }
}

static double motion_penalty(const DynamicsParams& p, const MotionMatrices& mats,
                             const FilterState& s) {
    if (p.lambda_M == 0.0) return 0.0;
    double v = 0.5 * s.q1.dot(lift_apply(mats.M, s.q1)) + s.q.dot(lift_apply(mats.N, s.q1)) +
               0.5 * s.q.dot(lift_apply(mats.O, s.q));
    return p.lambda_M * v;
}

TrainResult train_layer(const TrainConfig& cfg, size_t layer_index,
                        const std::vector<ColorField>& clip,
                        const std::vector<FlowField>* flow_clip,
                        const std::vector<FrozenLayer>& below,
                        long frames_override) {
    if (clip.empty()) throw std::invalid_argument("train_layer: empty clip");
    const LayerConfig& layer = cfg.layers.at(layer_index);
    DynamicsParams params = cfg.layer_params(layer_index);

    const int W = clip[0].width, H = clip[0].height;
    const int in_channels = below.empty() ? clip[0].channels : below.back().shape.n;
    FilterShape shape{layer.n, in_channels, layer.k};

    TrainResult result;
    result.shape = shape;
    result.state = initial_state(shape, cfg.seed + layer_index);

    long total = frames_override >= 0 ? frames_override : layer.activation_frames;
    params.T = std::max(params.T, static_cast<double>(total) * cfg.dt);

    AttentionMap g = uniform_attention(W, H);
    BlurSchedule schedule{0.0, cfg.blur.eta, cfg.blur.delta};
    const ColorField zero_raw(W, H, clip[0].channels);

    ColorField prev_presented = zero_raw;   // blurred raw stream, drives the flow
    ColorField prev_input(1, 1, 1);         // this layer's input stream
    MotionMatrices prev_mats = MotionMatrices::zero(shape.block_dim());
    bool have_prev = false;

    int null_countdown = 0;
    std::deque<long> recent_resets;

    for (long f = 0; f < total; ++f) {
        const ColorField& raw = clip[static_cast<size_t>(f) % clip.size()];
        ColorField presented =
            (null_countdown > 0) ? zero_raw : blur_frame(raw, schedule);
        ColorField C = layer_input(below, presented);

        FlowField flow(W, H);
        if (have_prev) {
            if (flow_clip) {
                flow = (*flow_clip)[static_cast<size_t>(f) % flow_clip->size()];
            } else {
                flow = horn_schunck(prev_presented, presented, cfg.flow.smoothness,
                                    cfg.flow.iterations, cfg.dt);
            }
        }

        Field cdot(W, H, in_channels), adv(W, H, in_channels);
        if (have_prev) {
            auto md = material_derivative(prev_input, C, flow, cfg.dt);
            cdot = std::move(md.first);
            adv = std::move(md.second);
        }

        MotionMatrices mats =
            assemble_motion_matrices(C, cdot, adv, g, layer.k, cfg.partitions);
        if (have_prev) rate_matrices(prev_mats, mats, cfg.dt);

        FeatureField features = activations(shape, result.state.q, C);
        PotentialParts parts = potential_parts(features, g);
        double U = parts.average_sq - params.lambda_C * parts.conditional_sq;

        QVector q4;
        if (null_countdown > 0) {
            q4 = free_dynamics_rhs(result.state, cfg.reset.barred);
        } else {
            QVector gradU = grad_U(shape, result.state.q, C, g, params.lambda_C);
            q4 = el_fourth_derivative(result.state, params, mats, gradU);
        }
        FilterState next = euler_step(result.state, q4, cfg.dt);
        if (!next.q.allFinite() || !next.q1.allFinite() || !next.q2.allFinite() ||
            !next.q3.allFinite()) {
            throw std::runtime_error("train_layer: non-finite state at frame " +
                                     std::to_string(f) + " (t=" + std::to_string(next.t) + ")");
        }

        int reset_flag = 0;
        if (reset_check(next, params)) {
            auto [rs, rsched] = reset_apply(next, schedule);
            next = std::move(rs);
            schedule = rsched;
            null_countdown = cfg.reset.null_frames;
            reset_flag = 1;
            result.resets += 1;
            recent_resets.push_back(f);
        }

        while (!recent_resets.empty() && recent_resets.front() <= f - 1000)
            recent_resets.pop_front();

        MetricsRow row;
        row.t = result.state.t;
        row.frame = f;
        row.mi_frame = mi_index_single(features, g);
        row.U = U;
        row.ca_info = U;
        row.ca_kinetic = 0.5 * params.mu * result.state.q2.squaredNorm() +
                         0.5 * params.nu * result.state.q1.squaredNorm() +
                         params.gamma() * result.state.q1.dot(result.state.q2) +
                         0.5 * params.k * result.state.q.squaredNorm();
        row.ca_motion = motion_penalty(params, mats, result.state);
        row.q_norm = result.state.q.norm();
        row.resets_per_1000 = static_cast<double>(recent_resets.size()) / 1000.0;
        row.reset_flag = reset_flag;
        row.tau = schedule.tau;
        result.log.push_back(row);

        result.state = std::move(next);
        prev_presented = std::move(presented);
        prev_input = std::move(C);
        prev_mats = std::move(mats);
        have_prev = true;

        if (null_countdown > 0) {
            --null_countdown;
        } else {
            schedule = advance_tau(schedule);
        }
    }
    return result;
}

std::vector<TrainResult> run_multilayer(const TrainConfig& cfg,
                                        const std::vector<ColorField>& clip,
                                        const std::vector<FlowField>* flow_clip) {
    std::vector<TrainResult> results;
    std::vector<FrozenLayer> below;
    for (size_t l = 0; l < cfg.layers.size(); ++l) {
        TrainResult r = train_layer(cfg, l, clip, flow_clip, below);
        below.push_back(FrozenLayer{r.shape, r.state.q});
        results.push_back(std::move(r));
    }
    return results;
}

double batch_mi(const FilterShape& shape, const QVector& q,
                const std::vector<ColorField>& clip, const std::vector<FrozenLayer>& below) {
    if (clip.empty()) throw std::invalid_argument("batch_mi: empty clip");
    AttentionMap g = uniform_attention(clip[0].width, clip[0].height);
    std::vector<FeatureField> fields;
    fields.reserve(clip.size());
    for (const ColorField& frame : clip)
        fields.push_back(activations(shape, q, layer_input(below, frame)));
    std::vector<const FeatureField*> ptrs;
    ptrs.reserve(fields.size());
    for (const FeatureField& f : fields) ptrs.push_back(&f);
    return mi_index(ptrs, g);
}

std::vector<TrainResult> run_multilayer_best_lambda(const TrainConfig& cfg,
                                                    const std::vector<ColorField>& clip,
                                                    const std::vector<FlowField>* flow_clip,
                                                    const std::vector<double>& lambdas) {
    if (lambdas.empty()) throw std::invalid_argument("run_multilayer_best_lambda: no lambdas");
    std::vector<TrainResult> results;
    std::vector<FrozenLayer> below;
    const int workers = worker_count();

    for (size_t l = 0; l < cfg.layers.size(); ++l) {
        std::vector<TrainResult> candidates(lambdas.size());
        std::vector<double> mi(lambdas.size(), 0.0);

        size_t next_job = 0;
        auto run_one = [&](size_t i) {
            TrainConfig branch = cfg;
            branch.layers[l].lambda_M = lambdas[i];
            candidates[i] = train_layer(branch, l, clip, flow_clip, below);
            mi[i] = batch_mi(candidates[i].shape, candidates[i].state.q, clip, below);
        };
        while (next_job < lambdas.size()) {
            size_t batch = std::min<size_t>(workers, lambdas.size() - next_job);
            std::vector<std::future<void>> futs;
            for (size_t b = 0; b < batch; ++b)
                futs.push_back(std::async(std::launch::async, run_one, next_job + b));
            for (auto& f : futs) f.get();
            next_job += batch;
        }

        size_t best = 0;
        for (size_t i = 1; i < lambdas.size(); ++i)
            if (mi[i] > mi[best]) best = i;
        below.push_back(FrozenLayer{candidates[best].shape, candidates[best].state.q});
        results.push_back(std::move(candidates[best]));
    }
    return results;
}

FeatureStack export_features(const std::vector<FrozenLayer>& layers,
                             const std::vector<ColorField>& clip) {
    if (layers.empty()) throw std::invalid_argument("export_features: no layers");
    if (clip.empty()) throw std::invalid_argument("export_features: no frames");
    const int W = clip[0].width, H = clip[0].height;

    FeatureStack fs;
    fs.width = W;
    fs.height = H;
    fs.frames = static_cast<int>(clip.size());
    fs.feature_count = 0;
    for (const FrozenLayer& l : layers) fs.feature_count += l.shape.n;
    fs.payload.assign(static_cast<size_t>(W) * H * fs.feature_count * fs.frames, 0.0f);

    for (int f = 0; f < fs.frames; ++f) {
        ColorField field = clip[static_cast<size_t>(f)];
        int base = 0;
        for (const FrozenLayer& layer : layers) {
            FeatureField ff = activations(layer.shape, layer.q, field);
            for (int i = 0; i < layer.shape.n; ++i)
                for (int r = 0; r < H; ++r)
                    for (int c = 0; c < W; ++c)
                        fs.payload[fs.idx(f, r, c, base + i)] =
                            static_cast<float>(ff.Phi[ff.idx(i, r, c)]);
            ColorField next(W, H, layer.shape.n);
            next.data = std::move(ff.Phi);
            field = std::move(next);
            base += layer.shape.n;
        }
    }
    return fs;
}

}  // namespace mvq
