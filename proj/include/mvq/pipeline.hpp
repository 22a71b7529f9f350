#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mvq/config.hpp"
#include "mvq/dynamics.hpp"
#include "mvq/field.hpp"
#include "mvq/flow.hpp"
#include "mvq/io.hpp"
#include "mvq/potential.hpp"

namespace mvq {

// One metrics record per presented frame.
struct MetricsRow {
    double t = 0.0;
    long frame = 0;
    double mi_frame = 0.0;
    double U = 0.0;
    double ca_info = 0.0;      // 1/2 sum_i <Phi_i>^2 - lambda_C/2 sum_i <Phi_i^2>
    double ca_kinetic = 0.0;   // mu/2 |q2|^2 + nu/2 |q1|^2 + gamma q1.q2 + k/2 |q|^2
    double ca_motion = 0.0;    // lambda_M (1/2 q1 M q1 + q N q1 + 1/2 q O q)
    double q_norm = 0.0;
    double resets_per_1000 = 0.0;
    int reset_flag = 0;
    double tau = 0.0;
};

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows);

// A layer that no longer updates; its softmax features feed the next layer.
struct FrozenLayer {
    FilterShape shape;
    QVector q;
};

struct TrainResult {
    FilterShape shape;
    FilterState state;
    std::vector<MetricsRow> log;
    long resets = 0;
};

// Online training of one layer. `clip` is the raw video (looped); frames
// pass through blur, then through the frozen layers below, and the survivor
// drives the motion matrices and the potential gradient. `flow_clip`, when
// present, replaces the internal Horn-Schunck estimate. `frames_override`
// defaults to the layer's activation_frames.
TrainResult train_layer(const TrainConfig& cfg, size_t layer_index,
                        const std::vector<ColorField>& clip,
                        const std::vector<FlowField>* flow_clip,
                        const std::vector<FrozenLayer>& below,
                        long frames_override = -1);

// Sequential layer activation; layer l trains on the features of the frozen
// layers 0..l-1.
std::vector<TrainResult> run_multilayer(const TrainConfig& cfg,
                                        const std::vector<ColorField>& clip,
                                        const std::vector<FlowField>* flow_clip);

// Like run_multilayer but each layer tries every lambda_M in `lambdas` and
// keeps the model with the best frozen batch MI over one clip repetition.
// Sweep branches run concurrently, capped by MVQ_THREADS.
std::vector<TrainResult> run_multilayer_best_lambda(const TrainConfig& cfg,
                                                    const std::vector<ColorField>& clip,
                                                    const std::vector<FlowField>* flow_clip,
                                                    const std::vector<double>& lambdas);

// Input stream of layer `layer_index` for a full-detail frame: the raw frame
// mapped through the frozen layers below.
ColorField layer_input(const std::vector<FrozenLayer>& below, const ColorField& frame);

// Batch MI of filters q over one full-detail clip repetition (frozen filters,
// uniform attention), as used for the reported tables.
double batch_mi(const FilterShape& shape, const QVector& q,
                const std::vector<ColorField>& clip, const std::vector<FrozenLayer>& below);

// Per-pixel concatenation of every layer's softmax features over the clip.
FeatureStack export_features(const std::vector<FrozenLayer>& layers,
                             const std::vector<ColorField>& clip);

// Seeded initial state: q uniform in [-0.1, 0.1], derivatives zero.
FilterState initial_state(const FilterShape& shape, uint64_t seed);

int worker_count();  // MVQ_THREADS, default 1

}  // namespace mvq
