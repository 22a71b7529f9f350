#pragma once

#include <string>
#include <vector>

#include "mvq/dynamics.hpp"

namespace mvq {

struct BlurConfig {
    double eta = 0.0005;
    double delta = 9.0;
};

struct FlowConfig {
    enum class Mode { Internal, File };
    Mode mode = Mode::Internal;
    std::string path;      // for Mode::File
    double smoothness = 1.0;
    int iterations = 100;
};

struct ResetConfig {
    double eps_factor = 300.0;   // eps_j = eps_factor * n unless eps set
    std::vector<double> eps;     // explicit (eps1, eps2, eps3), optional
    int null_frames = 12;        // forced-null B interval after a trigger
    DynamicsParams barred;       // free-dynamics constants on B intervals
};

struct LayerConfig {
    int n = 5;
    int k = 5;
    double lambda_M = 0.0;
    long activation_frames = 45000;
};

// Versioned training configuration; unknown JSON keys are rejected.
struct TrainConfig {
    int version = 1;
    uint64_t seed = 1;
    long frames = 45000;
    double dt = 1.0 / 25.0;
    BlurConfig blur;
    FlowConfig flow;
    DynamicsParams dynamics;     // theta, mu, nu, gamma1, gamma2, k, lambda_C
    ResetConfig reset;
    int partitions = 1;
    std::vector<LayerConfig> layers;

    // Dynamics params specialized to one layer: lambda_M, horizon T =
    // frames*dt and reset thresholds eps_j = eps_factor * n filled in.
    DynamicsParams layer_params(size_t layer_index) const;
};

TrainConfig parse_config(const std::string& json_text);
TrainConfig load_config(const std::string& path);
std::string dump_config(const TrainConfig& cfg);

}  // namespace mvq
