#include "mvq/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace mvq {

using nlohmann::json;

static void reject_unknown(const json& obj, const std::set<std::string>& known,
                           const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!known.count(it.key()))
            throw std::invalid_argument("config: unknown key \"" + it.key() + "\" in " + where);
    }
}

static DynamicsParams parse_dynamics(const json& j, const std::string& where) {
    reject_unknown(j, {"theta", "mu", "nu", "gamma1", "gamma2", "k", "lambda_C"}, where);
    DynamicsParams p;
    p.theta = j.at("theta").get<double>();
    p.mu = j.at("mu").get<double>();
    p.nu = j.at("nu").get<double>();
    p.gamma1 = j.at("gamma1").get<double>();
    p.gamma2 = j.at("gamma2").get<double>();
    p.k = j.at("k").get<double>();
    if (j.contains("lambda_C")) p.lambda_C = j.at("lambda_C").get<double>();
    return p;
}

TrainConfig parse_config(const std::string& json_text) {
    json j = json::parse(json_text);
    reject_unknown(j, {"version", "seed", "frames", "dt", "blur", "flow", "dynamics", "reset",
                       "partitions", "layers"},
                   "root");

    TrainConfig cfg;
    cfg.version = j.at("version").get<int>();
    if (cfg.version != 1)
        throw std::invalid_argument("config: unsupported version " + std::to_string(cfg.version));
    if (j.contains("seed")) cfg.seed = j.at("seed").get<uint64_t>();
    if (j.contains("frames")) cfg.frames = j.at("frames").get<long>();
    if (j.contains("dt")) cfg.dt = j.at("dt").get<double>();
    if (cfg.frames < 0) throw std::invalid_argument("config: frames must be >= 0");
    if (cfg.dt <= 0.0) throw std::invalid_argument("config: dt must be > 0");

    if (j.contains("blur")) {
        const json& b = j.at("blur");
        reject_unknown(b, {"eta", "delta"}, "blur");
        if (b.contains("eta")) cfg.blur.eta = b.at("eta").get<double>();
        if (b.contains("delta")) cfg.blur.delta = b.at("delta").get<double>();
    }

    if (j.contains("flow")) {
        const json& f = j.at("flow");
        reject_unknown(f, {"mode", "path", "smoothness", "iterations"}, "flow");
        if (f.contains("mode")) {
            std::string mode = f.at("mode").get<std::string>();
            if (mode == "internal") cfg.flow.mode = FlowConfig::Mode::Internal;
            else if (mode == "file") cfg.flow.mode = FlowConfig::Mode::File;
            else throw std::invalid_argument("config: flow.mode must be internal or file");
        }
        if (f.contains("path")) cfg.flow.path = f.at("path").get<std::string>();
        if (f.contains("smoothness")) cfg.flow.smoothness = f.at("smoothness").get<double>();
        if (f.contains("iterations")) cfg.flow.iterations = f.at("iterations").get<int>();
    }

    cfg.dynamics = parse_dynamics(j.at("dynamics"), "dynamics");

    if (j.contains("reset")) {
        const json& r = j.at("reset");
        reject_unknown(r, {"eps_factor", "eps", "null_frames", "barred"}, "reset");
        if (r.contains("eps_factor")) cfg.reset.eps_factor = r.at("eps_factor").get<double>();
        if (r.contains("eps")) {
            cfg.reset.eps = r.at("eps").get<std::vector<double>>();
            if (cfg.reset.eps.size() != 3)
                throw std::invalid_argument("config: reset.eps needs exactly 3 values");
        }
        if (r.contains("null_frames")) cfg.reset.null_frames = r.at("null_frames").get<int>();
        if (r.contains("barred")) cfg.reset.barred = parse_dynamics(r.at("barred"), "reset.barred");
    }
    if (cfg.reset.barred.mu == 0.0) {
        // Default B-interval constants: characteristic roots {0, -1, -2, -3}.
        cfg.reset.barred.theta = 3.0;
        cfg.reset.barred.mu = 1.0;
        cfg.reset.barred.nu = 1.0;
        cfg.reset.barred.gamma1 = 1.0;
        cfg.reset.barred.gamma2 = 1.0;
        cfg.reset.barred.k = 0.0;
    }

    if (j.contains("partitions")) cfg.partitions = j.at("partitions").get<int>();
    if (cfg.partitions < 1) throw std::invalid_argument("config: partitions must be >= 1");

    cfg.layers.clear();
    for (const json& l : j.at("layers")) {
        reject_unknown(l, {"n", "k", "lambda_M", "activation_frames"}, "layers[]");
        LayerConfig lc;
        lc.n = l.at("n").get<int>();
        lc.k = l.at("k").get<int>();
        if (l.contains("lambda_M")) lc.lambda_M = l.at("lambda_M").get<double>();
        if (l.contains("activation_frames"))
            lc.activation_frames = l.at("activation_frames").get<long>();
        if (lc.n < 1 || lc.k < 1)
            throw std::invalid_argument("config: layer n and k must be >= 1");
        if (lc.lambda_M < 0.0)
            throw std::invalid_argument("config: lambda_M must be >= 0");
        if (lc.activation_frames < 1)
            throw std::invalid_argument("config: activation_frames must be >= 1");
        cfg.layers.push_back(lc);
    }
    if (cfg.layers.empty()) throw std::invalid_argument("config: at least one layer required");
    return cfg;
}

TrainConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open config");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

DynamicsParams TrainConfig::layer_params(size_t layer_index) const {
    if (layer_index >= layers.size())
        throw std::out_of_range("layer_params: no such layer");
    DynamicsParams p = dynamics;
    p.lambda_M = layers[layer_index].lambda_M;
    p.dt = dt;
    p.T = static_cast<double>(layers[layer_index].activation_frames) * dt;
    if (reset.eps.size() == 3) {
        p.eps1 = reset.eps[0];
        p.eps2 = reset.eps[1];
        p.eps3 = reset.eps[2];
    } else {
        double e = reset.eps_factor * layers[layer_index].n;
        p.eps1 = p.eps2 = p.eps3 = e;
    }
    return p;
}

static nlohmann::json dump_dynamics(const DynamicsParams& p) {
    return {{"theta", p.theta}, {"mu", p.mu},         {"nu", p.nu},    {"gamma1", p.gamma1},
            {"gamma2", p.gamma2}, {"k", p.k},         {"lambda_C", p.lambda_C}};
}

std::string dump_config(const TrainConfig& cfg) {
    json j;
    j["version"] = cfg.version;
    j["seed"] = cfg.seed;
    j["frames"] = cfg.frames;
    j["dt"] = cfg.dt;
    j["blur"] = {{"eta", cfg.blur.eta}, {"delta", cfg.blur.delta}};
    j["flow"] = {{"mode", cfg.flow.mode == FlowConfig::Mode::Internal ? "internal" : "file"},
                 {"path", cfg.flow.path},
                 {"smoothness", cfg.flow.smoothness},
                 {"iterations", cfg.flow.iterations}};
    j["dynamics"] = dump_dynamics(cfg.dynamics);
    j["reset"] = {{"eps_factor", cfg.reset.eps_factor},
                  {"null_frames", cfg.reset.null_frames},
                  {"barred", dump_dynamics(cfg.reset.barred)}};
    if (cfg.reset.eps.size() == 3) j["reset"]["eps"] = cfg.reset.eps;
    j["partitions"] = cfg.partitions;
    j["layers"] = json::array();
    for (const LayerConfig& l : cfg.layers)
        j["layers"].push_back({{"n", l.n},
                               {"k", l.k},
                               {"lambda_M", l.lambda_M},
                               {"activation_frames", l.activation_frames}});
    return j.dump(2);
}

}  // namespace mvq
