#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mvq/config.hpp"
#include "mvq/mollifier.hpp"
#include "mvq/pipeline.hpp"
#include "mvq/signal.hpp"
#include "mvq/stability.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

static std::vector<mvq::FlowField> resolve_flow(const std::string& flow_arg,
                                                mvq::TrainConfig& cfg, bool& use_file) {
    use_file = false;
    if (flow_arg.empty() || flow_arg == "internal") {
        cfg.flow.mode = mvq::FlowConfig::Mode::Internal;
        return {};
    }
    if (flow_arg.rfind("file:", 0) == 0) {
        cfg.flow.mode = mvq::FlowConfig::Mode::File;
        cfg.flow.path = flow_arg.substr(5);
        use_file = true;
        return mvq::load_flow_file(cfg.flow.path);
    }
    throw CLI::ValidationError("--flow must be 'internal' or 'file:<path>'");
}

static int cmd_synth(uint64_t seed, double vx, double vy, int frames, int width, int height,
                     const std::string& out) {
    auto clip = mvq::synth_translating_texture(seed, vx, vy, frames, width, height, 1);
    mvq::save_raw_video(out, clip);
    std::cout << "wrote " << frames << " frames (" << width << "x" << height << ") to " << out
              << "\n";
    return 0;
}

static int cmd_train(const std::string& config_path, const std::string& video_path,
                     const std::string& out_dir, const std::string& flow_arg) {
    mvq::TrainConfig cfg = mvq::load_config(config_path);
    auto clip = mvq::load_raw_video(video_path);
    bool use_file = false;
    auto flows = resolve_flow(flow_arg, cfg, use_file);
    if (!use_file && cfg.flow.mode == mvq::FlowConfig::Mode::File) {
        flows = mvq::load_flow_file(cfg.flow.path);
        use_file = true;
    }

    fs::create_directories(out_dir);
    std::vector<mvq::FrozenLayer> below;
    mvq::TrainResult result =
        mvq::train_layer(cfg, 0, clip, use_file ? &flows : nullptr, below, cfg.frames);

    mvq::write_metrics_csv(out_dir + "/metrics.csv", result.log);
    mvq::save_checkpoint(out_dir + "/layer0.mvqs", result.shape, result.state);
    double mi = mvq::batch_mi(result.shape, result.state.q, clip, below);
    std::cout << "trained layer 0 for " << cfg.frames << " frames, resets=" << result.resets
              << ", batch MI=" << mi << "\n"
              << "wrote " << out_dir << "/metrics.csv and " << out_dir << "/layer0.mvqs\n";
    return 0;
}

static int cmd_run_multilayer(const std::string& config_path, const std::string& video_path,
                              const std::string& out_dir, const std::string& flow_arg,
                              const std::string& sweep) {
    mvq::TrainConfig cfg = mvq::load_config(config_path);
    auto clip = mvq::load_raw_video(video_path);
    bool use_file = false;
    auto flows = resolve_flow(flow_arg, cfg, use_file);

    fs::create_directories(out_dir);
    std::vector<mvq::TrainResult> results;
    if (!sweep.empty()) {
        std::vector<double> lambdas;
        std::stringstream ss(sweep);
        std::string tok;
        while (std::getline(ss, tok, ',')) lambdas.push_back(std::stod(tok));
        results = mvq::run_multilayer_best_lambda(cfg, clip, use_file ? &flows : nullptr, lambdas);
    } else {
        results = mvq::run_multilayer(cfg, clip, use_file ? &flows : nullptr);
    }

    std::vector<mvq::FrozenLayer> below;
    for (size_t l = 0; l < results.size(); ++l) {
        std::string stem = out_dir + "/layer" + std::to_string(l);
        mvq::write_metrics_csv(stem + "_metrics.csv", results[l].log);
        mvq::save_checkpoint(stem + ".mvqs", results[l].shape, results[l].state);
        double mi = mvq::batch_mi(results[l].shape, results[l].state.q, clip, below);
        below.push_back(mvq::FrozenLayer{results[l].shape, results[l].state.q});
        std::cout << "layer " << l << ": lambda_M=" << cfg.layers[l].lambda_M
                  << " resets=" << results[l].resets << " batch MI=" << mi << "\n";
    }
    return 0;
}

static int cmd_analyze_stability(double theta, double mu, double nu, double gamma1, double gamma2,
                                 double k, bool as_json) {
    bool coercive = mvq::coercivity_check(mu, nu, gamma1, gamma2, k);
    mvq::QuarticCoeffs qc = mvq::characteristic_coeffs(theta, mu, nu, gamma1 * gamma2, k);
    mvq::PropCoefResult pc = mvq::prop_coef_check(theta, mu, nu, gamma1, gamma2, k);

    if (as_json) {
        json j;
        j["coercive"] = coercive;
        j["certified"] = pc.certified;
        j["stable"] = pc.report.stable;
        j["real"] = pc.report.real;
        j["quartic"] = {{"b", qc.b}, {"c", qc.c}, {"d", qc.d}, {"e", qc.e}};
        j["reduced"] = {{"p", qc.p_red}, {"r", qc.r_red}, {"s", qc.s_red}};
        j["roots"] = json::array();
        for (const auto& r : pc.report.roots)
            j["roots"].push_back({{"re", r.real()}, {"im", r.imag()}});
        std::cout << j.dump(2) << "\n";
        return 0;
    }
    std::cout << "coercivity (mu>gamma2^2, nu>gamma1^2, k>0): " << (coercive ? "yes" : "no")
              << "\n";
    std::cout << "proposition certified (stable + aperiodic): " << (pc.certified ? "yes" : "no")
              << "\n";
    std::cout << "characteristic: x^4 + " << qc.b << " x^3 + " << qc.c << " x^2 + " << qc.d
              << " x + " << qc.e << "\n";
    std::cout << "reduced: z^4 + " << qc.p_red << " z^2 + " << qc.r_red << " z + " << qc.s_red
              << "\n";
    std::cout << "roots (sorted by real part):\n";
    for (const auto& r : pc.report.roots)
        std::cout << "  " << r.real() << (r.imag() < 0 ? " - " : " + ") << std::abs(r.imag())
                  << "i\n";
    std::cout << "stable=" << (pc.report.stable ? "yes" : "no")
              << " real=" << (pc.report.real ? "yes" : "no") << "\n";
    return 0;
}

static int cmd_mollifier_check(int order_m, const std::string& sigmas_arg, double delta,
                               const std::string& out) {
    std::vector<double> sigmas;
    std::stringstream ss(sigmas_arg);
    std::string tok;
    while (std::getline(ss, tok, ',')) sigmas.push_back(std::stod(tok));
    if (sigmas.empty()) throw CLI::ValidationError("--sigmas must list at least one value");

    auto phi = [](double x) { return std::exp(-x * x) * std::cos(x); };
    std::vector<mvq::MollifierSpec> specs;
    for (double s : sigmas) specs.push_back({order_m, s});
    auto gaps = mvq::delta_convergence_test(specs, phi);

    std::ostringstream csv;
    csv << "sigma,mass,tail,delta_gap\n";
    csv.precision(16);
    for (size_t i = 0; i < specs.size(); ++i) {
        auto [mass, tail] = mvq::rho_mass_and_tail(specs[i], delta);
        csv << sigmas[i] << ',' << mass << ',' << tail << ',' << gaps[i] << '\n';
    }
    if (out.empty()) {
        std::cout << csv.str();
    } else {
        std::ofstream f(out);
        if (!f) throw std::runtime_error(out + ": cannot open for writing");
        f << csv.str();
        std::cout << "wrote " << out << "\n";
    }
    return 0;
}

static int cmd_export_features(const std::vector<std::string>& checkpoints,
                               const std::string& video_path, const std::string& out) {
    auto clip = mvq::load_raw_video(video_path);
    std::vector<mvq::FrozenLayer> layers;
    for (const std::string& path : checkpoints) {
        auto [shape, state] = mvq::load_checkpoint(path);
        layers.push_back(mvq::FrozenLayer{shape, state.q});
    }
    mvq::FeatureStack fs = mvq::export_features(layers, clip);
    mvq::save_feature_stack(out, fs);
    std::cout << "wrote " << fs.frames << " frames x " << fs.feature_count
              << " features/pixel to " << out << "\n";
    return 0;
}

int main(int argc, char** argv) {
    CLI::App app{"mvq: motion-invariant visual feature learning"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a translating synthetic clip");
    uint64_t seed = 1;
    double vx = 1.0, vy = 0.0;
    int frames = 50, width = 64, height = 36;
    std::string synth_out = "clip.mvq";
    synth->add_option("--seed", seed);
    synth->add_option("--vx", vx, "pixels/frame, horizontal");
    synth->add_option("--vy", vy, "pixels/frame, vertical");
    synth->add_option("--frames", frames);
    synth->add_option("--width", width);
    synth->add_option("--height", height);
    synth->add_option("--out", synth_out)->required();

    // train
    auto* train = app.add_subcommand("train", "online training of the first layer");
    std::string config_path, video_path, out_dir = "run", flow_arg;
    train->add_option("--config", config_path)->required()->check(CLI::ExistingFile);
    train->add_option("--video", video_path)->required()->check(CLI::ExistingFile);
    train->add_option("--out-dir", out_dir);
    train->add_option("--flow", flow_arg, "internal or file:<path>");

    // run-multilayer
    auto* multi = app.add_subcommand("run-multilayer", "sequential multi-layer training");
    std::string m_config, m_video, m_out = "run", m_flow, m_sweep;
    multi->add_option("--config", m_config)->required()->check(CLI::ExistingFile);
    multi->add_option("--video", m_video)->required()->check(CLI::ExistingFile);
    multi->add_option("--out-dir", m_out);
    multi->add_option("--flow", m_flow, "internal or file:<path>");
    multi->add_option("--sweep-lambda", m_sweep,
                      "comma list of lambda_M; keeps the best batch-MI model per layer");

    // analyze-stability
    auto* stab = app.add_subcommand("analyze-stability", "parameter certification");
    double theta = 1e-4, mu = 1, nu = 1, g1 = 0, g2 = 0, kk = 0;
    bool as_json = false;
    stab->add_option("--theta", theta)->required();
    stab->add_option("--mu", mu)->required();
    stab->add_option("--nu", nu)->required();
    stab->add_option("--gamma1", g1)->required();
    stab->add_option("--gamma2", g2)->required();
    stab->add_option("--k", kk)->required();
    stab->add_flag("--json", as_json);

    // mollifier-check
    auto* moll = app.add_subcommand("mollifier-check", "Gaussian Green-function verification");
    int order_m = 1;
    std::string sigmas = "1,0.1,0.01,0.001", moll_out;
    double delta = 0.5;
    moll->add_option("--m", order_m, "number of correction terms");
    moll->add_option("--sigmas", sigmas);
    moll->add_option("--delta", delta, "tail threshold");
    moll->add_option("--out", moll_out, "CSV report path (stdout when omitted)");

    // export-features
    auto* expf = app.add_subcommand("export-features", "per-pixel feature stack to MVQF");
    std::vector<std::string> checkpoints;
    std::string e_video, e_out = "features.mvqf";
    expf->add_option("--checkpoint", checkpoints, "layer checkpoints, bottom first")
        ->required()
        ->check(CLI::ExistingFile);
    expf->add_option("--video", e_video)->required()->check(CLI::ExistingFile);
    expf->add_option("--out", e_out);

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed())
            return cmd_synth(seed, vx, vy, frames, width, height, synth_out);
        if (train->parsed()) return cmd_train(config_path, video_path, out_dir, flow_arg);
        if (multi->parsed()) return cmd_run_multilayer(m_config, m_video, m_out, m_flow, m_sweep);
        if (stab->parsed()) return cmd_analyze_stability(theta, mu, nu, g1, g2, kk, as_json);
        if (moll->parsed()) return cmd_mollifier_check(order_m, sigmas, delta, moll_out);
        if (expf->parsed()) return cmd_export_features(checkpoints, e_video, e_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
