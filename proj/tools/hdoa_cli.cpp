// hdoa command line: design | select | train | estimate | run <preset>.
// Angles are in degrees at this boundary. HDOA_THREADS sets the thread count.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hdoa/beampattern.hpp"
#include "hdoa/crlb.hpp"
#include "hdoa/errors.hpp"
#include "hdoa/estimators.hpp"
#include "hdoa/harness.hpp"
#include "hdoa/kernels.hpp"
#include "hdoa/neural.hpp"
#include "hdoa/swsha.hpp"

namespace {

using namespace hdoa;

std::string join(const std::vector<int>& v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

void apply_overrides(ExperimentConfig& cfg, const std::string& config_file, const std::vector<std::string>& sets)
{
    if (!config_file.empty()) apply_config_file(cfg, config_file);
    for (const auto& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw Error(ErrorCode::Usage, "--set expects key=value, got '" + kv + "'");
        set_option(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Switched hybrid array DOA toolkit"};
    app.require_subcommand(1);

    int m = 128;
    int k = 8;
    int slots = 0;
    double theta_deg = 30.0;
    double delta = 1.0;
    std::string strategy = "greedy_swap";
    std::uint64_t seed = 0;
    int restarts = 4;

    auto* design = app.add_subcommand("design", "Print the switching schedule and co-array DOF");
    design->add_option("--m", m, "Antennas")->check(CLI::PositiveNumber);
    design->add_option("--k", k, "RF chains")->check(CLI::PositiveNumber);
    design->add_option("--slots", slots, "Time slots (default: largest that fits)");

    auto* select = app.add_subcommand("select", "Constrained antenna selection for one angle");
    select->add_option("--m", m, "Antennas")->check(CLI::PositiveNumber);
    select->add_option("--k", k, "RF chains")->check(CLI::PositiveNumber);
    select->add_option("--theta-deg", theta_deg, "Mainlobe direction");
    select->add_option("--delta", delta, "Peak sidelobe power ceiling");
    select->add_option("--strategy", strategy, "exhaustive | greedy_swap");
    select->add_option("--seed", seed, "Restart seed");
    select->add_option("--restarts", restarts, "Random restarts for greedy_swap");

    std::string config_file;
    std::vector<std::string> sets;
    std::string asn_path;
    std::string dnn_path;

    auto* trainc = app.add_subcommand("train", "Train an ASN and DNN pair for one delta");
    trainc->add_option("--m", m, "Antennas")->check(CLI::PositiveNumber);
    trainc->add_option("--k", k, "RF chains")->check(CLI::PositiveNumber);
    trainc->add_option("--delta", delta, "Peak sidelobe power ceiling");
    trainc->add_option("--seed", seed, "Training seed");
    trainc->add_option("--config", config_file, "key=value file with training options");
    trainc->add_option("--set", sets, "Override one option (key=value)");
    trainc->add_option("--asn-out", asn_path, "ASN model file")->required();
    trainc->add_option("--dnn-out", dnn_path, "DNN model file")->required();

    double snr_db = 0.0;
    int snapshots = 100;
    std::string method = "asn-dnn";
    auto* estimate = app.add_subcommand("estimate", "Estimate one simulated source");
    estimate->add_option("--method", method, "asn-dnn | mvdr | root-music");
    estimate->add_option("--m", m, "Antennas")->check(CLI::PositiveNumber);
    estimate->add_option("--k", k, "RF chains")->check(CLI::PositiveNumber);
    estimate->add_option("--theta-deg", theta_deg, "True direction");
    estimate->add_option("--snr-db", snr_db, "Per-antenna SNR");
    estimate->add_option("--snapshots", snapshots, "Snapshots per measurement")->check(CLI::PositiveNumber);
    estimate->add_option("--seed", seed, "Noise seed");
    estimate->add_option("--asn", asn_path, "ASN model file (asn-dnn)");
    estimate->add_option("--dnn", dnn_path, "DNN model file (asn-dnn)");

    std::string preset;
    int trials = 0;
    std::string output;
    auto* run = app.add_subcommand("run", "Run an experiment preset and write CSV");
    run->add_option("preset", preset, "Preset name")->required();
    run->add_option("--config", config_file, "key=value file");
    run->add_option("--set", sets, "Override one option (key=value)");
    run->add_option("--trials", trials, "Monte Carlo trials per point");
    run->add_option("--seed", seed, "Base seed");
    run->add_option("--output", output, "CSV path (a .meta sidecar is written next to it)");

    CLI11_PARSE(app, argc, argv);
    kernels::set_threads(kernels::configured_threads());

    try {
        if (*design) {
            const auto s = build_schedule(m, k, slots > 0 ? std::optional<int>(slots) : std::nullopt);
            write_schedule(std::cout, s);
            const auto aug = augmented_array(s);
            std::cout << "# K1=" << s.k1 << " K2=" << s.k2 << " L=" << s.slots
                      << " DOF=" << dof(difference_coarray(aug)) << '\n';
        } else if (*select) {
            SelectionConfig cfg;
            cfg.delta = delta;
            cfg.strategy = parse_strategy(strategy);
            cfg.seed = seed;
            cfg.restarts = restarts;
            const auto out = constrained_select_detail(deg2rad(theta_deg), cfg, ArrayGeometry::ula(m), k);
            std::cout << "selection=" << join(out.selection.indices()) << '\n'
                      << "objective=" << out.objective << '\n'
                      << "psl=" << out.psl << '\n';
        } else if (*trainc) {
            ExperimentConfig cfg = preset_defaults("asndnn-rmse-snr");
            apply_overrides(cfg, config_file, sets);
            TrainingSpec spec = cfg.training;
            spec.selection.delta = delta;
            const auto models = train_asn_dnn(m, k, spec, seed);
            save_mlp(asn_path, models.asn);
            save_mlp(dnn_path, models.dnn);
            std::cerr << "wrote " << asn_path << " and " << dnn_path << '\n';
        } else if (*estimate) {
            const auto full = ArrayGeometry::ula(m);
            const auto src = SourceEnsemble::equal_power({deg2rad(theta_deg)}, snr_db);
            if (method == "asn-dnn") {
                if (asn_path.empty() || dnn_path.empty())
                    throw Error(ErrorCode::Usage, "asn-dnn needs --asn and --dnn model files");
                const auto asn = load_mlp(asn_path);
                const auto dnn = load_mlp(dnn_path);
                const auto res = asn_dnn_estimate(asn, dnn, full, src, snapshots, AsnDnnConfig{}, seed);
                std::cout << "theta_deg=" << rad2deg(res.theta) << '\n'
                          << "iterations=" << res.iterations << '\n'
                          << "converged=" << (res.converged ? "true" : "false") << '\n';
            } else if (method == "mvdr" || method == "root-music") {
                const auto ula = ArrayGeometry::ula(k);
                const auto cov = sample_covariance(synthesize_snapshots(ula, src, snapshots, seed));
                const double th = method == "mvdr" ? mvdr_estimate(cov, ula, search_grid(-89.9, 89.9, 0.1))
                                                   : root_music(cov, ula, 1).front();
                std::cout << "theta_deg=" << rad2deg(th) << '\n';
            } else {
                throw Error(ErrorCode::Usage, "unknown method '" + method + "'");
            }
        } else if (*run) {
            ExperimentConfig cfg = preset_defaults(preset);
            apply_overrides(cfg, config_file, sets);
            if (cfg.preset != preset) throw Error(ErrorCode::Usage, "config file names a different preset");
            if (trials > 0) set_option(cfg, "trials", std::to_string(trials));
            if (run->count("--seed")) cfg.seed = seed;
            if (!output.empty()) cfg.output = output;
            write_outputs(cfg, run_preset(cfg));
        }
    } catch (const Error& e) {
        std::cerr << "hdoa: " << e.what() << '\n';
        return e.code() == ErrorCode::Usage ? 2 : 1;
    }
    return 0;
}
