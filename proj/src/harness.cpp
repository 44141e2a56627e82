#include "hdoa/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "hdoa/crlb.hpp"
#include "hdoa/errors.hpp"
#include "hdoa/kernels.hpp"
#include "hdoa/rng.hpp"
#include "hdoa/swsha.hpp"

#ifndef HDOA_VERSION
#define HDOA_VERSION "unknown"
#endif

namespace hdoa {

namespace {

// Seed streams, kept apart so adding a series never shifts another one's draws.
constexpr std::uint64_t kTrainStream = 0x7261696eULL;
constexpr std::uint64_t kTrialStream = 0x7472696cULL;

std::string fmt(double v)
{
    std::ostringstream s;
    s << std::setprecision(12) << v;
    return s.str();
}

std::string fmt_list(std::span<const double> v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + fmt(v[i]);
    return out;
}

std::string fmt_ints(std::span<const int> v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
    return out;
}

std::vector<double> inclusive_range(double a, double step, double b)
{
    std::vector<double> out;
    const auto n = static_cast<int>(std::floor((b - a) / step + 1e-9));
    for (int i = 0; i <= n; ++i) out.push_back(a + step * i);
    return out;
}

double parse_double(const std::string& key, const std::string& v)
{
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used == v.size() && std::isfinite(d)) return d;
    } catch (const std::exception&) {
    }
    throw Error(ErrorCode::Usage, "option '" + key + "': '" + v + "' is not a number");
}

int parse_int(const std::string& key, const std::string& v)
{
    const double d = parse_double(key, v);
    if (d != std::floor(d) || std::abs(d) > 1e9) throw Error(ErrorCode::Usage, "option '" + key + "' must be an integer");
    return static_cast<int>(d);
}

std::uint64_t parse_seed(const std::string& key, const std::string& v)
{
    try {
        std::size_t used = 0;
        const unsigned long long n = std::stoull(v, &used);
        if (used == v.size() && !v.empty() && v.front() != '-') return n;
    } catch (const std::exception&) {
    }
    throw Error(ErrorCode::Usage, "option '" + key + "' must be a non-negative integer");
}

/// Comma list, or an inclusive range written start:step:stop.
std::vector<double> parse_list(const std::string& key, const std::string& v)
{
    if (std::count(v.begin(), v.end(), ':') == 2) {
        const auto a = v.find(':');
        const auto b = v.find(':', a + 1);
        const double start = parse_double(key, v.substr(0, a));
        const double step = parse_double(key, v.substr(a + 1, b - a - 1));
        const double stop = parse_double(key, v.substr(b + 1));
        if (step <= 0.0 || stop < start) throw Error(ErrorCode::Usage, "option '" + key + "': empty range");
        return inclusive_range(start, step, stop);
    }
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
    if (out.empty()) throw Error(ErrorCode::Usage, "option '" + key + "' needs at least one value");
    return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v)
{
    std::vector<int> out;
    for (double d : parse_list(key, v)) out.push_back(parse_int(key, fmt(d)));
    return out;
}

std::string trim(const std::string& s)
{
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<int> layer_sizes(int in, const std::vector<int>& hidden, int out)
{
    std::vector<int> s{in};
    s.insert(s.end(), hidden.begin(), hidden.end());
    s.push_back(out);
    return s;
}

std::string delta_label(double delta) { return fmt(delta); }

// Sum of squared errors per (point, series), reduced in trial order.
struct Accumulator {
    std::vector<double> x;
    std::vector<std::string> series;
    std::vector<std::vector<double>> sq;  // [point][series]
    std::vector<int> count;

    Accumulator(std::vector<double> xs, std::vector<std::string> names)
        : x(std::move(xs)), series(std::move(names)),
          sq(x.size(), std::vector<double>(series.size(), 0.0)), count(x.size(), 0)
    {
    }

    void add(std::size_t point, const std::vector<double>& errors_rad)
    {
        for (std::size_t s = 0; s < series.size(); ++s) sq[point][s] += errors_rad[s] * errors_rad[s];
        ++count[point];
    }

    void emit(std::vector<CsvRow>& rows) const
    {
        for (std::size_t s = 0; s < series.size(); ++s)
            for (std::size_t p = 0; p < x.size(); ++p)
                rows.push_back({x[p], series[s], rad2deg(std::sqrt(sq[p][s] / count[p]))});
    }
};

/// Runs trials over every sweep point; fn(point, trial, seed) returns the
/// per-series errors in radians.
template <class Fn>
void monte_carlo(const ExperimentConfig& cfg, Accumulator& acc, Fn&& fn)
{
    const std::size_t points = acc.x.size();
    const auto trials = static_cast<std::size_t>(cfg.trials);
    const auto errors = kernels::parallel::map<std::vector<double>>(points * trials, [&](std::size_t i) {
        const std::size_t p = i / trials;
        const std::size_t t = i % trials;
        return fn(p, derive_seed(cfg.seed, kTrialStream + p, t));
    });
    for (std::size_t i = 0; i < errors.size(); ++i) acc.add(i / trials, errors[i]);
}

PresetOutput run_dof_table(const ExperimentConfig& cfg)
{
    PresetOutput out;
    const auto schedule = build_schedule(cfg.m, cfg.k, cfg.slots > 0 ? std::optional<int>(cfg.slots) : std::nullopt);
    const auto aug = augmented_array(schedule);
    const int swsha = dof(difference_coarray(aug));
    const auto x = static_cast<double>(cfg.k);
    out.rows.push_back({x, "swsha_slots", static_cast<double>(schedule.slots)});
    out.rows.push_back({x, "swsha", static_cast<double>(swsha)});
    out.rows.push_back({x, "ula", static_cast<double>(cfg.k - 1)});
    out.rows.push_back({x, "nested", static_cast<double>(schedule.k2 * (schedule.k1 + 1) - 1)});
    if (cfg.k == 8) {
        // Published reference values for K = 8; no estimator is built for these.
        out.rows.push_back({x, "coprime", 15.0});
        out.rows.push_back({x, "csa", 31.0});
        out.notes.emplace_back("reference_constants", "coprime and csa rows are published K=8 values");
    }
    return out;
}

struct SwshaSetup {
    NestedSchedule schedule;
    std::vector<int> lags;
    AdmmLasso solver;
};

SwshaSetup swsha_setup(const ExperimentConfig& cfg)
{
    auto schedule = build_schedule(cfg.m, cfg.k, cfg.slots > 0 ? std::optional<int>(cfg.slots) : std::nullopt);
    // Row positions only depend on the schedule, so a noiseless covariance gives the lag layout.
    const auto probe = analytic_augmented_covariance(schedule, SourceEnsemble({0.0}, {1.0}, 1.0));
    auto lags = vectorize_virtual(probe).lags;
    const AngleGrid grid{-90.0, 90.0, cfg.grid_step_deg};
    AdmmLasso solver(build_dictionary(lags, grid), cfg.admm);
    return {std::move(schedule), std::move(lags), std::move(solver)};
}

PresetOutput run_swsha_spectrum(const ExperimentConfig& cfg)
{
    const auto setup = swsha_setup(cfg);
    std::vector<double> angles;
    for (double a : cfg.angles_deg) angles.push_back(deg2rad(a));
    const auto src = SourceEnsemble::equal_power(angles, cfg.snr_db.front());
    const auto cov = synthesize_augmented_covariance(setup.schedule, src, cfg.snapshots,
                                                     derive_seed(cfg.seed, kTrialStream, 0));
    const auto spectrum = setup.solver.solve(vectorize_virtual(cov));
    const auto peaks = pick_peaks(spectrum, src.count());

    PresetOutput out;
    for (std::size_t g = 0; g < spectrum.grid_deg.size(); ++g)
        out.rows.push_back({spectrum.grid_deg[g], "spectrum", spectrum.values(static_cast<Eigen::Index>(g))});
    for (double a : cfg.angles_deg) out.rows.push_back({a, "truth", 1.0});
    for (double a : peaks) out.rows.push_back({a, "estimate", 1.0});
    out.notes.emplace_back("admm_iterations", std::to_string(spectrum.iterations));
    out.notes.emplace_back("admm_converged", spectrum.converged ? "true" : "false");
    return out;
}

PresetOutput run_swsha_rmse_snr(const ExperimentConfig& cfg)
{
    const auto setup = swsha_setup(cfg);
    const double theta = deg2rad(cfg.theta_deg);
    const auto ula = ArrayGeometry::ula(cfg.k);
    Accumulator acc(cfg.snr_db, {"swsha", "ula_root_music"});
    monte_carlo(cfg, acc, [&](std::size_t p, std::uint64_t seed) {
        const auto src = SourceEnsemble::equal_power({theta}, cfg.snr_db[p]);
        const auto cov = synthesize_augmented_covariance(setup.schedule, src, cfg.snapshots, derive_seed(seed, 0));
        const auto spectrum = setup.solver.solve(vectorize_virtual(cov));
        // An all-zero spectrum counts as an estimate at broadside.
        double est = 0.0;
        if (spectrum.values.maxCoeff() > 0.0) est = deg2rad(pick_peaks(spectrum, 1).front());
        const auto y = synthesize_snapshots(ula, src, cfg.snapshots, derive_seed(seed, 1));
        const double rm = root_music(sample_covariance(y), ula, 1).front();
        return std::vector<double>{est - theta, rm - theta};
    });
    PresetOutput out;
    acc.emit(out.rows);
    return out;
}

struct TrainedSet {
    std::vector<double> deltas;
    std::vector<AsnDnnModels> models;  // one per delta
    Mlp ula_dnn;
};

TrainedSet train_all(const ExperimentConfig& cfg)
{
    const std::size_t n = cfg.deltas.size();
    // Models train concurrently; each one is single-threaded.
    auto trained = kernels::parallel::map<std::optional<AsnDnnModels>>(n + 1, [&](std::size_t i) {
        TrainingSpec spec = cfg.training;
        if (i == n) {
            const auto ula = SelectionVector::from_indices(cfg.m, ArrayGeometry::ula(cfg.k).indices());
            Mlp dnn = train_fixed_dnn(cfg.m, ula, spec, derive_seed(cfg.seed, kTrainStream, i));
            return std::optional<AsnDnnModels>(AsnDnnModels{dnn, dnn, {}});
        }
        spec.selection.delta = cfg.deltas[i];
        return std::optional<AsnDnnModels>(train_asn_dnn(cfg.m, cfg.k, spec, derive_seed(cfg.seed, kTrainStream, i)));
    });
    TrainedSet set{cfg.deltas, {}, trained[n]->dnn};
    for (std::size_t i = 0; i < n; ++i) set.models.push_back(std::move(*trained[i]));
    return set;
}

std::vector<std::string> asndnn_series(const ExperimentConfig& cfg)
{
    std::vector<std::string> names;
    for (double d : cfg.deltas) names.push_back("asn_dnn_delta_" + delta_label(d));
    names.emplace_back("dnn_ula");
    names.emplace_back("root_music_ula");
    return names;
}

/// Errors of every method for one trial at (theta, snr).
std::vector<double> asndnn_trial(const ExperimentConfig& cfg, const TrainedSet& set, double theta, double snr,
                                 std::uint64_t seed)
{
    const auto full = ArrayGeometry::ula(cfg.m);
    const auto ula = ArrayGeometry::ula(cfg.k);
    const auto src = SourceEnsemble::equal_power({theta}, snr);
    std::vector<double> err;
    for (std::size_t d = 0; d < set.models.size(); ++d) {
        const auto res = asn_dnn_estimate(set.models[d].asn, set.models[d].dnn, full, src, cfg.snapshots, cfg.loop,
                                          derive_seed(seed, 10 + d));
        err.push_back(res.theta - theta);
    }
    const auto cov = sample_covariance(synthesize_snapshots(ula, src, cfg.snapshots, derive_seed(seed, 1)));
    const double lo = deg2rad(cfg.loop.range_min_deg);
    const double hi = deg2rad(cfg.loop.range_max_deg);
    err.push_back(std::clamp(dnn_infer(set.ula_dnn, dnn_input(cov)), lo, hi) - theta);
    err.push_back(root_music(cov, ula, 1).front() - theta);
    return err;
}

void append_crlb(const ExperimentConfig& cfg, const TrainedSet& set, std::span<const double> xs, bool sweep_snr,
                 PresetOutput& out)
{
    const auto full = ArrayGeometry::ula(cfg.m);
    for (std::size_t d = 0; d < set.deltas.size(); ++d) {
        SelectionConfig sc = cfg.training.selection;
        sc.delta = set.deltas[d];
        for (double x : xs) {
            const double theta = deg2rad(sweep_snr ? cfg.theta_deg : x);
            const double snr = sweep_snr ? x : cfg.snr_db.front();
            const auto sel = constrained_select(theta, sc, full, cfg.k);
            const double bound = crlb_single_source(sel, theta, std::pow(10.0, snr / 10.0), cfg.snapshots);
            out.rows.push_back({x, "crlb_delta_" + delta_label(set.deltas[d]), rad2deg(std::sqrt(bound))});
        }
    }
}

PresetOutput run_asndnn_rmse_snr(const ExperimentConfig& cfg)
{
    const auto set = train_all(cfg);
    const double theta = deg2rad(cfg.theta_deg);
    Accumulator acc(cfg.snr_db, asndnn_series(cfg));
    monte_carlo(cfg, acc, [&](std::size_t p, std::uint64_t seed) {
        return asndnn_trial(cfg, set, theta, cfg.snr_db[p], seed);
    });
    PresetOutput out;
    acc.emit(out.rows);
    append_crlb(cfg, set, cfg.snr_db, true, out);
    return out;
}

PresetOutput run_asndnn_rmse_theta(const ExperimentConfig& cfg)
{
    const auto set = train_all(cfg);
    Accumulator acc(cfg.angles_deg, asndnn_series(cfg));
    monte_carlo(cfg, acc, [&](std::size_t p, std::uint64_t seed) {
        return asndnn_trial(cfg, set, deg2rad(cfg.angles_deg[p]), cfg.snr_db.front(), seed);
    });
    PresetOutput out;
    acc.emit(out.rows);
    append_crlb(cfg, set, cfg.angles_deg, false, out);
    return out;
}

PresetOutput run_crlb_delta(const ExperimentConfig& cfg)
{
    PresetOutput out;
    const auto full = ArrayGeometry::ula(cfg.m);
    const double theta = deg2rad(cfg.theta_deg);
    for (double delta : cfg.deltas) {
        SelectionConfig sc = cfg.training.selection;
        sc.delta = delta;
        const auto sel = constrained_select_detail(theta, sc, full, cfg.k);
        for (double snr : cfg.snr_db) {
            const double bound = crlb_single_source(sel.selection, theta, std::pow(10.0, snr / 10.0), cfg.snapshots);
            out.rows.push_back({snr, "delta_" + delta_label(delta), rad2deg(std::sqrt(bound))});
        }
        out.notes.emplace_back("selection_delta_" + delta_label(delta), fmt_ints(sel.selection.indices()));
        out.notes.emplace_back("psl_delta_" + delta_label(delta), fmt(sel.psl));
    }
    return out;
}

}  // namespace

double rmse(std::span<const double> estimates, double truth)
{
    require(!estimates.empty(), ErrorCode::InvalidArgument, "RMSE needs at least one estimate");
    double s = 0.0;
    for (double e : estimates) s += (e - truth) * (e - truth);
    return rad2deg(std::sqrt(s / static_cast<double>(estimates.size())));
}

AsnDnnModels train_asn_dnn(int m, int k, const TrainingSpec& spec, std::uint64_t seed)
{
    const auto full = ArrayGeometry::ula(m);
    const auto angles = angular_set(spec.range_min_deg, spec.range_max_deg, spec.range_step_deg);
    const Dataset asn_data = asn_build_dataset(angles, spec.selection, full, k);

    TrainConfig asn_cfg = spec.asn;
    asn_cfg.seed = derive_seed(seed, 1);
    Mlp asn(layer_sizes(1, spec.asn_hidden, m), Activation::Sigmoid, derive_seed(seed, 2));
    asn = train(std::move(asn), asn_data, asn_cfg).model;

    std::vector<SelectionVector> labels;
    for (int i = 0; i < asn_data.size(); ++i) {
        std::vector<std::uint8_t> rho(static_cast<std::size_t>(m));
        for (int a = 0; a < m; ++a) rho[static_cast<std::size_t>(a)] = asn_data.targets(a, i) > 0.5 ? 1 : 0;
        labels.emplace_back(std::move(rho));
    }

    DnnDataSpec data = spec.data;
    data.seed = derive_seed(seed, 3);
    const Dataset dnn_data =
        dnn_build_dataset(angles, data, full, [&](double th) { return asn_infer(asn, std::cos(th), k); });
    TrainConfig dnn_cfg = spec.dnn;
    dnn_cfg.seed = derive_seed(seed, 4);
    Mlp dnn(layer_sizes(k * (k + 1), spec.dnn_hidden, 1), Activation::Linear, derive_seed(seed, 5));
    dnn = train(std::move(dnn), dnn_data, dnn_cfg).model;
    return {std::move(asn), std::move(dnn), std::move(labels)};
}

Mlp train_fixed_dnn(int m, const SelectionVector& selection, const TrainingSpec& spec, std::uint64_t seed)
{
    require(selection.size() == m, ErrorCode::ShapeMismatch, "selection length must equal M");
    const auto full = ArrayGeometry::ula(m);
    const auto angles = angular_set(spec.range_min_deg, spec.range_max_deg, spec.range_step_deg);
    DnnDataSpec data = spec.data;
    data.seed = derive_seed(seed, 3);
    const Dataset dnn_data = dnn_build_dataset(angles, data, full, [&](double) { return selection; });
    TrainConfig dnn_cfg = spec.dnn;
    dnn_cfg.seed = derive_seed(seed, 4);
    const int k = selection.chain_count();
    Mlp dnn(layer_sizes(k * (k + 1), spec.dnn_hidden, 1), Activation::Linear, derive_seed(seed, 5));
    return train(std::move(dnn), dnn_data, dnn_cfg).model;
}

std::vector<std::string> preset_names()
{
    return {"dof-table", "swsha-spectrum", "swsha-rmse-snr", "asndnn-rmse-snr", "asndnn-rmse-theta", "crlb-delta"};
}

ExperimentConfig preset_defaults(const std::string& preset)
{
    const auto names = preset_names();
    if (std::find(names.begin(), names.end(), preset) == names.end())
        throw Error(ErrorCode::Usage, "unknown preset '" + preset + "'");
    ExperimentConfig cfg;
    cfg.preset = preset;
    cfg.snr_db = {0.0};
    if (preset == "swsha-spectrum") {
        cfg.angles_deg = inclusive_range(-60.0, 8.0, 60.0);
    } else if (preset == "swsha-rmse-snr") {
        cfg.theta_deg = -67.131;
        cfg.snr_db = inclusive_range(-20.0, 2.0, 10.0);
    } else if (preset == "asndnn-rmse-snr") {
        cfg.snapshots = 100;
        cfg.snr_db = inclusive_range(-15.0, 5.0, 10.0);
        cfg.deltas = {0.5, 1.0};
    } else if (preset == "asndnn-rmse-theta") {
        cfg.snapshots = 100;
        cfg.snr_db = {-15.0};
        cfg.angles_deg = inclusive_range(-45.0, 5.0, 45.0);
        cfg.deltas = {0.5, 1.0};
    } else if (preset == "crlb-delta") {
        cfg.snapshots = 100;
        cfg.snr_db = inclusive_range(-15.0, 5.0, 10.0);
        cfg.deltas = {1.0, 0.5, 0.3};
    }
    return cfg;
}

void set_option(ExperimentConfig& cfg, const std::string& key, const std::string& value)
{
    auto& tr = cfg.training;
    auto positive = [&](double v) {
        if (!(v > 0.0)) throw Error(ErrorCode::Usage, "option '" + key + "' must be positive");
        return v;
    };
    if (key == "preset") {
        const ExperimentConfig fresh = preset_defaults(value);
        cfg = fresh;
    } else if (key == "m") cfg.m = parse_int(key, value);
    else if (key == "k") cfg.k = parse_int(key, value);
    else if (key == "slots") cfg.slots = parse_int(key, value);
    else if (key == "snapshots") cfg.snapshots = parse_int(key, value);
    else if (key == "angles_deg") cfg.angles_deg = parse_list(key, value);
    else if (key == "theta_deg") cfg.theta_deg = parse_double(key, value);
    else if (key == "snr_db") cfg.snr_db = parse_list(key, value);
    else if (key == "deltas") cfg.deltas = parse_list(key, value);
    else if (key == "trials") cfg.trials = parse_int(key, value);
    else if (key == "seed") cfg.seed = parse_seed(key, value);
    else if (key == "output") cfg.output = value;
    else if (key == "alpha") cfg.admm.alpha = parse_double(key, value);
    else if (key == "zeta") cfg.admm.zeta = positive(parse_double(key, value));
    else if (key == "admm_max_iter") cfg.admm.max_iter = parse_int(key, value);
    else if (key == "admm_tol") cfg.admm.tol = positive(parse_double(key, value));
    else if (key == "grid_step_deg") cfg.grid_step_deg = positive(parse_double(key, value));
    else if (key == "range_min_deg") tr.range_min_deg = cfg.loop.range_min_deg = parse_double(key, value);
    else if (key == "range_max_deg") tr.range_max_deg = cfg.loop.range_max_deg = parse_double(key, value);
    else if (key == "range_step_deg") tr.range_step_deg = positive(parse_double(key, value));
    else if (key == "asn_hidden") tr.asn_hidden = parse_int_list(key, value);
    else if (key == "dnn_hidden") tr.dnn_hidden = parse_int_list(key, value);
    else if (key == "asn_epochs") tr.asn.epochs = parse_int(key, value);
    else if (key == "dnn_epochs") tr.dnn.epochs = parse_int(key, value);
    else if (key == "asn_learning_rate") tr.asn.learning_rate = positive(parse_double(key, value));
    else if (key == "dnn_learning_rate") tr.dnn.learning_rate = positive(parse_double(key, value));
    else if (key == "asn_batch_size") tr.asn.batch_size = parse_int(key, value);
    else if (key == "dnn_batch_size") tr.dnn.batch_size = parse_int(key, value);
    else if (key == "train_snr_db") tr.data.snr_db = parse_list(key, value);
    else if (key == "realizations") tr.data.realizations = parse_int(key, value);
    else if (key == "train_snapshots") tr.data.snapshots = parse_int(key, value);
    else if (key == "psl_step_deg") tr.selection.grid_step_deg = positive(parse_double(key, value));
    else if (key == "mainlobe_halfwidth_deg") {
        if (value == "auto") tr.selection.mainlobe_halfwidth_deg.reset();
        else tr.selection.mainlobe_halfwidth_deg = positive(parse_double(key, value));
    }
    else if (key == "strategy") tr.selection.strategy = parse_strategy(value);
    else if (key == "restarts") tr.selection.restarts = parse_int(key, value);
    else if (key == "epsilon_deg") cfg.loop.epsilon_deg = positive(parse_double(key, value));
    else if (key == "max_iter") cfg.loop.max_iter = parse_int(key, value);
    else throw Error(ErrorCode::Usage, "unknown option '" + key + "'");

    if (cfg.trials < 1) throw Error(ErrorCode::Usage, "trials must be at least 1");
    if (cfg.snr_db.empty()) throw Error(ErrorCode::Usage, "SNR sweep must not be empty");
}

std::vector<std::pair<std::string, std::string>> parse_key_values(std::istream& in)
{
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::Usage, "config line " + std::to_string(n) + ": expected key = value");
        out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return out;
}

void apply_config_file(ExperimentConfig& cfg, const std::string& path)
{
    std::ifstream f(path);
    require(static_cast<bool>(f), ErrorCode::Io, "cannot read config " + path);
    auto kv = parse_key_values(f);
    // The preset line resets defaults, so it is applied first.
    std::stable_partition(kv.begin(), kv.end(), [](const auto& p) { return p.first == "preset"; });
    for (const auto& [k, v] : kv) set_option(cfg, k, v);
}

std::vector<std::pair<std::string, std::string>> describe(const ExperimentConfig& cfg)
{
    const auto& tr = cfg.training;
    return {
        {"preset", cfg.preset},
        {"m", std::to_string(cfg.m)},
        {"k", std::to_string(cfg.k)},
        {"slots", std::to_string(cfg.slots)},
        {"snapshots", std::to_string(cfg.snapshots)},
        {"angles_deg", fmt_list(cfg.angles_deg)},
        {"theta_deg", fmt(cfg.theta_deg)},
        {"snr_db", fmt_list(cfg.snr_db)},
        {"deltas", fmt_list(cfg.deltas)},
        {"trials", std::to_string(cfg.trials)},
        {"seed", std::to_string(cfg.seed)},
        {"alpha", fmt(cfg.admm.alpha)},
        {"zeta", fmt(cfg.admm.zeta)},
        {"admm_max_iter", std::to_string(cfg.admm.max_iter)},
        {"admm_tol", fmt(cfg.admm.tol)},
        {"grid_step_deg", fmt(cfg.grid_step_deg)},
        {"range_min_deg", fmt(tr.range_min_deg)},
        {"range_max_deg", fmt(tr.range_max_deg)},
        {"range_step_deg", fmt(tr.range_step_deg)},
        {"asn_hidden", fmt_ints(tr.asn_hidden)},
        {"dnn_hidden", fmt_ints(tr.dnn_hidden)},
        {"asn_epochs", std::to_string(tr.asn.epochs)},
        {"dnn_epochs", std::to_string(tr.dnn.epochs)},
        {"asn_learning_rate", fmt(tr.asn.learning_rate)},
        {"dnn_learning_rate", fmt(tr.dnn.learning_rate)},
        {"asn_batch_size", std::to_string(tr.asn.batch_size)},
        {"dnn_batch_size", std::to_string(tr.dnn.batch_size)},
        {"train_snr_db", fmt_list(tr.data.snr_db)},
        {"realizations", std::to_string(tr.data.realizations)},
        {"train_snapshots", std::to_string(tr.data.snapshots)},
        {"psl_step_deg", fmt(tr.selection.grid_step_deg)},
        {"mainlobe_halfwidth_deg", tr.selection.mainlobe_halfwidth_deg ? fmt(*tr.selection.mainlobe_halfwidth_deg)
                                                                        : "auto"},
        {"strategy", to_string(tr.selection.strategy)},
        {"restarts", std::to_string(tr.selection.restarts)},
        {"epsilon_deg", fmt(cfg.loop.epsilon_deg)},
        {"max_iter", std::to_string(cfg.loop.max_iter)},
    };
}

PresetOutput run_preset(const ExperimentConfig& cfg)
{
    require(cfg.trials >= 1, ErrorCode::Usage, "trials must be at least 1");
    require(!cfg.snr_db.empty(), ErrorCode::Usage, "SNR sweep must not be empty");
    if (cfg.preset == "dof-table") return run_dof_table(cfg);
    if (cfg.preset == "swsha-spectrum") {
        require(!cfg.angles_deg.empty(), ErrorCode::Usage, "swsha-spectrum needs angles_deg");
        return run_swsha_spectrum(cfg);
    }
    if (cfg.preset == "swsha-rmse-snr") return run_swsha_rmse_snr(cfg);
    if (cfg.preset == "asndnn-rmse-snr" || cfg.preset == "asndnn-rmse-theta" || cfg.preset == "crlb-delta")
        require(!cfg.deltas.empty(), ErrorCode::Usage, cfg.preset + " needs deltas");
    if (cfg.preset == "asndnn-rmse-snr") return run_asndnn_rmse_snr(cfg);
    if (cfg.preset == "asndnn-rmse-theta") {
        require(!cfg.angles_deg.empty(), ErrorCode::Usage, "asndnn-rmse-theta needs angles_deg");
        return run_asndnn_rmse_theta(cfg);
    }
    if (cfg.preset == "crlb-delta") return run_crlb_delta(cfg);
    throw Error(ErrorCode::Usage, "unknown preset '" + cfg.preset + "'");
}

void write_csv(std::ostream& out, std::span<const CsvRow> rows)
{
    out << "x,series,y\n";
    for (const auto& r : rows) out << fmt(r.x) << ',' << r.series << ',' << fmt(r.y) << '\n';
}

std::string csv_body(std::span<const CsvRow> rows)
{
    std::ostringstream s;
    write_csv(s, rows);
    return s.str();
}

void write_meta(std::ostream& out, const ExperimentConfig& cfg, const PresetOutput& result)
{
    out << "version=" << build_version() << '\n';
    for (const auto& [k, v] : describe(cfg)) out << k << '=' << v << '\n';
    for (const auto& [k, v] : result.notes) out << k << '=' << v << '\n';
    out << "scaling=Monte Carlo curves average " << cfg.trials
        << " trials per point; the reference curves use 5000, so expect roughly "
        << fmt(std::sqrt(5000.0 / cfg.trials)) << "x larger sampling noise\n";
}

void write_outputs(const ExperimentConfig& cfg, const PresetOutput& result)
{
    if (cfg.output.empty()) {
        write_csv(std::cout, result.rows);
        return;
    }
    std::ofstream csv(cfg.output, std::ios::binary);
    require(static_cast<bool>(csv), ErrorCode::Io, "cannot write " + cfg.output);
    write_csv(csv, result.rows);
    std::ofstream meta(cfg.output + ".meta", std::ios::binary);
    require(static_cast<bool>(meta), ErrorCode::Io, "cannot write " + cfg.output + ".meta");
    write_meta(meta, cfg, result);
}

const char* build_version() { return HDOA_VERSION; }

}  // namespace hdoa
