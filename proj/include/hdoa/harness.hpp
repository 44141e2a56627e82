#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hdoa/beampattern.hpp"
#include "hdoa/estimators.hpp"
#include "hdoa/neural.hpp"
#include "hdoa/sparse_recovery.hpp"

namespace hdoa {

/// Root mean squared error in degrees; inputs in radians.
double rmse(std::span<const double> estimates, double truth);

/// Hyperparameters for the ASN and DNN training pipelines.
struct TrainingSpec {
    double range_min_deg = -60.0;
    double range_max_deg = 60.0;
    double range_step_deg = 1.0;
    std::vector<int> asn_hidden{64, 128};
    std::vector<int> dnn_hidden{256, 128, 64};
    TrainConfig asn{2000, 16, 1e-3, 0, Loss::BCE};
    TrainConfig dnn{2000, 16, 1e-3, 0, Loss::MSE};
    DnnDataSpec data;
    SelectionConfig selection;
};

struct AsnDnnModels {
    Mlp asn;
    Mlp dnn;
    std::vector<SelectionVector> labels;  // optimal selection per training angle
};

/// Labels the angular set with constrained_select, trains the ASN on them, then
/// trains the DNN on features observed through the ASN's own selections.
AsnDnnModels train_asn_dnn(int m, int k, const TrainingSpec& spec, std::uint64_t seed);

/// DNN for one fixed configuration (the plain-DNN baseline).
Mlp train_fixed_dnn(int m, const SelectionVector& selection, const TrainingSpec& spec, std::uint64_t seed);

struct ExperimentConfig {
    std::string preset;
    int m = 128;
    int k = 8;
    int slots = 0;  // 0 selects the largest slot count that fits
    int snapshots = 600;
    std::vector<double> angles_deg;
    double theta_deg = 30.0;
    std::vector<double> snr_db;
    std::vector<double> deltas;
    int trials = 500;
    std::uint64_t seed = 1;
    std::string output;  // CSV path; empty writes to stdout
    AdmmConfig admm;
    double grid_step_deg = 1.0;
    TrainingSpec training;
    AsnDnnConfig loop;
};

std::vector<std::string> preset_names();

/// Preset defaults; throws a usage error for unknown names.
ExperimentConfig preset_defaults(const std::string& preset);

/// Applies one flat key=value override; throws a usage error for unknown keys
/// or unparsable values.
void set_option(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// `key = value` lines; '#' starts a comment.
std::vector<std::pair<std::string, std::string>> parse_key_values(std::istream& in);
void apply_config_file(ExperimentConfig& cfg, const std::string& path);

/// Every resolved parameter as key/value pairs, in a fixed order.
std::vector<std::pair<std::string, std::string>> describe(const ExperimentConfig& cfg);

struct CsvRow {
    double x = 0.0;
    std::string series;
    double y = 0.0;
};

struct PresetOutput {
    std::vector<CsvRow> rows;
    std::vector<std::pair<std::string, std::string>> notes;
};

PresetOutput run_preset(const ExperimentConfig& cfg);

/// Header `x,series,y`, LF line endings.
void write_csv(std::ostream& out, std::span<const CsvRow> rows);
std::string csv_body(std::span<const CsvRow> rows);

/// Sidecar with seed, parameters, build version and the trial scaling note.
void write_meta(std::ostream& out, const ExperimentConfig& cfg, const PresetOutput& result);

/// Writes CSV to cfg.output (plus `<output>.meta`) or the CSV to stdout.
void write_outputs(const ExperimentConfig& cfg, const PresetOutput& result);

const char* build_version();

}  // namespace hdoa
