#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hdoa/array_core.hpp"
#include "hdoa/beampattern.hpp"

namespace hdoa {

enum class Activation { ReLU, Sigmoid, Linear };
enum class Loss { BCE, MSE };

std::string to_string(Activation a);
Activation parse_activation(const std::string& s);

/// Dense network: ReLU hidden layers and a Sigmoid or Linear output layer.
/// Layer h maps g_{h-1} inputs to g_h outputs with weights stored g_h x g_{h-1}.
class Mlp {
public:
    Mlp(std::vector<int> sizes, Activation output, std::uint64_t seed);
    static Mlp zeros(std::vector<int> sizes, Activation output);

    const std::vector<int>& sizes() const noexcept { return sizes_; }
    int layers() const noexcept { return static_cast<int>(weights_.size()); }
    int inputs() const noexcept { return sizes_.front(); }
    int outputs() const noexcept { return sizes_.back(); }
    Activation output_activation() const noexcept { return output_; }

    Eigen::MatrixXd& weights(int h) { return weights_.at(static_cast<std::size_t>(h)); }
    const Eigen::MatrixXd& weights(int h) const { return weights_.at(static_cast<std::size_t>(h)); }
    Eigen::VectorXd& biases(int h) { return biases_.at(static_cast<std::size_t>(h)); }
    const Eigen::VectorXd& biases(int h) const { return biases_.at(static_cast<std::size_t>(h)); }

    Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
    /// Columns are samples.
    Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& x) const;

    bool finite() const;

private:
    Mlp(std::vector<int> sizes, Activation output);

    std::vector<int> sizes_;
    Activation output_;
    std::vector<Eigen::MatrixXd> weights_;
    std::vector<Eigen::VectorXd> biases_;
};

/// Columns are samples.
struct Dataset {
    Eigen::MatrixXd inputs;
    Eigen::MatrixXd targets;

    int size() const noexcept { return static_cast<int>(inputs.cols()); }
};

struct Gradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
    double loss = 0.0;
};

/// Mean over the batch of the per-sample loss (BCE summed over outputs, or
/// squared error summed over outputs).
double loss_value(const Mlp& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, Loss loss);
Gradients backprop(const Mlp& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, Loss loss);

struct TrainConfig {
    int epochs = 2000;
    int batch_size = 16;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;
    Loss loss = Loss::MSE;
};

struct TrainResult {
    Mlp model;
    double initial_loss = 0.0;
    std::vector<double> loss_history;  // mean training loss per epoch
};

/// Plain mini-batch gradient descent, deterministic under cfg.seed.
TrainResult train(Mlp net, const Dataset& data, const TrainConfig& cfg);

/// [Re(rbar); Im(rbar)] with rbar the row-major upper triangle of R.
Eigen::VectorXd extract_features(const CovarianceMatrix& r);

/// Features of R scaled by K / trace(R), the estimator's input.
Eigen::VectorXd dnn_input(const CovarianceMatrix& r);

/// Regression targets are degrees / 90.
inline double angle_to_target(double theta) { return rad2deg(theta) / 90.0; }
inline double target_to_angle(double t) { return deg2rad(t * 90.0); }

/// Angles theta_min + i*step for i < (theta_max - theta_min) / step, in radians.
std::vector<double> angular_set(double min_deg, double max_deg, double step_deg);

/// ASN training pairs (cos theta_i, optimal selection for theta_i).
Dataset asn_build_dataset(std::span<const double> angles, const SelectionConfig& cfg, const ArrayGeometry& geometry,
                          int chains);

/// Selection used to observe an angle while building estimator training data.
using ConfigurationFn = std::function<SelectionVector(double theta)>;

struct DnnDataSpec {
    std::vector<double> snr_db{-15, -10, -5, 0, 5, 10};
    int realizations = 20;
    int snapshots = 100;
    std::uint64_t seed = 0;
};

Dataset dnn_build_dataset(std::span<const double> angles, const DnnDataSpec& spec, const ArrayGeometry& geometry,
                          const ConfigurationFn& configuration);

/// Labels (K ones) for a dataset built by asn_build_dataset, one per column.
SelectionVector asn_infer(const Mlp& asn, double cos_theta, int chains);
SelectionVector top_k_selection(const Eigen::VectorXd& scores, int chains);

double dnn_infer(const Mlp& dnn, const Eigen::VectorXd& features);

void save_mlp(std::ostream& out, const Mlp& net);
Mlp load_mlp(std::istream& in);
void save_mlp(const std::string& path, const Mlp& net);
Mlp load_mlp(const std::string& path);

}  // namespace hdoa
