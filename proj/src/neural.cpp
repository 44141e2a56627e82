#include "hdoa/neural.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "hdoa/errors.hpp"
#include "hdoa/kernels.hpp"
#include "hdoa/rng.hpp"

namespace hdoa {

std::string to_string(Activation a)
{
    switch (a) {
    case Activation::ReLU: return "relu";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Linear: return "linear";
    }
    return "linear";
}

Activation parse_activation(const std::string& s)
{
    if (s == "relu") return Activation::ReLU;
    if (s == "sigmoid") return Activation::Sigmoid;
    if (s == "linear") return Activation::Linear;
    throw Error(ErrorCode::InvalidArgument, "unknown activation '" + s + "'");
}

namespace {

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z)
{
    return z.unaryExpr([](double v) { return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v)); });
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

struct ForwardTrace {
    std::vector<Eigen::MatrixXd> pre;   // z_h
    std::vector<Eigen::MatrixXd> post;  // x_h, post[0] = input
};

ForwardTrace run_forward(const Mlp& net, const Eigen::MatrixXd& x)
{
    require(x.rows() == net.inputs(), ErrorCode::ShapeMismatch,
            "input has " + std::to_string(x.rows()) + " rows, network expects " + std::to_string(net.inputs()));
    ForwardTrace t;
    t.post.push_back(x);
    for (int h = 0; h < net.layers(); ++h) {
        Eigen::MatrixXd z = net.weights(h) * t.post.back();
        z.colwise() += net.biases(h);
        const bool last = h + 1 == net.layers();
        Eigen::MatrixXd a;
        if (!last) a = z.cwiseMax(0.0);
        else if (net.output_activation() == Activation::Sigmoid) a = sigmoid(z);
        else if (net.output_activation() == Activation::ReLU) a = z.cwiseMax(0.0);
        else a = z;
        t.pre.push_back(std::move(z));
        t.post.push_back(std::move(a));
    }
    return t;
}

double batch_loss(const Mlp& net, const ForwardTrace& t, const Eigen::MatrixXd& y, Loss loss)
{
    const Eigen::MatrixXd& out = t.post.back();
    require(y.rows() == out.rows() && y.cols() == out.cols(), ErrorCode::ShapeMismatch, "target shape mismatch");
    const double n = static_cast<double>(y.cols());
    if (loss == Loss::MSE) return (out - y).squaredNorm() / n;
    require(net.output_activation() == Activation::Sigmoid, ErrorCode::InvalidArgument,
            "BCE loss needs a sigmoid output layer");
    const Eigen::MatrixXd& z = t.pre.back();
    double total = 0.0;
    for (Eigen::Index j = 0; j < z.cols(); ++j)
        for (Eigen::Index i = 0; i < z.rows(); ++i) total += softplus(z(i, j)) - y(i, j) * z(i, j);
    return total / n;
}

}  // namespace

Mlp::Mlp(std::vector<int> sizes, Activation output) : sizes_(std::move(sizes)), output_(output)
{
    require(sizes_.size() >= 2, ErrorCode::InvalidArgument, "network needs input and output sizes");
    for (int s : sizes_) require(s >= 1, ErrorCode::InvalidArgument, "layer sizes must be positive");
    for (std::size_t h = 1; h < sizes_.size(); ++h) {
        weights_.emplace_back(Eigen::MatrixXd::Zero(sizes_[h], sizes_[h - 1]));
        biases_.emplace_back(Eigen::VectorXd::Zero(sizes_[h]));
    }
}

Mlp::Mlp(std::vector<int> sizes, Activation output, std::uint64_t seed) : Mlp(std::move(sizes), output)
{
    Rng rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int h = 0; h < layers(); ++h) {
        const double fan_in = sizes_[static_cast<std::size_t>(h)];
        const double fan_out = sizes_[static_cast<std::size_t>(h) + 1];
        const bool last = h + 1 == layers();
        // He for ReLU layers, Glorot for the output layer.
        const double limit = last ? std::sqrt(6.0 / (fan_in + fan_out)) : std::sqrt(6.0 / fan_in);
        auto& w = weights_[static_cast<std::size_t>(h)];
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = limit * unit(rng);
    }
}

Mlp Mlp::zeros(std::vector<int> sizes, Activation output) { return Mlp(std::move(sizes), output); }

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x) const
{
    return forward_batch(x).col(0);
}

Eigen::MatrixXd Mlp::forward_batch(const Eigen::MatrixXd& x) const
{
    return run_forward(*this, x).post.back();
}

bool Mlp::finite() const
{
    for (int h = 0; h < layers(); ++h)
        if (!weights(h).allFinite() || !biases(h).allFinite()) return false;
    return true;
}

double loss_value(const Mlp& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, Loss loss)
{
    return batch_loss(net, run_forward(net, x), y, loss);
}

Gradients backprop(const Mlp& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, Loss loss)
{
    const ForwardTrace t = run_forward(net, x);
    Gradients g;
    g.loss = batch_loss(net, t, y, loss);
    const double n = static_cast<double>(x.cols());
    const int layers = net.layers();
    g.weights.resize(static_cast<std::size_t>(layers));
    g.biases.resize(static_cast<std::size_t>(layers));

    const Eigen::MatrixXd& out = t.post.back();
    Eigen::MatrixXd delta;  // dL/dz of the current layer
    if (loss == Loss::BCE) {
        delta = (out - y) / n;
    } else {
        delta = 2.0 * (out - y) / n;
        if (net.output_activation() == Activation::Sigmoid)
            delta = delta.cwiseProduct(out.cwiseProduct((1.0 - out.array()).matrix()));
        else if (net.output_activation() == Activation::ReLU)
            delta = delta.cwiseProduct((t.pre.back().array() > 0.0).cast<double>().matrix());
    }
    for (int h = layers - 1; h >= 0; --h) {
        const auto hs = static_cast<std::size_t>(h);
        g.weights[hs] = delta * t.post[hs].transpose();
        g.biases[hs] = delta.rowwise().sum();
        if (h > 0) {
            Eigen::MatrixXd back = net.weights(h).transpose() * delta;
            delta = back.cwiseProduct((t.pre[hs - 1].array() > 0.0).cast<double>().matrix());
        }
    }
    return g;
}

TrainResult train(Mlp net, const Dataset& data, const TrainConfig& cfg)
{
    require(data.size() >= 1, ErrorCode::InvalidArgument, "training set is empty");
    require(cfg.learning_rate > 0.0, ErrorCode::InvalidArgument, "learning rate must be positive");
    require(cfg.batch_size >= 1 && cfg.epochs >= 0, ErrorCode::InvalidArgument, "invalid batch size or epochs");
    require(data.inputs.rows() == net.inputs() && data.targets.rows() == net.outputs(), ErrorCode::ShapeMismatch,
            "dataset does not match the network shape");

    TrainResult res{net, 0.0, {}};
    res.initial_loss = loss_value(res.model, data.inputs, data.targets, cfg.loss);
    const int n = data.size();
    std::vector<int> order(static_cast<std::size_t>(n));
    Eigen::MatrixXd xb;
    Eigen::MatrixXd yb;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), 0);
        Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
        for (int i = n - 1; i > 0; --i) {
            const auto j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
            std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
        }
        double epoch_loss = 0.0;
        for (int start = 0; start < n; start += cfg.batch_size) {
            const int b = std::min(cfg.batch_size, n - start);
            xb.resize(data.inputs.rows(), b);
            yb.resize(data.targets.rows(), b);
            for (int c = 0; c < b; ++c) {
                const int s = order[static_cast<std::size_t>(start + c)];
                xb.col(c) = data.inputs.col(s);
                yb.col(c) = data.targets.col(s);
            }
            const Gradients g = backprop(res.model, xb, yb, cfg.loss);
            if (!std::isfinite(g.loss)) throw Error(ErrorCode::TrainingFailure,
                                                    "loss diverged in epoch " + std::to_string(epoch + 1));
            epoch_loss += g.loss * b;
            for (int h = 0; h < res.model.layers(); ++h) {
                res.model.weights(h) -= cfg.learning_rate * g.weights[static_cast<std::size_t>(h)];
                res.model.biases(h) -= cfg.learning_rate * g.biases[static_cast<std::size_t>(h)];
            }
        }
        epoch_loss /= n;
        if (!std::isfinite(epoch_loss) || !res.model.finite())
            throw Error(ErrorCode::TrainingFailure, "parameters diverged in epoch " + std::to_string(epoch + 1));
        res.loss_history.push_back(epoch_loss);
    }
    return res;
}

Eigen::VectorXd extract_features(const CovarianceMatrix& r)
{
    const int k = r.size();
    const int half = k * (k + 1) / 2;
    Eigen::VectorXd f(2 * half);
    int e = 0;
    for (int i = 0; i < k; ++i)
        for (int j = i; j < k; ++j, ++e) {
            f(e) = r.data()(i, j).real();
            f(half + e) = r.data()(i, j).imag();
        }
    return f;
}

Eigen::VectorXd dnn_input(const CovarianceMatrix& r)
{
    const double tr = r.trace();
    require(tr > 0.0, ErrorCode::InvalidArgument, "covariance trace must be positive");
    return extract_features(r) * (r.size() / tr);
}

std::vector<double> angular_set(double min_deg, double max_deg, double step_deg)
{
    require(step_deg > 0.0 && max_deg > min_deg, ErrorCode::InvalidArgument, "angular set is empty");
    const auto n = static_cast<int>(std::ceil((max_deg - min_deg) / step_deg - 1e-9));
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = deg2rad(min_deg + step_deg * i);
    return out;
}

Dataset asn_build_dataset(std::span<const double> angles, const SelectionConfig& cfg, const ArrayGeometry& geometry,
                          int chains)
{
    require(!angles.empty(), ErrorCode::InvalidArgument, "ASN angular set is empty");
    const auto labels = kernels::parallel::map<std::vector<std::uint8_t>>(angles.size(), [&](std::size_t i) {
        return constrained_select(angles[i], cfg, geometry, chains).rho();
    });
    Dataset d;
    const auto n = static_cast<Eigen::Index>(angles.size());
    d.inputs.resize(1, n);
    d.targets.resize(geometry.size(), n);
    for (Eigen::Index i = 0; i < n; ++i) {
        d.inputs(0, i) = std::cos(angles[static_cast<std::size_t>(i)]);
        for (int m = 0; m < geometry.size(); ++m)
            d.targets(m, i) = labels[static_cast<std::size_t>(i)][static_cast<std::size_t>(m)];
    }
    return d;
}

Dataset dnn_build_dataset(std::span<const double> angles, const DnnDataSpec& spec, const ArrayGeometry& geometry,
                          const ConfigurationFn& configuration)
{
    require(!angles.empty() && !spec.snr_db.empty() && spec.realizations >= 1, ErrorCode::InvalidArgument,
            "estimator dataset needs angles, SNRs and realizations");
    const std::size_t per_angle = spec.snr_db.size() * static_cast<std::size_t>(spec.realizations);
    const std::size_t total = angles.size() * per_angle;

    std::vector<ArrayGeometry> geometries;
    geometries.reserve(angles.size());
    for (double th : angles) geometries.push_back(compress_geometry(geometry, configuration(th)));

    const auto feats = kernels::parallel::map<Eigen::VectorXd>(total, [&](std::size_t s) {
        const std::size_t a = s / per_angle;
        const std::size_t rest = s % per_angle;
        const double snr = spec.snr_db[rest / static_cast<std::size_t>(spec.realizations)];
        const auto src = SourceEnsemble::equal_power({angles[a]}, snr);
        const auto y = synthesize_snapshots(geometries[a], src, spec.snapshots, derive_seed(spec.seed, s));
        return dnn_input(sample_covariance(y));
    });
    Dataset d;
    d.inputs.resize(feats.front().size(), static_cast<Eigen::Index>(total));
    d.targets.resize(1, static_cast<Eigen::Index>(total));
    for (std::size_t s = 0; s < total; ++s) {
        require(feats[s].size() == d.inputs.rows(), ErrorCode::ShapeMismatch,
                "configurations must all select the same number of antennas");
        d.inputs.col(static_cast<Eigen::Index>(s)) = feats[s];
        d.targets(0, static_cast<Eigen::Index>(s)) = angle_to_target(angles[s / per_angle]);
    }
    return d;
}

SelectionVector top_k_selection(const Eigen::VectorXd& scores, int chains)
{
    const auto m = static_cast<int>(scores.size());
    require(chains >= 1 && chains <= m, ErrorCode::InvalidArgument, "need 1 <= K <= M outputs");
    std::vector<int> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return scores(a) > scores(b); });
    std::vector<std::uint8_t> rho(static_cast<std::size_t>(m), 0);
    for (int i = 0; i < chains; ++i) rho[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = 1;
    return SelectionVector(std::move(rho));
}

SelectionVector asn_infer(const Mlp& asn, double cos_theta, int chains)
{
    Eigen::VectorXd x(1);
    x(0) = cos_theta;
    return top_k_selection(asn.forward(x), chains);
}

double dnn_infer(const Mlp& dnn, const Eigen::VectorXd& features)
{
    require(dnn.outputs() == 1, ErrorCode::ShapeMismatch, "estimator network must have one output");
    return target_to_angle(dnn.forward(features)(0));
}

void save_mlp(std::ostream& out, const Mlp& net)
{
    out << "hdoa-mlp 1\n";
    out << "sizes " << net.sizes().size();
    for (int s : net.sizes()) out << ' ' << s;
    out << "\nhidden relu\noutput " << to_string(net.output_activation()) << '\n';
    out << std::setprecision(17);
    for (int h = 0; h < net.layers(); ++h) {
        const auto& w = net.weights(h);
        out << "weights " << h + 1 << ' ' << w.rows() << ' ' << w.cols() << '\n';
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
            for (Eigen::Index j = 0; j < w.cols(); ++j) out << (j ? " " : "") << w(i, j);
            out << '\n';
        }
        const auto& b = net.biases(h);
        out << "bias " << h + 1 << ' ' << b.size() << '\n';
        for (Eigen::Index i = 0; i < b.size(); ++i) out << (i ? " " : "") << b(i);
        out << '\n';
    }
}

Mlp load_mlp(std::istream& in)
{
    auto expect = [&](const std::string& word) {
        std::string tok;
        in >> tok;
        require(static_cast<bool>(in) && tok == word, ErrorCode::Io, "model file: expected '" + word + "'");
    };
    expect("hdoa-mlp");
    int version = 0;
    in >> version;
    require(version == 1, ErrorCode::Io, "model file: unsupported version");
    expect("sizes");
    std::size_t count = 0;
    in >> count;
    require(static_cast<bool>(in) && count >= 2 && count < 64, ErrorCode::Io, "model file: bad layer count");
    std::vector<int> sizes(count);
    for (auto& s : sizes) in >> s;
    expect("hidden");
    std::string hidden;
    in >> hidden;
    require(hidden == "relu", ErrorCode::Io, "model file: hidden activation must be relu");
    expect("output");
    std::string output;
    in >> output;
    Mlp net = Mlp::zeros(sizes, parse_activation(output));
    for (int h = 0; h < net.layers(); ++h) {
        int layer = 0;
        Eigen::Index rows = 0;
        Eigen::Index cols = 0;
        expect("weights");
        in >> layer >> rows >> cols;
        require(layer == h + 1 && rows == net.weights(h).rows() && cols == net.weights(h).cols(), ErrorCode::Io,
                "model file: weight block shape mismatch");
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) in >> net.weights(h)(i, j);
        expect("bias");
        in >> layer >> rows;
        require(layer == h + 1 && rows == net.biases(h).size(), ErrorCode::Io, "model file: bias shape mismatch");
        for (Eigen::Index i = 0; i < rows; ++i) in >> net.biases(h)(i);
    }
    require(static_cast<bool>(in) && net.finite(), ErrorCode::Io, "model file: truncated or non-finite values");
    return net;
}

void save_mlp(const std::string& path, const Mlp& net)
{
    std::ofstream f(path);
    require(static_cast<bool>(f), ErrorCode::Io, "cannot write " + path);
    save_mlp(f, net);
}

Mlp load_mlp(const std::string& path)
{
    std::ifstream f(path);
    require(static_cast<bool>(f), ErrorCode::Io, "cannot read " + path);
    return load_mlp(f);
}

}  // namespace hdoa
