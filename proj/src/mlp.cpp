#include "cfdr/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "cfdr/errors.hpp"

namespace cfdr {

TwoLayerNet::TwoLayerNet(Weights w_in, Vec b_in, Vec w_out, double b_out)
    : w_in_(std::move(w_in)), b_in_(std::move(b_in)), w_out_(std::move(w_out)), b_out_(b_out) {
    if (w_in_.rows() == 0 || w_in_.cols() == 0) throw InvalidDimension("network needs d >= 1 and hidden >= 1");
    if (b_in_.size() != w_in_.rows() || w_out_.size() != w_in_.rows()) {
        throw DimensionMismatch("inconsistent layer shapes");
    }
    if (!w_in_.allFinite() || !b_in_.allFinite() || !w_out_.allFinite() || !std::isfinite(b_out_)) {
        throw NonFiniteOutput("network parameters must be finite");
    }
}

TwoLayerNet TwoLayerNet::constant(std::size_t d, std::size_t hidden, double b_out) {
    const auto h = static_cast<Eigen::Index>(hidden);
    return TwoLayerNet(Weights::Zero(h, static_cast<Eigen::Index>(d)), Vec::Zero(h), Vec::Zero(h), b_out);
}

std::vector<double> TwoLayerNet::predict(const Matrix& batch) const {
    check_batch(batch);
    Eigen::MatrixXd pre = batch * w_in_.transpose();
    pre.rowwise() += b_in_.transpose();
    const Eigen::VectorXd y = pre.cwiseMax(0.0) * w_out_;
    std::vector<double> out(static_cast<std::size_t>(y.size()));
    for (Eigen::Index r = 0; r < y.size(); ++r) out[static_cast<std::size_t>(r)] = y(r) + b_out_;
    return out;
}

std::vector<double> TwoLayerNet::input_gradient(std::span<const double> x) const {
    if (x.size() != dim()) {
        throw DimensionMismatch("network expects d=" + std::to_string(dim()) + ", got " + std::to_string(x.size()));
    }
    const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    const Eigen::VectorXd pre = w_in_ * xv + b_in_;
    const Eigen::VectorXd gate = (pre.array() > 0.0).cast<double>() * w_out_.array();
    const Eigen::VectorXd g = w_in_.transpose() * gate;
    return std::vector<double>(g.data(), g.data() + g.size());
}

double mlp_predict(const TwoLayerNet& net, std::span<const double> x) { return net.predict_one(x); }

std::vector<double> mlp_input_gradient(const TwoLayerNet& net, std::span<const double> x) {
    return net.input_gradient(x);
}

double relative_mse(const BlackBoxModel& model, const Matrix& x, std::span<const double> y) {
    const auto pred = model.predict(x);
    const double n = static_cast<double>(y.size());
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double mse = 0.0;
    double var = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        mse += (pred[i] - y[i]) * (pred[i] - y[i]);
        var += (y[i] - mean) * (y[i] - mean);
    }
    mse /= n;
    var /= n;
    return var > 0.0 ? mse / var : mse;
}

namespace {

struct Adam {
    explicit Adam(Eigen::Index rows, Eigen::Index cols) : m(Eigen::MatrixXd::Zero(rows, cols)), v(m) {}

    void step(Eigen::MatrixXd& param, const Eigen::MatrixXd& grad, double lr, long t) {
        constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        m = b1 * m + (1 - b1) * grad;
        v = b2 * v + (1 - b2) * grad.cwiseProduct(grad);
        const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
        const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
        param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
    }

    Eigen::MatrixXd m, v;
};

struct Standardizer {
    Eigen::RowVectorXd mean;
    Eigen::RowVectorXd scale;
};

Standardizer fit_columns(const Matrix& x) {
    Standardizer s;
    s.mean = x.colwise().mean();
    s.scale = ((x.rowwise() - s.mean).array().square().colwise().sum() / static_cast<double>(x.rows())).sqrt();
    for (Eigen::Index j = 0; j < s.scale.size(); ++j) {
        if (!(s.scale(j) > 1e-12)) s.scale(j) = 1.0;
    }
    return s;
}

}  // namespace

TrainedNet train_mlp(const Matrix& x_train, std::span<const double> y_train, const Matrix& x_heldout,
                     std::span<const double> y_heldout, const MlpConfig& cfg, Engine& eng) {
    const Eigen::Index n = x_train.rows();
    const Eigen::Index d = x_train.cols();
    const auto hidden = static_cast<Eigen::Index>(cfg.hidden);
    if (n == 0 || d == 0 || static_cast<std::size_t>(n) != y_train.size()) {
        throw DimensionMismatch("training inputs and labels disagree");
    }
    if (x_heldout.cols() != d || static_cast<std::size_t>(x_heldout.rows()) != y_heldout.size() ||
        x_heldout.rows() == 0) {
        throw DimensionMismatch("held-out inputs and labels disagree");
    }

    const Standardizer xs = fit_columns(x_train);
    const Eigen::MatrixXd xz = ((x_train.rowwise() - xs.mean).array().rowwise() / xs.scale.array()).matrix();
    const Eigen::Map<const Eigen::VectorXd> yv(y_train.data(), n);
    const double y_mean = yv.mean();
    double y_scale = std::sqrt((yv.array() - y_mean).square().mean());
    if (!(y_scale > 1e-12)) y_scale = 1.0;
    const Eigen::VectorXd yz = (yv.array() - y_mean) / y_scale;

    // He initialization for the ReLU layer.
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd w1(hidden, d);
    for (Eigen::Index i = 0; i < w1.size(); ++i) w1.data()[i] = normal(eng) * std::sqrt(2.0 / static_cast<double>(d));
    Eigen::MatrixXd b1 = Eigen::MatrixXd::Zero(hidden, 1);
    Eigen::MatrixXd w2(hidden, 1);
    for (Eigen::Index i = 0; i < hidden; ++i) w2(i) = normal(eng) / std::sqrt(static_cast<double>(hidden));
    Eigen::MatrixXd b2 = Eigen::MatrixXd::Zero(1, 1);

    Adam opt_w1(hidden, d), opt_b1(hidden, 1), opt_w2(hidden, 1), opt_b2(1, 1);

    auto fold = [&]() {
        // Undo the standardization: x_z = (x - mu) / s, y = y_scale * y_z + y_mean.
        Eigen::MatrixXd w_in = w1.array().rowwise() / xs.scale.array();
        Eigen::VectorXd b_in = b1.col(0) - w_in * xs.mean.transpose();
        Eigen::VectorXd w_out = w2.col(0) * y_scale;
        return TwoLayerNet(std::move(w_in), std::move(b_in), std::move(w_out), b2(0, 0) * y_scale + y_mean);
    };

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const auto batch = static_cast<Eigen::Index>(std::max<std::size_t>(1, cfg.batch_size));
    long step = 0;
    double lr = cfg.learning_rate;
    double last = std::numeric_limits<double>::infinity();
    std::size_t epochs = 0;

    Eigen::MatrixXd xb(batch, d);
    Eigen::VectorXd tb(batch);
    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), eng);
        for (Eigen::Index start = 0; start < n; start += batch) {
            const Eigen::Index b = std::min(batch, n - start);
            xb.resize(b, d);
            tb.resize(b);
            for (Eigen::Index r = 0; r < b; ++r) {
                const Eigen::Index src = order[static_cast<std::size_t>(start + r)];
                xb.row(r) = xz.row(src);
                tb(r) = yz(src);
            }
            Eigen::MatrixXd pre = xb * w1.transpose();
            pre.rowwise() += b1.col(0).transpose();
            const Eigen::MatrixXd act = pre.cwiseMax(0.0);
            const Eigen::VectorXd out = (act * w2).col(0).array() + b2(0, 0);
            const Eigen::VectorXd dy = 2.0 * (out - tb) / static_cast<double>(b);

            const Eigen::MatrixXd g_w2 = act.transpose() * dy;
            Eigen::MatrixXd g_b2(1, 1);
            g_b2(0, 0) = dy.sum();
            const Eigen::MatrixXd d_act =
                ((dy * w2.col(0).transpose()).array() * (pre.array() > 0.0).cast<double>()).matrix();
            const Eigen::MatrixXd g_w1 = d_act.transpose() * xb;
            const Eigen::MatrixXd g_b1 = d_act.colwise().sum().transpose();

            ++step;
            opt_w1.step(w1, g_w1, lr, step);
            opt_b1.step(b1, g_b1, lr, step);
            opt_w2.step(w2, g_w2, lr, step);
            opt_b2.step(b2, g_b2, lr, step);
        }
        lr *= cfg.lr_decay;
        epochs = epoch + 1;
        last = relative_mse(fold(), x_heldout, y_heldout);
        if (last < cfg.early_stop) break;
    }

    if (!(last < cfg.convergence_threshold)) {
        throw TrainingDidNotConverge("held-out relative MSE " + std::to_string(last) + " did not reach " +
                                         std::to_string(cfg.convergence_threshold) + " within " +
                                         std::to_string(cfg.max_epochs) + " epochs",
                                     last);
    }
    return TrainedNet{fold(), last, epochs};
}

TrainedNet mlp_train(const SyntheticDistribution& dist, const MlpConfig& cfg, const RngStream& stream) {
    auto label = [](const Matrix& x) {
        std::vector<double> y(static_cast<std::size_t>(x.rows()));
        for (Eigen::Index r = 0; r < x.rows(); ++r) y[static_cast<std::size_t>(r)] = x.row(r).cwiseAbs().sum();
        return y;
    };
    Engine data_eng = stream.derive("train-data").engine();
    const Dataset train = gen_dataset(dist, cfg.train_size, data_eng);
    Engine held_eng = stream.derive("heldout-data").engine();
    const Dataset held = gen_dataset(dist, cfg.heldout_size, held_eng);
    Engine fit_eng = stream.derive("fit").engine();
    return train_mlp(train.x, label(train.x), held.x, label(held.x), cfg, fit_eng);
}

}  // namespace cfdr
