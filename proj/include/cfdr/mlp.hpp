#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cfdr/model.hpp"
#include "cfdr/rng.hpp"
#include "cfdr/samplers.hpp"

namespace cfdr {

// y = w_out . relu(W_in x + b_in) + b_out
class TwoLayerNet final : public DifferentiableModel {
public:
    using Weights = Eigen::MatrixXd;  // hidden x d
    using Vec = Eigen::VectorXd;

    TwoLayerNet(Weights w_in, Vec b_in, Vec w_out, double b_out);

    // Every parameter zero except the output bias.
    static TwoLayerNet constant(std::size_t d, std::size_t hidden, double b_out);

    std::size_t dim() const override { return static_cast<std::size_t>(w_in_.cols()); }
    std::size_t hidden() const { return static_cast<std::size_t>(w_in_.rows()); }
    std::string name() const override { return "two-layer-net"; }

    std::vector<double> predict(const Matrix& batch) const override;
    std::vector<double> input_gradient(std::span<const double> x) const override;

    const Weights& w_in() const { return w_in_; }
    const Vec& b_in() const { return b_in_; }
    const Vec& w_out() const { return w_out_; }
    double b_out() const { return b_out_; }

private:
    Weights w_in_;
    Vec b_in_;
    Vec w_out_;
    double b_out_;
};

struct MlpConfig {
    std::size_t hidden = 64;
    std::size_t train_size = 100000;
    std::size_t heldout_size = 10000;
    std::size_t batch_size = 64;
    std::size_t max_epochs = 60;
    double learning_rate = 2e-3;
    double lr_decay = 0.95;  // per epoch
    // Held-out MSE / Var(y) must end below this ("near-zero test error").
    double convergence_threshold = 0.01;
    // Training stops early once held-out relative MSE drops below this.
    double early_stop = 5e-4;
};

struct TrainedNet {
    TwoLayerNet net;
    double heldout_relative_mse;
    std::size_t epochs;
};

// MSE / Var(y), or plain MSE when the targets are constant.
double relative_mse(const BlackBoxModel& model, const Matrix& x, std::span<const double> y);

// Adam on mean squared error with per-epoch step decay. Inputs and targets are
// standardized for training and the affine maps are folded back into the
// returned weights. Throws TrainingDidNotConverge if the held-out relative MSE
// is not below cfg.convergence_threshold after max_epochs.
TrainedNet train_mlp(const Matrix& x_train, std::span<const double> y_train, const Matrix& x_heldout,
                     std::span<const double> y_heldout, const MlpConfig& cfg, Engine& eng);

// Trains on y = sum_i |x_i| with inputs drawn from `dist`.
TrainedNet mlp_train(const SyntheticDistribution& dist, const MlpConfig& cfg, const RngStream& stream);

double mlp_predict(const TwoLayerNet& net, std::span<const double> x);
std::vector<double> mlp_input_gradient(const TwoLayerNet& net, std::span<const double> x);

}  // namespace cfdr
