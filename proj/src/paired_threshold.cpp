#include "cfdr/paired_threshold.hpp"

#include <cmath>
#include <random>

#include "cfdr/errors.hpp"

namespace cfdr {

PairedThresholdModel::PairedThresholdModel(std::vector<double> weights, double threshold)
    : weights_(std::move(weights)), threshold_(threshold) {
    if (weights_.empty()) throw InvalidDimension("paired threshold model needs at least one pair");
    if (!(threshold_ >= 0.0) || !std::isfinite(threshold_)) throw UsageError("threshold must be finite and >= 0");
    for (double w : weights_) {
        if (!std::isfinite(w)) throw UsageError("paired threshold weights must be finite");
    }
}

PairedThresholdModel PairedThresholdModel::draw(std::size_t half_dim, const RngStream& stream, double threshold) {
    Engine eng = stream.engine();
    std::gamma_distribution<double> gamma(1.0, 1.0);
    std::vector<double> w(half_dim);
    for (auto& wi : w) wi = 0.5 + gamma(eng);
    return PairedThresholdModel(std::move(w), threshold);
}

double PairedThresholdModel::evaluate(std::span<const double> x) const {
    const std::size_t p = weights_.size();
    if (x.size() != 2 * p) {
        throw DimensionMismatch("paired threshold model expects d=" + std::to_string(2 * p) + ", got " +
                                std::to_string(x.size()));
    }
    double y = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
        if (std::fabs(x[i]) >= threshold_ && std::fabs(x[i + p]) >= threshold_) y += weights_[i];
    }
    return y;
}

std::vector<double> PairedThresholdModel::predict(const Matrix& batch) const {
    check_batch(batch);
    std::vector<double> out(static_cast<std::size_t>(batch.rows()));
    for (Eigen::Index r = 0; r < batch.rows(); ++r) {
        out[static_cast<std::size_t>(r)] = evaluate(std::span<const double>(batch.row(r).data(), dim()));
    }
    return out;
}

double paired_threshold_predict(const PairedThresholdModel& model, std::span<const double> x) {
    return model.evaluate(x);
}

}  // namespace cfdr
