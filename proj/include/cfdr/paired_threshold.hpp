#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cfdr/model.hpp"
#include "cfdr/rng.hpp"

namespace cfdr {

// f(x) = sum_i w_i * 1[|x_i| >= t && |x_{i+p}| >= t] over p feature pairs.
class PairedThresholdModel final : public BlackBoxModel {
public:
    static constexpr double kDefaultThreshold = 3.0;
    static constexpr std::size_t kDefaultHalfDim = 50;

    PairedThresholdModel(std::vector<double> weights, double threshold = kDefaultThreshold);

    // w_i = 0.5 + v_i with v_i ~ Gamma(1, 1).
    static PairedThresholdModel draw(std::size_t half_dim, const RngStream& stream,
                                     double threshold = kDefaultThreshold);

    std::size_t dim() const override { return 2 * weights_.size(); }
    std::string name() const override { return "paired-threshold"; }
    std::vector<double> predict(const Matrix& batch) const override;

    double evaluate(std::span<const double> x) const;

    std::size_t half_dim() const { return weights_.size(); }
    double threshold() const { return threshold_; }
    const std::vector<double>& weights() const { return weights_; }

private:
    std::vector<double> weights_;
    double threshold_;
};

double paired_threshold_predict(const PairedThresholdModel& model, std::span<const double> x);

}  // namespace cfdr
