#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cfdr/types.hpp"

namespace cfdr {

// Black-box scalar predictor. predict() is deterministic and preserves batch
// order; multiclass models must be reduced to a scalar by the caller.
class BlackBoxModel {
public:
    virtual ~BlackBoxModel() = default;

    virtual std::size_t dim() const = 0;
    virtual std::string name() const = 0;
    virtual std::vector<double> predict(const Matrix& batch) const = 0;

    // In-process models may be queried from many threads at once.
    virtual bool concurrent_safe() const { return true; }

    double predict_one(std::span<const double> x) const;

protected:
    void check_batch(const Matrix& batch) const;
};

// Models that expose an analytic input gradient (needed by gradient baselines).
class DifferentiableModel : public BlackBoxModel {
public:
    virtual std::vector<double> input_gradient(std::span<const double> x) const = 0;
};

}  // namespace cfdr
