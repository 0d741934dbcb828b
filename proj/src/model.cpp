#include "cfdr/model.hpp"

#include "cfdr/errors.hpp"

namespace cfdr {

double BlackBoxModel::predict_one(std::span<const double> x) const {
    Matrix row(1, static_cast<Eigen::Index>(x.size()));
    for (std::size_t j = 0; j < x.size(); ++j) row(0, static_cast<Eigen::Index>(j)) = x[j];
    return predict(row).front();
}

void BlackBoxModel::check_batch(const Matrix& batch) const {
    if (static_cast<std::size_t>(batch.cols()) != dim()) {
        throw DimensionMismatch(name() + " expects d=" + std::to_string(dim()) + ", got " +
                                std::to_string(batch.cols()));
    }
}

}  // namespace cfdr
