#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace cfdr {

// Row-major batch of feature vectors: one input per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Inputs with a per-(sample, feature) flag recording which mixture component
// generated the value (1 = the "interesting" N(4,1) branch).
struct Dataset {
    Matrix x;
    std::vector<std::uint8_t> flags;  // row-major, same shape as x

    std::size_t samples() const { return static_cast<std::size_t>(x.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(x.cols()); }
    bool flag(std::size_t sample, std::size_t feature) const { return flags[sample * dim() + feature] != 0; }
};

}  // namespace cfdr

namespace cfdr {

// Feature indices replaced together in one counterfactual.
using Subset = std::vector<std::size_t>;

}  // namespace cfdr
