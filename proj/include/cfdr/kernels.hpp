#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cfdr/model.hpp"
#include "cfdr/rng.hpp"
#include "cfdr/samplers.hpp"
#include "cfdr/stats.hpp"

namespace cfdr {
class SubsetSpec;
}

namespace cfdr::kernels {

// Everything needed to evaluate one (input, subset) pair. The pair's engine
// is stream.derive(input).derive(subset); it yields the centering draw first
// (two-sided only), then the null draws.
struct PairProblem {
    const BlackBoxModel& model;
    const ConditionalSampler& q;
    const Matrix& inputs;
    const SubsetSpec& subsets;
    std::span<const double> observed;  // f(x) per input
    StatisticKind statistic;
    const RngStream& stream;
};

struct IrtPair {
    double statistic;
    double pvalue;
};

struct OsftPair {
    double statistic;
    double null_statistic;
    double z;
};

// f(x_m) for every input row.
std::vector<double> observed_outputs(const BlackBoxModel& model, const Matrix& inputs);

IrtPair irt_pair(const PairProblem& problem, std::size_t input, std::size_t subset, std::size_t draws);
OsftPair osft_pair(const PairProblem& problem, std::size_t input, std::size_t subset);

// Reference implementations: plain loops in (input, subset) order.
std::vector<IrtPair> irt_pairs_serial(const PairProblem& problem, std::size_t draws);
std::vector<OsftPair> osft_pairs_serial(const PairProblem& problem);

// OpenMP over pairs. Each pair writes only its own slot and owns its engine,
// so output is identical to the serial kernels for any thread count.
std::vector<IrtPair> irt_pairs_parallel(const PairProblem& problem, std::size_t draws);
std::vector<OsftPair> osft_pairs_parallel(const PairProblem& problem);

}  // namespace cfdr::kernels
