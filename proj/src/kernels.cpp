#include "cfdr/kernels.hpp"

#include <exception>
#include <optional>

#include "cfdr/runners.hpp"

namespace cfdr::kernels {

namespace {

// Counterfactual draws for one pair: `rows` composites (x~_S, x_-S) and their outputs.
std::vector<double> counterfactual_outputs(const PairProblem& p, std::size_t input, std::size_t subset,
                                           std::size_t rows) {
    const auto m = static_cast<Eigen::Index>(input);
    const Subset& s = p.subsets[subset];
    const std::span<const double> x(p.inputs.row(m).data(), static_cast<std::size_t>(p.inputs.cols()));
    Engine eng = p.stream.derive(input).derive(subset).engine();
    const Matrix draws = p.q.sample_many(x, s, rows, eng);

    Matrix batch = p.inputs.row(m).replicate(static_cast<Eigen::Index>(rows), 1);
    for (std::size_t k = 0; k < s.size(); ++k) {
        batch.col(static_cast<Eigen::Index>(s[k])) = draws.col(static_cast<Eigen::Index>(k));
    }
    return p.model.predict(batch);
}

template <typename Fn>
void for_each_pair_parallel(std::size_t inputs, std::size_t subsets, Fn&& fn) {
    const auto total = static_cast<long long>(inputs * subsets);
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 4)
    for (long long idx = 0; idx < total; ++idx) {
        try {
            const auto u = static_cast<std::size_t>(idx);
            fn(u / subsets, u % subsets, u);
        } catch (...) {
#pragma omp critical(cfdr_kernel_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
}

bool can_parallelize(const PairProblem& p) { return p.model.concurrent_safe() && p.q.concurrent_safe(); }

}  // namespace

std::vector<double> observed_outputs(const BlackBoxModel& model, const Matrix& inputs) {
    return model.predict(inputs);
}

IrtPair irt_pair(const PairProblem& p, std::size_t input, std::size_t subset, std::size_t draws) {
    const bool centered = p.statistic == StatisticKind::TwoSidedCentered;
    const std::size_t offset = centered ? 1 : 0;
    const auto y = counterfactual_outputs(p, input, subset, draws + offset);
    const std::optional<double> center = centered ? std::optional<double>(y[0]) : std::nullopt;

    const double t = apply_statistic(p.statistic, p.observed[input], center);
    std::vector<double> null_stats(draws);
    for (std::size_t k = 0; k < draws; ++k) null_stats[k] = apply_statistic(p.statistic, y[k + offset], center);
    return IrtPair{t, irt_pvalue(t, null_stats).value()};
}

OsftPair osft_pair(const PairProblem& p, std::size_t input, std::size_t subset) {
    const bool centered = p.statistic == StatisticKind::TwoSidedCentered;
    const auto y = counterfactual_outputs(p, input, subset, centered ? 2 : 1);
    const std::optional<double> center = centered ? std::optional<double>(y[0]) : std::nullopt;

    const double t = apply_statistic(p.statistic, p.observed[input], center);
    const double t_tilde = apply_statistic(p.statistic, y.back(), center);
    return OsftPair{t, t_tilde, difference_stat(t, t_tilde).value()};
}

std::vector<IrtPair> irt_pairs_serial(const PairProblem& p, std::size_t draws) {
    const std::size_t n_in = static_cast<std::size_t>(p.inputs.rows());
    const std::size_t n_sub = p.subsets.size();
    std::vector<IrtPair> out;
    out.reserve(n_in * n_sub);
    for (std::size_t m = 0; m < n_in; ++m) {
        for (std::size_t i = 0; i < n_sub; ++i) out.push_back(irt_pair(p, m, i, draws));
    }
    return out;
}

std::vector<OsftPair> osft_pairs_serial(const PairProblem& p) {
    const std::size_t n_in = static_cast<std::size_t>(p.inputs.rows());
    const std::size_t n_sub = p.subsets.size();
    std::vector<OsftPair> out;
    out.reserve(n_in * n_sub);
    for (std::size_t m = 0; m < n_in; ++m) {
        for (std::size_t i = 0; i < n_sub; ++i) out.push_back(osft_pair(p, m, i));
    }
    return out;
}

std::vector<IrtPair> irt_pairs_parallel(const PairProblem& p, std::size_t draws) {
    if (!can_parallelize(p)) return irt_pairs_serial(p, draws);
    const std::size_t n_in = static_cast<std::size_t>(p.inputs.rows());
    std::vector<IrtPair> out(n_in * p.subsets.size());
    for_each_pair_parallel(n_in, p.subsets.size(),
                           [&](std::size_t m, std::size_t i, std::size_t slot) { out[slot] = irt_pair(p, m, i, draws); });
    return out;
}

std::vector<OsftPair> osft_pairs_parallel(const PairProblem& p) {
    if (!can_parallelize(p)) return osft_pairs_serial(p);
    const std::size_t n_in = static_cast<std::size_t>(p.inputs.rows());
    std::vector<OsftPair> out(n_in * p.subsets.size());
    for_each_pair_parallel(n_in, p.subsets.size(),
                           [&](std::size_t m, std::size_t i, std::size_t slot) { out[slot] = osft_pair(p, m, i); });
    return out;
}

}  // namespace cfdr::kernels
