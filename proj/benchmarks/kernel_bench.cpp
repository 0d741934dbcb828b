#include <benchmark/benchmark.h>

#include "cfdr/kernels.hpp"
#include "cfdr/mlp.hpp"
#include "cfdr/paired_threshold.hpp"
#include "cfdr/runners.hpp"
#include "cfdr/samplers.hpp"

using namespace cfdr;

namespace {

struct PairedSetup {
    PairedThresholdModel model = PairedThresholdModel::draw(50, RngStream(1));
    SyntheticDistribution dist = make_distribution(DistributionKind::Correlated, 100, 0.3, RngStream(2));
    AutoregressiveGaussianQ q{dist.betas};
    Matrix inputs;
    SubsetSpec subsets = SubsetSpec::singletons(100);
    std::vector<double> observed;
    RngStream stream{3};

    explicit PairedSetup(std::size_t n) {
        Engine eng = RngStream(4).engine();
        inputs = gen_dataset(dist, n, eng).x;
        observed = kernels::observed_outputs(model, inputs);
    }
    kernels::PairProblem problem(StatisticKind s) const {
        return {model, q, inputs, subsets, observed, s, stream};
    }
};

struct NetSetup {
    TwoLayerNet net;
    IndependentGaussianQ q;
    Matrix inputs;
    SubsetSpec subsets = SubsetSpec::singletons(25);
    std::vector<double> observed;
    RngStream stream{5};

    explicit NetSetup(std::size_t n) : net(make_net()) {
        SyntheticDistribution dist{DistributionKind::Independent, 0.3, 25, {}};
        Engine eng = RngStream(6).engine();
        inputs = gen_dataset(dist, n, eng).x;
        observed = kernels::observed_outputs(net, inputs);
    }
    static TwoLayerNet make_net() {
        Engine eng = RngStream(7).engine();
        std::normal_distribution<double> n(0.0, 0.2);
        Eigen::MatrixXd w(64, 25);
        for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = n(eng);
        Eigen::VectorXd b(64), v(64);
        for (Eigen::Index i = 0; i < 64; ++i) {
            b(i) = n(eng);
            v(i) = n(eng);
        }
        return TwoLayerNet(w, b, v, 0.0);
    }
    kernels::PairProblem problem(StatisticKind s) const {
        return {net, q, inputs, subsets, observed, s, stream};
    }
};

void BM_IrtPaired(benchmark::State& state, bool parallel) {
    const PairedSetup setup(static_cast<std::size_t>(state.range(0)));
    const auto problem = setup.problem(StatisticKind::OneSided);
    for (auto _ : state) {
        auto r = parallel ? kernels::irt_pairs_parallel(problem, 100) : kernels::irt_pairs_serial(problem, 100);
        benchmark::DoNotOptimize(r.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * 100);
}

void BM_OsftPaired(benchmark::State& state, bool parallel) {
    const PairedSetup setup(static_cast<std::size_t>(state.range(0)));
    const auto problem = setup.problem(StatisticKind::TwoSidedCentered);
    for (auto _ : state) {
        auto r = parallel ? kernels::osft_pairs_parallel(problem) : kernels::osft_pairs_serial(problem);
        benchmark::DoNotOptimize(r.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * 100);
}

void BM_IrtNet(benchmark::State& state, bool parallel) {
    const NetSetup setup(static_cast<std::size_t>(state.range(0)));
    const auto problem = setup.problem(StatisticKind::TwoSidedCentered);
    for (auto _ : state) {
        auto r = parallel ? kernels::irt_pairs_parallel(problem, 100) : kernels::irt_pairs_serial(problem, 100);
        benchmark::DoNotOptimize(r.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * 25);
}

}  // namespace

BENCHMARK_CAPTURE(BM_IrtPaired, serial, false)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_IrtPaired, parallel, true)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_OsftPaired, serial, false)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_OsftPaired, parallel, true)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_IrtNet, serial, false)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_IrtNet, parallel, true)->Arg(100)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
