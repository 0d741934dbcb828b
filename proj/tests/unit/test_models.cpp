#include <gtest/gtest.h>

#include <numeric>

#include "cfdr/errors.hpp"
#include "cfdr/mlp.hpp"
#include "cfdr/paired_threshold.hpp"
#include "cfdr/samplers.hpp"

using namespace cfdr;

namespace {

const TrainedNet& independent_net() {
    static const TrainedNet net = [] {
        const auto dist = make_distribution(DistributionKind::Independent, 25, 0.3, RngStream(1));
        return mlp_train(dist, MlpConfig{}, RngStream(42));
    }();
    return net;
}

// True if a +-h step along any coordinate moves some hidden pre-activation across zero.
bool near_kink(const TwoLayerNet& net, const std::vector<double>& x, double h) {
    const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    const Eigen::VectorXd pre = net.w_in() * xv + net.b_in();
    for (Eigen::Index k = 0; k < pre.size(); ++k) {
        if (std::fabs(pre(k)) <= net.w_in().row(k).cwiseAbs().maxCoeff() * h * 1.01) return true;
    }
    return false;
}

}  // namespace

TEST(PairedThreshold, ZeroInputGivesZero) {
    PairedThresholdModel m({1.0, 2.0, 3.0});
    EXPECT_EQ(m.predict_one(std::vector<double>(6, 0.0)), 0.0);
}

TEST(PairedThreshold, HandEvaluation) {
    PairedThresholdModel m({1.0, 2.0}, 3.0);
    EXPECT_EQ(paired_threshold_predict(m, std::vector<double>{3.5, 0.1, -4.0, 3.2}), 1.0);
}

TEST(PairedThreshold, BoundaryInclusive) {
    PairedThresholdModel m({1.5}, 3.0);
    EXPECT_EQ(paired_threshold_predict(m, std::vector<double>{3.0, -3.0}), 1.5);
}

TEST(PairedThreshold, DimensionChecked) {
    PairedThresholdModel m({1.0, 2.0});
    EXPECT_THROW(paired_threshold_predict(m, std::vector<double>{1, 2, 3}), DimensionMismatch);
    EXPECT_THROW(m.predict(Matrix::Zero(2, 5)), DimensionMismatch);
}

TEST(PairedThreshold, DrawnWeightsExceedHalf) {
    const auto m = PairedThresholdModel::draw(5000, RngStream(3));
    const auto& w = m.weights();
    EXPECT_TRUE(std::all_of(w.begin(), w.end(), [](double v) { return v > 0.5; }));
    const double mean = std::accumulate(w.begin(), w.end(), 0.0) / w.size();
    EXPECT_NEAR(mean, 1.5, 0.05);
}

TEST(PairedThreshold, SignFlipInvariance) {
    const auto m = PairedThresholdModel::draw(10, RngStream(4));
    std::mt19937_64 eng(1);
    std::normal_distribution<double> n(0.0, 4.0);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> x(20);
        for (auto& v : x) v = n(eng);
        const double y = m.evaluate(x);
        x[rep % 20] = -x[rep % 20];
        EXPECT_EQ(m.evaluate(x), y);
    }
}

TEST(PairedThreshold, OutputChangesIffPartnerActive) {
    const auto m = PairedThresholdModel::draw(4, RngStream(5));
    std::mt19937_64 eng(2);
    std::normal_distribution<double> n(0.0, 4.0);
    for (int rep = 0; rep < 500; ++rep) {
        std::vector<double> x(8);
        for (auto& v : x) v = n(eng);
        const std::size_t i = rep % 8;
        const std::size_t partner = i < 4 ? i + 4 : i - 4;
        std::vector<double> lo = x, hi = x;
        lo[i] = 1.0;
        hi[i] = 5.0;
        EXPECT_EQ(m.evaluate(lo) != m.evaluate(hi), std::fabs(x[partner]) >= 3.0);
    }
}

TEST(PairedThreshold, OutputBoundedBySumOfWeights) {
    const auto m = PairedThresholdModel::draw(3, RngStream(6));
    const double total = std::accumulate(m.weights().begin(), m.weights().end(), 0.0);
    EXPECT_DOUBLE_EQ(m.evaluate(std::vector<double>(6, 10.0)), total);
}

TEST(TwoLayerNet, ConstantNet) {
    const auto net = TwoLayerNet::constant(4, 8, 2.5);
    const auto y = net.predict(Matrix::Random(5, 4));
    for (double v : y) EXPECT_EQ(v, 2.5);
    const auto g = net.input_gradient(std::vector<double>{1, 2, 3, 4});
    for (double v : g) EXPECT_EQ(v, 0.0);
}

TEST(TwoLayerNet, SingleUnitChainRule) {
    // y = 3 * relu(2 x0 - x1 + 0.5) - 1
    Eigen::MatrixXd w(1, 2);
    w << 2.0, -1.0;
    const TwoLayerNet net(w, Eigen::VectorXd::Constant(1, 0.5), Eigen::VectorXd::Constant(1, 3.0), -1.0);
    EXPECT_DOUBLE_EQ(mlp_predict(net, std::vector<double>{1.0, 0.5}), 3.0 * 2.0 - 1.0);
    EXPECT_EQ(mlp_input_gradient(net, std::vector<double>{1.0, 0.5}), (std::vector<double>{6.0, -3.0}));
    EXPECT_EQ(mlp_input_gradient(net, std::vector<double>{-1.0, 0.5}), (std::vector<double>{0.0, 0.0}));
}

TEST(TwoLayerNet, RejectsNonFiniteParameters) {
    Eigen::MatrixXd w(1, 1);
    w << std::nan("");
    EXPECT_THROW(TwoLayerNet(w, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1), 0.0), Error);
}

TEST(MlpTrain, ZeroLabelsFitZero) {
    Matrix x = Matrix::Zero(2000, 5);
    std::vector<double> y(2000, 0.0);
    MlpConfig cfg;
    cfg.max_epochs = 3;
    Engine eng = RngStream(1).engine();
    const auto trained = train_mlp(x, y, x.topRows(200), std::span(y).first(200), cfg, eng);
    EXPECT_LT(std::fabs(mlp_predict(trained.net, std::vector<double>(5, 0.0))), 1e-2);
}

TEST(MlpTrain, ConvergesOnIndependentDistribution) {
    EXPECT_LT(independent_net().heldout_relative_mse, 0.01);
}

TEST(MlpTrain, SpotCheckAgainstLabel) {
    const auto& net = independent_net().net;
    EXPECT_NEAR(mlp_predict(net, std::vector<double>(25, 2.0)), 50.0, 2.0);
    std::vector<double> x(25, 0.0);
    for (int i = 0; i < 10; ++i) x[i] = (i % 2 ? -1.0 : 1.0) * 4.0;
    for (int i = 10; i < 25; ++i) x[i] = 2.0 / 3.0 * (i % 2 ? 1.0 : -1.0);
    EXPECT_NEAR(mlp_predict(net, x), 50.0, 2.0);
}

TEST(MlpTrain, NetIsNotConstant) {
    const auto& net = independent_net().net;
    std::vector<double> x(25, 0.7), x2(25, 1.4);
    EXPECT_NE(mlp_predict(net, x), mlp_predict(net, x2));
}

TEST(MlpTrain, BatchPredictIsDeterministic) {
    const auto& net = independent_net().net;
    Matrix batch(2, 25);
    batch.row(0).setConstant(0.3);
    batch.row(1).setConstant(0.3);
    const auto y = net.predict(batch);
    EXPECT_EQ(y[0], y[1]);
}

TEST(MlpTrain, DeterministicPerSeed) {
    const auto dist = make_distribution(DistributionKind::Independent, 5, 0.3, RngStream(1));
    MlpConfig cfg;
    cfg.train_size = 3000;
    cfg.heldout_size = 500;
    cfg.max_epochs = 2;
    cfg.convergence_threshold = 10.0;
    const auto a = mlp_train(dist, cfg, RngStream(9));
    const auto b = mlp_train(dist, cfg, RngStream(9));
    EXPECT_TRUE(a.net.w_in() == b.net.w_in());
    EXPECT_EQ(a.net.b_out(), b.net.b_out());
}

TEST(MlpTrain, NonConvergenceReportsFinalError) {
    const auto dist = make_distribution(DistributionKind::Independent, 25, 0.3, RngStream(1));
    MlpConfig cfg;
    cfg.train_size = 200;
    cfg.heldout_size = 200;
    cfg.max_epochs = 1;
    cfg.convergence_threshold = 1e-9;
    try {
        mlp_train(dist, cfg, RngStream(2));
        FAIL() << "expected TrainingDidNotConverge";
    } catch (const TrainingDidNotConverge& e) {
        EXPECT_GT(e.final_relative_mse(), 1e-9);
    }
}

TEST(MlpGradient, MatchesCentralDifferences) {
    const auto& net = independent_net().net;
    const double h = 1e-4;
    std::mt19937_64 eng(77);
    std::normal_distribution<double> n(1.0, 2.0);
    int checked = 0;
    while (checked < 100) {
        std::vector<double> x(25);
        for (auto& v : x) v = n(eng);
        if (near_kink(net, x, h)) continue;
        const auto g = mlp_input_gradient(net, x);
        for (std::size_t j = 0; j < 25; ++j) {
            auto xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            const double fd = (mlp_predict(net, xp) - mlp_predict(net, xm)) / (2.0 * h);
            const double scale = std::max({std::fabs(fd), std::fabs(g[j]), 1e-3});
            EXPECT_LE(std::fabs(fd - g[j]) / scale, 1e-5) << "coordinate " << j;
        }
        ++checked;
    }
}
