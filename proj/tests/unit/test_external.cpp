#include <gtest/gtest.h>

#include "cfdr/errors.hpp"
#include "cfdr/external_model.hpp"
#include "cfdr/paired_threshold.hpp"
#include "test_support.hpp"

using namespace cfdr;
using cfdr::testing::TempDir;

namespace {

std::string adapter(const std::string& args) { return std::string(FAKE_ADAPTER_PATH) + " " + args; }

}  // namespace

TEST(ExternalModel, HelloDeclaresDimension) {
    ExternalModelClient client(adapter("echo 3"));
    EXPECT_EQ(client.hello().d, 3u);
    EXPECT_EQ(client.hello().name, "fake-echo");
}

TEST(ExternalModel, EchoReturnsFirstCoordinate) {
    auto client = std::make_shared<ExternalModelClient>(adapter("echo 3"));
    ExternalModel model(client);
    Matrix batch(2, 3);
    batch << 1.5, 2.0, 3.0, -0.25, 9.0, 9.0;
    EXPECT_EQ(model.predict(batch), (std::vector<double>{1.5, -0.25}));
    EXPECT_EQ(external_predict(*client, batch).size(), 2u);
    EXPECT_FALSE(model.concurrent_safe());
}

TEST(ExternalModel, DimensionMismatchBeforePredict) {
    ExternalModelClient client(adapter("echo 3"));
    EXPECT_THROW(client.predict(Matrix::Zero(1, 4)), DimensionMismatch);
}

TEST(ExternalModel, DoublesRoundTripExactly) {
    ExternalModelClient client(adapter("echo 1"));
    Matrix batch(3, 1);
    batch << 0.1, 1.0 / 3.0, -1e-300;
    const auto y = client.predict(batch);
    for (int i = 0; i < 3; ++i) EXPECT_EQ(y[i], batch(i, 0));
}

TEST(ExternalModel, PairedAdapterMatchesInProcess) {
    TempDir dir;
    const auto model = PairedThresholdModel::draw(5, RngStream(7));
    nlohmann::json j;
    j["w"] = model.weights();
    j["threshold"] = 3.0;
    cfdr::testing::write_text(dir.file("w.json"), j.dump());
    ExternalModelClient client(adapter("paired " + dir.file("w.json")));
    std::mt19937_64 eng(1);
    std::normal_distribution<double> n(0.0, 3.5);
    Matrix batch(100, 10);
    for (Eigen::Index i = 0; i < batch.size(); ++i) batch.data()[i] = n(eng);
    EXPECT_EQ(client.predict(batch), model.predict(batch));
}

TEST(ExternalModel, ErrorFrameRaisesModelError) {
    ExternalModelClient client(adapter("error 2"));
    EXPECT_THROW(client.predict(Matrix::Zero(1, 2)), ModelError);
    EXPECT_NE(client.stderr_output().find("exploded"), std::string::npos);
}

TEST(ExternalModel, GarbageRaisesProtocolError) {
    ExternalModelClient client(adapter("garbage 2"));
    EXPECT_THROW(client.predict(Matrix::Zero(1, 2)), ProtocolError);
}

TEST(ExternalModel, WrongIdRaisesProtocolError) {
    ExternalModelClient client(adapter("badid 2"));
    EXPECT_THROW(client.predict(Matrix::Zero(1, 2)), ProtocolError);
}

TEST(ExternalModel, CrashRaisesProtocolError) {
    ExternalModelClient client(adapter("crash 2"));
    EXPECT_THROW(client.predict(Matrix::Zero(1, 2)), ProtocolError);
    EXPECT_NE(client.stderr_output().find("crashing"), std::string::npos);
}

TEST(ExternalModel, SlowAdapterTimesOut) {
    ExternalModelClient client(adapter("slow 2"), std::chrono::milliseconds(300));
    EXPECT_THROW(client.predict(Matrix::Zero(1, 2)), Timeout);
}

TEST(ExternalModel, MissingCommandFailsHandshake) {
    EXPECT_THROW(ExternalModelClient("/nonexistent/adapter-binary"), ProtocolError);
}

TEST(ExternalSampler, ReturnsSubsetSizedDraws) {
    auto client = std::make_shared<ExternalModelClient>(adapter("echo 4"));
    ExternalSampler q(client);
    Engine eng(0);
    const std::vector<double> x{1, 2, 3, 4};
    const std::vector<std::size_t> s{1, 3};
    const Matrix m = q.sample_many(x, s, 5, eng);
    EXPECT_EQ(m.rows(), 5);
    EXPECT_EQ(m.cols(), 2);
    EXPECT_EQ(q.sample(x, s, eng).size(), 2u);
}
