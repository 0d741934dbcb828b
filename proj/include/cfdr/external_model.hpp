#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfdr/model.hpp"
#include "cfdr/samplers.hpp"

namespace cfdr {

// Client for an out-of-process adapter speaking newline-delimited JSON over
// the child's stdin/stdout:
//
//   -> {"id": n, "op": "hello"}                       <- {"id": n, "name": s, "d": u}
//   -> {"id": n, "op": "predict", "x": [[...], ...]}  <- {"id": n, "y": [...]}
//   -> {"id": n, "op": "sample_conditional", "x": [...], "subset": [...], "n": u}
//                                                     <- {"id": n, "samples": [[...], ...]}
//   <- {"id": n, "error": s} on failure
//
// The handshake runs in the constructor. One request is in flight at a time;
// the client is not safe for concurrent use.
class ExternalModelClient {
public:
    struct Hello {
        std::string name;
        std::size_t d = 0;
    };

    explicit ExternalModelClient(const std::string& command,
                                 std::chrono::milliseconds timeout = std::chrono::seconds(60));
    ExternalModelClient(const ExternalModelClient&) = delete;
    ExternalModelClient& operator=(const ExternalModelClient&) = delete;
    ~ExternalModelClient();

    const Hello& hello() const { return hello_; }

    std::vector<double> predict(const Matrix& batch);
    Matrix sample_conditional(std::span<const double> x, std::span<const std::size_t> subset, std::size_t n);

    // Everything the adapter has written to stderr so far.
    std::string stderr_output() const;

private:
    nlohmann::json request(nlohmann::json frame);
    void send_line(const std::string& line);
    std::string read_line();
    void shutdown() noexcept;

    std::chrono::milliseconds timeout_;
    int pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    int stderr_fd_ = -1;
    std::string stderr_path_;
    std::string buffer_;
    std::uint64_t next_id_ = 1;
    Hello hello_;
};

std::vector<double> external_predict(ExternalModelClient& client, const Matrix& batch);

class ExternalModel final : public BlackBoxModel {
public:
    explicit ExternalModel(std::shared_ptr<ExternalModelClient> client) : client_(std::move(client)) {}

    std::size_t dim() const override { return client_->hello().d; }
    std::string name() const override { return client_->hello().name; }
    std::vector<double> predict(const Matrix& batch) const override;
    bool concurrent_safe() const override { return false; }

private:
    std::shared_ptr<ExternalModelClient> client_;
};

// Counterfactual draws delegated to the adapter's sample_conditional op. The
// engine argument is ignored; reproducibility is the adapter's responsibility.
class ExternalSampler final : public ConditionalSampler {
public:
    explicit ExternalSampler(std::shared_ptr<ExternalModelClient> client) : client_(std::move(client)) {}

    std::string name() const override { return "external"; }
    Matrix sample_many(std::span<const double> x, std::span<const std::size_t> subset, std::size_t n,
                       Engine& eng) const override;
    bool concurrent_safe() const override { return false; }

protected:
    void draw(std::span<const double> x, std::span<const std::size_t> subset, Engine& eng,
              std::span<double> out) const override;

private:
    std::shared_ptr<ExternalModelClient> client_;
};

}  // namespace cfdr
