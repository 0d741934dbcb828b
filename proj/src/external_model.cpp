#include "cfdr/external_model.hpp"

#include <cerrno>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <fcntl.h>
#include <fstream>
#include <poll.h>
#include <spawn.h>
#include <sstream>
#include <sys/wait.h>
#include <thread>
#include <unistd.h>

#include "cfdr/errors.hpp"

extern char** environ;

namespace cfdr {

namespace {

void close_fd(int& fd) noexcept {
    if (fd >= 0) {
        ::close(fd);
        fd = -1;
    }
}

}  // namespace

ExternalModelClient::ExternalModelClient(const std::string& command, std::chrono::milliseconds timeout)
    : timeout_(timeout) {
    // A dead adapter must surface as ProtocolError, not kill us on write.
    std::signal(SIGPIPE, SIG_IGN);

    int in_pipe[2];
    int out_pipe[2];
    if (::pipe(in_pipe) != 0) throw ProtocolError(std::string("pipe: ") + std::strerror(errno));
    if (::pipe(out_pipe) != 0) {
        ::close(in_pipe[0]);
        ::close(in_pipe[1]);
        throw ProtocolError(std::string("pipe: ") + std::strerror(errno));
    }
    char tmpl[] = "/tmp/cfdr-adapter-stderr-XXXXXX";
    stderr_fd_ = ::mkstemp(tmpl);
    if (stderr_fd_ >= 0) stderr_path_ = tmpl;

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
    if (stderr_fd_ >= 0) posix_spawn_file_actions_adddup2(&actions, stderr_fd_, STDERR_FILENO);
    posix_spawn_file_actions_addclose(&actions, in_pipe[1]);
    posix_spawn_file_actions_addclose(&actions, out_pipe[0]);

    std::string shell = "/bin/sh";
    std::string flag = "-c";
    std::string cmd = command;
    char* argv[] = {shell.data(), flag.data(), cmd.data(), nullptr};
    pid_t pid = -1;
    const int rc = ::posix_spawn(&pid, "/bin/sh", &actions, nullptr, argv, environ);
    posix_spawn_file_actions_destroy(&actions);
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
    ::fcntl(to_child_, F_SETFD, FD_CLOEXEC);
    ::fcntl(from_child_, F_SETFD, FD_CLOEXEC);
    if (rc != 0) {
        shutdown();
        throw ProtocolError("failed to launch adapter '" + command + "': " + std::strerror(rc));
    }
    pid_ = pid;

    try {
        const nlohmann::json reply = request({{"op", "hello"}});
        if (!reply.contains("d") || !reply["d"].is_number_unsigned()) {
            throw ProtocolError("hello reply lacks an unsigned 'd'");
        }
        hello_.d = reply["d"].get<std::size_t>();
        if (hello_.d == 0) throw ProtocolError("adapter declared d = 0");
        hello_.name = reply.contains("name") && reply["name"].is_string() ? reply["name"].get<std::string>()
                                                                          : std::string("external");
    } catch (...) {
        shutdown();
        throw;
    }
}

ExternalModelClient::~ExternalModelClient() { shutdown(); }

void ExternalModelClient::shutdown() noexcept {
    close_fd(to_child_);
    if (pid_ > 0) {
        int status = 0;
        bool reaped = false;
        for (int i = 0; i < 100 && !reaped; ++i) {
            if (::waitpid(pid_, &status, WNOHANG) == pid_) {
                reaped = true;
            } else {
                std::this_thread::sleep_for(std::chrono::milliseconds(10));
            }
        }
        if (!reaped) {
            ::kill(pid_, SIGKILL);
            ::waitpid(pid_, &status, 0);
        }
        pid_ = -1;
    }
    close_fd(from_child_);
    close_fd(stderr_fd_);
    if (!stderr_path_.empty()) {
        ::unlink(stderr_path_.c_str());
        stderr_path_.clear();
    }
}

std::string ExternalModelClient::stderr_output() const {
    if (stderr_path_.empty()) return {};
    std::ifstream in(stderr_path_);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void ExternalModelClient::send_line(const std::string& line) {
    if (to_child_ < 0) throw ProtocolError("adapter connection is closed");
    std::string data = line + '\n';
    const char* p = data.data();
    std::size_t left = data.size();
    while (left > 0) {
        const ssize_t n = ::write(to_child_, p, left);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw ProtocolError(std::string("adapter write failed: ") + std::strerror(errno));
        }
        p += n;
        left -= static_cast<std::size_t>(n);
    }
}

std::string ExternalModelClient::read_line() {
    const auto deadline = std::chrono::steady_clock::now() + timeout_;
    for (;;) {
        const auto nl = buffer_.find('\n');
        if (nl != std::string::npos) {
            std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            return line;
        }
        const auto remaining =
            std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (remaining.count() <= 0) throw Timeout("adapter did not reply within " + std::to_string(timeout_.count()) + " ms");
        pollfd pfd{from_child_, POLLIN, 0};
        const int rc = ::poll(&pfd, 1, static_cast<int>(remaining.count()));
        if (rc < 0) {
            if (errno == EINTR) continue;
            throw ProtocolError(std::string("poll failed: ") + std::strerror(errno));
        }
        if (rc == 0) continue;
        char chunk[65536];
        const ssize_t n = ::read(from_child_, chunk, sizeof(chunk));
        if (n < 0) {
            if (errno == EINTR) continue;
            throw ProtocolError(std::string("adapter read failed: ") + std::strerror(errno));
        }
        if (n == 0) throw ProtocolError("adapter closed its output stream");
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

nlohmann::json ExternalModelClient::request(nlohmann::json frame) {
    const std::uint64_t id = next_id_++;
    frame["id"] = id;
    send_line(frame.dump());
    const std::string line = read_line();
    nlohmann::json reply;
    try {
        reply = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
        throw ProtocolError("malformed frame from adapter: " + line.substr(0, 200));
    }
    if (!reply.is_object()) throw ProtocolError("adapter frame is not a JSON object");
    if (reply.contains("error")) {
        const auto& e = reply["error"];
        throw ModelError("adapter error: " + (e.is_string() ? e.get<std::string>() : e.dump()));
    }
    if (!reply.contains("id") || !reply["id"].is_number_unsigned() || reply["id"].get<std::uint64_t>() != id) {
        throw ProtocolError("adapter reply id does not echo request id " + std::to_string(id));
    }
    return reply;
}

std::vector<double> ExternalModelClient::predict(const Matrix& batch) {
    if (static_cast<std::size_t>(batch.cols()) != hello_.d) {
        throw DimensionMismatch("adapter declared d=" + std::to_string(hello_.d) + ", batch has " +
                                std::to_string(batch.cols()) + " columns");
    }
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < batch.rows(); ++r) {
        rows.push_back(std::vector<double>(batch.row(r).data(), batch.row(r).data() + batch.cols()));
    }
    const nlohmann::json reply = request({{"op", "predict"}, {"x", std::move(rows)}});
    if (!reply.contains("y") || !reply["y"].is_array() ||
        reply["y"].size() != static_cast<std::size_t>(batch.rows())) {
        throw ProtocolError("predict reply must carry one output per input row");
    }
    std::vector<double> y;
    y.reserve(reply["y"].size());
    for (const auto& v : reply["y"]) {
        if (!v.is_number()) throw ProtocolError("predict reply contains a non-numeric output");
        y.push_back(v.get<double>());
    }
    return y;
}

Matrix ExternalModelClient::sample_conditional(std::span<const double> x, std::span<const std::size_t> subset,
                                               std::size_t n) {
    if (x.size() != hello_.d) {
        throw DimensionMismatch("adapter declared d=" + std::to_string(hello_.d) + ", input has " +
                                std::to_string(x.size()));
    }
    const nlohmann::json reply = request({{"op", "sample_conditional"},
                                          {"x", std::vector<double>(x.begin(), x.end())},
                                          {"subset", std::vector<std::size_t>(subset.begin(), subset.end())},
                                          {"n", n}});
    if (!reply.contains("samples") || !reply["samples"].is_array() || reply["samples"].size() != n) {
        throw ProtocolError("sample_conditional reply must carry n samples");
    }
    Matrix out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(subset.size()));
    for (std::size_t r = 0; r < n; ++r) {
        const auto& row = reply["samples"][r];
        if (!row.is_array() || row.size() != subset.size()) {
            throw ProtocolError("each conditional sample must have |subset| values");
        }
        for (std::size_t k = 0; k < subset.size(); ++k) {
            if (!row[k].is_number()) throw ProtocolError("conditional sample contains a non-numeric value");
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = row[k].get<double>();
        }
    }
    return out;
}

std::vector<double> external_predict(ExternalModelClient& client, const Matrix& batch) { return client.predict(batch); }

std::vector<double> ExternalModel::predict(const Matrix& batch) const {
    check_batch(batch);
    return client_->predict(batch);
}

Matrix ExternalSampler::sample_many(std::span<const double> x, std::span<const std::size_t> subset, std::size_t n,
                                    Engine&) const {
    validate_draw_request(x, subset);
    return client_->sample_conditional(x, subset, n);
}

void ExternalSampler::draw(std::span<const double> x, std::span<const std::size_t> subset, Engine&,
                           std::span<double> out) const {
    const Matrix m = client_->sample_conditional(x, subset, 1);
    for (std::size_t k = 0; k < subset.size(); ++k) out[k] = m(0, static_cast<Eigen::Index>(k));
}

}  // namespace cfdr
