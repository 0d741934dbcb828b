// Test double for the external-model protocol.
//
//   fake_adapter echo <d>            y = x[0]
//   fake_adapter paired <weights>    paired-threshold model, weights from a JSON file
//   fake_adapter error <d>           replies to predict with an error frame
//   fake_adapter garbage <d>         replies to predict with a non-JSON line
//   fake_adapter badid <d>           replies to predict with the wrong id
//   fake_adapter crash <d>           exits on the first predict
//   fake_adapter slow <d>            never answers predict
//
// sample_conditional returns standard normal draws seeded from the request id.
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <random>
#include <string>
#include <thread>
#include <vector>

using nlohmann::json;

namespace {

double paired(const std::vector<double>& w, double t, const std::vector<double>& x) {
    const std::size_t p = w.size();
    double y = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
        if (std::fabs(x[i]) >= t && std::fabs(x[i + p]) >= t) y += w[i];
    }
    return y;
}

void reply(const json& frame) { std::cout << frame.dump() << '\n' << std::flush; }

}  // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::cerr << "usage: fake_adapter <mode> <d|weights.json>\n";
        return 2;
    }
    const std::string mode = argv[1];
    std::vector<double> weights;
    double threshold = 3.0;
    std::size_t d = 0;
    if (mode == "paired") {
        std::ifstream in(argv[2]);
        const json j = json::parse(in);
        weights = j.at("w").get<std::vector<double>>();
        if (j.contains("threshold")) threshold = j["threshold"].get<double>();
        d = 2 * weights.size();
    } else {
        d = std::stoul(argv[2]);
    }
    std::cerr << "fake adapter starting in mode " << mode << '\n';

    std::string line;
    while (std::getline(std::cin, line)) {
        json req;
        try {
            req = json::parse(line);
        } catch (const json::parse_error&) {
            reply({{"id", nullptr}, {"error", "malformed frame"}});
            continue;
        }
        const json id = req.value("id", json());
        const std::string op = req.value("op", "");
        if (op == "hello") {
            reply({{"id", id}, {"name", "fake-" + mode}, {"d", d}});
        } else if (op == "predict") {
            if (mode == "error") {
                std::cerr << "model exploded on purpose\n";
                reply({{"id", id}, {"error", "model exploded"}});
                continue;
            }
            if (mode == "garbage") {
                std::cerr << "emitting garbage\n";
                std::cout << "this is not json\n" << std::flush;
                continue;
            }
            if (mode == "crash") {
                std::cerr << "crashing now\n";
                return 3;
            }
            if (mode == "slow") {
                std::this_thread::sleep_for(std::chrono::seconds(30));
                return 0;
            }
            json ys = json::array();
            for (const auto& row : req.at("x")) {
                const auto x = row.get<std::vector<double>>();
                ys.push_back(mode == "paired" ? paired(weights, threshold, x) : x.at(0));
            }
            reply({{"id", mode == "badid" ? id.get<unsigned long>() + 1000 : id.get<unsigned long>()}, {"y", ys}});
        } else if (op == "sample_conditional") {
            std::mt19937_64 eng(id.get<unsigned long>());
            std::normal_distribution<double> normal;
            const std::size_t n = req.at("n").get<std::size_t>();
            const std::size_t k = req.at("subset").size();
            json samples = json::array();
            for (std::size_t r = 0; r < n; ++r) {
                json row = json::array();
                for (std::size_t c = 0; c < k; ++c) row.push_back(normal(eng));
                samples.push_back(row);
            }
            reply({{"id", id}, {"samples", samples}});
        } else {
            reply({{"id", id}, {"error", "unknown op '" + op + "'"}});
        }
    }
    return 0;
}
