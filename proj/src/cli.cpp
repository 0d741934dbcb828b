#include "cfdr/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <memory>
#include <optional>
#include <sstream>

#include "cfdr/bench.hpp"
#include "cfdr/csv.hpp"
#include "cfdr/errors.hpp"
#include "cfdr/external_model.hpp"
#include "cfdr/paired_threshold.hpp"
#include "cfdr/report.hpp"
#include "cfdr/runners.hpp"

namespace cfdr {

namespace {

// ------------------------------------------------------------ --config

nlohmann::json load_json_file(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw UsageError(std::string("cannot open ") + what + " '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw UsageError(std::string(what) + " '" + path + "' is not valid JSON: " + e.what());
    }
}

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

std::string scalar_to_arg(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number() || v.is_boolean()) return v.dump();
    throw UsageError("config values must be scalars or arrays of scalars");
}

// Appends flags from a --config JSON object for every key not already on the command line.
std::vector<std::string> expand_config(std::vector<std::string> args) {
    std::optional<std::string> path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        }
    }
    if (!path) return args;
    const nlohmann::json cfg = load_json_file(*path, "config file");
    if (!cfg.is_object()) throw UsageError("config file must hold a JSON object");
    std::vector<std::string> extra;
    for (const auto& [key, value] : cfg.items()) {
        const std::string flag = "--" + key;
        if (key == "config" || has_flag(args, flag)) continue;
        if (value.is_boolean()) {
            if (value.get<bool>()) extra.push_back(flag);
        } else if (value.is_array()) {
            for (const auto& v : value) {
                extra.push_back(flag);
                extra.push_back(scalar_to_arg(v));
            }
        } else {
            extra.push_back(flag);
            extra.push_back(scalar_to_arg(value));
        }
    }
    args.insert(args.end(), extra.begin(), extra.end());
    return args;
}

const CLI::Validator kOpenUnit(
    [](std::string& s) -> std::string {
        try {
            const double v = std::stod(s);
            if (v > 0.0 && v < 1.0) return {};
        } catch (...) {
        }
        return "value " + s + " must lie in the open interval (0,1)";
    },
    "(0,1)");

// ------------------------------------------------------------ bench

struct BenchArgs {
    std::uint64_t seed = 1;
    double alpha = 0.2;
    std::size_t runs = 10;
    std::size_t samples = 100;
    std::size_t draws = 100;
    double h = 0.3;
    std::size_t jobs = 1;
    std::string out = "results";
    std::string correction = "bh";
    std::string irt_pooling = "per-input";
    std::string osft_pooling = "pooled";
    std::vector<std::string> distributions;
    std::vector<std::string> models;
    std::size_t mlp_train_size = MlpConfig{}.train_size;
    std::size_t mlp_epochs = MlpConfig{}.max_epochs;
    bool quiet = false;
    std::string config;
};

int cmd_bench(const BenchArgs& a, std::ostream& out) {
    BenchConfig cfg;
    cfg.seed = a.seed;
    cfg.alpha = a.alpha;
    cfg.runs = a.runs;
    cfg.samples = a.samples;
    cfg.draws = a.draws;
    cfg.h = a.h;
    cfg.jobs = a.jobs;
    cfg.correction = parse_correction(a.correction);
    cfg.irt_pooling = parse_pooling(a.irt_pooling);
    cfg.osft_pooling = parse_pooling(a.osft_pooling);
    cfg.mlp.train_size = a.mlp_train_size;
    cfg.mlp.max_epochs = a.mlp_epochs;
    if (!a.distributions.empty()) {
        cfg.distributions.clear();
        for (const auto& d : a.distributions) cfg.distributions.push_back(parse_distribution(d));
    }
    if (!a.models.empty()) {
        cfg.models.clear();
        for (const auto& m : a.models) cfg.models.push_back(parse_model_kind(m));
    }
    const Table1Result result = run_table1(cfg);
    write_table1_outputs(result, a.out);
    if (!a.quiet) out << format_table1_text(result);
    out << "wrote " << (std::filesystem::path(a.out) / "table1.csv").string() << '\n';
    return kExitOk;
}

// ------------------------------------------------------------ interpret

struct InterpretArgs {
    std::string model_cmd;
    std::string model;
    std::string weights;
    double threshold = PairedThresholdModel::kDefaultThreshold;
    std::string data;
    std::string subsets;
    std::string method = "osft";
    std::string statistic = "one-sided";
    double alpha = 0.2;
    std::size_t draws = 100;
    std::string correction = "bh";
    std::string pooling = "pooled";
    std::string sampler = "gaussian";
    std::string betas;
    std::uint64_t seed = 1;
    std::string out;
    long timeout_ms = 60000;
    std::string config;
};

PairedThresholdModel load_paired_model(const InterpretArgs& a, std::size_t d) {
    if (a.weights.empty()) {
        if (d % 2 != 0) throw DimensionMismatch("paired-threshold model needs an even data dimension");
        return PairedThresholdModel::draw(d / 2, RngStream(a.seed).derive("weights"), a.threshold);
    }
    const nlohmann::json j = load_json_file(a.weights, "weights file");
    nlohmann::json w = j.is_object() ? j.value("w", nlohmann::json()) : j;
    double t = a.threshold;
    if (j.is_object() && j.contains("threshold")) t = j["threshold"].get<double>();
    if (!w.is_array()) throw UsageError("weights file must hold an array or an object with key 'w'");
    return PairedThresholdModel(w.get<std::vector<double>>(), t);
}

std::vector<double> load_betas(const std::string& path) {
    const nlohmann::json j = load_json_file(path, "betas file");
    const nlohmann::json b = j.is_object() ? j.value("betas", nlohmann::json()) : j;
    if (!b.is_array()) throw UsageError("betas file must hold an array or an object with key 'betas'");
    return b.get<std::vector<double>>();
}

std::string sidecar_path(const std::string& csv_path) {
    std::filesystem::path p(csv_path);
    return p.replace_extension(".json").string();
}

int cmd_interpret(const InterpretArgs& a, bool k_given, bool correction_given, std::ostream& out,
                  std::ostream& err) {
    const bool irt = a.method == "irt";
    if (!irt && a.method != "osft") throw UsageError("--method must be irt or osft");
    if (!irt && k_given) throw UsageError("--K applies only to --method irt");
    if (!irt && correction_given) throw UsageError("--correction applies only to --method irt");
    if (a.model_cmd.empty() == a.model.empty()) throw UsageError("give exactly one of --model-cmd or --model");
    if (!a.model.empty() && a.model != "paired-threshold") {
        throw UsageError("unknown in-process model '" + a.model + "' (expected paired-threshold)");
    }
    const StatisticKind statistic = parse_statistic(a.statistic);
    const Correction correction = parse_correction(a.correction);
    const Pooling pooling = parse_pooling(a.pooling);
    validate_alpha(a.alpha);

    const Dataset data = read_dataset_csv(a.data);
    const std::size_t d = data.dim();

    std::shared_ptr<ExternalModelClient> client;
    try {
        std::unique_ptr<BlackBoxModel> model;
        if (!a.model_cmd.empty()) {
            client = std::make_shared<ExternalModelClient>(a.model_cmd, std::chrono::milliseconds(a.timeout_ms));
            if (client->hello().d != d) {
                throw DimensionMismatch("adapter declared d=" + std::to_string(client->hello().d) + " but '" +
                                        a.data + "' has " + std::to_string(d) + " columns");
            }
            model = std::make_unique<ExternalModel>(client);
        } else {
            model = std::make_unique<PairedThresholdModel>(load_paired_model(a, d));
            if (model->dim() != d) {
                throw DimensionMismatch("model expects d=" + std::to_string(model->dim()) + " but '" + a.data +
                                        "' has " + std::to_string(d) + " columns");
            }
        }
        const SubsetSpec subsets = read_subsets_json(a.subsets, d);

        std::unique_ptr<ConditionalSampler> q;
        if (a.sampler == "gaussian") {
            q = std::make_unique<IndependentGaussianQ>();
        } else if (a.sampler == "autoregressive") {
            if (a.betas.empty()) throw UsageError("--sampler autoregressive needs --betas");
            q = std::make_unique<AutoregressiveGaussianQ>(load_betas(a.betas));
        } else if (a.sampler == "external") {
            if (!client) throw UsageError("--sampler external needs --model-cmd");
            q = std::make_unique<ExternalSampler>(client);
        } else {
            throw UsageError("unknown sampler '" + a.sampler + "' (expected gaussian, autoregressive or external)");
        }

        const RngStream stream = RngStream(a.seed).derive(irt ? "irt" : "osft");
        nlohmann::ordered_json meta;
        meta["seed"] = a.seed;
        meta["alpha"] = a.alpha;
        meta["method"] = a.method;
        meta["statistic"] = std::string(to_string(statistic));
        meta["model"] = a.model_cmd.empty() ? a.model : model->name();
        if (!a.model_cmd.empty()) meta["model_cmd"] = a.model_cmd;
        meta["sampler"] = q->name();
        meta["pooling"] = std::string(to_string(pooling));
        meta["data"] = a.data;
        meta["subsets"] = a.subsets;
        meta["inputs"] = data.samples();
        meta["num_subsets"] = subsets.size();

        std::string csv;
        std::size_t found = 0;
        std::vector<PairIndex> discoveries;
        if (irt) {
            const IrtOptions opt{a.draws, a.alpha, statistic, correction, pooling, Execution::Parallel};
            const IrtResult r = run_irt(*model, *q, data.x, subsets, opt, stream);
            csv = format_result_csv(r);
            discoveries = r.discoveries;
            meta["K"] = a.draws;
            meta["correction"] = std::string(to_string(correction));
            meta["tau"] = nlohmann::ordered_json::array();
            for (const auto& t : r.tau) meta["tau"].push_back(t ? nlohmann::ordered_json(*t) : nlohmann::ordered_json());
        } else {
            const OsftOptions opt{a.alpha, statistic, pooling, Execution::Parallel};
            const OsftResult r = run_osft(*model, *q, data.x, subsets, opt, stream);
            csv = format_result_csv(r);
            discoveries = r.discoveries;
            meta["z_star"] = nlohmann::ordered_json::array();
            for (const auto& z : r.z_star) meta["z_star"].push_back(z ? nlohmann::ordered_json(*z) : nlohmann::ordered_json());
            meta["guaranteed_fdr_level"] = r.guaranteed_level();
        }
        found = discoveries.size();
        meta["discoveries"] = found;

        write_file_atomic(sidecar_path(a.out), meta.dump(2) + "\n");
        write_file_atomic(a.out, csv);

        out << found << " discoveries among " << data.samples() * subsets.size() << " tests (" << a.method
            << ", alpha=" << a.alpha << ")\n";
        for (const auto& p : discoveries) out << "  input " << p.input << " subset " << p.subset << '\n';
        out << "wrote " << a.out << '\n';
        return kExitOk;
    } catch (const DimensionMismatch& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ProtocolError&) {
        if (client) err << "adapter stderr:\n" << client->stderr_output();
        throw;
    } catch (const ModelError&) {
        if (client) err << "adapter stderr:\n" << client->stderr_output();
        throw;
    } catch (const Timeout&) {
        if (client) err << "adapter stderr:\n" << client->stderr_output();
        throw;
    }
}

// ------------------------------------------------------------ curve / report

struct CurveArgs {
    std::vector<std::string> scores;
    std::string truth;
    std::string statistic = "one-sided";
    std::vector<double> levels;
    std::string out;
    std::string config;
};

int cmd_curve(const CurveArgs& a, std::ostream& out) {
    const StatisticKind sided = parse_statistic(a.statistic);
    const GroundTruth truth = read_truth_csv(a.truth);
    const std::vector<double> levels = a.levels.empty() ? default_fdr_levels() : a.levels;
    for (double l : levels) {
        if (!(l >= 0.0 && l <= 1.0)) throw UsageError("--levels must lie in [0,1]");
    }
    std::vector<PowerCurve> curves;
    for (const auto& spec : a.scores) {
        const auto eq = spec.find('=');
        const std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
        std::string name = eq == std::string::npos ? std::filesystem::path(path).stem().string() : spec.substr(0, eq);
        if (name.empty()) throw UsageError("empty method name in --scores " + spec);
        const auto scores = read_scores_csv(path, truth.num_inputs, truth.num_features);
        curves.push_back(sweep_curve(scores, truth.important, sided, levels, name));
    }
    std::filesystem::create_directories(a.out);
    for (const auto& c : curves) {
        const auto path = std::filesystem::path(a.out) / ("curve_" + c.method + ".csv");
        write_file_atomic(path, format_curve_csv(c));
        out << "wrote " << path.string() << '\n';
    }
    return kExitOk;
}

struct ReportArgs {
    std::vector<std::string> curves;
    std::string out;
    std::string title = "TPR at controlled FDR";
    std::string config;
};

int cmd_report(const ReportArgs& a, std::ostream& out) {
    std::vector<PowerCurve> curves;
    for (const auto& path : a.curves) curves.push_back(read_curve_csv(path, method_from_curve_path(path)));
    write_file_atomic(a.out, render_curves_svg(curves, a.title));
    out << "wrote " << a.out << '\n';
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Black-box feature importance by multiple hypothesis testing with FDR control", "cfdr"};
    app.require_subcommand(1);

    BenchArgs bench;
    auto* b = app.add_subcommand("bench", "Run the synthetic FDR/TPR benchmark and write table1.csv");
    b->set_help_flag("--help", "Print this help message and exit");  // frees -h for the mixture probability
    b->add_option("--config", bench.config, "JSON file mirroring these flags");
    b->add_option("--seed", bench.seed, "Root seed")->capture_default_str();
    b->add_option("--alpha", bench.alpha, "Target FDR level")->check(kOpenUnit)->capture_default_str();
    b->add_option("--runs", bench.runs, "Independent runs per cell")->check(CLI::PositiveNumber)->capture_default_str();
    b->add_option("--samples", bench.samples, "Test inputs per run")->check(CLI::PositiveNumber)->capture_default_str();
    b->add_option("--K", bench.draws, "Null draws per randomization test")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    b->add_option("--h", bench.h, "Probability of the interesting component")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    b->add_option("--jobs", bench.jobs, "Runs evaluated concurrently")->check(CLI::PositiveNumber)->capture_default_str();
    b->add_option("--out", bench.out, "Output directory")->capture_default_str();
    b->add_option("--correction", bench.correction, "bh or by")->capture_default_str();
    b->add_option("--irt-pooling", bench.irt_pooling, "pooled or per-input")->capture_default_str();
    b->add_option("--osft-pooling", bench.osft_pooling, "pooled or per-input")->capture_default_str();
    b->add_option("--distribution", bench.distributions, "independent and/or correlated (default both)");
    b->add_option("--model", bench.models, "discontinuous and/or neural-net (default both)");
    b->add_option("--mlp-train-size", bench.mlp_train_size, "Training samples per network")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    b->add_option("--mlp-epochs", bench.mlp_epochs, "Epoch budget per network")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    b->add_flag("--quiet", bench.quiet, "Do not print the aggregate table");

    InterpretArgs interp;
    auto* in = app.add_subcommand("interpret", "Test feature subsets of a model's predictions on a data CSV");
    in->add_option("--config", interp.config, "JSON file mirroring these flags");
    in->add_option("--model-cmd", interp.model_cmd, "Adapter command speaking the JSON-lines protocol");
    in->add_option("--model", interp.model, "In-process model: paired-threshold");
    in->add_option("--weights", interp.weights, "JSON weights for paired-threshold");
    in->add_option("--threshold", interp.threshold, "paired-threshold activation threshold")->capture_default_str();
    in->add_option("--data", interp.data, "CSV with f0..f{d-1} columns")->required();
    in->add_option("--subsets", interp.subsets, "JSON array of disjoint index arrays")->required();
    in->add_option("--method", interp.method, "irt or osft")->capture_default_str();
    in->add_option("--statistic", interp.statistic, "one-sided or two-sided")->capture_default_str();
    in->add_option("--alpha", interp.alpha, "Target FDR level")->check(kOpenUnit)->capture_default_str();
    auto* k_opt = in->add_option("--K", interp.draws, "Null draws (irt only)")->check(CLI::PositiveNumber);
    auto* corr_opt = in->add_option("--correction", interp.correction, "bh or by (irt only)");
    in->add_option("--pooling", interp.pooling, "pooled or per-input")->capture_default_str();
    in->add_option("--sampler", interp.sampler, "gaussian, autoregressive or external")->capture_default_str();
    in->add_option("--betas", interp.betas, "JSON weights for the autoregressive sampler");
    in->add_option("--seed", interp.seed, "Root seed")->capture_default_str();
    in->add_option("--out", interp.out, "Result CSV (a .json sidecar is written next to it)")->required();
    in->add_option("--timeout-ms", interp.timeout_ms, "Per-request adapter timeout")->capture_default_str();

    CurveArgs curve;
    auto* cv = app.add_subcommand("curve", "Best TPR at each FDR level from per-feature score CSVs");
    cv->add_option("--config", curve.config, "JSON file mirroring these flags");
    cv->add_option("--scores", curve.scores, "NAME=PATH or PATH of an input_idx,feature_idx,score CSV")->required();
    cv->add_option("--truth", curve.truth, "0/1 label matrix CSV")->required();
    cv->add_option("--statistic", curve.statistic, "one-sided ranks scores, two-sided ranks |scores|")
        ->capture_default_str();
    cv->add_option("--levels", curve.levels, "FDR levels (default 0.00..1.00 by 0.01)")->delimiter(',');
    cv->add_option("--out", curve.out, "Output directory")->required();

    ReportArgs report;
    auto* rp = app.add_subcommand("report", "Render curve CSVs as an SVG line chart");
    rp->add_option("--config", report.config, "JSON file mirroring these flags");
    rp->add_option("--curve", report.curves, "curve_<method>.csv file")->required();
    rp->add_option("--out", report.out, "SVG output path")->required();
    rp->add_option("--title", report.title, "Chart title")->capture_default_str();

    try {
        std::vector<std::string> args = expand_config(raw_args);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kExitOk;
        }
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (b->parsed()) return cmd_bench(bench, out);
        if (in->parsed()) return cmd_interpret(interp, k_opt->count() > 0, corr_opt->count() > 0, out, err);
        if (cv->parsed()) return cmd_curve(curve, out);
        if (rp->parsed()) return cmd_report(report, out);
    } catch (const ParseError& e) {
        err << "error: " << e.what() << " (line " << e.line() << ")\n";
        return kExitUsage;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}

}  // namespace cfdr
