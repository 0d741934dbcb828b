#include "cfdr/bench.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iomanip>
#include <json.hpp>
#include <memory>
#include <numeric>
#include <sstream>

#include "cfdr/csv.hpp"
#include "cfdr/errors.hpp"
#include "cfdr/paired_threshold.hpp"

namespace cfdr {

std::size_t GroundTruth::count() const {
    return static_cast<std::size_t>(std::count(important.begin(), important.end(), std::uint8_t{1}));
}

GroundTruth label_ground_truth_paired(const Dataset& data, double threshold) {
    const std::size_t d = data.dim();
    if (d == 0 || d % 2 != 0) throw DimensionMismatch("paired labeling needs an even dimension, got " + std::to_string(d));
    if (data.flags.size() != data.samples() * d) throw DimensionMismatch("dataset carries no generation flags");
    const std::size_t p = d / 2;
    GroundTruth g{data.samples(), d, std::vector<std::uint8_t>(data.samples() * d, 0)};
    for (std::size_t m = 0; m < data.samples(); ++m) {
        const auto row = data.x.row(static_cast<Eigen::Index>(m));
        for (std::size_t i = 0; i < d; ++i) {
            const std::size_t partner = i < p ? i + p : i - p;
            const bool gate = std::fabs(row(static_cast<Eigen::Index>(partner))) >= threshold;
            g.important[m * d + i] = data.flag(m, i) && gate ? 1 : 0;
        }
    }
    return g;
}

GroundTruth label_ground_truth_mlp(const Dataset& data) {
    if (data.flags.size() != data.samples() * data.dim()) throw DimensionMismatch("dataset carries no generation flags");
    return GroundTruth{data.samples(), data.dim(), data.flags};
}

FdrTpr fdr_tpr(std::span<const std::size_t> selected, std::span<const std::size_t> truth) {
    std::vector<std::size_t> s(selected.begin(), selected.end());
    std::vector<std::size_t> t(truth.begin(), truth.end());
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    std::vector<std::size_t> hits;
    std::set_intersection(s.begin(), s.end(), t.begin(), t.end(), std::back_inserter(hits));

    FdrTpr out;
    if (!s.empty()) out.fdr = static_cast<double>(s.size() - hits.size()) / static_cast<double>(s.size());
    if (t.empty()) {
        out.truth_empty = true;
    } else {
        out.tpr = static_cast<double>(hits.size()) / static_cast<double>(t.size());
    }
    return out;
}

FdrTpr fdr_tpr(std::span<const std::uint8_t> selected_mask, std::span<const std::uint8_t> truth_mask) {
    if (selected_mask.size() != truth_mask.size()) throw DimensionMismatch("selection and truth masks differ in size");
    std::size_t sel = 0, hit = 0, pos = 0;
    for (std::size_t k = 0; k < selected_mask.size(); ++k) {
        sel += selected_mask[k] ? 1 : 0;
        pos += truth_mask[k] ? 1 : 0;
        hit += selected_mask[k] && truth_mask[k] ? 1 : 0;
    }
    FdrTpr out;
    if (sel > 0) out.fdr = static_cast<double>(sel - hit) / static_cast<double>(sel);
    if (pos == 0) {
        out.truth_empty = true;
    } else {
        out.tpr = static_cast<double>(hit) / static_cast<double>(pos);
    }
    return out;
}

FamilyMetrics family_metrics(std::span<const std::uint8_t> selected, const GroundTruth& truth, Pooling pooling) {
    if (selected.size() != truth.important.size()) throw DimensionMismatch("selection does not match ground truth");
    const std::size_t families = pooling == Pooling::Pooled ? 1 : truth.num_inputs;
    const std::size_t width = selected.size() / families;
    FamilyMetrics out;
    out.families = families;
    double fdr_sum = 0.0, tpr_sum = 0.0;
    std::size_t tpr_count = 0;
    for (std::size_t f = 0; f < families; ++f) {
        const auto r = fdr_tpr(selected.subspan(f * width, width),
                               std::span<const std::uint8_t>(truth.important).subspan(f * width, width));
        fdr_sum += r.fdr;
        if (!r.truth_empty) {
            tpr_sum += r.tpr;
            ++tpr_count;
        }
    }
    out.fdr = fdr_sum / static_cast<double>(families);
    out.tpr_defined = tpr_count > 0;
    out.tpr = out.tpr_defined ? tpr_sum / static_cast<double>(tpr_count) : 0.0;
    return out;
}

std::string to_string(BaselineKind kind) { return kind == BaselineKind::Taylor ? "taylor" : "saliency"; }

std::vector<double> baseline_scores(BaselineKind kind, const BlackBoxModel& model, std::span<const double> x) {
    const auto* diff = dynamic_cast<const DifferentiableModel*>(&model);
    if (diff == nullptr) throw NotDifferentiable(model.name() + " exposes no input gradient");
    auto g = diff->input_gradient(x);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = kind == BaselineKind::Taylor ? x[i] * g[i] : std::fabs(g[i]);
    return g;
}

std::vector<SweepPoint> sweep_path(std::span<const double> scores, std::span<const std::uint8_t> truth,
                                   StatisticKind sidedness) {
    if (scores.size() != truth.size()) throw DimensionMismatch("scores and truth differ in size");
    std::vector<double> key(scores.size());
    for (std::size_t k = 0; k < scores.size(); ++k) {
        if (!std::isfinite(scores[k])) throw NonFiniteStatistic("non-finite baseline score");
        key[k] = sidedness == StatisticKind::OneSided ? scores[k] : std::fabs(scores[k]);
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key[a] > key[b]; });

    const auto positives = static_cast<std::size_t>(std::count(truth.begin(), truth.end(), std::uint8_t{1}));
    std::vector<SweepPoint> path;
    path.reserve(order.size());
    std::size_t hits = 0;
    for (std::size_t k = 1; k <= order.size(); ++k) {
        hits += truth[order[k - 1]] ? 1 : 0;
        const double fdr = static_cast<double>(k - hits) / static_cast<double>(k);
        const double tpr = positives ? static_cast<double>(hits) / static_cast<double>(positives) : 0.0;
        path.push_back(SweepPoint{k, fdr, tpr});
    }
    return path;
}

PowerCurve sweep_curve(std::span<const double> scores, std::span<const std::uint8_t> truth, StatisticKind sidedness,
                       std::span<const double> fdr_levels, std::string method) {
    const auto path = sweep_path(scores, truth, sidedness);
    PowerCurve curve{std::move(method), {}};
    for (double level : fdr_levels) {
        double best = 0.0;
        for (const auto& p : path) {
            if (p.fdr <= level) best = std::max(best, p.tpr);
        }
        curve.points.push_back(CurvePoint{level, best});
    }
    return curve;
}

std::vector<double> default_fdr_levels() {
    std::vector<double> levels;
    for (int i = 0; i <= 100; ++i) levels.push_back(i / 100.0);
    return levels;
}

std::string format_curve_csv(const PowerCurve& curve) {
    std::ostringstream out;
    out << "fdr_level,tpr\n";
    for (const auto& p : curve.points) out << format_double(p.fdr_level) << ',' << format_double(p.tpr) << '\n';
    return out.str();
}

std::string to_string(ModelKind kind) { return kind == ModelKind::Discontinuous ? "discontinuous" : "neural-net"; }

ModelKind parse_model_kind(const std::string& text) {
    if (text == "discontinuous" || text == "paired-threshold") return ModelKind::Discontinuous;
    if (text == "neural-net" || text == "nn") return ModelKind::NeuralNet;
    throw UsageError("unknown benchmark model '" + text + "' (expected discontinuous or neural-net)");
}

std::string to_string(Method m) { return m == Method::IRT ? "irt" : "osft"; }

std::string cell_id(DistributionKind d, ModelKind m, Method method, StatisticKind sided) {
    return to_string(d) + "/" + to_string(m) + "/" + to_string(method) + "/" + std::string(to_string(sided));
}

namespace {

constexpr Method kMethods[] = {Method::IRT, Method::OSFT};
constexpr StatisticKind kSides[] = {StatisticKind::OneSided, StatisticKind::TwoSidedCentered};
constexpr BaselineKind kBaselines[] = {BaselineKind::Taylor, BaselineKind::Saliency};

struct RunOutput {
    std::vector<BenchRunRecord> records;
    std::vector<InstanceRecord> instances;
    // (distribution, baseline, sided) -> curve for this run
    std::vector<PowerCurve> curves;
};

std::string curve_name(BaselineKind b, DistributionKind d, StatisticKind s) {
    return to_string(b) + "_" + to_string(d) + "_" + std::string(to_string(s));
}

RunOutput execute_run(const BenchConfig& cfg, std::size_t run, Execution exec) {
    RunOutput out;
    const RngStream run_stream = RngStream(cfg.seed).derive("run", run);
    for (DistributionKind dk : cfg.distributions) {
        for (ModelKind mk : cfg.models) {
            const RngStream cell = run_stream.derive(to_string(dk)).derive(to_string(mk));
            const std::size_t d = mk == ModelKind::Discontinuous ? 2 * cfg.paired_half_dim : cfg.mlp_dim;
            const SyntheticDistribution dist = make_distribution(dk, d, cfg.h, cell.derive("betas"));
            Engine data_eng = cell.derive("data").engine();
            const Dataset data = gen_dataset(dist, cfg.samples, data_eng);
            const auto q = matching_conditional(dist);

            InstanceRecord inst;
            inst.run = run;
            inst.distribution = dk;
            inst.model = mk;
            inst.betas = dist.betas;

            std::unique_ptr<BlackBoxModel> model;
            GroundTruth truth;
            if (mk == ModelKind::Discontinuous) {
                auto pt = PairedThresholdModel::draw(cfg.paired_half_dim, cell.derive("weights"), cfg.threshold);
                inst.weights = pt.weights();
                model = std::make_unique<PairedThresholdModel>(std::move(pt));
                truth = label_ground_truth_paired(data, cfg.threshold);
            } else {
                auto trained = mlp_train(dist, cfg.mlp, cell.derive("mlp"));
                inst.mlp_heldout_relative_mse = trained.heldout_relative_mse;
                inst.mlp_epochs = trained.epochs;
                model = std::make_unique<TwoLayerNet>(std::move(trained.net));
                truth = label_ground_truth_mlp(data);
            }
            out.instances.push_back(std::move(inst));

            const SubsetSpec subsets = SubsetSpec::singletons(d);
            for (Method method : kMethods) {
                for (StatisticKind sided : kSides) {
                    const RngStream proc = cell.derive(to_string(method)).derive(to_string(sided));
                    BenchRunRecord rec;
                    rec.config_id = cell_id(dk, mk, method, sided);
                    rec.run = run;
                    rec.distribution = dk;
                    rec.model = mk;
                    rec.method = method;
                    rec.sided = sided;
                    rec.alpha = cfg.alpha;
                    rec.tested = data.samples() * d;
                    std::vector<std::uint8_t> selected;
                    Pooling pooling;
                    if (method == Method::IRT) {
                        const IrtOptions opt{cfg.draws, cfg.alpha, sided, cfg.correction, cfg.irt_pooling, exec};
                        selected = run_irt(*model, *q, data.x, subsets, opt, proc).selected;
                        pooling = cfg.irt_pooling;
                    } else {
                        const OsftOptions opt{cfg.alpha, sided, cfg.osft_pooling, exec};
                        selected = run_osft(*model, *q, data.x, subsets, opt, proc).selected;
                        pooling = cfg.osft_pooling;
                    }
                    const FamilyMetrics fm = family_metrics(selected, truth, pooling);
                    rec.fdr = fm.fdr;
                    rec.tpr = fm.tpr;
                    rec.tpr_defined = fm.tpr_defined;
                    rec.selected = static_cast<std::size_t>(std::count(selected.begin(), selected.end(), 1));
                    out.records.push_back(std::move(rec));
                }
            }

            if (mk == ModelKind::NeuralNet) {
                for (BaselineKind b : kBaselines) {
                    std::vector<double> scores;
                    scores.reserve(data.samples() * d);
                    for (std::size_t m = 0; m < data.samples(); ++m) {
                        const auto row = data.x.row(static_cast<Eigen::Index>(m));
                        const auto s = baseline_scores(b, *model, std::span<const double>(row.data(), d));
                        scores.insert(scores.end(), s.begin(), s.end());
                    }
                    for (StatisticKind sided : kSides) {
                        out.curves.push_back(
                            sweep_curve(scores, truth.important, sided, cfg.curve_levels, curve_name(b, dk, sided)));
                    }
                }
            }
        }
    }
    return out;
}

}  // namespace

Table1Result run_table1(const BenchConfig& cfg) {
    validate_alpha(cfg.alpha);
    if (cfg.runs == 0 || cfg.samples == 0 || cfg.draws == 0) throw UsageError("runs, samples and K must be >= 1");
    if (cfg.distributions.empty() || cfg.models.empty()) throw UsageError("no benchmark cells selected");

    std::vector<RunOutput> runs(cfg.runs);
    const int jobs = static_cast<int>(std::max<std::size_t>(1, cfg.jobs));
    if (jobs > 1) {
        std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
        for (long long r = 0; r < static_cast<long long>(cfg.runs); ++r) {
            try {
                runs[static_cast<std::size_t>(r)] = execute_run(cfg, static_cast<std::size_t>(r), Execution::Serial);
            } catch (...) {
#pragma omp critical(cfdr_bench_failure)
                if (!failure) failure = std::current_exception();
            }
        }
        if (failure) std::rethrow_exception(failure);
    } else {
        for (std::size_t r = 0; r < cfg.runs; ++r) runs[r] = execute_run(cfg, r, Execution::Parallel);
    }

    Table1Result result;
    result.config = cfg;
    for (auto& ro : runs) {
        result.instances.insert(result.instances.end(), ro.instances.begin(), ro.instances.end());
    }

    // Cells in table order; run records sorted by run index within a cell.
    for (DistributionKind dk : cfg.distributions) {
        for (ModelKind mk : cfg.models) {
            for (Method method : kMethods) {
                for (StatisticKind sided : kSides) {
                    const std::string id = cell_id(dk, mk, method, sided);
                    CellAggregate cell{dk, mk, method, sided, cfg.alpha, 0.0, 0.0, 0};
                    double fdr_sum = 0.0, tpr_sum = 0.0;
                    std::size_t tpr_runs = 0;
                    for (const auto& ro : runs) {
                        for (const auto& rec : ro.records) {
                            if (rec.config_id != id) continue;
                            result.records.push_back(rec);
                            fdr_sum += rec.fdr;
                            ++cell.runs;
                            if (rec.tpr_defined) {
                                tpr_sum += rec.tpr;
                                ++tpr_runs;
                            }
                        }
                    }
                    cell.fdr_mean = cell.runs ? fdr_sum / static_cast<double>(cell.runs) : 0.0;
                    cell.tpr_mean = tpr_runs ? tpr_sum / static_cast<double>(tpr_runs) : 0.0;
                    result.cells.push_back(cell);
                }
            }
        }
        if (std::find(cfg.models.begin(), cfg.models.end(), ModelKind::NeuralNet) != cfg.models.end()) {
            for (BaselineKind b : kBaselines) {
                for (StatisticKind sided : kSides) {
                    const std::string name = curve_name(b, dk, sided);
                    PowerCurve avg{name, {}};
                    for (double level : cfg.curve_levels) avg.points.push_back(CurvePoint{level, 0.0});
                    for (const auto& ro : runs) {
                        for (const auto& c : ro.curves) {
                            if (c.method != name) continue;
                            for (std::size_t k = 0; k < c.points.size(); ++k) avg.points[k].tpr += c.points[k].tpr;
                        }
                    }
                    for (auto& p : avg.points) p.tpr /= static_cast<double>(cfg.runs);
                    result.curves.push_back(std::move(avg));
                }
            }
        }
    }
    return result;
}

std::string format_table1_csv(const Table1Result& r) {
    std::ostringstream out;
    out << "distribution,model,method,sided,alpha,fdr_mean,tpr_mean,runs\n";
    for (const auto& c : r.cells) {
        out << to_string(c.distribution) << ',' << to_string(c.model) << ',' << to_string(c.method) << ','
            << to_string(c.sided) << ',' << format_double(c.alpha) << ',' << format_double(c.fdr_mean) << ','
            << format_double(c.tpr_mean) << ',' << c.runs << '\n';
    }
    return out.str();
}

std::string format_runs_csv(const Table1Result& r) {
    std::ostringstream out;
    out << "config_id,run,distribution,model,method,sided,alpha,fdr,tpr,tpr_defined,tested,selected\n";
    for (const auto& rec : r.records) {
        out << rec.config_id << ',' << rec.run << ',' << to_string(rec.distribution) << ',' << to_string(rec.model)
            << ',' << to_string(rec.method) << ',' << to_string(rec.sided) << ',' << format_double(rec.alpha) << ','
            << format_double(rec.fdr) << ',' << format_double(rec.tpr) << ',' << (rec.tpr_defined ? 1 : 0) << ','
            << rec.tested << ',' << rec.selected << '\n';
    }
    return out.str();
}

std::string format_table1_text(const Table1Result& r) {
    std::ostringstream out;
    out << std::left << std::setw(13) << "distribution" << std::setw(15) << "model" << std::setw(8) << "method"
        << std::setw(11) << "sided" << std::right << std::setw(8) << "FDR" << std::setw(8) << "TPR" << '\n';
    out << std::fixed << std::setprecision(3);
    for (const auto& c : r.cells) {
        out << std::left << std::setw(13) << to_string(c.distribution) << std::setw(15) << to_string(c.model)
            << std::setw(8) << to_string(c.method) << std::setw(11) << to_string(c.sided) << std::right
            << std::setw(8) << c.fdr_mean << std::setw(8) << c.tpr_mean << '\n';
    }
    return out.str();
}

std::string format_bench_config_json(const Table1Result& r) {
    const BenchConfig& c = r.config;
    nlohmann::ordered_json j;
    j["seed"] = c.seed;
    j["alpha"] = c.alpha;
    j["runs"] = c.runs;
    j["samples"] = c.samples;
    j["K"] = c.draws;
    j["h"] = c.h;
    j["paired_half_dim"] = c.paired_half_dim;
    j["threshold"] = c.threshold;
    j["mlp_dim"] = c.mlp_dim;
    j["mlp"] = {{"hidden", c.mlp.hidden},
                {"train_size", c.mlp.train_size},
                {"heldout_size", c.mlp.heldout_size},
                {"batch_size", c.mlp.batch_size},
                {"max_epochs", c.mlp.max_epochs},
                {"learning_rate", c.mlp.learning_rate},
                {"lr_decay", c.mlp.lr_decay},
                {"convergence_threshold", c.mlp.convergence_threshold}};
    j["correction"] = std::string(to_string(c.correction));
    j["irt_pooling"] = std::string(to_string(c.irt_pooling));
    j["osft_pooling"] = std::string(to_string(c.osft_pooling));
    j["distributions"] = nlohmann::json::array();
    for (auto d : c.distributions) j["distributions"].push_back(to_string(d));
    j["models"] = nlohmann::json::array();
    for (auto m : c.models) j["models"].push_back(to_string(m));
    j["instances"] = nlohmann::json::array();
    for (const auto& inst : r.instances) {
        nlohmann::ordered_json ij;
        ij["run"] = inst.run;
        ij["distribution"] = to_string(inst.distribution);
        ij["model"] = to_string(inst.model);
        if (!inst.betas.empty()) ij["betas"] = inst.betas;
        if (inst.model == ModelKind::Discontinuous) {
            ij["weights"] = inst.weights;
        } else {
            ij["heldout_relative_mse"] = inst.mlp_heldout_relative_mse;
            ij["epochs"] = inst.mlp_epochs;
        }
        j["instances"].push_back(std::move(ij));
    }
    return j.dump(2) + "\n";
}

void write_table1_outputs(const Table1Result& result, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_file_atomic(dir / "table1.csv", format_table1_csv(result));
    write_file_atomic(dir / "runs.csv", format_runs_csv(result));
    for (const auto& curve : result.curves) {
        write_file_atomic(dir / ("curve_" + curve.method + ".csv"), format_curve_csv(curve));
    }
    write_file_atomic(dir / "config.json", format_bench_config_json(result));
}

}  // namespace cfdr
