#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cfdr/mlp.hpp"
#include "cfdr/model.hpp"
#include "cfdr/runners.hpp"
#include "cfdr/samplers.hpp"

namespace cfdr {

// Per-(input, feature) truth: true where the point null is false.
struct GroundTruth {
    std::size_t num_inputs = 0;
    std::size_t num_features = 0;
    std::vector<std::uint8_t> important;  // row-major

    bool at(std::size_t input, std::size_t feature) const { return important[input * num_features + feature] != 0; }
    std::size_t count() const;
};

// Feature i < p matters iff it came from N(4,1) and |x_{i+p}| >= t (symmetric for i >= p).
GroundTruth label_ground_truth_paired(const Dataset& data, double threshold);

// Every feature of sum_i |x_i| matters exactly when it came from N(4,1).
GroundTruth label_ground_truth_mlp(const Dataset& data);

struct FdrTpr {
    double fdr = 0.0;
    double tpr = 0.0;
    bool truth_empty = false;  // tpr reported as 0 and flagged
};

// Plug-in FDR and TPR for one selection; FDR = 0 for an empty selection.
FdrTpr fdr_tpr(std::span<const std::size_t> selected, std::span<const std::size_t> truth);
FdrTpr fdr_tpr(std::span<const std::uint8_t> selected_mask, std::span<const std::uint8_t> truth_mask);

// FDR/TPR computed per selection family (see Pooling) and averaged over
// families; families with no true positives are left out of the TPR mean.
struct FamilyMetrics {
    double fdr = 0.0;
    double tpr = 0.0;
    bool tpr_defined = false;
    std::size_t families = 0;
};

FamilyMetrics family_metrics(std::span<const std::uint8_t> selected, const GroundTruth& truth, Pooling pooling);

enum class BaselineKind { Taylor, Saliency };

std::string to_string(BaselineKind kind);

// Taylor: x_i * df/dx_i. Saliency: |df/dx_i|. Throws NotDifferentiable for
// models without an input gradient.
std::vector<double> baseline_scores(BaselineKind kind, const BlackBoxModel& model, std::span<const double> x);

struct CurvePoint {
    double fdr_level;
    double tpr;
};

struct PowerCurve {
    std::string method;
    std::vector<CurvePoint> points;
};

struct SweepPoint {
    std::size_t k;
    double fdr;
    double tpr;
};

// (FDR_k, TPR_k) when the k highest-ranked scores are selected, k = 1..n.
// Ranking is by score (one-sided) or |score| (two-sided); ties keep index order.
std::vector<SweepPoint> sweep_path(std::span<const double> scores, std::span<const std::uint8_t> truth,
                                   StatisticKind sidedness);

// best_tpr(L) = max{TPR_k : FDR_k <= L}, 0 when no k qualifies.
PowerCurve sweep_curve(std::span<const double> scores, std::span<const std::uint8_t> truth, StatisticKind sidedness,
                       std::span<const double> fdr_levels, std::string method = {});

std::vector<double> default_fdr_levels();

std::string format_curve_csv(const PowerCurve& curve);

// ---------------------------------------------------------------- benchmark table

enum class ModelKind { Discontinuous, NeuralNet };
enum class Method { IRT, OSFT };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& text);
std::string to_string(Method m);

struct BenchConfig {
    std::uint64_t seed = 1;
    double alpha = 0.2;
    std::size_t runs = 10;
    std::size_t samples = 100;
    std::size_t draws = 100;
    double h = 0.3;
    std::size_t paired_half_dim = 50;
    double threshold = 3.0;
    std::size_t mlp_dim = 25;
    MlpConfig mlp;
    Correction correction = Correction::BH;
    Pooling irt_pooling = Pooling::PerInput;
    Pooling osft_pooling = Pooling::Pooled;
    std::vector<DistributionKind> distributions{DistributionKind::Independent, DistributionKind::Correlated};
    std::vector<ModelKind> models{ModelKind::Discontinuous, ModelKind::NeuralNet};
    std::size_t jobs = 1;
    std::vector<double> curve_levels = default_fdr_levels();
};

struct BenchRunRecord {
    std::string config_id;
    std::size_t run = 0;
    DistributionKind distribution{};
    ModelKind model{};
    Method method{};
    StatisticKind sided{};
    double alpha = 0.0;
    double fdr = 0.0;
    double tpr = 0.0;
    bool tpr_defined = false;
    std::size_t tested = 0;
    std::size_t selected = 0;
};

struct CellAggregate {
    DistributionKind distribution{};
    ModelKind model{};
    Method method{};
    StatisticKind sided{};
    double alpha = 0.0;
    double fdr_mean = 0.0;
    double tpr_mean = 0.0;
    std::size_t runs = 0;
};

// Frozen per-run instance parameters, kept with the results.
struct InstanceRecord {
    std::size_t run = 0;
    DistributionKind distribution{};
    ModelKind model{};
    std::vector<double> betas;
    std::vector<double> weights;          // paired-threshold only
    double mlp_heldout_relative_mse = 0;  // neural net only
    std::size_t mlp_epochs = 0;
};

struct Table1Result {
    BenchConfig config;
    std::vector<BenchRunRecord> records;  // sorted by (cell, run)
    std::vector<CellAggregate> cells;
    std::vector<InstanceRecord> instances;
    std::vector<PowerCurve> curves;  // gradient baselines on the neural net, averaged over runs
};

std::string cell_id(DistributionKind d, ModelKind m, Method method, StatisticKind sided);

// Every (distribution, model, method, sidedness) cell of the benchmark,
// averaged over config.runs independent runs.
Table1Result run_table1(const BenchConfig& config);

std::string format_table1_csv(const Table1Result& result);
std::string format_runs_csv(const Table1Result& result);
std::string format_table1_text(const Table1Result& result);
std::string format_bench_config_json(const Table1Result& result);

// table1.csv, runs.csv, curve_<method>.csv, config.json (all written atomically).
void write_table1_outputs(const Table1Result& result, const std::filesystem::path& dir);

}  // namespace cfdr
