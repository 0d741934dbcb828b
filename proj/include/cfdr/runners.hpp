#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cfdr/model.hpp"
#include "cfdr/rng.hpp"
#include "cfdr/samplers.hpp"
#include "cfdr/selection.hpp"
#include "cfdr/stats.hpp"
#include "cfdr/types.hpp"

namespace cfdr {

// Disjoint, non-empty feature subsets over [0, d).
class SubsetSpec {
public:
    SubsetSpec(std::vector<Subset> subsets, std::size_t d);

    static SubsetSpec singletons(std::size_t d);

    std::size_t size() const { return subsets_.size(); }
    std::size_t dim() const { return d_; }
    const Subset& operator[](std::size_t i) const { return subsets_[i]; }
    const std::vector<Subset>& subsets() const { return subsets_; }

private:
    std::vector<Subset> subsets_;
    std::size_t d_;
};

// JSON array of arrays of unsigned feature indices.
SubsetSpec read_subsets_json(const std::string& path, std::size_t d);

// Which hypotheses share one correction / knockoff threshold.
enum class Pooling {
    Pooled,    // all inputs x subsets in one family
    PerInput,  // one family per input
};

std::string_view to_string(Pooling p);
Pooling parse_pooling(std::string_view text);

enum class Execution { Serial, Parallel };

struct IrtOptions {
    std::size_t draws = 100;  // K
    double alpha = 0.2;
    StatisticKind statistic = StatisticKind::OneSided;
    Correction correction = Correction::BH;
    Pooling pooling = Pooling::Pooled;
    Execution execution = Execution::Parallel;
};

struct OsftOptions {
    double alpha = 0.2;
    StatisticKind statistic = StatisticKind::OneSided;
    Pooling pooling = Pooling::Pooled;
    Execution execution = Execution::Parallel;
};

struct PairIndex {
    std::size_t input;
    std::size_t subset;
    friend bool operator==(const PairIndex&, const PairIndex&) = default;
};

// Per-pair arrays are row-major over (input, subset).
struct IrtResult {
    std::size_t num_inputs = 0;
    std::size_t num_subsets = 0;
    double alpha = 0.0;
    Correction correction = Correction::BH;
    Pooling pooling = Pooling::Pooled;
    std::vector<double> statistic;
    std::vector<double> pvalue;
    std::vector<std::optional<double>> tau;  // one per family
    std::vector<std::uint8_t> selected;
    std::vector<PairIndex> discoveries;

    std::size_t family_of(std::size_t input) const { return pooling == Pooling::Pooled ? 0 : input; }
};

struct OsftResult {
    std::size_t num_inputs = 0;
    std::size_t num_subsets = 0;
    double alpha = 0.0;
    Pooling pooling = Pooling::Pooled;
    std::vector<double> statistic;
    std::vector<double> null_statistic;
    std::vector<double> z;
    std::vector<std::optional<double>> z_star;  // one per family
    std::vector<std::uint8_t> selected;
    std::vector<PairIndex> discoveries;

    std::size_t family_of(std::size_t input) const { return pooling == Pooling::Pooled ? 0 : input; }

    // FDR level actually guaranteed when several independent inputs share one
    // knockoff threshold: N * alpha with N subsets per input.
    double guaranteed_level() const;
};

// Randomization test: K counterfactual draws per (input, subset), p-values
// corrected by BH or BY per family.
IrtResult run_irt(const BlackBoxModel& model, const ConditionalSampler& q, const Matrix& inputs,
                  const SubsetSpec& subsets, const IrtOptions& options, const RngStream& stream);

// One-shot test: a single counterfactual draw per (input, subset) (two with the
// centered statistic), difference statistics selected by the knockoff filter.
OsftResult run_osft(const BlackBoxModel& model, const ConditionalSampler& q, const Matrix& inputs,
                    const SubsetSpec& subsets, const OsftOptions& options, const RngStream& stream);

}  // namespace cfdr

namespace cfdr {

// CSV with columns input_idx,subset_idx,stat,null_stat_or_pvalue,z_or_tau,selected.
// IRT rows carry the p-value and the family's tau; OSFT rows carry the
// counterfactual statistic and z. An absent threshold is written as an empty field.
std::string format_result_csv(const IrtResult& result);
std::string format_result_csv(const OsftResult& result);

}  // namespace cfdr
