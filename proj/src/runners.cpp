#include "cfdr/runners.hpp"

#include <fstream>
#include <json.hpp>

#include "cfdr/errors.hpp"
#include "cfdr/kernels.hpp"

namespace cfdr {

SubsetSpec::SubsetSpec(std::vector<Subset> subsets, std::size_t d) : subsets_(std::move(subsets)), d_(d) {
    if (subsets_.empty()) throw EmptySubset("no subsets to test");
    std::vector<long> owner(d, -1);
    for (std::size_t i = 0; i < subsets_.size(); ++i) {
        if (subsets_[i].empty()) throw EmptySubset("subset " + std::to_string(i) + " is empty");
        for (std::size_t f : subsets_[i]) {
            if (f >= d) {
                throw IndexOutOfRange("subset " + std::to_string(i) + " references feature " + std::to_string(f) +
                                      " but d=" + std::to_string(d));
            }
            if (owner[f] >= 0) {
                throw OverlappingSubsets("feature " + std::to_string(f) + " appears in subsets " +
                                         std::to_string(owner[f]) + " and " + std::to_string(i));
            }
            owner[f] = static_cast<long>(i);
        }
    }
}

SubsetSpec SubsetSpec::singletons(std::size_t d) {
    std::vector<Subset> s(d);
    for (std::size_t j = 0; j < d; ++j) s[j] = {j};
    return SubsetSpec(std::move(s), d);
}

SubsetSpec read_subsets_json(const std::string& path, std::size_t d) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open subsets file '" + path + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw UsageError("subsets file '" + path + "' is not valid JSON: " + e.what());
    }
    if (!doc.is_array()) throw UsageError("subsets file must hold a JSON array of index arrays");
    std::vector<Subset> subsets;
    for (const auto& entry : doc) {
        if (!entry.is_array()) throw UsageError("each subset must be a JSON array of indices");
        Subset s;
        for (const auto& idx : entry) {
            if (!idx.is_number_unsigned()) throw UsageError("subset indices must be unsigned integers");
            s.push_back(idx.get<std::size_t>());
        }
        subsets.push_back(std::move(s));
    }
    return SubsetSpec(std::move(subsets), d);
}

std::string_view to_string(Pooling p) { return p == Pooling::Pooled ? "pooled" : "per-input"; }

Pooling parse_pooling(std::string_view text) {
    if (text == "pooled") return Pooling::Pooled;
    if (text == "per-input") return Pooling::PerInput;
    throw UsageError("unknown pooling '" + std::string(text) + "' (expected pooled or per-input)");
}

double OsftResult::guaranteed_level() const {
    return pooling == Pooling::Pooled && num_inputs > 1 ? static_cast<double>(num_subsets) * alpha : alpha;
}

namespace {

void check_inputs(const BlackBoxModel& model, const Matrix& inputs, const SubsetSpec& subsets) {
    if (inputs.rows() == 0) throw InvalidDimension("no inputs to interpret");
    if (static_cast<std::size_t>(inputs.cols()) != model.dim()) {
        throw DimensionMismatch("inputs have d=" + std::to_string(inputs.cols()) + " but model expects " +
                                std::to_string(model.dim()));
    }
    if (subsets.dim() != model.dim()) {
        throw DimensionMismatch("subsets were validated against d=" + std::to_string(subsets.dim()) +
                                " but model expects " + std::to_string(model.dim()));
    }
}

// Runs `select` on each family and marks the selected pairs.
template <typename Select>
std::vector<std::optional<double>> select_families(const std::vector<double>& values, std::size_t n_in,
                                                   std::size_t n_sub, Pooling pooling, Select&& select,
                                                   std::vector<std::uint8_t>& selected,
                                                   std::vector<PairIndex>& discoveries) {
    selected.assign(values.size(), 0);
    std::vector<std::optional<double>> thresholds;
    const std::size_t families = pooling == Pooling::Pooled ? 1 : n_in;
    const std::size_t width = pooling == Pooling::Pooled ? n_in * n_sub : n_sub;
    for (std::size_t f = 0; f < families; ++f) {
        const std::span<const double> block(values.data() + f * width, width);
        const SelectionResult r = select(block);
        thresholds.push_back(r.threshold);
        for (std::size_t idx : r.selected) selected[f * width + idx] = 1;
    }
    discoveries.clear();
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (selected[k]) discoveries.push_back(PairIndex{k / n_sub, k % n_sub});
    }
    return thresholds;
}

}  // namespace

IrtResult run_irt(const BlackBoxModel& model, const ConditionalSampler& q, const Matrix& inputs,
                  const SubsetSpec& subsets, const IrtOptions& options, const RngStream& stream) {
    validate_alpha(options.alpha);
    if (options.draws == 0) throw EmptyNullSample("randomization test needs K >= 1 draws");
    check_inputs(model, inputs, subsets);

    const auto observed = kernels::observed_outputs(model, inputs);
    const kernels::PairProblem problem{model, q, inputs, subsets, observed, options.statistic, stream};
    const auto pairs = options.execution == Execution::Parallel ? kernels::irt_pairs_parallel(problem, options.draws)
                                                                : kernels::irt_pairs_serial(problem, options.draws);

    IrtResult r;
    r.num_inputs = static_cast<std::size_t>(inputs.rows());
    r.num_subsets = subsets.size();
    r.alpha = options.alpha;
    r.correction = options.correction;
    r.pooling = options.pooling;
    r.statistic.reserve(pairs.size());
    r.pvalue.reserve(pairs.size());
    for (const auto& p : pairs) {
        r.statistic.push_back(p.statistic);
        r.pvalue.push_back(p.pvalue);
    }
    r.tau = select_families(
        r.pvalue, r.num_inputs, r.num_subsets, options.pooling,
        [&](std::span<const double> block) { return correct(options.correction, block, options.alpha); }, r.selected,
        r.discoveries);
    return r;
}

OsftResult run_osft(const BlackBoxModel& model, const ConditionalSampler& q, const Matrix& inputs,
                    const SubsetSpec& subsets, const OsftOptions& options, const RngStream& stream) {
    validate_alpha(options.alpha);
    check_inputs(model, inputs, subsets);

    const auto observed = kernels::observed_outputs(model, inputs);
    const kernels::PairProblem problem{model, q, inputs, subsets, observed, options.statistic, stream};
    const auto pairs = options.execution == Execution::Parallel ? kernels::osft_pairs_parallel(problem)
                                                                : kernels::osft_pairs_serial(problem);

    OsftResult r;
    r.num_inputs = static_cast<std::size_t>(inputs.rows());
    r.num_subsets = subsets.size();
    r.alpha = options.alpha;
    r.pooling = options.pooling;
    for (const auto& p : pairs) {
        r.statistic.push_back(p.statistic);
        r.null_statistic.push_back(p.null_statistic);
        r.z.push_back(p.z);
    }
    r.z_star = select_families(
        r.z, r.num_inputs, r.num_subsets, options.pooling,
        [&](std::span<const double> block) { return knockoff_select(block, options.alpha); }, r.selected,
        r.discoveries);
    return r;
}

}  // namespace cfdr

#include <sstream>

#include "cfdr/csv.hpp"

namespace cfdr {

namespace {

constexpr const char* kResultHeader = "input_idx,subset_idx,stat,null_stat_or_pvalue,z_or_tau,selected\n";

}  // namespace

std::string format_result_csv(const IrtResult& r) {
    std::ostringstream out;
    out << kResultHeader;
    for (std::size_t m = 0; m < r.num_inputs; ++m) {
        const auto& tau = r.tau[r.family_of(m)];
        for (std::size_t i = 0; i < r.num_subsets; ++i) {
            const std::size_t k = m * r.num_subsets + i;
            out << m << ',' << i << ',' << format_double(r.statistic[k]) << ',' << format_double(r.pvalue[k]) << ','
                << (tau ? format_double(*tau) : std::string()) << ',' << int(r.selected[k]) << '\n';
        }
    }
    return out.str();
}

std::string format_result_csv(const OsftResult& r) {
    std::ostringstream out;
    out << kResultHeader;
    for (std::size_t m = 0; m < r.num_inputs; ++m) {
        for (std::size_t i = 0; i < r.num_subsets; ++i) {
            const std::size_t k = m * r.num_subsets + i;
            out << m << ',' << i << ',' << format_double(r.statistic[k]) << ','
                << format_double(r.null_statistic[k]) << ',' << format_double(r.z[k]) << ',' << int(r.selected[k])
                << '\n';
        }
    }
    return out.str();
}

}  // namespace cfdr
