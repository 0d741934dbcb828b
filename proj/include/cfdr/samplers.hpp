#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cfdr/rng.hpp"
#include "cfdr/types.hpp"

namespace cfdr {

// Counterfactual conditional Q(X_S | X_-S). Implementations are immutable
// after construction; concurrent callers supply independent engines.
class ConditionalSampler {
public:
    virtual ~ConditionalSampler() = default;

    virtual std::string name() const = 0;

    // One draw of replacement values for `subset`, in subset order.
    std::vector<double> sample(std::span<const double> x, std::span<const std::size_t> subset, Engine& eng) const;

    // `n` draws as an n x |subset| matrix. Row r is the r-th draw from `eng`,
    // so sample_many(n) consumes the engine exactly like n calls to sample().
    virtual Matrix sample_many(std::span<const double> x, std::span<const std::size_t> subset, std::size_t n,
                               Engine& eng) const;

    // False for samplers that talk to an out-of-process adapter.
    virtual bool concurrent_safe() const { return true; }

protected:
    virtual void draw(std::span<const double> x, std::span<const std::size_t> subset, Engine& eng,
                      std::span<double> out) const = 0;
};

// Throws EmptySubset / IndexOutOfRange / NonFiniteOutput.
void validate_draw_request(std::span<const double> x, std::span<const std::size_t> subset);

std::vector<double> sample_q(const ConditionalSampler& q, std::span<const double> x,
                             std::span<const std::size_t> subset, Engine& eng);

// N(0,1) per feature, independent of x.
class IndependentGaussianQ final : public ConditionalSampler {
public:
    std::string name() const override { return "independent-gaussian"; }

protected:
    void draw(std::span<const double> x, std::span<const std::size_t> subset, Engine& eng,
              std::span<double> out) const override;
};

// Feature s ~ N(sum_{j<s} beta_j x_j, 1), using the observed x even at
// positions that are themselves in the subset.
class AutoregressiveGaussianQ final : public ConditionalSampler {
public:
    explicit AutoregressiveGaussianQ(std::vector<double> betas);

    std::string name() const override { return "autoregressive-gaussian"; }
    const std::vector<double>& betas() const { return betas_; }
    double conditional_mean(std::span<const double> x, std::size_t feature) const;

    Matrix sample_many(std::span<const double> x, std::span<const std::size_t> subset, std::size_t n,
                       Engine& eng) const override;

protected:
    void draw(std::span<const double> x, std::span<const std::size_t> subset, Engine& eng,
              std::span<double> out) const override;

private:
    std::vector<double> betas_;
};

enum class DistributionKind { Independent, Correlated };

std::string to_string(DistributionKind kind);
DistributionKind parse_distribution(const std::string& text);

// Synthetic P(X): each feature comes from N(4,1) with probability h, otherwise
// from the null component (N(0,1), or N(sum_{j<i} beta_j x_j, 1) when correlated).
struct SyntheticDistribution {
    DistributionKind kind = DistributionKind::Independent;
    double h = 0.3;
    std::size_t d = 0;
    std::vector<double> betas;  // correlated only; length d

    void validate() const;
};

constexpr double kInterestingMean = 4.0;
constexpr double kBetaStddev = 0.25;  // beta_j ~ N(0, 1/16)

// Builds a distribution, drawing betas from `stream` for the correlated kind.
SyntheticDistribution make_distribution(DistributionKind kind, std::size_t d, double h, const RngStream& stream);

// The counterfactual Q that matches the null component of `dist`.
std::unique_ptr<ConditionalSampler> matching_conditional(const SyntheticDistribution& dist);

Dataset gen_dataset(const SyntheticDistribution& dist, std::size_t n, Engine& eng);

// Only the labels file (0/1 flags, same shape) is written when flags are present.
void write_dataset_csv(const std::string& path, const Dataset& data);
Dataset read_dataset_csv(const std::string& path, bool with_labels = false);
std::string labels_path_for(const std::string& data_path);

}  // namespace cfdr
