#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace cfdr {

enum class Correction { BH, BY };

std::string_view to_string(Correction c);
Correction parse_correction(std::string_view text);

struct SelectionResult {
    // tau for p-value procedures, z* for the knockoff filter; empty iff nothing selected.
    std::optional<double> threshold;
    std::vector<std::size_t> selected;  // ascending hypothesis indices
    double alpha = 0.0;
};

// Benjamini-Hochberg step-up: tau is the largest sorted p(i) with p(i) <= i*alpha/N.
SelectionResult bh_select(std::span<const double> pvalues, double alpha);

// Benjamini-Yekutieli: BH run at alpha / H_N.
SelectionResult by_select(std::span<const double> pvalues, double alpha);

SelectionResult correct(Correction c, std::span<const double> pvalues, double alpha);

// Knockoff filter threshold: z* is the smallest nonzero |z_i| with
// (1 + #{z <= -z*}) / #{z >= z*} <= alpha. Exact zeros are never selected and
// a zero denominator never satisfies the condition.
SelectionResult knockoff_select(std::span<const double> zs, double alpha);

double harmonic_number(std::size_t n);

void validate_alpha(double alpha);

}  // namespace cfdr
