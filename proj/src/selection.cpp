#include "cfdr/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cfdr/errors.hpp"

namespace cfdr {

std::string_view to_string(Correction c) { return c == Correction::BH ? "bh" : "by"; }

Correction parse_correction(std::string_view text) {
    if (text == "bh" || text == "BH") return Correction::BH;
    if (text == "by" || text == "BY") return Correction::BY;
    throw UsageError("unknown correction '" + std::string(text) + "' (expected bh or by)");
}

void validate_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw InvalidAlpha("alpha must lie in (0,1), got " + std::to_string(alpha));
    }
}

double harmonic_number(std::size_t n) {
    double h = 0.0;
    for (std::size_t j = n; j >= 1; --j) h += 1.0 / static_cast<double>(j);
    return h;
}

namespace {

SelectionResult step_up(std::span<const double> pvalues, double alpha, double level) {
    if (pvalues.empty()) throw UsageError("no hypotheses to correct");
    for (double p : pvalues) {
        if (!(p > 0.0 && p <= 1.0)) throw InvalidPValue("p-value outside (0,1]: " + std::to_string(p));
    }
    std::vector<double> sorted(pvalues.begin(), pvalues.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());

    SelectionResult out;
    out.alpha = alpha;
    for (std::size_t rank = sorted.size(); rank >= 1; --rank) {
        if (sorted[rank - 1] <= static_cast<double>(rank) * level / n) {
            out.threshold = sorted[rank - 1];
            break;
        }
    }
    if (out.threshold) {
        for (std::size_t i = 0; i < pvalues.size(); ++i) {
            if (pvalues[i] <= *out.threshold) out.selected.push_back(i);
        }
    }
    return out;
}

}  // namespace

SelectionResult bh_select(std::span<const double> pvalues, double alpha) {
    validate_alpha(alpha);
    return step_up(pvalues, alpha, alpha);
}

SelectionResult by_select(std::span<const double> pvalues, double alpha) {
    validate_alpha(alpha);
    return step_up(pvalues, alpha, alpha / harmonic_number(pvalues.size()));
}

SelectionResult correct(Correction c, std::span<const double> pvalues, double alpha) {
    return c == Correction::BH ? bh_select(pvalues, alpha) : by_select(pvalues, alpha);
}

SelectionResult knockoff_select(std::span<const double> zs, double alpha) {
    validate_alpha(alpha);
    if (zs.empty()) throw UsageError("no statistics to select from");
    for (double z : zs) {
        if (!std::isfinite(z)) throw NonFiniteStatistic("non-finite difference statistic");
    }

    std::vector<double> sorted(zs.begin(), zs.end());
    std::sort(sorted.begin(), sorted.end());

    std::vector<double> candidates;
    candidates.reserve(sorted.size());
    for (double z : sorted) {
        if (z != 0.0) candidates.push_back(std::fabs(z));
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    SelectionResult out;
    out.alpha = alpha;
    for (double c : candidates) {
        const auto above = static_cast<std::size_t>(sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), c));
        if (above == 0) continue;
        const auto below = static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), -c) - sorted.begin());
        const double ratio = static_cast<double>(1 + below) / static_cast<double>(above);
        if (ratio <= alpha) {
            out.threshold = c;
            break;
        }
    }
    if (out.threshold) {
        for (std::size_t i = 0; i < zs.size(); ++i) {
            if (zs[i] >= *out.threshold) out.selected.push_back(i);
        }
    }
    return out;
}

}  // namespace cfdr
