#include "cfdr/stats.hpp"

#include <cmath>
#include <string>

#include "cfdr/errors.hpp"

namespace cfdr {

namespace {

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) {
        throw NonFiniteOutput(std::string("non-finite ") + what + ": " + std::to_string(v));
    }
}

}  // namespace

std::string_view to_string(StatisticKind kind) {
    return kind == StatisticKind::OneSided ? "one-sided" : "two-sided";
}

StatisticKind parse_statistic(std::string_view text) {
    if (text == "one-sided" || text == "1" || text == "one") return StatisticKind::OneSided;
    if (text == "two-sided" || text == "2" || text == "two") return StatisticKind::TwoSidedCentered;
    throw UsageError("unknown statistic '" + std::string(text) + "' (expected one-sided or two-sided)");
}

PValue::PValue(double value) : value_(value) {
    if (!(value > 0.0 && value <= 1.0)) {
        throw InvalidPValue("p-value outside (0,1]: " + std::to_string(value));
    }
}

DifferenceStatistic::DifferenceStatistic(double z) : z_(z) {
    if (!std::isfinite(z)) throw NonFiniteStatistic("non-finite difference statistic");
}

double one_sided_stat(double y) {
    require_finite(y, "model output");
    return y;
}

double two_sided_stat(double y, double y_bar) {
    require_finite(y, "model output");
    require_finite(y_bar, "centering output");
    const double d = y - y_bar;
    return d * d;
}

double apply_statistic(StatisticKind kind, double y, std::optional<double> center) {
    if (kind == StatisticKind::OneSided) {
        if (center) throw UsageError("one-sided statistic takes no centering value");
        return one_sided_stat(y);
    }
    if (!center) throw UsageError("two-sided statistic requires a centering value");
    return two_sided_stat(y, *center);
}

PValue irt_pvalue(double t, std::span<const double> null_stats) {
    if (null_stats.empty()) throw EmptyNullSample("randomization test needs at least one null draw");
    require_finite(t, "statistic");
    std::size_t at_least = 0;
    for (double s : null_stats) {
        require_finite(s, "null statistic");
        if (t <= s) ++at_least;
    }
    return PValue(static_cast<double>(1 + at_least) / static_cast<double>(null_stats.size() + 1));
}

DifferenceStatistic difference_stat(double t, double t_tilde) {
    if (!std::isfinite(t) || !std::isfinite(t_tilde)) {
        throw NonFiniteOutput("non-finite statistic in difference");
    }
    return DifferenceStatistic(t - t_tilde);
}

}  // namespace cfdr
