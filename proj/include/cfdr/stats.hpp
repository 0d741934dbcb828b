#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

namespace cfdr {

enum class StatisticKind {
    OneSided,          // T(Y) = Y
    TwoSidedCentered,  // T(Y) = (Y - Ybar)^2, Ybar from an extra counterfactual draw
};

std::string_view to_string(StatisticKind kind);
StatisticKind parse_statistic(std::string_view text);

// Randomization-test p-value. Always in (0, 1].
class PValue {
public:
    explicit PValue(double value);
    double value() const noexcept { return value_; }

private:
    double value_;
};

// Signed difference between the observed and counterfactual statistic.
class DifferenceStatistic {
public:
    explicit DifferenceStatistic(double z);
    double value() const noexcept { return z_; }

private:
    double z_;
};

double one_sided_stat(double y);
double two_sided_stat(double y, double y_bar);

// Dispatch on `kind`. `center` must be present exactly for TwoSidedCentered.
double apply_statistic(StatisticKind kind, double y, std::optional<double> center);

// (1 + #{k : t <= null_stats[k]}) / (K + 1). Ties count toward the numerator.
PValue irt_pvalue(double t, std::span<const double> null_stats);

DifferenceStatistic difference_stat(double t, double t_tilde);

}  // namespace cfdr
