#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>
#include <vector>

#include "cfdr/errors.hpp"
#include "cfdr/selection.hpp"

using namespace cfdr;

namespace {

// Tries every p-value as tau and keeps the largest one satisfying the step-up rule.
std::vector<std::size_t> brute_force_bh(const std::vector<double>& p, double alpha) {
    const double n = static_cast<double>(p.size());
    std::optional<double> best;
    for (double tau : p) {
        const auto rank = std::count_if(p.begin(), p.end(), [tau](double v) { return v <= tau; });
        if (tau <= rank * alpha / n && (!best || tau > *best)) best = tau;
    }
    std::vector<std::size_t> out;
    if (!best) return out;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= *best) out.push_back(i);
    }
    return out;
}

// Enumerates every distinct nonzero |z| and returns the smallest qualifying one.
std::optional<double> brute_force_knockoff(const std::vector<double>& z, double alpha) {
    std::optional<double> best;
    for (double c : z) {
        const double t = std::fabs(c);
        if (t == 0.0) continue;
        const double neg = std::count_if(z.begin(), z.end(), [t](double v) { return v <= -t; });
        const double pos = std::count_if(z.begin(), z.end(), [t](double v) { return v >= t; });
        if (pos > 0 && (1.0 + neg) / pos <= alpha && (!best || t < *best)) best = t;
    }
    return best;
}

std::vector<double> random_pvalues(std::mt19937_64& eng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::bernoulli_distribution signal(0.3);
    std::vector<double> p(n);
    for (auto& v : p) {
        v = signal(eng) ? std::max(1e-6, std::pow(u(eng), 6.0)) : std::max(1e-6, u(eng));
    }
    // Ties are common with finite-K randomization p-values.
    if (n > 2 && u(eng) < 0.3) p[1] = p[0];
    return p;
}

}  // namespace

TEST(BhSelect, AllNullMaximal) {
    const std::vector<double> p{1.0, 1.0, 1.0};
    const auto r = bh_select(p, 0.2);
    EXPECT_TRUE(r.selected.empty());
    EXPECT_FALSE(r.threshold.has_value());
}

TEST(BhSelect, SingleTest) {
    const auto r = bh_select(std::vector<double>{0.01}, 0.05);
    ASSERT_TRUE(r.threshold);
    EXPECT_EQ(*r.threshold, 0.01);
    EXPECT_EQ(r.selected, std::vector<std::size_t>{0});
}

TEST(BhSelect, LargestQualifyingRank) {
    const std::vector<double> p{0.01, 0.02, 0.03, 0.5, 0.9};
    const auto r = bh_select(p, 0.1);
    ASSERT_TRUE(r.threshold);
    EXPECT_EQ(*r.threshold, 0.03);
    EXPECT_EQ(r.selected, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(BhSelect, StepUpPassesNonQualifyingLowerRanks) {
    // Rank 1 fails (0.04 > 0.1/3) but rank 3 qualifies.
    const std::vector<double> p{0.09, 0.04, 0.08};
    const auto r = bh_select(p, 0.1);
    EXPECT_EQ(r.selected, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(BhSelect, RejectsBadInput) {
    EXPECT_THROW(bh_select(std::vector<double>{0.5}, 0.0), InvalidAlpha);
    EXPECT_THROW(bh_select(std::vector<double>{0.5}, 1.0), InvalidAlpha);
    EXPECT_THROW(bh_select(std::vector<double>{0.0}, 0.2), InvalidPValue);
    EXPECT_THROW(bh_select(std::vector<double>{1.2}, 0.2), InvalidPValue);
    EXPECT_THROW(bh_select(std::vector<double>{}, 0.2), Error);
}

TEST(BhSelect, MatchesBruteForceOracle) {
    std::mt19937_64 eng(99);
    std::uniform_int_distribution<std::size_t> len(1, 20);
    std::uniform_real_distribution<double> a(0.01, 0.5);
    for (int rep = 0; rep < 1000; ++rep) {
        const auto p = random_pvalues(eng, len(eng));
        const double alpha = a(eng);
        EXPECT_EQ(bh_select(p, alpha).selected, brute_force_bh(p, alpha)) << "rep " << rep;
    }
}

TEST(BhSelect, MonotoneInAlpha) {
    std::mt19937_64 eng(7);
    for (int rep = 0; rep < 300; ++rep) {
        const auto p = random_pvalues(eng, 15);
        std::vector<std::size_t> prev;
        for (double alpha = 0.01; alpha < 1.0; alpha += 0.07) {
            const auto cur = bh_select(p, alpha).selected;
            EXPECT_TRUE(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
            prev = cur;
        }
    }
}

TEST(BhSelect, SelectedIffBelowThreshold) {
    std::mt19937_64 eng(8);
    for (int rep = 0; rep < 300; ++rep) {
        const auto p = random_pvalues(eng, 12);
        const auto r = bh_select(p, 0.2);
        EXPECT_EQ(r.selected.empty(), !r.threshold.has_value());
        for (std::size_t i = 0; i < p.size(); ++i) {
            const bool in = std::binary_search(r.selected.begin(), r.selected.end(), i);
            EXPECT_EQ(in, r.threshold && p[i] <= *r.threshold);
        }
    }
}

TEST(BySelect, SingleTestEqualsBh) {
    for (double p : {0.001, 0.04, 0.06, 0.5}) {
        const std::vector<double> v{p};
        EXPECT_EQ(by_select(v, 0.05).selected, bh_select(v, 0.05).selected);
    }
}

TEST(BySelect, HarmonicScaling) {
    EXPECT_NEAR(harmonic_number(5), 137.0 / 60.0, 1e-15);
    const std::vector<double> p{0.01, 0.02, 0.03, 0.5, 0.9};
    EXPECT_TRUE(by_select(p, 0.1).selected.empty());
    const std::vector<double> q{0.001, 1.0};
    EXPECT_EQ(by_select(q, 0.2).selected, std::vector<std::size_t>{0});
}

TEST(BySelect, SubsetOfBh) {
    std::mt19937_64 eng(13);
    std::uniform_int_distribution<std::size_t> len(1, 30);
    for (int rep = 0; rep < 500; ++rep) {
        const auto p = random_pvalues(eng, len(eng));
        const auto by = by_select(p, 0.2).selected;
        const auto bh = bh_select(p, 0.2).selected;
        EXPECT_TRUE(std::includes(bh.begin(), bh.end(), by.begin(), by.end()));
    }
}

TEST(Correction, NamesRoundTrip) {
    EXPECT_EQ(parse_correction("bh"), Correction::BH);
    EXPECT_EQ(parse_correction("by"), Correction::BY);
    EXPECT_THROW(parse_correction("bonferroni"), UsageError);
}

TEST(KnockoffSelect, SelectsPositivesAboveThreshold) {
    const std::vector<double> z{5, 4, 3, -1};
    const auto r = knockoff_select(z, 0.5);
    ASSERT_TRUE(r.threshold);
    EXPECT_EQ(*r.threshold, 3.0);
    EXPECT_EQ(r.selected, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(KnockoffSelect, NoCandidateQualifies) {
    const std::vector<double> z{3, 2, -1, 0.5, -2.5};
    const auto r = knockoff_select(z, 0.4);
    EXPECT_TRUE(r.selected.empty());
    EXPECT_FALSE(r.threshold);
}

TEST(KnockoffSelect, AllNegativeOrZero) {
    EXPECT_TRUE(knockoff_select(std::vector<double>{-1, -2, -0.5}, 0.9).selected.empty());
    EXPECT_TRUE(knockoff_select(std::vector<double>{0, 0, 0}, 0.9).selected.empty());
}

TEST(KnockoffSelect, ZerosNeverSelected) {
    std::vector<double> z(20, 0.0);
    z[0] = 9;
    z[1] = 8;
    z[2] = 7;
    const auto r = knockoff_select(z, 0.5);
    EXPECT_EQ(r.selected, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(KnockoffSelect, MatchesEnumerationOracle) {
    std::mt19937_64 eng(21);
    std::normal_distribution<double> n;
    std::uniform_int_distribution<int> len(1, 40);
    std::uniform_real_distribution<double> a(0.05, 0.6);
    for (int rep = 0; rep < 1000; ++rep) {
        std::vector<double> z(len(eng));
        for (auto& v : z) v = std::round((n(eng) + 1.0) * 4.0) / 4.0;  // many ties and zeros
        const double alpha = a(eng);
        const auto r = knockoff_select(z, alpha);
        const auto oracle = brute_force_knockoff(z, alpha);
        ASSERT_EQ(r.threshold.has_value(), oracle.has_value()) << "rep " << rep;
        if (!oracle) continue;
        EXPECT_EQ(*r.threshold, *oracle);
        for (std::size_t i = 0; i < z.size(); ++i) {
            const bool in = std::binary_search(r.selected.begin(), r.selected.end(), i);
            EXPECT_EQ(in, z[i] >= *oracle);
        }
    }
}

TEST(KnockoffSelect, ControlsFdrUnderSignSymmetricNulls) {
    // All hypotheses null: any selection is a false discovery.
    std::mt19937_64 eng(31);
    std::normal_distribution<double> n;
    const int reps = 4000;
    double fdp_sum = 0.0, fdp_sq = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
        std::vector<double> z(50);
        for (auto& v : z) v = n(eng);
        const double fdp = knockoff_select(z, 0.2).selected.empty() ? 0.0 : 1.0;
        fdp_sum += fdp;
        fdp_sq += fdp * fdp;
    }
    const double mean = fdp_sum / reps;
    const double se = std::sqrt(std::max(0.0, fdp_sq / reps - mean * mean) / reps);
    EXPECT_LE(mean, 0.2 + 3.0 * se);
}

TEST(ValidateAlpha, OpenUnitInterval) {
    EXPECT_NO_THROW(validate_alpha(0.2));
    EXPECT_THROW(validate_alpha(1.5), InvalidAlpha);
    EXPECT_THROW(validate_alpha(std::nan("")), InvalidAlpha);
}
