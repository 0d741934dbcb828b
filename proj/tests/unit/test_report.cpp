#include <gtest/gtest.h>

#include "cfdr/csv.hpp"
#include "cfdr/errors.hpp"
#include "cfdr/report.hpp"
#include "test_support.hpp"

using namespace cfdr;
using cfdr::testing::TempDir;
using cfdr::testing::write_text;

TEST(FormatDouble, ShortestRoundTrip) {
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(1.0), "1");
    EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(AtomicFile, UncommittedLeavesNothing) {
    TempDir dir;
    const auto path = dir.path() / "out.csv";
    {
        AtomicFile f(path);
        f.stream() << "partial";
    }
    EXPECT_FALSE(std::filesystem::exists(path));
    EXPECT_TRUE(std::filesystem::is_empty(dir.path()));
    write_file_atomic(path, "done\n");
    EXPECT_EQ(cfdr::testing::read_text(path.string()), "done\n");
}

TEST(ReadScores, RequiresCompleteCoverage) {
    TempDir dir;
    write_text(dir.file("s.csv"), "input_idx,feature_idx,score\n0,0,1.5\n0,1,-2\n1,0,3\n1,1,0\n");
    EXPECT_EQ(read_scores_csv(dir.file("s.csv"), 2, 2), (std::vector<double>{1.5, -2, 3, 0}));
    write_text(dir.file("gap.csv"), "input_idx,feature_idx,score\n0,0,1.5\n");
    EXPECT_THROW(read_scores_csv(dir.file("gap.csv"), 2, 2), UsageError);
    write_text(dir.file("dup.csv"), "input_idx,feature_idx,score\n0,0,1\n0,0,2\n0,1,1\n1,0,1\n");
    EXPECT_THROW(read_scores_csv(dir.file("dup.csv"), 2, 2), ParseError);
    write_text(dir.file("bad.csv"), "input_idx,feature_idx,score\n0,0,x\n");
    try {
        read_scores_csv(dir.file("bad.csv"), 1, 1);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(ReadTruth, ZeroOneMatrix) {
    TempDir dir;
    write_text(dir.file("t.csv"), "f0,f1,f2\n1,0,0\n0,0,1\n");
    const auto g = read_truth_csv(dir.file("t.csv"));
    EXPECT_EQ(g.num_inputs, 2u);
    EXPECT_EQ(g.num_features, 3u);
    EXPECT_TRUE(g.at(1, 2));
    write_text(dir.file("bad.csv"), "f0\n2\n");
    EXPECT_THROW(read_truth_csv(dir.file("bad.csv")), ParseError);
}

TEST(Curves, RoundTripAndName) {
    TempDir dir;
    const PowerCurve c{"osft", {{0.0, 0.5}, {0.1, 0.75}}};
    write_text(dir.file("curve_osft.csv"), format_curve_csv(c));
    EXPECT_EQ(method_from_curve_path(dir.file("curve_osft.csv")), "osft");
    const auto back = read_curve_csv(dir.file("curve_osft.csv"), "osft");
    ASSERT_EQ(back.points.size(), 2u);
    EXPECT_EQ(back.points[1].tpr, 0.75);
}

TEST(Svg, OnePolylinePerCurveAndEscapedText) {
    const std::vector<PowerCurve> curves{{"a<b", {{0.0, 0.0}, {1.0, 1.0}}}, {"saliency", {{0.0, 0.2}, {0.5, 0.9}}}};
    const auto svg = render_curves_svg(curves, "R&D");
    EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
    std::size_t count = 0;
    for (auto pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1)) ++count;
    EXPECT_EQ(count, 2u);
    EXPECT_NE(svg.find("R&amp;D"), std::string::npos);
    EXPECT_NE(svg.find("a&lt;b"), std::string::npos);
    EXPECT_EQ(svg.find("R&D"), std::string::npos);
}
