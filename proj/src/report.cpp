#include "cfdr/report.hpp"

#include <filesystem>
#include <sstream>

#include "cfdr/csv.hpp"
#include "cfdr/errors.hpp"

namespace cfdr {

std::vector<double> read_scores_csv(const std::string& path, std::size_t num_inputs, std::size_t num_features) {
    const CsvTable table = read_csv(path);
    const std::size_t ci = table.column("input_idx");
    const std::size_t cf = table.column("feature_idx");
    const std::size_t cs = table.column("score");
    std::vector<double> scores(num_inputs * num_features, 0.0);
    std::vector<std::uint8_t> seen(scores.size(), 0);
    for (const auto& row : table.rows) {
        const std::size_t m = parse_index_field(row.fields[ci], row.line);
        const std::size_t f = parse_index_field(row.fields[cf], row.line);
        if (m >= num_inputs || f >= num_features) {
            throw ParseError(path + ": row " + std::to_string(row.line) + " indexes outside the truth grid", row.line);
        }
        const std::size_t k = m * num_features + f;
        if (seen[k]) {
            throw ParseError(path + ": row " + std::to_string(row.line) + " repeats (" + std::to_string(m) + "," +
                                 std::to_string(f) + ")",
                             row.line);
        }
        seen[k] = 1;
        scores[k] = parse_double_field(row.fields[cs], row.line);
    }
    for (std::size_t k = 0; k < seen.size(); ++k) {
        if (!seen[k]) {
            throw UsageError(path + ": no score for input " + std::to_string(k / num_features) + ", feature " +
                             std::to_string(k % num_features));
        }
    }
    return scores;
}

GroundTruth read_truth_csv(const std::string& path) {
    const CsvTable table = read_csv(path);
    GroundTruth g;
    g.num_features = table.header.size();
    g.num_inputs = table.rows.size();
    g.important.reserve(g.num_inputs * g.num_features);
    for (const auto& row : table.rows) {
        for (const auto& f : row.fields) {
            if (f != "0" && f != "1") {
                throw ParseError(path + ": row " + std::to_string(row.line) + " has a non-0/1 label '" + f + "'",
                                 row.line);
            }
            g.important.push_back(f == "1" ? 1 : 0);
        }
    }
    return g;
}

PowerCurve read_curve_csv(const std::string& path, std::string method) {
    const CsvTable table = read_csv(path);
    const std::size_t cl = table.column("fdr_level");
    const std::size_t ct = table.column("tpr");
    PowerCurve curve{std::move(method), {}};
    for (const auto& row : table.rows) {
        curve.points.push_back(
            CurvePoint{parse_double_field(row.fields[cl], row.line), parse_double_field(row.fields[ct], row.line)});
    }
    return curve;
}

std::string method_from_curve_path(const std::string& path) {
    std::string stem = std::filesystem::path(path).stem().string();
    if (stem.rfind("curve_", 0) == 0) stem = stem.substr(6);
    return stem;
}

namespace {

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

}  // namespace

std::string render_curves_svg(const std::vector<PowerCurve>& curves, const std::string& title) {
    constexpr double width = 640, height = 480, left = 70, right = 190, top = 50, bottom = 60;
    const double pw = width - left - right;
    const double ph = height - top - bottom;
    auto sx = [&](double v) { return left + v * pw; };
    auto sy = [&](double v) { return top + (1.0 - v) * ph; };

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
        << "  <rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n"
        << "  <text x=\"" << width / 2 << "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"16\">" << xml_escape(title) << "</text>\n";

    svg << "  <g stroke=\"#dddddd\" stroke-width=\"1\">\n";
    for (int i = 0; i <= 10; ++i) {
        const double v = i / 10.0;
        svg << "    <line x1=\"" << sx(v) << "\" y1=\"" << sy(0) << "\" x2=\"" << sx(v) << "\" y2=\"" << sy(1)
            << "\"/>\n";
        svg << "    <line x1=\"" << sx(0) << "\" y1=\"" << sy(v) << "\" x2=\"" << sx(1) << "\" y2=\"" << sy(v)
            << "\"/>\n";
    }
    svg << "  </g>\n";
    svg << "  <rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    svg << "  <g font-family=\"sans-serif\" font-size=\"11\">\n";
    for (int i = 0; i <= 10; i += 2) {
        const double v = i / 10.0;
        svg << "    <text x=\"" << sx(v) << "\" y=\"" << sy(0) + 16 << "\" text-anchor=\"middle\">" << v
            << "</text>\n";
        svg << "    <text x=\"" << sx(0) - 8 << "\" y=\"" << sy(v) + 4 << "\" text-anchor=\"end\">" << v
            << "</text>\n";
    }
    svg << "    <text x=\"" << sx(0.5) << "\" y=\"" << height - 18 << "\" text-anchor=\"middle\">FDR level</text>\n";
    svg << "    <text x=\"18\" y=\"" << sy(0.5) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << sy(0.5)
        << ")\">TPR</text>\n";
    svg << "  </g>\n";

    for (std::size_t c = 0; c < curves.size(); ++c) {
        const char* color = kPalette[c % (sizeof(kPalette) / sizeof(kPalette[0]))];
        svg << "  <polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" data-method=\""
            << xml_escape(curves[c].method) << "\" points=\"";
        for (std::size_t k = 0; k < curves[c].points.size(); ++k) {
            const auto& p = curves[c].points[k];
            if (k) svg << ' ';
            svg << sx(p.fdr_level) << ',' << sy(p.tpr);
        }
        svg << "\"/>\n";
        const double ly = top + 14 + 18 * static_cast<double>(c);
        svg << "  <line x1=\"" << width - right + 12 << "\" y1=\"" << ly << "\" x2=\"" << width - right + 36
            << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        svg << "  <text x=\"" << width - right + 42 << "\" y=\"" << ly + 4
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << xml_escape(curves[c].method) << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace cfdr
