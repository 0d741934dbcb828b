#include "cfdr/samplers.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "cfdr/csv.hpp"
#include "cfdr/errors.hpp"

namespace cfdr {

void validate_draw_request(std::span<const double> x, std::span<const std::size_t> subset) {
    if (subset.empty()) throw EmptySubset("counterfactual subset is empty");
    for (std::size_t s : subset) {
        if (s >= x.size()) {
            throw IndexOutOfRange("feature index " + std::to_string(s) + " out of range for d=" +
                                  std::to_string(x.size()));
        }
    }
    for (double v : x) {
        if (!std::isfinite(v)) throw NonFiniteOutput("input vector contains a non-finite value");
    }
}

std::vector<double> ConditionalSampler::sample(std::span<const double> x, std::span<const std::size_t> subset,
                                               Engine& eng) const {
    validate_draw_request(x, subset);
    std::vector<double> out(subset.size());
    draw(x, subset, eng, out);
    return out;
}

Matrix ConditionalSampler::sample_many(std::span<const double> x, std::span<const std::size_t> subset, std::size_t n,
                                       Engine& eng) const {
    validate_draw_request(x, subset);
    Matrix out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(subset.size()));
    for (std::size_t r = 0; r < n; ++r) {
        draw(x, subset, eng, std::span<double>(out.row(static_cast<Eigen::Index>(r)).data(), subset.size()));
    }
    return out;
}

std::vector<double> sample_q(const ConditionalSampler& q, std::span<const double> x,
                             std::span<const std::size_t> subset, Engine& eng) {
    return q.sample(x, subset, eng);
}

void IndependentGaussianQ::draw(std::span<const double>, std::span<const std::size_t> subset, Engine& eng,
                                std::span<double> out) const {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t k = 0; k < subset.size(); ++k) out[k] = normal(eng);
}

AutoregressiveGaussianQ::AutoregressiveGaussianQ(std::vector<double> betas) : betas_(std::move(betas)) {
    for (double b : betas_) {
        if (!std::isfinite(b)) throw UsageError("autoregressive weights must be finite");
    }
}

double AutoregressiveGaussianQ::conditional_mean(std::span<const double> x, std::size_t feature) const {
    if (x.size() != betas_.size()) {
        throw DimensionMismatch("input has d=" + std::to_string(x.size()) + " but sampler has " +
                                std::to_string(betas_.size()) + " weights");
    }
    double m = 0.0;
    for (std::size_t j = 0; j < feature; ++j) m += betas_[j] * x[j];
    return m;
}

void AutoregressiveGaussianQ::draw(std::span<const double> x, std::span<const std::size_t> subset, Engine& eng,
                                   std::span<double> out) const {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t k = 0; k < subset.size(); ++k) out[k] = conditional_mean(x, subset[k]) + normal(eng);
}

Matrix AutoregressiveGaussianQ::sample_many(std::span<const double> x, std::span<const std::size_t> subset,
                                            std::size_t n, Engine& eng) const {
    validate_draw_request(x, subset);
    std::vector<double> means(subset.size());
    for (std::size_t k = 0; k < subset.size(); ++k) means[k] = conditional_mean(x, subset[k]);
    Matrix out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(subset.size()));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
        // A fresh distribution per row keeps the engine consumption identical to draw().
        normal.reset();
        for (std::size_t k = 0; k < subset.size(); ++k) {
            out(r, static_cast<Eigen::Index>(k)) = means[k] + normal(eng);
        }
    }
    return out;
}

std::string to_string(DistributionKind kind) {
    return kind == DistributionKind::Independent ? "independent" : "correlated";
}

DistributionKind parse_distribution(const std::string& text) {
    if (text == "independent") return DistributionKind::Independent;
    if (text == "correlated") return DistributionKind::Correlated;
    throw UsageError("unknown distribution '" + text + "' (expected independent or correlated)");
}

void SyntheticDistribution::validate() const {
    if (d == 0) throw InvalidDimension("distribution dimension must be >= 1");
    if (!(h >= 0.0 && h <= 1.0)) throw UsageError("mixture probability h must lie in [0,1]");
    if (kind == DistributionKind::Correlated && betas.size() != d) {
        throw InvalidDimension("correlated distribution needs d autoregressive weights");
    }
}

SyntheticDistribution make_distribution(DistributionKind kind, std::size_t d, double h, const RngStream& stream) {
    SyntheticDistribution dist{kind, h, d, {}};
    if (kind == DistributionKind::Correlated) {
        Engine eng = stream.engine();
        std::normal_distribution<double> normal(0.0, kBetaStddev);
        dist.betas.resize(d);
        for (auto& b : dist.betas) b = normal(eng);
    }
    dist.validate();
    return dist;
}

std::unique_ptr<ConditionalSampler> matching_conditional(const SyntheticDistribution& dist) {
    if (dist.kind == DistributionKind::Independent) return std::make_unique<IndependentGaussianQ>();
    return std::make_unique<AutoregressiveGaussianQ>(dist.betas);
}

Dataset gen_dataset(const SyntheticDistribution& dist, std::size_t n, Engine& eng) {
    dist.validate();
    if (n == 0) throw InvalidDimension("sample count must be >= 1");
    Dataset out;
    out.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dist.d));
    out.flags.assign(n * dist.d, 0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t r = 0; r < n; ++r) {
        auto row = out.x.row(static_cast<Eigen::Index>(r));
        for (std::size_t i = 0; i < dist.d; ++i) {
            const bool interesting = unif(eng) < dist.h;
            double mean = 0.0;
            if (interesting) {
                mean = kInterestingMean;
            } else if (dist.kind == DistributionKind::Correlated) {
                for (std::size_t j = 0; j < i; ++j) mean += dist.betas[j] * row(static_cast<Eigen::Index>(j));
            }
            row(static_cast<Eigen::Index>(i)) = mean + normal(eng);
            out.flags[r * dist.d + i] = interesting ? 1 : 0;
        }
    }
    return out;
}

std::string labels_path_for(const std::string& data_path) {
    const std::string suffix = ".csv";
    if (data_path.size() > suffix.size() && data_path.ends_with(suffix)) {
        return data_path.substr(0, data_path.size() - suffix.size()) + ".labels.csv";
    }
    return data_path + ".labels.csv";
}

namespace {

std::string header_line(std::size_t d) {
    std::string h;
    for (std::size_t j = 0; j < d; ++j) {
        if (j) h += ',';
        h += 'f' + std::to_string(j);
    }
    return h;
}

}  // namespace

void write_dataset_csv(const std::string& path, const Dataset& data) {
    const std::size_t d = data.dim();
    std::ostringstream body;
    body << header_line(d) << '\n';
    for (std::size_t r = 0; r < data.samples(); ++r) {
        for (std::size_t j = 0; j < d; ++j) {
            if (j) body << ',';
            body << format_double(data.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)));
        }
        body << '\n';
    }
    if (!data.flags.empty()) {
        std::ostringstream labels;
        labels << header_line(d) << '\n';
        for (std::size_t r = 0; r < data.samples(); ++r) {
            for (std::size_t j = 0; j < d; ++j) {
                if (j) labels << ',';
                labels << (data.flag(r, j) ? '1' : '0');
            }
            labels << '\n';
        }
        write_file_atomic(labels_path_for(path), labels.str());
    }
    write_file_atomic(path, body.str());
}

Dataset read_dataset_csv(const std::string& path, bool with_labels) {
    const CsvTable table = read_csv(path);
    const std::size_t d = table.header.size();
    Dataset out;
    out.x.resize(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(d));
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        for (std::size_t j = 0; j < d; ++j) {
            out.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
                parse_double_field(table.rows[r].fields[j], table.rows[r].line);
        }
    }
    if (with_labels) {
        const std::string lpath = labels_path_for(path);
        const CsvTable labels = read_csv(lpath);
        if (labels.header.size() != d || labels.rows.size() != table.rows.size()) {
            throw ParseError(lpath + ": labels shape does not match data", 1);
        }
        out.flags.resize(d * table.rows.size());
        for (std::size_t r = 0; r < labels.rows.size(); ++r) {
            for (std::size_t j = 0; j < d; ++j) {
                const std::string& f = labels.rows[r].fields[j];
                if (f != "0" && f != "1") {
                    throw ParseError(lpath + ": row " + std::to_string(labels.rows[r].line) + " has non-0/1 label",
                                     labels.rows[r].line);
                }
                out.flags[r * d + j] = f == "1" ? 1 : 0;
            }
        }
    }
    return out;
}

}  // namespace cfdr
