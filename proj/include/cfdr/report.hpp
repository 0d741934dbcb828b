#pragma once

#include <string>
#include <vector>

#include "cfdr/bench.hpp"

namespace cfdr {

// External score table `input_idx,feature_idx,score`, densified against a
// truth grid of num_inputs x num_features. Every cell must appear exactly once.
std::vector<double> read_scores_csv(const std::string& path, std::size_t num_inputs, std::size_t num_features);

// 0/1 matrix with an f0..f{d-1} header, one row per input (the dataset
// `.labels.csv` layout).
GroundTruth read_truth_csv(const std::string& path);

// `fdr_level,tpr` as written by format_curve_csv.
PowerCurve read_curve_csv(const std::string& path, std::string method);

// "curve_<method>.csv" -> "<method>"; any other file name -> its stem.
std::string method_from_curve_path(const std::string& path);

// Standalone SVG line chart of TPR against FDR level, one polyline per curve.
std::string render_curves_svg(const std::vector<PowerCurve>& curves, const std::string& title);

}  // namespace cfdr
