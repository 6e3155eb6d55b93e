#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "fundus/geometry.hpp"
#include "fundus/raster.hpp"

namespace fundus {

struct LabeledScore {
    double score = 0.0; // in [0, 1]
    int label = 0;      // 0 or 1
};

inline constexpr double kScoreClamp = 1e-7;

/// Binary cross entropy, scores clamped to [1e-7, 1 - 1e-7].
double bce(const std::vector<LabeledScore>& scores);

/// Per-pixel cross entropy between a one-hot truth map and a
/// probability map (both H x W x C float rasters). Prediction channels
/// must sum to 1 within 1e-5 at every pixel.
double categorical_ce(const Raster& truth, const Raster& pred);

/// Mean Euclidean distance between paired points; pairing is by index.
double fovea_distance(const PointSet& truth, const PointSet& pred);
double mean_euclidean(const PointSet& truth, const PointSet& pred);

/// Dice overlap of two binary masks (foreground = 0). Two empty masks
/// count as perfect agreement.
double dice(const Raster& a, const Raster& b);

/// F1 over binary label lists (1 = positive); 0 when the denominator
/// vanishes.
double f1(const std::vector<int>& truth, const std::vector<int>& pred);

/// Probability that a positive outscores a negative, ties at half
/// credit; equals the trapezoidal ROC area. Needs both classes.
double auc_roc(const std::vector<LabeledScore>& scores);

struct EvalReport {
    std::map<std::string, double> values;
    long items = 0;

    void write_json(const std::filesystem::path& path) const;
    void write_csv(const std::filesystem::path& path) const;
};

} // namespace fundus
