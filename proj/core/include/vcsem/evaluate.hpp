#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "vcsem/sem_model.hpp"

namespace vcsem {

/// Confusion counts over the p(p-1) ordered node pairs.
struct MetricsReport {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t tn = 0;
    std::int64_t fn = 0;
    double tpr = 0.0;
    double fdr = 0.0;  // 0 when nothing is predicted
    double mcc = 0.0;  // 0 when the denominator vanishes
};

MetricsReport structure_metrics(const EdgeIndicators& truth, const EdgeIndicators& estimate);

/// Area under the ROC curve of off-diagonal scores against truth, ties counted as one half.
/// Returns 0.5 when truth has no positives or no negatives.
double roc_auc(const EdgeIndicators& truth, const Matrix& scores);

struct VarianceCurve {
    std::vector<double> grid;
    std::vector<double> estimate;
    double bandwidth = 0.0;
};

double silverman_bandwidth(std::span<const double> z);

/// Equally spaced grid between the 5% and 95% sample quantiles of z.
std::vector<double> default_variance_grid(std::span<const double> z, int points = 50);

/// Nadaraya-Watson estimate of Var(X | z) with a Gaussian kernel, clipped at zero.
VarianceCurve kernel_conditional_variance(std::span<const double> x, std::span<const double> z,
                                          std::span<const double> grid, std::optional<double> bandwidth = std::nullopt);

struct FlatnessResult {
    bool flat = false;
    double score = 0.0;  // (max - min) / mean of the curve
    std::vector<double> lower;
    std::vector<double> upper;
};

/// Simultaneous 95% bootstrap band around the curve (sup-t calibration over the grid).
/// Observations are sorted by z and resampled in blocks of block_length consecutive rows.
/// Flat iff some horizontal line fits inside the band everywhere.
FlatnessResult flatness_test(std::span<const double> x, std::span<const double> z, const VarianceCurve& curve,
                             int bootstrap_reps, std::uint64_t seed, int block_length = 1);

/// Normalized range of a curve; 0 for constant curves.
double flatness_score(std::span<const double> values);

}  // namespace vcsem

namespace vcsem {

/// Nadaraya-Watson estimate of E[X | z] at each point of at (Gaussian kernel).
std::vector<double> kernel_conditional_mean(std::span<const double> x, std::span<const double> z,
                                            std::span<const double> at, double bandwidth);

}  // namespace vcsem
