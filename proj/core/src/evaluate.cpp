#include "vcsem/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "vcsem/error.hpp"
#include "vcsem/random.hpp"
#include "vcsem/sampler.hpp"

namespace vcsem {

MetricsReport structure_metrics(const EdgeIndicators& truth, const EdgeIndicators& estimate) {
    if (truth.p() != estimate.p()) throw Error(ErrorKind::dimension_mismatch, "truth and estimate have different p");
    MetricsReport m;
    const int p = truth.p();
    for (int j = 0; j < p; ++j)
        for (int l = 0; l < p; ++l) {
            if (j == l) continue;
            const bool t = truth(j, l);
            const bool e = estimate(j, l);
            if (t && e) ++m.tp;
            else if (!t && e) ++m.fp;
            else if (t && !e) ++m.fn;
            else ++m.tn;
        }
    const auto tp = static_cast<double>(m.tp);
    const auto fp = static_cast<double>(m.fp);
    const auto tn = static_cast<double>(m.tn);
    const auto fn = static_cast<double>(m.fn);
    m.tpr = m.tp + m.fn == 0 ? 0.0 : tp / (tp + fn);
    m.fdr = m.tp + m.fp == 0 ? 0.0 : fp / (tp + fp);
    const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    m.mcc = denom == 0.0 ? 0.0 : (tp * tn - fp * fn) / std::sqrt(denom);
    return m;
}

double roc_auc(const EdgeIndicators& truth, const Matrix& scores) {
    const int p = truth.p();
    if (scores.rows() != p || scores.cols() != p) throw Error(ErrorKind::dimension_mismatch, "score matrix is not p x p");
    std::vector<double> pos;
    std::vector<double> neg;
    for (int j = 0; j < p; ++j)
        for (int l = 0; l < p; ++l) {
            if (j == l) continue;
            (truth(j, l) ? pos : neg).push_back(scores(j, l));
        }
    if (pos.empty() || neg.empty()) return 0.5;
    double wins = 0.0;
    for (double a : pos)
        for (double b : neg) wins += a > b ? 1.0 : (a == b ? 0.5 : 0.0);
    return wins / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

double silverman_bandwidth(std::span<const double> z) {
    const auto n = static_cast<double>(z.size());
    if (z.size() < 2) throw Error(ErrorKind::insufficient_data, "bandwidth needs at least two points");
    const double mean = std::accumulate(z.begin(), z.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : z) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    std::vector<double> copy(z.begin(), z.end());
    const double iqr = sample_quantile(copy, 0.75) - sample_quantile(copy, 0.25);
    double spread = sd;
    if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
    if (!(spread > 0.0)) throw Error(ErrorKind::invalid_argument, "covariate values are all identical");
    return 0.9 * spread * std::pow(n, -0.2);
}

std::vector<double> default_variance_grid(std::span<const double> z, int points) {
    std::vector<double> copy(z.begin(), z.end());
    const double lo = sample_quantile(copy, 0.05);
    const double hi = sample_quantile(copy, 0.95);
    std::vector<double> grid(static_cast<std::size_t>(points));
    for (int g = 0; g < points; ++g)
        grid[static_cast<std::size_t>(g)] = points == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * g / (points - 1.0);
    return grid;
}

namespace {

void check_inputs(std::span<const double> x, std::span<const double> z) {
    if (x.size() != z.size()) throw Error(ErrorKind::dimension_mismatch, "x and z lengths differ");
    if (x.size() < 10) throw Error(ErrorKind::insufficient_data, "conditional variance needs at least 10 points");
    const auto [mn, mx] = std::minmax_element(z.begin(), z.end());
    if (*mn == *mx) throw Error(ErrorKind::invalid_argument, "covariate values are all identical");
}

std::vector<double> nw_variance(std::span<const double> x, std::span<const double> z, std::span<const double> grid,
                                double h) {
    std::vector<double> out(grid.size());
    const double inv_h = 1.0 / h;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double w_sum = 0.0, m1 = 0.0, m2 = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double u = (z[i] - grid[g]) * inv_h;
            const double w = std::exp(-0.5 * u * u);
            w_sum += w;
            m1 += w * x[i];
            m2 += w * x[i] * x[i];
        }
        if (w_sum <= 0.0) {
            out[g] = 0.0;
            continue;
        }
        m1 /= w_sum;
        m2 /= w_sum;
        out[g] = std::max(0.0, m2 - m1 * m1);
    }
    return out;
}

}  // namespace

VarianceCurve kernel_conditional_variance(std::span<const double> x, std::span<const double> z,
                                          std::span<const double> grid, std::optional<double> bandwidth) {
    check_inputs(x, z);
    VarianceCurve curve;
    curve.bandwidth = bandwidth ? *bandwidth : silverman_bandwidth(z);
    if (!(curve.bandwidth > 0.0)) throw Error(ErrorKind::invalid_argument, "bandwidth must be positive");
    curve.grid.assign(grid.begin(), grid.end());
    curve.estimate = nw_variance(x, z, grid, curve.bandwidth);
    return curve;
}

double flatness_score(std::span<const double> values) {
    if (values.empty()) return 0.0;
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    if (*mx == *mn) return 0.0;
    return mean > 0.0 ? (*mx - *mn) / mean : std::numeric_limits<double>::infinity();
}

FlatnessResult flatness_test(std::span<const double> x, std::span<const double> z, const VarianceCurve& curve,
                             int bootstrap_reps, std::uint64_t seed, int block_length) {
    check_inputs(x, z);
    if (bootstrap_reps < 20) throw Error(ErrorKind::insufficient_data, "flatness test needs at least 20 bootstrap reps");
    if (curve.grid.size() < 2) throw Error(ErrorKind::insufficient_data, "flatness test needs at least two grid points");
    if (block_length < 1) throw Error(ErrorKind::invalid_argument, "block length must be positive");

    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return z[a] < z[b]; });

    const std::size_t grid_size = curve.grid.size();
    const auto blocks = static_cast<std::size_t>(block_length);
    std::vector<std::vector<double>> deviations(static_cast<std::size_t>(bootstrap_reps));
    Rng rng = make_rng(seed, 0x5eed);
    std::uniform_int_distribution<std::size_t> start(0, n - std::min(n, blocks));
    std::vector<double> bx(n), bz(n);
    for (auto& dev : deviations) {
        std::size_t filled = 0;
        while (filled < n) {
            const std::size_t s = start(rng);
            for (std::size_t k = 0; k < blocks && filled < n; ++k, ++filled) {
                const std::size_t idx = order[s + k];
                bx[filled] = x[idx];
                bz[filled] = z[idx];
            }
        }
        const auto boot = nw_variance(bx, bz, curve.grid, curve.bandwidth);
        dev.resize(grid_size);
        for (std::size_t g = 0; g < grid_size; ++g) dev[g] = boot[g] - curve.estimate[g];
    }

    std::vector<double> se(grid_size, 0.0);
    for (std::size_t g = 0; g < grid_size; ++g) {
        double ss = 0.0;
        for (const auto& dev : deviations) ss += dev[g] * dev[g];
        se[g] = std::sqrt(ss / static_cast<double>(deviations.size()));
        if (!(se[g] > 0.0)) se[g] = std::numeric_limits<double>::min();
    }
    std::vector<double> sup_t;
    sup_t.reserve(deviations.size());
    for (const auto& dev : deviations) {
        double m = 0.0;
        for (std::size_t g = 0; g < grid_size; ++g) m = std::max(m, std::abs(dev[g]) / se[g]);
        sup_t.push_back(m);
    }
    const double crit = sample_quantile(sup_t, 0.95);

    FlatnessResult out;
    out.lower.resize(grid_size);
    out.upper.resize(grid_size);
    double max_lower = -std::numeric_limits<double>::infinity();
    double min_upper = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < grid_size; ++g) {
        out.lower[g] = curve.estimate[g] - crit * se[g];
        out.upper[g] = curve.estimate[g] + crit * se[g];
        max_lower = std::max(max_lower, out.lower[g]);
        min_upper = std::min(min_upper, out.upper[g]);
    }
    out.flat = max_lower <= min_upper;
    out.score = flatness_score(curve.estimate);
    return out;
}

}  // namespace vcsem

namespace vcsem {

std::vector<double> kernel_conditional_mean(std::span<const double> x, std::span<const double> z,
                                            std::span<const double> at, double bandwidth) {
    if (x.size() != z.size()) throw Error(ErrorKind::dimension_mismatch, "x and z lengths differ");
    if (!(bandwidth > 0.0)) throw Error(ErrorKind::invalid_argument, "bandwidth must be positive");
    std::vector<double> out(at.size());
    const double inv_h = 1.0 / bandwidth;
    for (std::size_t g = 0; g < at.size(); ++g) {
        double w_sum = 0.0, m1 = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double u = (z[i] - at[g]) * inv_h;
            const double w = std::exp(-0.5 * u * u);
            w_sum += w;
            m1 += w * x[i];
        }
        out[g] = w_sum > 0.0 ? m1 / w_sum : 0.0;
    }
    return out;
}

}  // namespace vcsem
