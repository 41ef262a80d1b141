#pragma once

// Reference implementations written independently of the library code paths they check.

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "vcsem/evaluate.hpp"
#include "vcsem/sem_model.hpp"

namespace oracle {

/// Clamped uniform knot vector for K cubic basis functions on [0, 1].
inline std::vector<double> clamped_knots(int k) {
    std::vector<double> t;
    const int interior = k - 4;
    for (int i = 0; i < 4; ++i) t.push_back(0.0);
    for (int i = 1; i <= interior; ++i) t.push_back(static_cast<double>(i) / (interior + 1));
    for (int i = 0; i < 4; ++i) t.push_back(1.0);
    return t;
}

/// Textbook recursive Cox-de Boor; order m (degree m - 1), 0/0 := 0.
inline double cox_de_boor(const std::vector<double>& t, int i, int m, double z) {
    if (m == 1) {
        const bool last = t[i + 1] == t.back() && t[i] < t[i + 1];
        if (last) return (z >= t[i] && z <= t[i + 1]) ? 1.0 : 0.0;
        return (z >= t[i] && z < t[i + 1]) ? 1.0 : 0.0;
    }
    double left = 0.0;
    double right = 0.0;
    const double dl = t[i + m - 1] - t[i];
    const double dr = t[i + m] - t[i + 1];
    if (dl > 0.0) left = (z - t[i]) / dl * cox_de_boor(t, i, m - 1, z);
    if (dr > 0.0) right = (t[i + m] - z) / dr * cox_de_boor(t, i + 1, m - 1, z);
    return left + right;
}

inline Eigen::VectorXd basis(int k, double z) {
    const auto t = clamped_knots(k);
    Eigen::VectorXd out(k);
    for (int i = 0; i < k; ++i) out[i] = cox_de_boor(t, i, 4, z);
    return out;
}

/// log N(x | 0, (I - B)^{-1} S (I - B)^{-T}) computed densely.
inline double gaussian_log_density(const Eigen::VectorXd& x, const Eigen::MatrixXd& b, const Eigen::MatrixXd& s) {
    const Eigen::Index p = x.size();
    const Eigen::MatrixXd a_inv = (Eigen::MatrixXd::Identity(p, p) - b).inverse();
    const Eigen::MatrixXd cov = a_inv * s * a_inv.transpose();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(cov);
    const double log_det = std::log(std::abs(lu.determinant()));
    const double quad = x.dot(lu.solve(x));
    return -0.5 * (static_cast<double>(p) * std::log(2.0 * std::numbers::pi) + log_det + quad);
}

/// Confusion counts by walking every ordered pair.
struct Confusion {
    long tp = 0, fp = 0, tn = 0, fn = 0;
};

inline Confusion count_pairs(const vcsem::EdgeIndicators& truth, const vcsem::EdgeIndicators& est) {
    Confusion c;
    for (int j = 0; j < truth.p(); ++j)
        for (int l = 0; l < truth.p(); ++l) {
            if (j == l) continue;
            const bool t = truth(j, l);
            const bool e = est(j, l);
            if (t && e) ++c.tp;
            else if (!t && e) ++c.fp;
            else if (!t && !e) ++c.tn;
            else ++c.fn;
        }
    return c;
}

inline double mcc(const Confusion& c) {
    const double tp = c.tp, fp = c.fp, tn = c.tn, fn = c.fn;
    const double den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    return den == 0.0 ? 0.0 : (tp * tn - fp * fn) / std::sqrt(den);
}

}  // namespace oracle
