#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace vcsem {

using Rng = std::mt19937_64;

/// Independent engine for (seed, stream); streams key chains, repetitions and rows.
Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

double draw_uniform(Rng& rng, double lo = 0.0, double hi = 1.0);
double draw_normal(Rng& rng, double mean = 0.0, double sd = 1.0);
Eigen::VectorXd draw_standard_normal(Rng& rng, Eigen::Index size);
double draw_gamma(Rng& rng, double shape, double scale);
double draw_beta(Rng& rng, double a, double b);
/// Shape/scale parameterization: density proportional to x^{-shape-1} exp(-scale / x).
double draw_inverse_gamma(Rng& rng, double shape, double scale);
/// Wishart(scale, dof) via the Bartlett decomposition; E[W] = dof * scale.
Eigen::MatrixXd draw_wishart(Rng& rng, const Eigen::MatrixXd& scale, double dof);
/// Inverse-Wishart(scale, dof); E[S] = scale / (dof - p - 1) for dof > p + 1.
Eigen::MatrixXd draw_inverse_wishart(Rng& rng, const Eigen::MatrixXd& scale, double dof);

}  // namespace vcsem
