#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace vcsem {

/// How evaluation treats a covariate value outside [lo, hi].
enum class DomainPolicy { clamp, strict };

/// Clamped cubic B-spline basis with equally spaced interior knots.
///
/// The knot vector holds K + 4 entries: four copies of each end point and
/// K - 4 equally spaced interior breakpoints. Immutable after construction.
class BasisSpec {
public:
    static constexpr int order = 4;  // cubic

    BasisSpec(int basis_count, double domain_lo, double domain_hi);

    int size() const noexcept { return basis_count_; }
    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }
    const std::vector<double>& knots() const noexcept { return knots_; }

    bool contains(double z) const noexcept { return z >= lo_ && z <= hi_; }

    /// Writes the K basis values at z into out (out.size() == size()).
    void evaluate_into(double z, std::span<double> out, DomainPolicy policy = DomainPolicy::clamp) const;

    Eigen::VectorXd evaluate(double z, DomainPolicy policy = DomainPolicy::clamp) const;

    /// Row i holds the basis evaluated at z[i].
    Eigen::MatrixXd design_matrix(std::span<const double> z, DomainPolicy policy = DomainPolicy::clamp) const;

private:
    int find_span(double z) const noexcept;

    int basis_count_;
    double lo_;
    double hi_;
    std::vector<double> knots_;
};

BasisSpec build_basis(int basis_count, double domain_lo, double domain_hi);

Eigen::VectorXd evaluate_basis(const BasisSpec& spec, double z, DomainPolicy policy = DomainPolicy::clamp);

/// Affine map from the observed covariate range onto [0, 1].
struct CovariateScaling {
    double lo = 0.0;
    double hi = 1.0;

    static CovariateScaling from_range(std::span<const double> z);
    double forward(double z) const noexcept { return (z - lo) / (hi - lo); }
    double inverse(double u) const noexcept { return lo + u * (hi - lo); }
};

}  // namespace vcsem
