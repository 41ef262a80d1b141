#include "vcsem/spline_basis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "vcsem/error.hpp"

namespace vcsem {

BasisSpec::BasisSpec(int basis_count, double domain_lo, double domain_hi)
    : basis_count_(basis_count), lo_(domain_lo), hi_(domain_hi) {
    if (basis_count < order) {
        throw Error(ErrorKind::invalid_argument,
                    "cubic basis needs at least 4 functions, got " + std::to_string(basis_count));
    }
    if (!(std::isfinite(domain_lo) && std::isfinite(domain_hi) && domain_lo < domain_hi)) {
        throw Error(ErrorKind::invalid_argument, "basis domain must satisfy lo < hi");
    }
    const int interior = basis_count - order;
    knots_.reserve(static_cast<std::size_t>(basis_count + order));
    for (int i = 0; i < order; ++i) knots_.push_back(lo_);
    for (int i = 1; i <= interior; ++i) {
        knots_.push_back(lo_ + (hi_ - lo_) * static_cast<double>(i) / static_cast<double>(interior + 1));
    }
    for (int i = 0; i < order; ++i) knots_.push_back(hi_);
}

// Index i with knots[i] <= z < knots[i+1], restricted to the non-degenerate spans
// [3, K-1]. The right end point belongs to the last span.
int BasisSpec::find_span(double z) const noexcept {
    const int last = basis_count_ - 1;
    if (z >= knots_[static_cast<std::size_t>(last + 1)]) return last;
    if (z <= knots_[order - 1]) return order - 1;
    auto first = knots_.begin() + order;
    auto end = knots_.begin() + last + 1;
    auto it = std::upper_bound(first, end, z);
    return static_cast<int>(it - knots_.begin()) - 1;
}

void BasisSpec::evaluate_into(double z, std::span<double> out, DomainPolicy policy) const {
    if (static_cast<int>(out.size()) != basis_count_) {
        throw Error(ErrorKind::dimension_mismatch, "basis output span has wrong length");
    }
    if (!std::isfinite(z)) throw Error(ErrorKind::out_of_domain, "non-finite covariate value");
    if (!contains(z)) {
        if (policy == DomainPolicy::strict) {
            throw Error(ErrorKind::out_of_domain, "covariate value " + std::to_string(z) + " outside basis domain [" +
                                                      std::to_string(lo_) + ", " + std::to_string(hi_) + "]");
        }
        z = std::clamp(z, lo_, hi_);
    }
    std::fill(out.begin(), out.end(), 0.0);

    // Cox-de Boor recursion on the four functions supported on the span.
    const int span = find_span(z);
    std::array<double, order> n{};
    std::array<double, order> left{};
    std::array<double, order> right{};
    n[0] = 1.0;
    for (int d = 1; d < order; ++d) {
        left[d] = z - knots_[static_cast<std::size_t>(span + 1 - d)];
        right[d] = knots_[static_cast<std::size_t>(span + d)] - z;
        double saved = 0.0;
        for (int r = 0; r < d; ++r) {
            const double temp = n[r] / (right[r + 1] + left[d - r]);
            n[r] = saved + right[r + 1] * temp;
            saved = left[d - r] * temp;
        }
        n[d] = saved;
    }
    for (int r = 0; r < order; ++r) out[static_cast<std::size_t>(span - (order - 1) + r)] = n[r];
}

Eigen::VectorXd BasisSpec::evaluate(double z, DomainPolicy policy) const {
    Eigen::VectorXd values(basis_count_);
    evaluate_into(z, std::span<double>(values.data(), values.size()), policy);
    return values;
}

Eigen::MatrixXd BasisSpec::design_matrix(std::span<const double> z, DomainPolicy policy) const {
    // Row-major scratch so each row is contiguous for evaluate_into.
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows(static_cast<Eigen::Index>(z.size()),
                                                                                 basis_count_);
    for (std::size_t i = 0; i < z.size(); ++i) {
        evaluate_into(z[i], std::span<double>(rows.row(static_cast<Eigen::Index>(i)).data(), basis_count_),
                      policy);
    }
    return rows;
}

BasisSpec build_basis(int basis_count, double domain_lo, double domain_hi) {
    return BasisSpec(basis_count, domain_lo, domain_hi);
}

Eigen::VectorXd evaluate_basis(const BasisSpec& spec, double z, DomainPolicy policy) {
    return spec.evaluate(z, policy);
}

CovariateScaling CovariateScaling::from_range(std::span<const double> z) {
    if (z.empty()) throw Error(ErrorKind::insufficient_data, "covariate vector is empty");
    const auto [mn, mx] = std::minmax_element(z.begin(), z.end());
    if (!(*mn < *mx)) throw Error(ErrorKind::invalid_argument, "covariate has zero range; cannot rescale");
    return CovariateScaling{*mn, *mx};
}

}  // namespace vcsem
