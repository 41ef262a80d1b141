#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "vcsem/spline_basis.hpp"

namespace vcsem {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// |det(I - B(z))| at or below this is treated as singular.
inline constexpr double kSingularityFloor = 1e-12;

/// Binary p x p matrix with zero diagonal. Entry (j, l) set means l -> j,
/// i.e. X_l is a direct cause of X_j.
class EdgeIndicators {
public:
    EdgeIndicators() = default;
    explicit EdgeIndicators(int p);

    int p() const noexcept { return p_; }
    bool operator()(int j, int l) const { return bits_[index(j, l)] != 0; }
    void set(int j, int l, bool on);
    void toggle(int j, int l) { set(j, l, !(*this)(j, l)); }

    int edge_count() const noexcept;
    std::vector<int> parents(int j) const;
    std::vector<int> children(int l) const;

    /// True if a directed path from -> ... -> to exists (length >= 1).
    bool reaches(int from, int to) const;
    bool has_cycle() const;

    /// Flattened row-major 0/1 values, p * p entries.
    std::vector<int> flattened() const;
    static EdgeIndicators from_flattened(int p, std::span<const int> values);

    bool operator==(const EdgeIndicators&) const = default;

private:
    std::size_t index(int j, int l) const;

    int p_ = 0;
    std::vector<std::uint8_t> bits_;
};

/// p x p x K tensor of spline coefficients; edge (j, l) owns the K-vector for b_{jl}.
class SplineCoefficients {
public:
    SplineCoefficients() = default;
    SplineCoefficients(int p, int basis_count);

    int p() const noexcept { return p_; }
    int basis_count() const noexcept { return k_; }

    std::span<double> edge(int j, int l);
    std::span<const double> edge(int j, int l) const;
    Eigen::Map<Vector> edge_vector(int j, int l);
    Eigen::Map<const Vector> edge_vector(int j, int l) const;
    void clear_edge(int j, int l);
    bool edge_is_zero(int j, int l) const;

    const std::vector<double>& raw() const noexcept { return values_; }

    bool operator==(const SplineCoefficients&) const = default;

private:
    std::size_t offset(int j, int l) const;

    int p_ = 0;
    int k_ = 0;
    std::vector<double> values_;
};

/// Symmetric positive-definite noise covariance S.
class NoiseCovariance {
public:
    NoiseCovariance() = default;
    /// Validates symmetry (1e-12, relative) and positive definiteness.
    explicit NoiseCovariance(Matrix s);
    static NoiseCovariance identity(int p);

    int p() const noexcept { return static_cast<int>(s_.rows()); }
    const Matrix& matrix() const noexcept { return s_; }
    double operator()(int j, int l) const { return s_(j, l); }
    Matrix correlation() const;

    bool operator==(const NoiseCovariance& other) const { return s_ == other.s_; }

private:
    Matrix s_;
};

/// Directed edges (from, to) from the indicators plus bidirected edges from
/// the off-diagonal support of the noise correlation. 0-based node indices.
struct MixedGraph {
    int p = 0;
    std::vector<std::pair<int, int>> directed;
    std::vector<std::pair<int, int>> bidirected;  // a < b

    std::vector<int> parents(int j) const;
    /// Nodes connected to j through bidirected paths, including j itself.
    std::vector<int> district(int j) const;
};

inline constexpr double kBidirectedReportThreshold = 0.1;

MixedGraph make_mixed_graph(const EdgeIndicators& r, const std::optional<NoiseCovariance>& s = std::nullopt,
                            double bidirected_threshold = kBidirectedReportThreshold);

struct Dataset {
    Matrix x;  // n x p
    Vector z;  // n
    std::vector<std::string> names;
    std::string covariate_name = "z";

    Eigen::Index n() const noexcept { return x.rows(); }
    int p() const noexcept { return static_cast<int>(x.cols()); }
    /// Throws on n < 1, size mismatch or non-finite entries.
    void validate() const;
    std::span<const double> z_span() const { return {z.data(), static_cast<std::size_t>(z.size())}; }
};

double effect_at(const SplineCoefficients& coeffs, const BasisSpec& spec, int j, int l, double z,
                 DomainPolicy policy = DomainPolicy::clamp);

Matrix assemble_B(const SplineCoefficients& coeffs, const BasisSpec& spec, double z,
                  DomainPolicy policy = DomainPolicy::clamp);

/// log|det(I - B(z))| + log N((I - B(z)) x | 0, S). Throws NearSingularError
/// (row 0) below the singularity floor and Error(not_positive_definite) on bad S.
double row_log_likelihood(const Vector& x, double z, const SplineCoefficients& coeffs, const BasisSpec& spec,
                          const NoiseCovariance& s);

struct SingularRow {
    std::size_t row = 0;
    double abs_det = 0.0;
};

/// Either the summed log-likelihood or the first row whose Jacobian is singular.
class LikelihoodResult {
public:
    static LikelihoodResult value(double v) { return LikelihoodResult(v, std::nullopt); }
    static LikelihoodResult singular(SingularRow r) { return LikelihoodResult(0.0, r); }

    bool ok() const noexcept { return !singular_.has_value(); }
    explicit operator bool() const noexcept { return ok(); }
    /// Throws NearSingularError carrying the offending row when !ok().
    double value() const;
    const std::optional<SingularRow>& singular_row() const noexcept { return singular_; }

private:
    LikelihoodResult(double v, std::optional<SingularRow> s) : value_(v), singular_(s) {}
    double value_;
    std::optional<SingularRow> singular_;
};

/// Sum of row terms; rows are evaluated in fixed chunks and reduced in order.
LikelihoodResult dataset_log_likelihood(const Dataset& data, const SplineCoefficients& coeffs, const BasisSpec& spec,
                                        const NoiseCovariance& s);

/// Residuals (I - B(z_i)) x_i as rows of an n x p matrix.
Matrix structural_residuals(const Dataset& data, const SplineCoefficients& coeffs, const BasisSpec& spec);

}  // namespace vcsem
