#include "vcsem/sem_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "vcsem/error.hpp"
#include "vcsem/parallel.hpp"

namespace vcsem {

// ---------------------------------------------------------------- EdgeIndicators

EdgeIndicators::EdgeIndicators(int p) : p_(p) {
    if (p < 1) throw Error(ErrorKind::invalid_argument, "graph needs at least one node");
    bits_.assign(static_cast<std::size_t>(p) * static_cast<std::size_t>(p), 0);
}

std::size_t EdgeIndicators::index(int j, int l) const {
    if (j < 0 || l < 0 || j >= p_ || l >= p_) {
        throw Error(ErrorKind::index_out_of_range,
                    "edge index (" + std::to_string(j) + ", " + std::to_string(l) + ") out of range");
    }
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(p_) + static_cast<std::size_t>(l);
}

void EdgeIndicators::set(int j, int l, bool on) {
    const std::size_t i = index(j, l);
    if (j == l && on) throw Error(ErrorKind::invalid_argument, "self-loops are not allowed");
    bits_[i] = on ? 1 : 0;
}

int EdgeIndicators::edge_count() const noexcept {
    return static_cast<int>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::vector<int> EdgeIndicators::parents(int j) const {
    std::vector<int> out;
    for (int l = 0; l < p_; ++l)
        if ((*this)(j, l)) out.push_back(l);
    return out;
}

std::vector<int> EdgeIndicators::children(int l) const {
    std::vector<int> out;
    for (int j = 0; j < p_; ++j)
        if ((*this)(j, l)) out.push_back(j);
    return out;
}

bool EdgeIndicators::reaches(int from, int to) const {
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(p_), 0);
    std::vector<int> stack{from};
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (int v = 0; v < p_; ++v) {
            if (!(*this)(v, u)) continue;
            if (v == to) return true;
            if (!seen[static_cast<std::size_t>(v)]) {
                seen[static_cast<std::size_t>(v)] = 1;
                stack.push_back(v);
            }
        }
    }
    return false;
}

bool EdgeIndicators::has_cycle() const {
    // Kahn's algorithm: a cycle exists iff some node never reaches in-degree zero.
    std::vector<int> indegree(static_cast<std::size_t>(p_), 0);
    for (int j = 0; j < p_; ++j) indegree[static_cast<std::size_t>(j)] = static_cast<int>(parents(j).size());
    std::vector<int> ready;
    for (int j = 0; j < p_; ++j)
        if (indegree[static_cast<std::size_t>(j)] == 0) ready.push_back(j);
    int removed = 0;
    while (!ready.empty()) {
        const int u = ready.back();
        ready.pop_back();
        ++removed;
        for (int v : children(u))
            if (--indegree[static_cast<std::size_t>(v)] == 0) ready.push_back(v);
    }
    return removed != p_;
}

std::vector<int> EdgeIndicators::flattened() const { return {bits_.begin(), bits_.end()}; }

EdgeIndicators EdgeIndicators::from_flattened(int p, std::span<const int> values) {
    EdgeIndicators r(p);
    if (values.size() != r.bits_.size()) throw Error(ErrorKind::dimension_mismatch, "flattened graph has wrong size");
    for (int j = 0; j < p; ++j)
        for (int l = 0; l < p; ++l) {
            const int v = values[static_cast<std::size_t>(j * p + l)];
            if (v != 0 && v != 1) throw Error(ErrorKind::parse_error, "edge indicators must be 0 or 1");
            if (v == 1) r.set(j, l, true);
        }
    return r;
}

// ---------------------------------------------------------------- SplineCoefficients

SplineCoefficients::SplineCoefficients(int p, int basis_count) : p_(p), k_(basis_count) {
    if (p < 1 || basis_count < 1) throw Error(ErrorKind::invalid_argument, "coefficient tensor dimensions must be positive");
    values_.assign(static_cast<std::size_t>(p) * static_cast<std::size_t>(p) * static_cast<std::size_t>(basis_count),
                   0.0);
}

std::size_t SplineCoefficients::offset(int j, int l) const {
    if (j < 0 || l < 0 || j >= p_ || l >= p_) {
        throw Error(ErrorKind::index_out_of_range,
                    "coefficient index (" + std::to_string(j) + ", " + std::to_string(l) + ") out of range");
    }
    return (static_cast<std::size_t>(j) * static_cast<std::size_t>(p_) + static_cast<std::size_t>(l)) *
           static_cast<std::size_t>(k_);
}

std::span<double> SplineCoefficients::edge(int j, int l) {
    return {values_.data() + offset(j, l), static_cast<std::size_t>(k_)};
}

std::span<const double> SplineCoefficients::edge(int j, int l) const {
    return {values_.data() + offset(j, l), static_cast<std::size_t>(k_)};
}

Eigen::Map<Vector> SplineCoefficients::edge_vector(int j, int l) { return {values_.data() + offset(j, l), k_}; }

Eigen::Map<const Vector> SplineCoefficients::edge_vector(int j, int l) const {
    return {values_.data() + offset(j, l), k_};
}

void SplineCoefficients::clear_edge(int j, int l) {
    auto e = edge(j, l);
    std::fill(e.begin(), e.end(), 0.0);
}

bool SplineCoefficients::edge_is_zero(int j, int l) const {
    auto e = edge(j, l);
    return std::all_of(e.begin(), e.end(), [](double v) { return v == 0.0; });
}

// ---------------------------------------------------------------- NoiseCovariance

NoiseCovariance::NoiseCovariance(Matrix s) : s_(std::move(s)) {
    if (s_.rows() != s_.cols() || s_.rows() < 1) throw Error(ErrorKind::dimension_mismatch, "covariance must be square");
    if (!s_.allFinite()) throw Error(ErrorKind::non_finite_data, "covariance has non-finite entries");
    const double scale = std::max(1.0, s_.cwiseAbs().maxCoeff());
    if ((s_ - s_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw Error(ErrorKind::not_positive_definite, "covariance is not symmetric");
    }
    s_ = 0.5 * (s_ + s_.transpose());
    Eigen::LLT<Matrix> llt(s_);
    if (llt.info() != Eigen::Success) throw Error(ErrorKind::not_positive_definite, "covariance is not positive definite");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(s_, Eigen::EigenvaluesOnly);
    if (!(eig.eigenvalues().minCoeff() > 0.0)) {
        throw Error(ErrorKind::not_positive_definite, "covariance is not positive definite");
    }
}

NoiseCovariance NoiseCovariance::identity(int p) { return NoiseCovariance(Matrix::Identity(p, p)); }

Matrix NoiseCovariance::correlation() const {
    const Vector inv_sd = s_.diagonal().cwiseSqrt().cwiseInverse();
    return inv_sd.asDiagonal() * s_ * inv_sd.asDiagonal();
}

// ---------------------------------------------------------------- MixedGraph

std::vector<int> MixedGraph::parents(int j) const {
    std::vector<int> out;
    for (const auto& [from, to] : directed)
        if (to == j) out.push_back(from);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> MixedGraph::district(int j) const {
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(p), 0);
    std::vector<int> stack{j};
    seen[static_cast<std::size_t>(j)] = 1;
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (const auto& [a, b] : bidirected) {
            const int other = a == u ? b : (b == u ? a : -1);
            if (other >= 0 && !seen[static_cast<std::size_t>(other)]) {
                seen[static_cast<std::size_t>(other)] = 1;
                stack.push_back(other);
            }
        }
    }
    std::vector<int> out;
    for (int v = 0; v < p; ++v)
        if (seen[static_cast<std::size_t>(v)]) out.push_back(v);
    return out;
}

MixedGraph make_mixed_graph(const EdgeIndicators& r, const std::optional<NoiseCovariance>& s,
                            double bidirected_threshold) {
    MixedGraph g;
    g.p = r.p();
    for (int j = 0; j < r.p(); ++j)
        for (int l = 0; l < r.p(); ++l)
            if (r(j, l)) g.directed.emplace_back(l, j);
    std::sort(g.directed.begin(), g.directed.end());
    if (s) {
        if (s->p() != r.p()) throw Error(ErrorKind::dimension_mismatch, "covariance and graph sizes differ");
        const Matrix corr = s->correlation();
        for (int a = 0; a < r.p(); ++a)
            for (int b = a + 1; b < r.p(); ++b)
                if (std::abs(corr(a, b)) > bidirected_threshold) g.bidirected.emplace_back(a, b);
    }
    return g;
}

// ---------------------------------------------------------------- Dataset

void Dataset::validate() const {
    if (x.rows() < 1) throw Error(ErrorKind::insufficient_data, "dataset has no rows");
    if (z.size() != x.rows()) throw Error(ErrorKind::dimension_mismatch, "covariate length differs from row count");
    if (!names.empty() && static_cast<Eigen::Index>(names.size()) != x.cols()) {
        throw Error(ErrorKind::dimension_mismatch, "column name count differs from column count");
    }
    if (!x.allFinite()) throw Error(ErrorKind::non_finite_data, "data matrix has non-finite entries");
    if (!z.allFinite()) throw Error(ErrorKind::non_finite_data, "covariate has non-finite entries");
}

// ---------------------------------------------------------------- likelihood

double effect_at(const SplineCoefficients& coeffs, const BasisSpec& spec, int j, int l, double z,
                 DomainPolicy policy) {
    if (coeffs.basis_count() != spec.size()) {
        throw Error(ErrorKind::dimension_mismatch, "coefficient and basis sizes differ");
    }
    if (j == l) {
        if (j < 0 || j >= coeffs.p()) throw Error(ErrorKind::index_out_of_range, "effect index out of range");
        throw Error(ErrorKind::invalid_argument, "effect_at requires j != l");
    }
    const auto beta = coeffs.edge_vector(j, l);
    return beta.dot(spec.evaluate(z, policy));
}

Matrix assemble_B(const SplineCoefficients& coeffs, const BasisSpec& spec, double z, DomainPolicy policy) {
    if (coeffs.basis_count() != spec.size()) {
        throw Error(ErrorKind::dimension_mismatch, "coefficient and basis sizes differ");
    }
    const int p = coeffs.p();
    const Vector phi = spec.evaluate(z, policy);
    Matrix b = Matrix::Zero(p, p);
    for (int j = 0; j < p; ++j)
        for (int l = 0; l < p; ++l)
            if (j != l) b(j, l) = coeffs.edge_vector(j, l).dot(phi);
    return b;
}

namespace {

struct GaussianTerms {
    Eigen::LLT<Matrix> llt;
    double log_norm = 0.0;  // -p/2 log(2 pi) - 1/2 log det S
};

GaussianTerms gaussian_terms(const NoiseCovariance& s) {
    GaussianTerms t{Eigen::LLT<Matrix>(s.matrix()), 0.0};
    if (t.llt.info() != Eigen::Success) throw Error(ErrorKind::not_positive_definite, "noise covariance is not PD");
    const Matrix l = t.llt.matrixL();
    const double log_det = 2.0 * l.diagonal().array().log().sum();
    t.log_norm = -0.5 * static_cast<double>(s.p()) * std::log(2.0 * std::numbers::pi) - 0.5 * log_det;
    return t;
}

// One LU of (I - B(z)) gives both the Jacobian and the residual.
std::optional<double> row_term(const Vector& x, const Matrix& b, const GaussianTerms& g, double& abs_det_out) {
    const Eigen::Index p = b.rows();
    const Matrix a = Matrix::Identity(p, p) - b;
    Eigen::PartialPivLU<Matrix> lu(a);
    const double abs_det = std::abs(lu.determinant());
    abs_det_out = abs_det;
    if (!(abs_det > kSingularityFloor)) return std::nullopt;
    const Vector e = a * x;
    const Vector w = g.llt.matrixL().solve(e);
    return std::log(abs_det) + g.log_norm - 0.5 * w.squaredNorm();
}

}  // namespace

double row_log_likelihood(const Vector& x, double z, const SplineCoefficients& coeffs, const BasisSpec& spec,
                          const NoiseCovariance& s) {
    if (x.size() != coeffs.p() || s.p() != coeffs.p()) {
        throw Error(ErrorKind::dimension_mismatch, "row, coefficient and covariance sizes differ");
    }
    const GaussianTerms g = gaussian_terms(s);
    double abs_det = 0.0;
    const auto term = row_term(x, assemble_B(coeffs, spec, z), g, abs_det);
    if (!term) throw NearSingularError(0, abs_det, "|det(I - B(z))| below singularity floor");
    return *term;
}

double LikelihoodResult::value() const {
    if (singular_) {
        throw NearSingularError(singular_->row, singular_->abs_det,
                                "|det(I - B(z))| below singularity floor at row " + std::to_string(singular_->row));
    }
    return value_;
}

LikelihoodResult dataset_log_likelihood(const Dataset& data, const SplineCoefficients& coeffs, const BasisSpec& spec,
                                        const NoiseCovariance& s) {
    if (data.p() != coeffs.p() || s.p() != coeffs.p()) {
        throw Error(ErrorKind::dimension_mismatch, "dataset, coefficient and covariance sizes differ");
    }
    if (data.z.size() != data.x.rows()) throw Error(ErrorKind::dimension_mismatch, "covariate length differs");
    const GaussianTerms g = gaussian_terms(s);
    const auto n = static_cast<std::size_t>(data.n());
    std::vector<double> abs_dets(n, 0.0);
    std::vector<std::uint8_t> bad(n, 0);
    const double total = deterministic_sum(n, [&](std::size_t begin, std::size_t end) {
        double sum = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            const auto row = static_cast<Eigen::Index>(i);
            const auto term = row_term(data.x.row(row).transpose(), assemble_B(coeffs, spec, data.z[row]), g,
                                       abs_dets[i]);
            if (!term) {
                bad[i] = 1;
                continue;
            }
            sum += *term;
        }
        return sum;
    });
    for (std::size_t i = 0; i < n; ++i)
        if (bad[i]) return LikelihoodResult::singular(SingularRow{i, abs_dets[i]});
    return LikelihoodResult::value(total);
}

Matrix structural_residuals(const Dataset& data, const SplineCoefficients& coeffs, const BasisSpec& spec) {
    Matrix e(data.n(), data.p());
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        const Matrix b = assemble_B(coeffs, spec, data.z[i]);
        e.row(i) = (data.x.row(i).transpose() - b * data.x.row(i).transpose()).transpose();
    }
    return e;
}

}  // namespace vcsem
