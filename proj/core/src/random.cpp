#include "vcsem/random.hpp"

#include <array>
#include <cmath>

#include "vcsem/error.hpp"

namespace vcsem {
namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t state = seed ^ (0x632be59bd9b4e019ULL * (stream + 1));
    std::array<std::uint32_t, 8> words{};
    for (std::size_t i = 0; i < words.size(); i += 2) {
        const std::uint64_t v = splitmix64(state);
        words[i] = static_cast<std::uint32_t>(v);
        words[i + 1] = static_cast<std::uint32_t>(v >> 32);
    }
    std::seed_seq seq(words.begin(), words.end());
    return Rng(seq);
}

double draw_uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

double draw_normal(Rng& rng, double mean, double sd) { return std::normal_distribution<double>(mean, sd)(rng); }

Eigen::VectorXd draw_standard_normal(Rng& rng, Eigen::Index size) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd v(size);
    for (Eigen::Index i = 0; i < size; ++i) v[i] = normal(rng);
    return v;
}

double draw_gamma(Rng& rng, double shape, double scale) {
    if (!(shape > 0.0 && scale > 0.0)) throw Error(ErrorKind::invalid_argument, "gamma parameters must be positive");
    return std::gamma_distribution<double>(shape, scale)(rng);
}

double draw_beta(Rng& rng, double a, double b) {
    const double x = draw_gamma(rng, a, 1.0);
    const double y = draw_gamma(rng, b, 1.0);
    if (x + y == 0.0) return a / (a + b);  // both underflowed; tiny shapes only
    return x / (x + y);
}

double draw_inverse_gamma(Rng& rng, double shape, double scale) {
    const double g = draw_gamma(rng, shape, 1.0 / scale);
    return g > 0.0 ? 1.0 / g : std::numeric_limits<double>::max();
}

Eigen::MatrixXd draw_wishart(Rng& rng, const Eigen::MatrixXd& scale, double dof) {
    const Eigen::Index p = scale.rows();
    if (!(dof > static_cast<double>(p) - 1.0)) {
        throw Error(ErrorKind::invalid_argument, "Wishart degrees of freedom must exceed p - 1");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(scale);
    if (llt.info() != Eigen::Success) throw Error(ErrorKind::not_positive_definite, "Wishart scale is not PD");
    Eigen::MatrixXd bartlett = Eigen::MatrixXd::Zero(p, p);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index i = 0; i < p; ++i) {
        bartlett(i, i) = std::sqrt(2.0 * draw_gamma(rng, 0.5 * (dof - static_cast<double>(i)), 1.0));
        for (Eigen::Index j = 0; j < i; ++j) bartlett(i, j) = normal(rng);
    }
    const Eigen::MatrixXd la = llt.matrixL() * bartlett;
    return la * la.transpose();
}

Eigen::MatrixXd draw_inverse_wishart(Rng& rng, const Eigen::MatrixXd& scale, double dof) {
    const Eigen::Index p = scale.rows();
    Eigen::LLT<Eigen::MatrixXd> llt(scale);
    if (llt.info() != Eigen::Success) throw Error(ErrorKind::not_positive_definite, "inverse-Wishart scale is not PD");
    const Eigen::MatrixXd precision_scale = llt.solve(Eigen::MatrixXd::Identity(p, p));
    const Eigen::MatrixXd w = draw_wishart(rng, 0.5 * (precision_scale + precision_scale.transpose()), dof);
    Eigen::LLT<Eigen::MatrixXd> wllt(w);
    Eigen::MatrixXd s = wllt.solve(Eigen::MatrixXd::Identity(p, p));
    return 0.5 * (s + s.transpose());
}

}  // namespace vcsem
