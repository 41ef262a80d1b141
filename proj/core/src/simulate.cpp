#include "vcsem/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "vcsem/error.hpp"
#include "vcsem/parallel.hpp"

namespace vcsem {
namespace {

constexpr int kGraphRetryCap = 10000;
constexpr int kCovarianceRetryCap = 1000;
constexpr int kCovarianceRounds = 200;
constexpr int kRowRetryCap = 100;

bool is_pd(const Matrix& s) {
    Eigen::LLT<Matrix> llt(s);
    if (llt.info() != Eigen::Success) return false;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(s, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff() > 0.0;
}

// Every non-trivial strongly connected component must be a single directed cycle.
bool cycles_disjoint(const EdgeIndicators& r) {
    const int p = r.p();
    std::vector<int> component(static_cast<std::size_t>(p), -1);
    int count = 0;
    for (int v = 0; v < p; ++v) {
        if (component[static_cast<std::size_t>(v)] >= 0) continue;
        for (int u = v; u < p; ++u) {
            if (component[static_cast<std::size_t>(u)] >= 0) continue;
            const bool same = u == v || (r.reaches(v, u) && r.reaches(u, v));
            if (same) component[static_cast<std::size_t>(u)] = count;
        }
        ++count;
    }
    for (int c = 0; c < count; ++c) {
        int size = 0;
        int internal = 0;
        for (int j = 0; j < p; ++j) {
            if (component[static_cast<std::size_t>(j)] != c) continue;
            ++size;
            for (int l = 0; l < p; ++l)
                if (r(j, l) && component[static_cast<std::size_t>(l)] == c) ++internal;
        }
        if (size > 1 && internal != size) return false;
    }
    return true;
}

}  // namespace

double EffectFunction::operator()(double z) const {
    switch (kind) {
        case EffectKind::linear: return 0.8 * z;
        case EffectKind::cosine: return 0.9 * std::cos(std::numbers::pi * z);
        case EffectKind::tanh: return 0.9 * std::tanh(std::numbers::pi * z);
        case EffectKind::half_sine: return 0.5 * std::sin(std::numbers::pi * z);
        case EffectKind::quadratic: return scale * (curvature * z * z + 1.0);
        case EffectKind::constant: return scale;
    }
    return 0.0;
}

std::string EffectFunction::label() const {
    switch (kind) {
        case EffectKind::linear: return "f";
        case EffectKind::cosine: return "g";
        case EffectKind::tanh: return "h";
        case EffectKind::half_sine: return "half_sine";
        case EffectKind::quadratic: return "quadratic";
        case EffectKind::constant: return "constant";
    }
    return "unknown";
}

EffectFunction effect_f() { return {EffectKind::linear, 1.0, 0.0}; }
EffectFunction effect_g() { return {EffectKind::cosine, 1.0, 0.0}; }
EffectFunction effect_h() { return {EffectKind::tanh, 1.0, 0.0}; }
EffectFunction effect_half_sine() { return {EffectKind::half_sine, 1.0, 0.0}; }

EffectFunction misspec1_effect(double curvature) {
    if (!(curvature >= 0.0)) throw Error(ErrorKind::invalid_argument, "curvature must be non-negative");
    // Integral over [-1, 1] of c (k z^2 + 1) = c (2k/3 + 2); the integrand is positive.
    const double c = kMisspecEffectIntegral / (2.0 * curvature / 3.0 + 2.0);
    if (curvature == 0.0) return {EffectKind::constant, c, 0.0};
    return {EffectKind::quadratic, c, curvature};
}

std::optional<Scenario> parse_scenario(const std::string& name) {
    if (name == "1" || name == "cyclic_confounded") return Scenario::cyclic_confounded;
    if (name == "2" || name == "acyclic_confounded") return Scenario::acyclic_confounded;
    if (name == "3" || name == "cyclic_unconfounded") return Scenario::cyclic_unconfounded;
    if (name == "misspec1") return Scenario::misspec1;
    return std::nullopt;
}

std::string to_string(Scenario s) {
    switch (s) {
        case Scenario::cyclic_confounded: return "cyclic_confounded";
        case Scenario::acyclic_confounded: return "acyclic_confounded";
        case Scenario::cyclic_unconfounded: return "cyclic_unconfounded";
        case Scenario::misspec1: return "misspec1";
    }
    return "unknown";
}

void ScenarioConfig::validate() const {
    if (p < 2) throw Error(ErrorKind::invalid_argument, "simulation needs p >= 2");
    if (n < 1) throw Error(ErrorKind::invalid_argument, "simulation needs n >= 1");
    const double prob = resolved_edge_prob();
    if (!(prob > 0.0 && prob <= 1.0)) throw Error(ErrorKind::invalid_argument, "edge probability must lie in (0, 1]");
    if (effect_pool.empty()) throw Error(ErrorKind::invalid_argument, "effect pool is empty");
    if (!(curvature >= 0.0)) throw Error(ErrorKind::invalid_argument, "curvature must be non-negative");
}

Matrix GroundTruth::b_matrix(double z) const {
    const int p = r.p();
    Matrix b = Matrix::Zero(p, p);
    for (int j = 0; j < p; ++j)
        for (int l = 0; l < p; ++l)
            if (r(j, l)) b(j, l) = (*effect(j, l))(z);
    return b;
}

EdgeIndicators GroundTruth::observed_indicators() const {
    const int q = p_observed();
    EdgeIndicators out(q);
    for (int j = 0; j < q; ++j)
        for (int l = 0; l < q; ++l)
            if (r(j, l)) out.set(j, l, true);
    return out;
}

EdgeIndicators random_graph(int p, double edge_prob, GraphMode mode, Rng& rng) {
    if (p < 1) throw Error(ErrorKind::invalid_argument, "graph needs p >= 1");
    if (!(edge_prob >= 0.0 && edge_prob <= 1.0)) throw Error(ErrorKind::invalid_argument, "edge probability outside [0, 1]");
    std::bernoulli_distribution coin(edge_prob);
    for (int attempt = 0; attempt < kGraphRetryCap; ++attempt) {
        EdgeIndicators r(p);
        if (mode == GraphMode::acyclic) {
            std::vector<int> order(static_cast<std::size_t>(p));
            std::iota(order.begin(), order.end(), 0);
            for (int j = 0; j < p; ++j)
                for (int l = 0; l < j; ++l)
                    if (coin(rng)) r.set(j, l, true);
            std::shuffle(order.begin(), order.end(), rng);
            EdgeIndicators permuted(p);
            for (int j = 0; j < p; ++j)
                for (int l = 0; l < p; ++l)
                    if (r(j, l))
                        permuted.set(order[static_cast<std::size_t>(j)], order[static_cast<std::size_t>(l)], true);
            return permuted;
        }
        for (int j = 0; j < p; ++j)
            for (int l = 0; l < p; ++l)
                if (j != l && coin(rng)) r.set(j, l, true);
        if (mode == GraphMode::any || cycles_disjoint(r)) return r;
    }
    throw Error(ErrorKind::retry_exhausted, "no graph with disjoint cycles after " + std::to_string(kGraphRetryCap) +
                                                " draws (p=" + std::to_string(p) +
                                                ", edge_prob=" + std::to_string(edge_prob) + ")");
}

std::vector<std::optional<EffectFunction>> random_effects(const EdgeIndicators& r,
                                                          const std::vector<EffectFunction>& pool, Rng& rng) {
    if (pool.empty()) throw Error(ErrorKind::invalid_argument, "effect pool is empty");
    const int p = r.p();
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    std::vector<std::optional<EffectFunction>> out(static_cast<std::size_t>(p * p));
    for (int j = 0; j < p; ++j)
        for (int l = 0; l < p; ++l)
            if (r(j, l)) out[static_cast<std::size_t>(j * p + l)] = pool[pick(rng)];
    return out;
}

NoiseCovariance random_covariance(int p, bool confounded, Rng& rng, double* shrink_factor) {
    if (p < 1) throw Error(ErrorKind::invalid_argument, "covariance needs p >= 1");
    if (shrink_factor) *shrink_factor = 1.0;
    if (!confounded) return NoiseCovariance::identity(p);
    double shrink = 1.0;
    for (int round = 0; round < kCovarianceRounds; ++round) {
        for (int attempt = 0; attempt < kCovarianceRetryCap; ++attempt) {
            Matrix s = Matrix::Identity(p, p);
            for (int a = 0; a < p; ++a)
                for (int b = a + 1; b < p; ++b) s(a, b) = s(b, a) = shrink * draw_uniform(rng, -1.0, 1.0);
            if (is_pd(s)) {
                if (shrink_factor) *shrink_factor = shrink;
                return NoiseCovariance(std::move(s));
            }
        }
        shrink *= 0.9;
    }
    throw Error(ErrorKind::retry_exhausted, "could not draw a PD covariance for p=" + std::to_string(p));
}

SimulatedData sample_data(const GroundTruth& truth, int n, NoiseLaw noise, std::uint64_t seed) {
    if (n < 1) throw Error(ErrorKind::invalid_argument, "sample size must be positive");
    const int p = truth.p_total();
    const Matrix chol = Eigen::LLT<Matrix>(truth.s.matrix()).matrixL();
    Dataset full;
    full.x.resize(n, p);
    full.z.resize(n);
    for (int c = 0; c < truth.p_observed(); ++c) full.names.push_back("x" + std::to_string(c + 1));
    for (int c = 0; c < truth.hidden; ++c) full.names.push_back("h" + std::to_string(c + 1));
    full.covariate_name = "z";

    std::vector<std::uint8_t> failed(static_cast<std::size_t>(n), 0);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            Rng rng = make_rng(seed, i + 1);
            bool done = false;
            for (int attempt = 0; attempt < kRowRetryCap && !done; ++attempt) {
                const double z = draw_uniform(rng, -1.0, 1.0);
                const Matrix a = Matrix::Identity(p, p) - truth.b_matrix(z);
                Eigen::PartialPivLU<Matrix> lu(a);
                if (!(std::abs(lu.determinant()) > kSingularityFloor)) continue;
                Vector u(p);
                for (int c = 0; c < p; ++c)
                    u[c] = noise == NoiseLaw::gaussian ? draw_normal(rng) : draw_uniform(rng, -1.0, 1.0);
                const auto row = static_cast<Eigen::Index>(i);
                full.z[row] = z;
                full.x.row(row) = lu.solve(chol * u).transpose();
                done = true;
            }
            if (!done) failed[i] = 1;
        }
    });
    for (std::size_t i = 0; i < failed.size(); ++i) {
        if (failed[i]) {
            throw Error(ErrorKind::retry_exhausted,
                        "I - B(z) stayed singular after " + std::to_string(kRowRetryCap) + " covariate draws at row " +
                            std::to_string(i));
        }
    }
    SimulatedData out;
    out.full = full;
    out.observed.x = full.x.leftCols(truth.p_observed());
    out.observed.z = full.z;
    out.observed.names.assign(full.names.begin(), full.names.begin() + truth.p_observed());
    out.observed.covariate_name = full.covariate_name;
    return out;
}

GroundTruth bivariate_truth(BivariateFixture fixture) {
    GroundTruth t;
    t.r = EdgeIndicators(2);
    t.effects.assign(4, std::nullopt);
    if (fixture != BivariateFixture::no_edge) {
        t.r.set(1, 0, true);  // x1 -> x2
        t.effects[2] = effect_half_sine();
    }
    if (fixture == BivariateFixture::cycle) {
        t.r.set(0, 1, true);  // x2 -> x1
        t.effects[1] = effect_half_sine();
    }
    Matrix s(2, 2);
    s << 1.0, 0.5, 0.5, 1.0;
    t.s = NoiseCovariance(s);
    return t;
}

GroundTruth misspec1_truth(double curvature) {
    const EffectFunction b = misspec1_effect(curvature);
    GroundTruth t;
    t.r = EdgeIndicators(4);
    t.effects.assign(16, std::nullopt);
    t.hidden = 1;
    const std::pair<int, int> edges[] = {{1, 0}, {2, 1}, {0, 3}, {2, 3}};  // (to, from)
    for (const auto& [j, l] : edges) {
        t.r.set(j, l, true);
        t.effects[static_cast<std::size_t>(j * 4 + l)] = b;
    }
    t.s = NoiseCovariance::identity(4);
    return t;
}

Simulation simulate(const ScenarioConfig& config) {
    config.validate();
    Simulation sim;
    sim.config = config;
    Rng rng = make_rng(config.seed, 0);
    if (config.scenario == Scenario::misspec1) {
        sim.truth = misspec1_truth(config.curvature);
    } else {
        const GraphMode mode = config.scenario == Scenario::acyclic_confounded ? GraphMode::acyclic : GraphMode::any;
        sim.truth.r = random_graph(config.p, config.resolved_edge_prob(), mode, rng);
        sim.truth.effects = random_effects(sim.truth.r, config.effect_pool, rng);
        const bool confounded = config.scenario != Scenario::cyclic_unconfounded;
        sim.truth.s = random_covariance(config.p, confounded, rng, &sim.truth.shrink_factor);
    }
    sim.data = sample_data(sim.truth, config.n, config.noise(), config.seed);
    return sim;
}

}  // namespace vcsem
