#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vcsem/random.hpp"
#include "vcsem/sem_model.hpp"

namespace vcsem {

enum class Scenario { cyclic_confounded, acyclic_confounded, cyclic_unconfounded, misspec1 };
enum class GraphMode { any, acyclic, disjoint_cycles };
enum class NoiseLaw { gaussian, uniform };

/// Named effect curves b(z).
enum class EffectKind {
    linear,     // f(z) = 0.8 z
    cosine,     // g(z) = 0.9 cos(pi z)
    tanh,       // h(z) = 0.9 tanh(pi z)
    half_sine,  // 0.5 sin(pi z), the bivariate identifiability fixtures
    quadratic,  // scale * (curvature * z^2 + 1)
    constant,   // scale
};

struct EffectFunction {
    EffectKind kind = EffectKind::linear;
    double scale = 1.0;
    double curvature = 0.0;

    double operator()(double z) const;
    std::string label() const;
};

EffectFunction effect_f();
EffectFunction effect_g();
EffectFunction effect_h();
EffectFunction effect_half_sine();

/// Quadratic family c * (curvature * z^2 + 1) on [-1, 1] with c chosen so that
/// the integral of |b| over [-1, 1] equals kMisspecEffectIntegral. Curvature 0 is the constant limit.
inline constexpr double kMisspecEffectIntegral = 1.6;
EffectFunction misspec1_effect(double curvature);

std::optional<Scenario> parse_scenario(const std::string& name);
std::string to_string(Scenario s);

struct ScenarioConfig {
    Scenario scenario = Scenario::cyclic_confounded;
    int p = 10;
    int n = 1000;
    std::optional<double> edge_prob;  // default 1/p
    std::vector<EffectFunction> effect_pool = {effect_f(), effect_g(), effect_h()};
    double curvature = 1.0;  // misspec1 only
    std::uint64_t seed = 1;

    double resolved_edge_prob() const { return edge_prob ? *edge_prob : 1.0 / static_cast<double>(p); }
    NoiseLaw noise() const { return scenario == Scenario::misspec1 ? NoiseLaw::uniform : NoiseLaw::gaussian; }
    void validate() const;
};

/// Simulation truth over all nodes, observed first and hidden last.
struct GroundTruth {
    EdgeIndicators r;
    std::vector<std::optional<EffectFunction>> effects;  // p_total * p_total, row-major (j, l)
    NoiseCovariance s;
    int hidden = 0;             // trailing hidden nodes dropped before fitting
    double shrink_factor = 1.0; // applied to S off-diagonals when PD rejection exhausted its cap

    int p_total() const { return r.p(); }
    int p_observed() const { return r.p() - hidden; }
    const std::optional<EffectFunction>& effect(int j, int l) const {
        return effects[static_cast<std::size_t>(j * r.p() + l)];
    }
    Matrix b_matrix(double z) const;
    /// Directed edges among observed nodes only.
    EdgeIndicators observed_indicators() const;
};

EdgeIndicators random_graph(int p, double edge_prob, GraphMode mode, Rng& rng);

/// One uniformly chosen pool member per active edge, row-major over (j, l).
std::vector<std::optional<EffectFunction>> random_effects(const EdgeIndicators& r,
                                                          const std::vector<EffectFunction>& pool, Rng& rng);

/// Confounded: unit diagonal, U(-1, 1) off-diagonals redrawn until PD (cap 1000 per
/// round), shrinking off-diagonals by 0.9 each exhausted round. Unconfounded: identity.
NoiseCovariance random_covariance(int p, bool confounded, Rng& rng, double* shrink_factor = nullptr);

struct SimulatedData {
    Dataset observed;
    Dataset full;  // including hidden columns
};

/// z_i ~ U(-1, 1); eps_i = chol(S) u_i with u_i standard normal (gaussian) or U(-1, 1) (uniform);
/// x_i = (I - B(z_i))^{-1} eps_i. Row i draws from its own stream (seed, i).
SimulatedData sample_data(const GroundTruth& truth, int n, NoiseLaw noise, std::uint64_t seed);

struct Simulation {
    ScenarioConfig config;
    GroundTruth truth;
    SimulatedData data;
};

Simulation simulate(const ScenarioConfig& config);

/// Two-node fixtures with 0.5 sin(pi z) effects, unit variances and noise correlation 0.5.
enum class BivariateFixture { no_edge, forward, cycle };
GroundTruth bivariate_truth(BivariateFixture fixture);

/// Three observed nodes x1 -> x2 -> x3 plus a hidden h -> x1, h -> x3; every effect from the quadratic family.
GroundTruth misspec1_truth(double curvature);

}  // namespace vcsem
