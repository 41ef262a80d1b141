#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vcsem/random.hpp"
#include "vcsem/sem_model.hpp"
#include "vcsem/spline_basis.hpp"

namespace vcsem {

/// Prior settings. psi and dof are filled from p by resolved() when left empty.
struct Hyperparameters {
    double a = 0.5;       // beta prior on pi
    double b = 0.5;
    double alpha = 0.01;  // inverse-gamma shape for tau
    double beta0 = 0.01;  // inverse-gamma scale for tau
    Matrix psi;           // inverse-Wishart scale; empty means identity
    double dof = 0.0;     // inverse-Wishart degrees of freedom; 0 means p
    int basis_count = 10;

    Hyperparameters resolved(int p) const;
    /// Throws invalid_argument unless a, b, alpha, beta0 > 0, dof >= p, psi PD, K >= 4.
    void validate(int p) const;
};

struct Schedule {
    int total = 2000;
    int burn_in = 1000;
    int thin = 5;

    void validate() const;
    int retained_count() const noexcept { return (total - burn_in) / thin; }
    bool retains(int iteration) const noexcept {
        return iteration > burn_in && (iteration - burn_in) % thin == 0;
    }
};

enum class BirthProposal {
    prior,        // slab draw N(0, tau I); the slab density cancels in the ratio
    conditional,  // Gaussian full conditional of the edge's coefficients, ignoring the Jacobian
};

/// Which target the Metropolis moves see. The reduced targets exist for testing the move mechanics.
enum class TargetMode {
    posterior,
    prior_only,  // likelihood held constant
    flat,        // every Metropolis ratio is 1
};

struct SamplerOptions {
    bool acyclic = false;
    BirthProposal birth_proposal = BirthProposal::conditional;
    TargetMode target = TargetMode::posterior;
    bool random_pi_init = false;
    double initial_step_scale = 0.5;
    int adapt_batch = 20;
    double singular_floor = kSingularityFloor;
    /// Hold S at this value instead of drawing it.
    std::optional<Matrix> fixed_noise_covariance;
    /// Map from the raw covariate onto the unit basis domain; observed range when unset.
    std::optional<CovariateScaling> scaling;
    /// Burn-in sweeps over which the likelihood power rises geometrically to 1; negative means burn_in / 2.
    int anneal_sweeps = -1;
    /// Likelihood power at the first sweep of the anneal.
    double initial_temperature = 0.01;
};

/// Likelihood power used at 1-based iteration iter; 1 outside the anneal window.
double annealing_temperature(int iter, const Schedule& schedule, const SamplerOptions& options);

struct SamplerState {
    EdgeIndicators r;
    SplineCoefficients beta;
    NoiseCovariance s;
    double pi = 0.5;
    double tau = 1.0;
    double log_likelihood = 0.0;
};

struct MoveStats {
    std::int64_t proposed = 0;
    std::int64_t accepted = 0;
    std::int64_t singular_rejected = 0;
    std::int64_t structure_rejected = 0;

    double acceptance_rate() const noexcept {
        return proposed == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposed);
    }
};

struct ChainDiagnostics {
    MoveStats birth;
    MoveStats death;
    MoveStats coefficient;             // all iterations
    MoveStats coefficient_after_burn;  // adaptation frozen
    double max_cache_drift = 0.0;
};

struct ChainSample {
    int iteration = 0;
    SamplerState state;
};

struct Chain {
    Schedule schedule;
    std::uint64_t seed = 0;
    Hyperparameters hp;  // resolved
    bool acyclic = false;
    BirthProposal birth_proposal = BirthProposal::conditional;
    int anneal_sweeps = 0;  // resolved
    double initial_temperature = 1.0;
    CovariateScaling scaling;
    int p = 0;
    std::vector<std::string> names;
    std::string covariate_name = "z";
    std::vector<ChainSample> samples;
    ChainDiagnostics diagnostics;

    BasisSpec basis() const { return BasisSpec(hp.basis_count, 0.0, 1.0); }
};

/// pi | r ~ Beta(a + |E|, b + p(p-1) - |E|).
double sample_pi(const EdgeIndicators& r, const Hyperparameters& hp, Rng& rng);

/// tau | beta, r ~ IG(alpha + K|E|/2, beta0 + sum over active edges of |beta_jl|^2 / 2).
double sample_tau(const SplineCoefficients& beta, const EdgeIndicators& r, const Hyperparameters& hp, Rng& rng);

/// S | residuals ~ IW(psi + w E^T E, dof + w n) with likelihood power w. A 0 x p residual
/// matrix draws from the prior.
NoiseCovariance sample_S(const Matrix& residuals, const Hyperparameters& hp, Rng& rng, double weight = 1.0);

/// Metropolis-within-Gibbs sampler over (r, beta, S, pi, tau).
///
/// Keeps per-row caches of (I - B(z_i))^{-1}, log|det(I - B(z_i))|, residuals and
/// residuals times S^{-1}. A move on edge (j, l) changes only entry (j, l) of every
/// B(z_i), so its likelihood ratio and the accepted-state update are rank-one.
/// The caches are rebuilt from scratch once per sweep.
class GibbsSampler {
public:
    GibbsSampler(const Dataset& data, const Hyperparameters& hp, const SamplerOptions& options, std::uint64_t seed);

    const SamplerState& state() const noexcept { return state_; }
    /// Replaces the state and rebuilds every cache. Throws if the state is singular on the data.
    void set_state(SamplerState state);

    bool update_edge(int j, int l);
    bool update_coefficients(int j, int l);
    void update_noise_covariance();
    void update_tau();
    void update_pi();

    /// One full iteration; adapt enables step-size tuning of coefficient moves.
    void sweep(bool adapt);

    /// Rebuilds the caches; returns |cached - fresh| log-likelihood before the rebuild.
    double refresh();

    /// Power applied to the likelihood in every update; 1 targets the posterior.
    void set_temperature(double t);
    double temperature() const noexcept { return temperature_; }

    const ChainDiagnostics& diagnostics() const noexcept { return diag_; }
    double step_scale(int j, int l) const;
    void set_step_scale(int j, int l, double scale);
    const BasisSpec& basis() const noexcept { return basis_; }
    const CovariateScaling& scaling() const noexcept { return scaling_; }
    Rng& rng() noexcept { return rng_; }
    /// Residual matrix under the current state (rows (I - B(z_i)) x_i).
    const Matrix& residuals() const noexcept { return resid_; }

private:
    struct Delta {
        bool singular = false;
        double log_lik = 0.0;
    };

    Delta likelihood_delta(int j, int l, const Vector& delta) const;
    void apply_change(int j, int l, const Vector& delta, double delta_log_lik);
    /// Full conditional precision of beta_jl given everything else, Jacobian excluded.
    Matrix conditional_precision(int j, int l) const;
    /// Phi^T (x_l .* g) where g is column j of residuals * S^{-1} with edge (j, l) removed.
    Vector conditional_shift(int j, int l) const;
    double log_slab(const Vector& beta) const;
    void set_noise(const NoiseCovariance& s);
    void rebuild_caches();
    double recompute_log_likelihood() const;
    std::size_t edge_slot(int j, int l) const noexcept {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(p_) + static_cast<std::size_t>(l);
    }

    int p_;
    int k_;
    Eigen::Index n_;
    Hyperparameters hp_;
    SamplerOptions options_;
    CovariateScaling scaling_;
    BasisSpec basis_;
    Rng rng_;

    Matrix x_;      // n x p
    Matrix phi_;    // n x K
    std::vector<Matrix> gram_;  // per source l: sum_i x_il^2 phi_i phi_i^T

    SamplerState state_;
    Matrix precision_;  // S^{-1}
    double log_norm_ = 0.0;
    std::vector<Matrix> a_inv_;
    Vector log_det_;
    Matrix resid_;
    Matrix resid_prec_;  // resid_ * S^{-1}
    double temperature_ = 1.0;

    std::vector<double> step_;
    std::vector<int> batch_proposed_;
    std::vector<int> batch_accepted_;
    bool adapting_ = false;
    bool after_burn_ = false;
    std::int64_t sweep_proposals_ = 0;
    std::int64_t sweep_singular_ = 0;
    ChainDiagnostics diag_;
};

Chain run_chain(const Dataset& data, const Hyperparameters& hp, const Schedule& schedule, std::uint64_t seed,
                const SamplerOptions& options = {});

struct EdgeBand {
    int from = 0;  // 0-based source node l
    int to = 0;    // 0-based target node j
    std::vector<double> lower;
    std::vector<double> median;
    std::vector<double> upper;
    /// Some constant lies inside the band at every grid point.
    bool covers_constant = false;
};

struct PosteriorSummary {
    double threshold = 0.5;
    Matrix ppi;
    EdgeIndicators estimate;
    Matrix mean_s;
    MixedGraph graph;
    std::vector<double> z_grid;  // original covariate units
    std::vector<EdgeBand> bands;
    int clamped_grid_points = 0;
};

/// Default grid: points equally spaced over the observed covariate range.
std::vector<double> default_summary_grid(const CovariateScaling& scaling, int points = 50);

/// PPI matrix, thresholded graph (strict >), posterior-mean S and 95% pointwise bands of
/// each included effect curve. z_grid is in original units; empty selects the default grid.
PosteriorSummary summarize(const Chain& chain, double threshold = 0.5, std::span<const double> z_grid = {},
                           DomainPolicy policy = DomainPolicy::clamp);

/// Type-7 (linear interpolation) sample quantile; sorts a copy.
double sample_quantile(std::vector<double> values, double prob);

}  // namespace vcsem
