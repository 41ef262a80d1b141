#include "vcsem/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "vcsem/error.hpp"
#include "vcsem/parallel.hpp"

namespace vcsem {
namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2 pi)
constexpr double kMinStep = 1e-4;
constexpr double kMaxStep = 1e2;
constexpr double kTargetAcceptance = 0.3;

bool accept(Rng& rng, double log_ratio) {
    if (log_ratio >= 0.0) return true;
    return std::log(draw_uniform(rng)) < log_ratio;
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

// ---------------------------------------------------------------- hyperparameters

Hyperparameters Hyperparameters::resolved(int p) const {
    Hyperparameters out = *this;
    if (out.psi.size() == 0) out.psi = Matrix::Identity(p, p);
    if (out.dof == 0.0) out.dof = static_cast<double>(p);
    return out;
}

void Hyperparameters::validate(int p) const {
    if (!(a > 0.0 && b > 0.0)) throw Error(ErrorKind::invalid_argument, "beta prior shapes a, b must be positive");
    if (!(alpha > 0.0 && beta0 > 0.0)) {
        throw Error(ErrorKind::invalid_argument, "inverse-gamma shape and scale must be positive");
    }
    if (basis_count < BasisSpec::order) throw Error(ErrorKind::invalid_argument, "basis count K must be at least 4");
    const Hyperparameters r = resolved(p);
    if (r.psi.rows() != p || r.psi.cols() != p) throw Error(ErrorKind::dimension_mismatch, "psi must be p x p");
    if (!(r.dof >= static_cast<double>(p))) throw Error(ErrorKind::invalid_argument, "inverse-Wishart dof must be >= p");
    Eigen::LLT<Matrix> llt(r.psi);
    if (llt.info() != Eigen::Success) throw Error(ErrorKind::invalid_argument, "psi must be positive definite");
}

void Schedule::validate() const {
    if (total < 1 || burn_in < 0 || thin < 1 || burn_in >= total) {
        throw Error(ErrorKind::invalid_argument, "schedule needs total >= 1, 0 <= burn_in < total, thin >= 1");
    }
}

// ---------------------------------------------------------------- conjugate draws

double sample_pi(const EdgeIndicators& r, const Hyperparameters& hp, Rng& rng) {
    const double edges = r.edge_count();
    const double pairs = static_cast<double>(r.p()) * static_cast<double>(r.p() - 1);
    return draw_beta(rng, hp.a + edges, hp.b + pairs - edges);
}

double sample_tau(const SplineCoefficients& beta, const EdgeIndicators& r, const Hyperparameters& hp, Rng& rng) {
    double squares = 0.0;
    int edges = 0;
    for (int j = 0; j < r.p(); ++j)
        for (int l = 0; l < r.p(); ++l)
            if (r(j, l)) {
                ++edges;
                squares += beta.edge_vector(j, l).squaredNorm();
            }
    const double shape = hp.alpha + 0.5 * static_cast<double>(beta.basis_count()) * edges;
    return draw_inverse_gamma(rng, shape, hp.beta0 + 0.5 * squares);
}

NoiseCovariance sample_S(const Matrix& residuals, const Hyperparameters& hp, Rng& rng, double weight) {
    if (!(weight > 0.0 && weight <= 1.0)) throw Error(ErrorKind::invalid_argument, "likelihood weight must lie in (0, 1]");
    const int p = static_cast<int>(residuals.cols());
    const Hyperparameters r = hp.resolved(p);
    Matrix scale = r.psi;
    if (residuals.rows() > 0) scale += weight * (residuals.transpose() * residuals);
    Eigen::LLT<Matrix> llt(scale);
    if (llt.info() != Eigen::Success) throw Error(ErrorKind::not_positive_definite, "posterior IW scale not PD");
    return NoiseCovariance(draw_inverse_wishart(rng, symmetrize(scale), r.dof + weight * static_cast<double>(residuals.rows())));
}

// ---------------------------------------------------------------- sampler setup

GibbsSampler::GibbsSampler(const Dataset& data, const Hyperparameters& hp, const SamplerOptions& options,
                           std::uint64_t seed)
    : p_(data.p()),
      k_(hp.basis_count),
      n_(data.n()),
      hp_(hp.resolved(data.p())),
      options_(options),
      scaling_(options.scaling ? *options.scaling : CovariateScaling::from_range(data.z_span())),
      basis_(hp.basis_count, 0.0, 1.0),
      rng_(make_rng(seed)),
      x_(data.x) {
    data.validate();
    if (p_ < 2) throw Error(ErrorKind::invalid_argument, "need at least two variables");
    hp_.validate(p_);
    if (!(scaling_.lo < scaling_.hi)) throw Error(ErrorKind::invalid_argument, "covariate scaling has zero range");

    std::vector<double> unit(static_cast<std::size_t>(n_));
    for (Eigen::Index i = 0; i < n_; ++i) unit[static_cast<std::size_t>(i)] = scaling_.forward(data.z[i]);
    phi_ = basis_.design_matrix(unit, DomainPolicy::clamp);

    gram_.resize(static_cast<std::size_t>(p_));
    for (int l = 0; l < p_; ++l) {
        const Matrix weighted = x_.col(l).cwiseAbs2().asDiagonal() * phi_;
        gram_[static_cast<std::size_t>(l)] = phi_.transpose() * weighted;
    }

    const std::size_t slots = static_cast<std::size_t>(p_) * static_cast<std::size_t>(p_);
    step_.assign(slots, options_.initial_step_scale);
    batch_proposed_.assign(slots, 0);
    batch_accepted_.assign(slots, 0);

    SamplerState init;
    init.r = EdgeIndicators(p_);
    init.beta = SplineCoefficients(p_, k_);
    init.s = options_.fixed_noise_covariance ? NoiseCovariance(*options_.fixed_noise_covariance)
                                             : NoiseCovariance::identity(p_);
    init.tau = 1.0;
    init.pi = options_.random_pi_init ? draw_beta(rng_, hp_.a, hp_.b) : hp_.a / (hp_.a + hp_.b);
    set_state(std::move(init));
}

void GibbsSampler::set_state(SamplerState state) {
    if (state.r.p() != p_ || state.beta.p() != p_ || state.beta.basis_count() != k_ || state.s.p() != p_) {
        throw Error(ErrorKind::dimension_mismatch, "sampler state dimensions do not match the data");
    }
    state_ = std::move(state);
    set_noise(state_.s);
    rebuild_caches();
    state_.log_likelihood = recompute_log_likelihood();
}

void GibbsSampler::set_noise(const NoiseCovariance& s) {
    state_.s = s;
    Eigen::LLT<Matrix> llt(s.matrix());
    if (llt.info() != Eigen::Success) throw Error(ErrorKind::not_positive_definite, "noise covariance is not PD");
    precision_ = symmetrize(llt.solve(Matrix::Identity(p_, p_)));
    const Matrix l = llt.matrixL();
    log_norm_ = -0.5 * static_cast<double>(p_) * kLog2Pi - l.diagonal().array().log().sum();
}

void GibbsSampler::rebuild_caches() {
    const auto n = static_cast<std::size_t>(n_);
    a_inv_.resize(n);
    log_det_.resize(n_);
    resid_.resize(n_, p_);
    std::vector<std::uint8_t> bad(n, 0);

    std::vector<std::pair<int, int>> active;
    for (int j = 0; j < p_; ++j)
        for (int l = 0; l < p_; ++l)
            if (state_.r(j, l)) active.emplace_back(j, l);

    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        Matrix a(p_, p_);
        for (std::size_t i = begin; i < end; ++i) {
            const auto row = static_cast<Eigen::Index>(i);
            a.setIdentity();
            for (const auto& [j, l] : active) a(j, l) -= phi_.row(row).dot(state_.beta.edge_vector(j, l));
            Eigen::PartialPivLU<Matrix> lu(a);
            const double abs_det = std::abs(lu.determinant());
            if (!(abs_det > options_.singular_floor)) {
                bad[i] = 1;
                continue;
            }
            log_det_[row] = std::log(abs_det);
            a_inv_[i] = lu.inverse();
            resid_.row(row) = (a * x_.row(row).transpose()).transpose();
        }
    });
    for (std::size_t i = 0; i < n; ++i) {
        if (bad[i]) throw NearSingularError(i, 0.0, "sampler state is singular at row " + std::to_string(i));
    }
    resid_prec_ = resid_ * precision_;
}

double GibbsSampler::recompute_log_likelihood() const {
    const double quad = deterministic_sum(static_cast<std::size_t>(n_), [&](std::size_t begin, std::size_t end) {
        double sum = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            const auto row = static_cast<Eigen::Index>(i);
            sum += log_det_[row] - 0.5 * resid_.row(row).dot(resid_prec_.row(row));
        }
        return sum;
    });
    return quad + static_cast<double>(n_) * log_norm_;
}

double GibbsSampler::refresh() {
    const double cached = state_.log_likelihood;
    rebuild_caches();
    state_.log_likelihood = recompute_log_likelihood();
    const double drift = std::abs(cached - state_.log_likelihood);
    diag_.max_cache_drift = std::max(diag_.max_cache_drift, drift);
    return drift;
}

double GibbsSampler::step_scale(int j, int l) const { return step_[edge_slot(j, l)]; }

void GibbsSampler::set_step_scale(int j, int l, double scale) {
    if (!(scale >= 0.0)) throw Error(ErrorKind::invalid_argument, "step scale must be non-negative");
    step_[edge_slot(j, l)] = scale;
}

// ---------------------------------------------------------------- rank-one machinery

GibbsSampler::Delta GibbsSampler::likelihood_delta(int j, int l, const Vector& delta) const {
    const double log_floor = std::log(options_.singular_floor);
    const double w_jj = precision_(j, j);
    std::vector<std::uint8_t> bad_chunk((static_cast<std::size_t>(n_) + kReductionChunk - 1) / kReductionChunk, 0);
    const double total = deterministic_sum(static_cast<std::size_t>(n_), [&](std::size_t begin, std::size_t end) {
        double sum = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            const auto row = static_cast<Eigen::Index>(i);
            const double d = delta[row];
            if (d == 0.0) continue;
            const double ratio = 1.0 - d * a_inv_[i](l, j);
            const double abs_ratio = std::abs(ratio);
            if (abs_ratio == 0.0 || log_det_[row] + std::log(abs_ratio) <= log_floor) {
                bad_chunk[begin / kReductionChunk] = 1;
                continue;
            }
            const double c = d * x_(row, l);
            sum += std::log(abs_ratio) + c * resid_prec_(row, j) - 0.5 * c * c * w_jj;
        }
        return sum;
    });
    Delta out;
    out.singular = std::any_of(bad_chunk.begin(), bad_chunk.end(), [](std::uint8_t b) { return b != 0; });
    out.log_lik = total;
    return out;
}

void GibbsSampler::apply_change(int j, int l, const Vector& delta, double delta_log_lik) {
    parallel_for(static_cast<std::size_t>(n_), [&](std::size_t begin, std::size_t end) {
        Vector col_j(p_);
        Eigen::RowVectorXd row_l(p_);
        for (std::size_t i = begin; i < end; ++i) {
            const auto row = static_cast<Eigen::Index>(i);
            const double d = delta[row];
            if (d == 0.0) continue;
            Matrix& inv = a_inv_[i];
            const double ratio = 1.0 - d * inv(l, j);
            col_j = inv.col(j);
            row_l = inv.row(l);
            inv.noalias() += (d / ratio) * col_j * row_l;
            log_det_[row] += std::log(std::abs(ratio));
            const double c = d * x_(row, l);
            resid_(row, j) -= c;
            resid_prec_.row(row) -= c * precision_.row(j);
        }
    });
    state_.log_likelihood += delta_log_lik;
}

Matrix GibbsSampler::conditional_precision(int j, int l) const {
    Matrix prec = (temperature_ * precision_(j, j)) * gram_[static_cast<std::size_t>(l)];
    prec.diagonal().array() += 1.0 / state_.tau;
    return prec;
}

Vector GibbsSampler::conditional_shift(int j, int l) const {
    Vector g = resid_prec_.col(j);
    if (state_.r(j, l)) {
        // Undo the edge's own contribution: residual column j rises by x_l * b_jl(z).
        const Vector current = phi_ * state_.beta.edge_vector(j, l);
        g += precision_(j, j) * current.cwiseProduct(x_.col(l));
    }
    return temperature_ * (phi_.transpose() * g.cwiseProduct(x_.col(l)));
}

double GibbsSampler::log_slab(const Vector& beta) const {
    return -0.5 * static_cast<double>(k_) * (kLog2Pi + std::log(state_.tau)) - 0.5 * beta.squaredNorm() / state_.tau;
}

// ---------------------------------------------------------------- moves

bool GibbsSampler::update_edge(int j, int l) {
    if (j == l) throw Error(ErrorKind::invalid_argument, "edge move requires j != l");
    const bool birth = !state_.r(j, l);
    MoveStats& stats = birth ? diag_.birth : diag_.death;
    ++stats.proposed;
    ++sweep_proposals_;

    if (birth && options_.acyclic && state_.r.reaches(j, l)) {
        ++stats.structure_rejected;
        return false;
    }

    // Proposal density q over the slab coefficients (log q - log slab enters the ratio).
    const bool use_conditional = options_.birth_proposal == BirthProposal::conditional;
    Vector beta_new;
    double log_q_minus_slab = 0.0;
    if (use_conditional) {
        const Matrix prec = conditional_precision(j, l);
        Eigen::LLT<Matrix> llt(prec);
        if (llt.info() != Eigen::Success) throw Error(ErrorKind::not_positive_definite, "conditional precision not PD");
        const Vector mean = llt.solve(conditional_shift(j, l));
        const Matrix chol_l = llt.matrixL();
        const double half_log_det = chol_l.diagonal().array().log().sum();
        auto log_q = [&](const Vector& beta) {
            const Vector u = llt.matrixU() * (beta - mean);
            return -0.5 * static_cast<double>(k_) * kLog2Pi + half_log_det - 0.5 * u.squaredNorm();
        };
        if (birth) {
            const Vector xi = draw_standard_normal(rng_, k_);
            beta_new = mean + llt.matrixU().solve(xi);
            log_q_minus_slab = log_q(beta_new) - log_slab(beta_new);
        } else {
            const Vector current = state_.beta.edge_vector(j, l);
            log_q_minus_slab = log_q(current) - log_slab(current);
        }
    } else if (birth) {
        beta_new = std::sqrt(state_.tau) * draw_standard_normal(rng_, k_);
    }

    const Vector delta = birth ? Vector(phi_ * beta_new) : Vector(-(phi_ * state_.beta.edge_vector(j, l)));
    const Delta d = likelihood_delta(j, l, delta);
    if (d.singular) {
        ++stats.singular_rejected;
        ++sweep_singular_;
        return false;
    }

    const double prior_odds = std::log(state_.pi) - std::log1p(-state_.pi);
    double log_ratio = 0.0;
    switch (options_.target) {
        case TargetMode::posterior:
            log_ratio = temperature_ * d.log_lik + (birth ? prior_odds - log_q_minus_slab : log_q_minus_slab - prior_odds);
            break;
        case TargetMode::prior_only:
            log_ratio = birth ? prior_odds - log_q_minus_slab : -prior_odds + log_q_minus_slab;
            break;
        case TargetMode::flat:
            log_ratio = 0.0;
            break;
    }
    if (!accept(rng_, log_ratio)) return false;

    apply_change(j, l, delta, d.log_lik);
    if (birth) {
        state_.r.set(j, l, true);
        state_.beta.edge_vector(j, l) = beta_new;
    } else {
        state_.r.set(j, l, false);
        state_.beta.clear_edge(j, l);
    }
    ++stats.accepted;
    return true;
}

bool GibbsSampler::update_coefficients(int j, int l) {
    if (!state_.r(j, l)) throw Error(ErrorKind::invalid_argument, "coefficient move requires an active edge");
    const std::size_t slot = edge_slot(j, l);
    ++diag_.coefficient.proposed;
    if (after_burn_) ++diag_.coefficient_after_burn.proposed;
    ++sweep_proposals_;

    // Random walk preconditioned by the conditional precision; symmetric since the
    // precision does not depend on beta_jl.
    Eigen::LLT<Matrix> llt(conditional_precision(j, l));
    if (llt.info() != Eigen::Success) throw Error(ErrorKind::not_positive_definite, "conditional precision not PD");
    const Vector xi = draw_standard_normal(rng_, k_);
    const Vector step = step_[slot] * Vector(llt.matrixU().solve(xi));
    const Vector current = state_.beta.edge_vector(j, l);
    const Vector proposed = current + step;

    bool accepted = false;
    const Vector delta = phi_ * step;
    const Delta d = likelihood_delta(j, l, delta);
    if (d.singular) {
        ++diag_.coefficient.singular_rejected;
        if (after_burn_) ++diag_.coefficient_after_burn.singular_rejected;
        ++sweep_singular_;
    } else {
        const double log_prior = -0.5 * (proposed.squaredNorm() - current.squaredNorm()) / state_.tau;
        double log_ratio = 0.0;
        switch (options_.target) {
            case TargetMode::posterior: log_ratio = temperature_ * d.log_lik + log_prior; break;
            case TargetMode::prior_only: log_ratio = log_prior; break;
            case TargetMode::flat: log_ratio = 0.0; break;
        }
        if (accept(rng_, log_ratio)) {
            apply_change(j, l, delta, d.log_lik);
            state_.beta.edge_vector(j, l) = proposed;
            accepted = true;
            ++diag_.coefficient.accepted;
            if (after_burn_) ++diag_.coefficient_after_burn.accepted;
        }
    }

    if (adapting_) {
        ++batch_proposed_[slot];
        if (accepted) ++batch_accepted_[slot];
        if (batch_proposed_[slot] >= options_.adapt_batch) {
            const double rate = static_cast<double>(batch_accepted_[slot]) / batch_proposed_[slot];
            step_[slot] = std::clamp(step_[slot] * std::exp(2.0 * (rate - kTargetAcceptance)), kMinStep, kMaxStep);
            batch_proposed_[slot] = 0;
            batch_accepted_[slot] = 0;
        }
    }
    return accepted;
}

void GibbsSampler::update_noise_covariance() {
    if (options_.fixed_noise_covariance) return;
    const Matrix empty(0, p_);
    const NoiseCovariance s =
        sample_S(options_.target == TargetMode::posterior ? resid_ : empty, hp_, rng_, temperature_);
    set_noise(s);
    resid_prec_ = resid_ * precision_;
    state_.log_likelihood = recompute_log_likelihood();
}

void GibbsSampler::set_temperature(double t) {
    if (!(t > 0.0 && t <= 1.0)) throw Error(ErrorKind::invalid_argument, "temperature must lie in (0, 1]");
    temperature_ = t;
}

void GibbsSampler::update_tau() { state_.tau = sample_tau(state_.beta, state_.r, hp_, rng_); }

void GibbsSampler::update_pi() { state_.pi = sample_pi(state_.r, hp_, rng_); }

void GibbsSampler::sweep(bool adapt) {
    adapting_ = adapt;
    sweep_proposals_ = 0;
    sweep_singular_ = 0;

    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(static_cast<std::size_t>(p_ * (p_ - 1)));
    for (int j = 0; j < p_; ++j)
        for (int l = 0; l < p_; ++l)
            if (j != l) pairs.emplace_back(j, l);
    std::shuffle(pairs.begin(), pairs.end(), rng_);
    for (const auto& [j, l] : pairs) update_edge(j, l);

    for (int j = 0; j < p_; ++j)
        for (int l = 0; l < p_; ++l)
            if (state_.r(j, l)) update_coefficients(j, l);

    if (sweep_proposals_ >= 10 && static_cast<double>(sweep_singular_) > 0.99 * static_cast<double>(sweep_proposals_)) {
        throw Error(ErrorKind::pathological_data, "more than 99% of proposals in a sweep hit a singular Jacobian (" +
                                                      std::to_string(sweep_singular_) + " of " +
                                                      std::to_string(sweep_proposals_) + ")");
    }

    refresh();
    update_noise_covariance();
    update_tau();
    update_pi();
    if (!adapt) after_burn_ = true;
}

// ---------------------------------------------------------------- chain driver

double annealing_temperature(int iter, const Schedule& schedule, const SamplerOptions& options) {
    const int sweeps = options.anneal_sweeps < 0 ? schedule.burn_in / 2 : std::min(options.anneal_sweeps, schedule.burn_in);
    if (sweeps <= 1 || iter >= sweeps) return 1.0;
    const double t0 = options.initial_temperature;
    if (!(t0 > 0.0 && t0 <= 1.0)) throw Error(ErrorKind::invalid_argument, "initial temperature must lie in (0, 1]");
    const double frac = static_cast<double>(iter - 1) / static_cast<double>(sweeps - 1);
    return std::pow(t0, 1.0 - frac);
}

Chain run_chain(const Dataset& data, const Hyperparameters& hp, const Schedule& schedule, std::uint64_t seed,
                const SamplerOptions& options) {
    schedule.validate();
    GibbsSampler sampler(data, hp, options, seed);
    Chain chain;
    chain.schedule = schedule;
    chain.seed = seed;
    chain.hp = hp.resolved(data.p());
    chain.acyclic = options.acyclic;
    chain.birth_proposal = options.birth_proposal;
    chain.anneal_sweeps = options.anneal_sweeps < 0 ? schedule.burn_in / 2 : std::min(options.anneal_sweeps, schedule.burn_in);
    chain.initial_temperature = options.initial_temperature;
    chain.scaling = sampler.scaling();
    chain.p = data.p();
    chain.names = data.names;
    chain.covariate_name = data.covariate_name;
    chain.samples.reserve(static_cast<std::size_t>(schedule.retained_count()));
    for (int iter = 1; iter <= schedule.total; ++iter) {
        sampler.set_temperature(annealing_temperature(iter, schedule, options));
        sampler.sweep(iter <= schedule.burn_in);
        if (schedule.retains(iter)) chain.samples.push_back(ChainSample{iter, sampler.state()});
    }
    chain.diagnostics = sampler.diagnostics();
    return chain;
}

// ---------------------------------------------------------------- summaries

double sample_quantile(std::vector<double> values, double prob) {
    if (values.empty()) throw Error(ErrorKind::insufficient_data, "quantile of empty sample");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<double> default_summary_grid(const CovariateScaling& scaling, int points) {
    std::vector<double> grid(static_cast<std::size_t>(points));
    for (int g = 0; g < points; ++g) {
        grid[static_cast<std::size_t>(g)] =
            scaling.inverse(points == 1 ? 0.5 : static_cast<double>(g) / static_cast<double>(points - 1));
    }
    return grid;
}

PosteriorSummary summarize(const Chain& chain, double threshold, std::span<const double> z_grid,
                           DomainPolicy policy) {
    if (chain.samples.empty()) throw Error(ErrorKind::empty_chain, "cannot summarize an empty chain");
    const int p = chain.p;
    const auto m = static_cast<double>(chain.samples.size());
    PosteriorSummary out;
    out.threshold = threshold;
    out.ppi = Matrix::Zero(p, p);
    out.mean_s = Matrix::Zero(p, p);
    for (const auto& sample : chain.samples) {
        for (int j = 0; j < p; ++j)
            for (int l = 0; l < p; ++l)
                if (sample.state.r(j, l)) out.ppi(j, l) += 1.0;
        out.mean_s += sample.state.s.matrix();
    }
    out.ppi /= m;
    out.mean_s /= m;
    out.estimate = EdgeIndicators(p);
    for (int j = 0; j < p; ++j)
        for (int l = 0; l < p; ++l)
            if (j != l && out.ppi(j, l) > threshold) out.estimate.set(j, l, true);
    out.graph = make_mixed_graph(out.estimate, NoiseCovariance(symmetrize(out.mean_s)));

    out.z_grid = z_grid.empty() ? default_summary_grid(chain.scaling) : std::vector<double>(z_grid.begin(), z_grid.end());
    const BasisSpec basis = chain.basis();
    Matrix phi(static_cast<Eigen::Index>(out.z_grid.size()), basis.size());
    for (std::size_t g = 0; g < out.z_grid.size(); ++g) {
        const double u = chain.scaling.forward(out.z_grid[g]);
        if (!basis.contains(u)) {
            if (policy == DomainPolicy::strict) {
                throw Error(ErrorKind::out_of_domain,
                            "grid point " + std::to_string(out.z_grid[g]) + " outside the observed covariate range");
            }
            ++out.clamped_grid_points;
        }
        phi.row(static_cast<Eigen::Index>(g)) = basis.evaluate(u, DomainPolicy::clamp).transpose();
    }

    const std::size_t grid_size = out.z_grid.size();
    for (const auto& [from, to] : out.graph.directed) {
        EdgeBand band;
        band.from = from;
        band.to = to;
        std::vector<std::vector<double>> curves(grid_size);
        for (const auto& sample : chain.samples) {
            const bool on = sample.state.r(to, from);
            const Vector values = on ? Vector(phi * sample.state.beta.edge_vector(to, from))
                                     : Vector(Vector::Zero(static_cast<Eigen::Index>(grid_size)));
            for (std::size_t g = 0; g < grid_size; ++g) curves[g].push_back(values[static_cast<Eigen::Index>(g)]);
        }
        double max_lower = -std::numeric_limits<double>::infinity();
        double min_upper = std::numeric_limits<double>::infinity();
        for (std::size_t g = 0; g < grid_size; ++g) {
            band.lower.push_back(sample_quantile(curves[g], 0.025));
            band.median.push_back(sample_quantile(curves[g], 0.5));
            band.upper.push_back(sample_quantile(curves[g], 0.975));
            max_lower = std::max(max_lower, band.lower.back());
            min_upper = std::min(min_upper, band.upper.back());
        }
        band.covers_constant = grid_size > 0 && max_lower <= min_upper;
        out.bands.push_back(std::move(band));
    }
    return out;
}

}  // namespace vcsem
