#include "doctest.h"

#include <cmath>
#include <random>

#include "vcsem/chain_io.hpp"
#include "vcsem/error.hpp"
#include "vcsem/parallel.hpp"
#include "vcsem/sampler.hpp"
#include "vcsem/simulate.hpp"

using namespace vcsem;

namespace {

Dataset small_dataset(int p, int n, std::uint64_t seed) {
    ScenarioConfig cfg;
    cfg.p = p;
    cfg.n = n;
    cfg.seed = seed;
    return simulate(cfg).data.observed;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("pi full conditional") {
    Hyperparameters hp;
    Rng rng = make_rng(1);
    EdgeIndicators r(3);
    r.set(1, 0, true);
    r.set(2, 1, true);
    std::vector<double> draws;
    for (int i = 0; i < 20000; ++i) draws.push_back(sample_pi(r, hp, rng));
    // Beta(2.5, 4.5): mean 2.5 / 7, sd sqrt(ab / ((a+b)^2 (a+b+1))).
    const double sd = std::sqrt(2.5 * 4.5 / (49.0 * 8.0));
    CHECK(std::abs(mean_of(draws) - 2.5 / 7.0) < 4.0 * sd / std::sqrt(20000.0));

    // Deterministic parameter identity: the draw equals a Beta(0.5, 2.5) draw on the same stream.
    Rng a = make_rng(7);
    Rng b = make_rng(7);
    CHECK(sample_pi(EdgeIndicators(2), hp, a) == draw_beta(b, 0.5, 2.5));
    EdgeIndicators full(2);
    full.set(0, 1, true);
    full.set(1, 0, true);
    CHECK(sample_pi(full, hp, a) == draw_beta(b, 2.5, 0.5));
}

TEST_CASE("tau full conditional") {
    Hyperparameters hp;
    hp.basis_count = 2;
    SplineCoefficients beta(2, 2);
    EdgeIndicators r(2);

    Rng a = make_rng(3);
    Rng b = make_rng(3);
    CHECK(sample_tau(beta, r, hp, a) == draw_inverse_gamma(b, 0.01, 0.01));

    r.set(1, 0, true);
    beta.edge_vector(1, 0) = Vector::Ones(2);
    CHECK(sample_tau(beta, r, hp, a) == draw_inverse_gamma(b, 1.01, 1.01));

    // Scaling the active coefficients by c scales the rate increment by c^2.
    beta.edge_vector(1, 0) *= 3.0;
    CHECK(sample_tau(beta, r, hp, a) == draw_inverse_gamma(b, 1.01, 0.01 + 9.0));

    // IG(1.01, 1.01) has no finite variance; its precision 1/tau ~ Gamma(1.01, rate 1.01) does.
    beta.edge_vector(1, 0) = Vector::Ones(2);
    const int n = 50000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += 1.0 / sample_tau(beta, r, hp, a);
    const double sd = std::sqrt(1.01) / 1.01;
    CHECK(std::abs(sum / n - 1.0) < 4.0 * sd / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("S full conditional") {
    Hyperparameters hp;
    const int p = 3;
    Rng rng = make_rng(5);
    Matrix resid(4, p);
    resid << 1, 0.5, -0.2, 0.3, -1, 0.1, 2, 0.2, 0.4, -0.5, 0.3, 1.1;

    SUBCASE("no residuals draws from the prior") {
        Rng a = make_rng(9);
        Rng b = make_rng(9);
        const NoiseCovariance s = sample_S(Matrix(0, p), hp, a);
        CHECK(s.matrix() == draw_inverse_wishart(b, Matrix::Identity(p, p), 3.0));
    }
    SUBCASE("sufficient statistics add") {
        Matrix dup(8, p);
        dup << resid, resid;
        Rng a = make_rng(2);
        Rng b = make_rng(2);
        const Matrix m = resid.transpose() * resid;
        const NoiseCovariance s = sample_S(dup, hp, a);
        CHECK((s.matrix() - draw_inverse_wishart(b, Matrix::Identity(p, p) + 2.0 * m, 3.0 + 8.0)).norm() < 1e-12);
    }
    SUBCASE("large-n consistency") {
        Matrix s0{{1.0, 0.4, 0.0}, {0.4, 2.0, -0.3}, {0.0, -0.3, 0.5}};
        const Eigen::LLT<Matrix> llt(s0);
        const int n = 10000;
        Matrix e(n, p);
        for (int i = 0; i < n; ++i) e.row(i) = (llt.matrixL() * draw_standard_normal(rng, p)).transpose();
        Matrix mean = Matrix::Zero(p, p);
        for (int d = 0; d < 200; ++d) mean += sample_S(e, hp, rng).matrix();
        mean /= 200.0;
        CHECK((mean - s0).norm() / s0.norm() < 0.05);
    }
}

TEST_CASE("schedule arithmetic") {
    const Schedule s;
    CHECK(s.retained_count() == 200);
    int kept = 0;
    for (int i = 1; i <= s.total; ++i) kept += s.retains(i) ? 1 : 0;
    CHECK(kept == 200);
    CHECK_FALSE(s.retains(1000));
    CHECK(s.retains(1005));
    CHECK(s.retains(2000));
    CHECK_THROWS_AS((Schedule{100, 200, 5}.validate()), Error);
    CHECK_THROWS_AS((Schedule{100, 10, 0}.validate()), Error);
}

TEST_CASE("hyperparameter validation") {
    Hyperparameters hp;
    CHECK_NOTHROW(hp.validate(3));
    hp.a = 0.0;
    CHECK_THROWS_AS(hp.validate(3), Error);
    hp = Hyperparameters{};
    hp.dof = 1.0;
    CHECK_THROWS_AS(hp.validate(3), Error);
    hp = Hyperparameters{};
    hp.basis_count = 3;
    CHECK_THROWS_AS(hp.validate(3), Error);
}

TEST_CASE("birth with a constant likelihood accepts at the prior odds") {
    const Dataset d = small_dataset(3, 50, 1);
    for (double pi : {0.2, 0.5, 0.7}) {
        SamplerOptions opt;
        opt.target = TargetMode::prior_only;
        opt.birth_proposal = BirthProposal::prior;
        GibbsSampler s(d, Hyperparameters{}, opt, 17);
        SamplerState base = s.state();
        base.pi = pi;
        s.set_state(base);
        const int trials = 20000;
        int accepted = 0;
        for (int t = 0; t < trials; ++t) {
            if (s.update_edge(1, 0)) {
                ++accepted;
                s.set_state(base);
            }
        }
        const double want = std::min(1.0, pi / (1.0 - pi));
        const double se = std::sqrt(std::max(want * (1.0 - want), 1e-12) / trials);
        CHECK(std::abs(static_cast<double>(accepted) / trials - want) <= std::max(4.0 * se, 1e-12));
    }
}

TEST_CASE("flat target accepts every non-singular move") {
    const Dataset d = small_dataset(3, 80, 2);
    SamplerOptions opt;
    opt.target = TargetMode::flat;
    GibbsSampler s(d, Hyperparameters{}, opt, 3);
    for (int t = 0; t < 30; ++t) {
        for (int j = 0; j < 3; ++j)
            for (int l = 0; l < 3; ++l)
                if (j != l) {
                    s.update_edge(j, l);
                    if (s.state().r(j, l)) s.update_coefficients(j, l);
                }
        s.refresh();
    }
    const auto& diag = s.diagnostics();
    for (const MoveStats* m : {&diag.birth, &diag.death, &diag.coefficient}) {
        CHECK(m->proposed > 0);
        CHECK(m->accepted + m->singular_rejected == m->proposed);
    }
}

TEST_CASE("zero-step coefficient proposals are always accepted") {
    const Dataset d = small_dataset(3, 100, 4);
    GibbsSampler s(d, Hyperparameters{}, SamplerOptions{}, 8);
    SamplerState st = s.state();
    st.r.set(1, 0, true);
    st.beta.edge_vector(1, 0) = Vector::Constant(10, 0.2);
    s.set_state(st);
    s.set_step_scale(1, 0, 0.0);
    for (int t = 0; t < 50; ++t) CHECK(s.update_coefficients(1, 0));
    CHECK_THROWS_AS(s.update_coefficients(0, 1), Error);
}

TEST_CASE("singular proposals are rejected and counted") {
    const Dataset d = small_dataset(2, 60, 5);
    SamplerOptions opt;
    opt.target = TargetMode::flat;
    opt.birth_proposal = BirthProposal::prior;
    opt.singular_floor = 0.95;
    GibbsSampler s(d, Hyperparameters{}, opt, 6);
    SamplerState st = s.state();
    st.r.set(1, 0, true);
    st.beta.edge_vector(1, 0) = Vector::Constant(10, 1.0);
    st.tau = 4.0;
    s.set_state(st);
    int rejected_here = 0;
    for (int t = 0; t < 200; ++t) {
        const auto before = s.diagnostics().birth.singular_rejected;
        const bool ok = s.update_edge(0, 1);
        if (s.diagnostics().birth.singular_rejected > before) {
            ++rejected_here;
            CHECK_FALSE(ok);
            CHECK_FALSE(s.state().r(0, 1));
        }
        if (s.state().r(0, 1)) s.set_state(st);
    }
    CHECK(rejected_here > 0);
    CHECK(s.diagnostics().birth.singular_rejected == rejected_here);
}

TEST_CASE("acyclic mode never creates a cycle") {
    const Dataset d = small_dataset(4, 200, 6);
    SamplerOptions opt;
    opt.acyclic = true;
    opt.target = TargetMode::flat;
    GibbsSampler s(d, Hyperparameters{}, opt, 1);
    for (int t = 0; t < 40; ++t) {
        s.sweep(true);
        CHECK_FALSE(s.state().r.has_cycle());
    }
    CHECK(s.diagnostics().birth.structure_rejected > 0);
}

TEST_CASE("cached likelihood tracks a fresh evaluation") {
    const Dataset d = small_dataset(5, 300, 7);
    Schedule sch{60, 30, 3};
    const Chain c = run_chain(d, Hyperparameters{}, sch, 11);
    CHECK(c.diagnostics.max_cache_drift < 1e-6);
    CHECK(c.samples.size() == 10);
    const BasisSpec spec = c.basis();
    Dataset unit = d;
    for (Eigen::Index i = 0; i < unit.n(); ++i) unit.z[i] = c.scaling.forward(d.z[i]);
    for (const auto& smp : c.samples) {
        const double fresh = dataset_log_likelihood(unit, smp.state.beta, spec, smp.state.s).value();
        CHECK(smp.state.log_likelihood == doctest::Approx(fresh).epsilon(1e-9));
        CHECK(smp.state.r.edge_count() <= 20);
        for (int j = 0; j < 5; ++j)
            for (int l = 0; l < 5; ++l)
                if (!smp.state.r(j, l)) CHECK(smp.state.beta.edge_is_zero(j, l));
    }
}

TEST_CASE("chains are reproducible for a seed and any thread count") {
    const Dataset d = small_dataset(4, 600, 8);
    Schedule sch{40, 20, 2};
    set_thread_count(1);
    const Chain a = run_chain(d, Hyperparameters{}, sch, 99);
    set_thread_count(4);
    const Chain b = run_chain(d, Hyperparameters{}, sch, 99);
    set_thread_count(1);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i)
        CHECK(sample_to_json(a.samples[i]).dump() == sample_to_json(b.samples[i]).dump());
    const Chain c = run_chain(d, Hyperparameters{}, sch, 100);
    bool differs = false;
    for (std::size_t i = 0; i < a.samples.size(); ++i)
        differs = differs || sample_to_json(a.samples[i]).dump() != sample_to_json(c.samples[i]).dump();
    CHECK(differs);
}

TEST_CASE("annealing schedule") {
    Schedule sch;
    SamplerOptions opt;
    CHECK(annealing_temperature(1, sch, opt) == doctest::Approx(0.01));
    CHECK(annealing_temperature(500, sch, opt) == 1.0);
    CHECK(annealing_temperature(1500, sch, opt) == 1.0);
    double prev = 0.0;
    for (int i = 1; i <= 500; ++i) {
        const double t = annealing_temperature(i, sch, opt);
        CHECK(t >= prev);
        prev = t;
    }
    opt.anneal_sweeps = 0;
    CHECK(annealing_temperature(1, sch, opt) == 1.0);
}

TEST_CASE("summaries threshold strictly") {
    Chain chain;
    chain.p = 2;
    chain.hp = Hyperparameters{}.resolved(2);
    chain.hp.basis_count = 4;
    chain.scaling = CovariateScaling{-1.0, 1.0};
    chain.names = {"x1", "x2"};
    for (int i = 0; i < 4; ++i) {
        SamplerState st;
        st.r = EdgeIndicators(2);
        st.beta = SplineCoefficients(2, 4);
        st.s = NoiseCovariance::identity(2);
        st.r.set(1, 0, true);
        st.beta.edge_vector(1, 0) = Vector::Constant(4, 1.0 + 0.1 * i);
        if (i % 2 == 0) {
            st.r.set(0, 1, true);
            st.beta.edge_vector(0, 1) = Vector::Constant(4, 0.3);
        }
        chain.samples.push_back(ChainSample{i + 1, st});
    }
    const PosteriorSummary s = summarize(chain, 0.5);
    CHECK(s.ppi(1, 0) == 1.0);
    CHECK(s.ppi(0, 1) == 0.5);
    CHECK(s.ppi(0, 0) == 0.0);
    CHECK(s.estimate(1, 0));
    CHECK_FALSE(s.estimate(0, 1));
    REQUIRE(s.bands.size() == 1);
    CHECK(s.bands[0].from == 0);
    CHECK(s.bands[0].to == 1);
    CHECK(s.bands[0].covers_constant);
    CHECK(s.z_grid.size() == 50);
    CHECK(s.mean_s.isApprox(Matrix::Identity(2, 2)));
}

TEST_CASE("type-7 quantiles") {
    CHECK(sample_quantile({1.0, 2.0, 3.0, 4.0}, 0.5) == 2.5);
    CHECK(sample_quantile({4.0, 1.0, 3.0, 2.0}, 0.0) == 1.0);
    CHECK(sample_quantile({4.0, 1.0, 3.0, 2.0}, 1.0) == 4.0);
    CHECK(sample_quantile({0.0, 10.0}, 0.25) == 2.5);
}

TEST_CASE("forward bivariate fixture: edge recovered with a non-constant band") {
    const GroundTruth t = bivariate_truth(BivariateFixture::forward);
    const Dataset d = sample_data(t, 1000, NoiseLaw::gaussian, 2).observed;
    const Chain chain = run_chain(d, Hyperparameters{}, Schedule{}, 2);
    const PosteriorSummary s = summarize(chain, 0.5);
    CHECK(s.ppi(1, 0) > 0.5);
    CHECK(s.ppi(0, 1) < 0.5);
    REQUIRE(s.bands.size() == 1);
    CHECK_FALSE(s.bands[0].covers_constant);
    const double rate = chain.diagnostics.coefficient_after_burn.acceptance_rate();
    CHECK(rate >= 0.15);
    CHECK(rate <= 0.45);
}
