#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <numbers>

#include "vcsem/error.hpp"
#include "vcsem/evaluate.hpp"
#include "vcsem/io.hpp"
#include "vcsem/simulate.hpp"

using namespace vcsem;

TEST_CASE("named effect curves") {
    CHECK(effect_f()(0.5) == doctest::Approx(0.4));
    CHECK(effect_g()(0.0) == doctest::Approx(0.9));
    CHECK(effect_h()(0.0) == 0.0);
    CHECK(effect_half_sine()(0.5) == doctest::Approx(0.5));
}

TEST_CASE("random graphs") {
    Rng rng = make_rng(1);
    CHECK(random_graph(6, 0.0, GraphMode::any, rng).edge_count() == 0);
    for (int rep = 0; rep < 200; ++rep) CHECK_FALSE(random_graph(8, 0.3, GraphMode::acyclic, rng).has_cycle());

    long edges = 0;
    const int draws = 10000;
    for (int rep = 0; rep < draws; ++rep) edges += random_graph(10, 0.1, GraphMode::any, rng).edge_count();
    CHECK(std::abs(static_cast<double>(edges) / (draws * 90.0) - 0.1) < 0.01);

    for (int rep = 0; rep < 20; ++rep) {
        const EdgeIndicators g = random_graph(6, 0.2, GraphMode::disjoint_cycles, rng);
        // Inside each strongly connected component every node has exactly one parent and one child.
        for (int a = 0; a < 6; ++a) {
            int in_parents = 0;
            int in_children = 0;
            bool cyclic = false;
            for (int b = 0; b < 6; ++b) {
                if (a == b || !(g.reaches(a, b) && g.reaches(b, a))) continue;
                cyclic = true;
                in_parents += g(a, b) ? 1 : 0;
                in_children += g(b, a) ? 1 : 0;
            }
            if (cyclic) {
                CHECK(in_parents == 1);
                CHECK(in_children == 1);
            }
        }
    }
    CHECK_THROWS_AS(random_graph(4, 1.5, GraphMode::any, rng), Error);
}

TEST_CASE("random noise covariances") {
    Rng rng = make_rng(2);
    CHECK(random_covariance(4, false, rng).matrix() == Matrix::Identity(4, 4));
    for (int rep = 0; rep < 1000; ++rep) {
        double shrink = 0.0;
        const NoiseCovariance s = random_covariance(10, true, rng, &shrink);
        Eigen::SelfAdjointEigenSolver<Matrix> eig(s.matrix());
        CHECK(eig.eigenvalues().minCoeff() > 0.0);
        CHECK(shrink > 0.0);
        CHECK(shrink <= 1.0);
    }
}

TEST_CASE("empty graph with identity noise reproduces identity covariance") {
    GroundTruth t;
    t.r = EdgeIndicators(3);
    t.effects.assign(9, std::nullopt);
    t.s = NoiseCovariance::identity(3);
    const SimulatedData d = sample_data(t, 10000, NoiseLaw::gaussian, 4);
    const Matrix centered = d.observed.x.rowwise() - d.observed.x.colwise().mean();
    const Matrix cov = centered.transpose() * centered / 9999.0;
    CHECK((cov - Matrix::Identity(3, 3)).norm() / std::sqrt(3.0) < 0.05);
}

TEST_CASE("bivariate forward fixture has the analytic conditional variance") {
    const GroundTruth t = bivariate_truth(BivariateFixture::forward);
    CHECK(t.r(1, 0));
    CHECK_FALSE(t.r(0, 1));
    CHECK(t.b_matrix(0.5)(1, 0) == doctest::Approx(0.5));
    const SimulatedData d = sample_data(t, 10000, NoiseLaw::gaussian, 3);
    std::vector<double> x2(d.observed.x.col(1).data(), d.observed.x.col(1).data() + 10000);
    std::vector<double> z(d.observed.z.data(), d.observed.z.data() + 10000);
    const std::vector<double> grid = {0.5};
    const VarianceCurve v = kernel_conditional_variance(x2, z, grid);
    CHECK(std::abs(v.estimate[0] - 1.75) / 1.75 < 0.1);
}

TEST_CASE("scenario simulation") {
    ScenarioConfig cfg;
    cfg.p = 10;
    cfg.n = 200;
    cfg.seed = 4;
    const Simulation a = simulate(cfg);
    const Simulation b = simulate(cfg);
    CHECK(a.data.observed.x == b.data.observed.x);
    CHECK(a.data.observed.z == b.data.observed.z);
    CHECK(a.data.observed.p() == 10);
    CHECK(a.data.observed.z.minCoeff() >= -1.0);
    CHECK(a.data.observed.z.maxCoeff() <= 1.0);

    cfg.scenario = Scenario::acyclic_confounded;
    CHECK_FALSE(simulate(cfg).truth.r.has_cycle());
    cfg.scenario = Scenario::cyclic_unconfounded;
    CHECK(simulate(cfg).truth.s.matrix() == Matrix::Identity(10, 10));

    CHECK(parse_scenario("1") == Scenario::cyclic_confounded);
    CHECK(parse_scenario("misspec1") == Scenario::misspec1);
    CHECK_FALSE(parse_scenario("9").has_value());
}

TEST_CASE("misspecification family") {
    const auto integral = [](const EffectFunction& f) {
        const int m = 20000;
        double s = 0.0;
        for (int i = 0; i < m; ++i) s += std::abs(f(-1.0 + (i + 0.5) * 2.0 / m));
        return s * 2.0 / m;
    };
    const auto spread = [](const EffectFunction& f) {
        const int m = 20000;
        double s = 0.0;
        double s2 = 0.0;
        for (int i = 0; i < m; ++i) {
            const double v = f(-1.0 + (i + 0.5) * 2.0 / m);
            s += v;
            s2 += v * v;
        }
        return s2 / m - (s / m) * (s / m);
    };
    const EffectFunction flat = misspec1_effect(0.0);
    CHECK(flat(-0.7) == doctest::Approx(flat(0.4)));
    CHECK(spread(flat) < 1e-12);
    double prev = -1.0;
    const double base = integral(flat);
    for (double c : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0}) {
        const EffectFunction f = misspec1_effect(c);
        CHECK(std::abs(integral(f) - base) < 1e-7);
        const double v = spread(f);
        CHECK(v >= prev);
        prev = v;
    }

    const GroundTruth t = misspec1_truth(1.0);
    CHECK(t.hidden == 1);
    CHECK(t.observed_indicators().p() == 3);
    const SimulatedData d = sample_data(t, 500, NoiseLaw::uniform, 2);
    CHECK(d.observed.p() == 3);
    CHECK(d.full.p() == 4);
}

TEST_CASE("simulated data round-trips through CSV") {
    ScenarioConfig cfg;
    cfg.p = 4;
    cfg.n = 50;
    const Simulation s = simulate(cfg);
    const auto path = std::filesystem::temp_directory_path() / "vcsem_sim_roundtrip.csv";
    write_dataset(path, s.data.observed);
    const Dataset back = read_dataset(path, "z");
    std::filesystem::remove(path);
    CHECK(back.x == s.data.observed.x);
    CHECK(back.z == s.data.observed.z);
    CHECK(back.names == s.data.observed.names);
}
