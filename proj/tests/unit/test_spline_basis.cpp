#include "doctest.h"

#include <random>

#include "support/oracles.hpp"
#include "vcsem/error.hpp"
#include "vcsem/spline_basis.hpp"

using namespace vcsem;

TEST_CASE("knot vector layout") {
    const BasisSpec ten = build_basis(10, 0.0, 1.0);
    REQUIRE(ten.knots().size() == 14);
    for (int i = 0; i < 4; ++i) {
        CHECK(ten.knots()[i] == 0.0);
        CHECK(ten.knots()[13 - i] == 1.0);
    }
    for (int i = 1; i <= 6; ++i) CHECK(ten.knots()[3 + i] == doctest::Approx(i / 7.0).epsilon(1e-15));

    const BasisSpec four = build_basis(4, 0.0, 1.0);
    REQUIRE(four.knots().size() == 8);
    for (double t : four.knots()) CHECK((t == 0.0 || t == 1.0));
}

TEST_CASE("too few basis functions or an empty domain is rejected") {
    CHECK_THROWS_AS(build_basis(3, 0.0, 1.0), Error);
    CHECK_THROWS_AS(build_basis(10, 1.0, 1.0), Error);
    CHECK_THROWS_AS(build_basis(10, 2.0, 1.0), Error);
    try {
        build_basis(3, 0.0, 1.0);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::invalid_argument);
    }
}

TEST_CASE("Bezier midpoint matches the recursion oracle") {
    const Eigen::VectorXd v = evaluate_basis(build_basis(4, 0.0, 1.0), 0.5);
    const Eigen::VectorXd expect = oracle::basis(4, 0.5);
    for (int i = 0; i < 4; ++i) CHECK(v[i] == doctest::Approx(expect[i]).epsilon(1e-14));
    CHECK(expect[0] == doctest::Approx(0.125));
    CHECK(expect[1] == doctest::Approx(0.375));
}

TEST_CASE("clamped ends are unit vectors") {
    const BasisSpec spec = build_basis(10, 0.0, 1.0);
    const Eigen::VectorXd left = spec.evaluate(0.0);
    const Eigen::VectorXd right = spec.evaluate(1.0);
    for (int i = 0; i < 10; ++i) {
        CHECK(left[i] == (i == 0 ? 1.0 : 0.0));
        CHECK(right[i] == (i == 9 ? 1.0 : 0.0));
    }
}

TEST_CASE("property: agreement with the recursion oracle for several K") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int k : {4, 5, 7, 10, 15}) {
        const BasisSpec spec = build_basis(k, 0.0, 1.0);
        for (int rep = 0; rep < 200; ++rep) {
            const double z = unit(rng);
            const Eigen::VectorXd got = spec.evaluate(z);
            const Eigen::VectorXd want = oracle::basis(k, z);
            CHECK((got - want).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("property: partition of unity, nonnegativity and local support") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const BasisSpec spec = build_basis(10, 0.0, 1.0);
    const auto& t = spec.knots();
    for (int rep = 0; rep < 1000; ++rep) {
        const double z = unit(rng);
        const Eigen::VectorXd v = spec.evaluate(z);
        CHECK(v.sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(v.minCoeff() >= 0.0);
        int nonzero = 0;
        for (int i = 0; i < 10; ++i) {
            if (v[i] != 0.0) {
                ++nonzero;
                CHECK(z >= t[i]);
                CHECK(z <= t[i + 4]);
            }
        }
        CHECK(nonzero <= 4);
    }
}

TEST_CASE("property: continuity across interior knots") {
    const BasisSpec spec = build_basis(10, 0.0, 1.0);
    for (int i = 4; i < 10; ++i) {
        const double knot = spec.knots()[i];
        const Eigen::VectorXd below = spec.evaluate(knot - 1e-9);
        const Eigen::VectorXd above = spec.evaluate(knot + 1e-9);
        CHECK((below - above).cwiseAbs().maxCoeff() < 1e-7);
    }
}

TEST_CASE("general domain maps affinely onto the unit basis") {
    const BasisSpec wide = build_basis(8, -1.0, 3.0);
    const BasisSpec unit = build_basis(8, 0.0, 1.0);
    for (double z : {-1.0, -0.3, 0.0, 1.7, 3.0}) {
        const Eigen::VectorXd a = wide.evaluate(z);
        const Eigen::VectorXd b = unit.evaluate((z + 1.0) / 4.0);
        CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("out-of-domain policy") {
    const BasisSpec spec = build_basis(6, 0.0, 1.0);
    CHECK((spec.evaluate(-0.5) - spec.evaluate(0.0)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((spec.evaluate(1.5) - spec.evaluate(1.0)).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(spec.evaluate(1.5, DomainPolicy::strict), Error);
    try {
        spec.evaluate(-0.1, DomainPolicy::strict);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::out_of_domain);
    }
}

TEST_CASE("design matrix rows match pointwise evaluation") {
    const BasisSpec spec = build_basis(10, 0.0, 1.0);
    const std::vector<double> z = {0.0, 0.13, 0.5, 0.99, 1.0};
    const Eigen::MatrixXd m = spec.design_matrix(z);
    REQUIRE(m.rows() == 5);
    REQUIRE(m.cols() == 10);
    for (int i = 0; i < 5; ++i) CHECK((m.row(i).transpose() - spec.evaluate(z[i])).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("covariate scaling round trip") {
    const std::vector<double> z = {-1.0, 0.2, 3.0};
    const CovariateScaling s = CovariateScaling::from_range(z);
    CHECK(s.forward(-1.0) == 0.0);
    CHECK(s.forward(3.0) == 1.0);
    CHECK(s.inverse(s.forward(0.2)) == doctest::Approx(0.2));
}
