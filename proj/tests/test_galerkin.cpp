#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Eigenvalues>

#include <cmath>

#include "starspec/galerkin.hpp"

using namespace starspec;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

TEST_CASE("single-edge eigenvalues form a Cauchy refinement sequence") {
    const double kappa = 1.0;
    double mu_prev = 0.0, diff_prev = 0.0;
    bool first = true;
    for (int C : {2, 4, 8, 16}) {
        const double mu = top_eigenpair(galerkin_assemble_segment(1.0, kappa, C)).value;
        CHECK(mu > 0.0);
        if (!first) {
            const double diff = std::abs(mu - mu_prev);
            if (diff_prev != 0.0) CHECK(diff < diff_prev);
            diff_prev = diff;
        }
        mu_prev = mu;
        first = false;
    }
    CHECK(diff_prev < 5e-4);
}

TEST_CASE("a straight two-edge star matches the equivalent single segment") {
    // Two edges of length 1 at angles (pi, pi) cover the same segment as a
    // single edge of length 2; with aligned cells the compressed operators
    // coincide, though one route exercises only the convolution reduction
    // and the other also the two-dimensional boxes.
    const double kappa = 0.8;
    const StarGraph star = make_star_graph(2, 1.0, {two_pi / 2, two_pi / 2});
    const double mu_star = top_eigenpair(galerkin_assemble(star, kappa, 4).entries).value;
    const double mu_segment = top_eigenpair(galerkin_assemble_segment(2.0, kappa, 8)).value;
    CHECK(mu_star == Approx(mu_segment).margin(1e-7));
}

TEST_CASE("assembled matrices are exactly symmetric and block-circulant when the graph is") {
    const StarGraph g = symmetric_graph(3, 1.0);
    const int C = 8;
    const GalerkinMatrix m = galerkin_assemble(g, 2.0, C);
    REQUIRE(m.entries.rows() == 3 * C);
    REQUIRE(m.num_cells == C);
    REQUIRE(m.kappa == 2.0);

    for (int i = 0; i < 3 * C; ++i)
        for (int j = 0; j < 3 * C; ++j) REQUIRE(m.entries(i, j) == m.entries(j, i));

    for (int i = 0; i < C; ++i)
        for (int j = 0; j < C; ++j) {
            REQUIRE(m.entries(i, j) == m.entries(C + i, C + j));
            REQUIRE(m.entries(i, j) == m.entries(2 * C + i, 2 * C + j));
            REQUIRE(m.entries(i, C + j) == m.entries(C + i, 2 * C + j));
            REQUIRE(m.entries(i, C + j) == m.entries(2 * C + i, j));
        }
}

TEST_CASE("the compressed operator is positive semidefinite") {
    const StarGraph bent = make_star_graph(3, 1.0, {0.7, 2.9, two_pi - 3.6});
    const GalerkinMatrix m = galerkin_assemble(bent, 1.3, 10);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.entries, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
}

TEST_CASE("thread count does not change the entries") {
    const StarGraph g = make_star_graph(3, 1.0, {1.0, 2.4, two_pi - 3.4});
    const GalerkinMatrix serial = galerkin_assemble(g, 2.0, 6, 200000, 1);
    const GalerkinMatrix parallel = galerkin_assemble(g, 2.0, 6, 200000, 4);
    REQUIRE((serial.entries - parallel.entries).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("galerkin coupling value decreases with kappa") {
    const StarGraph g = symmetric_graph(3, 1.0);
    const double v1 = galerkin_bs_value(g, 5.0, 1.0, 8);
    const double v2 = galerkin_bs_value(g, 5.0, 2.0, 8);
    const double v3 = galerkin_bs_value(g, 5.0, 4.0, 8);
    CHECK(v1 > v2);
    CHECK(v2 > v3);
    CHECK(v3 > 0.0);
}

TEST_CASE("compression from below: galerkin eigenvalue never exceeds the resolved one") {
    const StarGraph g = symmetric_graph(3, 1.0);
    const double kappa = 2.834372871871667;
    const QuadratureRule rule = build_rule_graded_both_ends(1.0, 8, 6);
    const double mu_resolved = bs_value(g, 5.0, kappa, rule) / 5.0;
    const double mu_16 = top_eigenpair(galerkin_assemble(g, kappa, 16).entries).value;
    const double mu_32 = top_eigenpair(galerkin_assemble(g, kappa, 32).entries).value;
    CHECK(mu_16 < mu_32);
    CHECK(mu_32 <= mu_resolved + 1e-4);
    CHECK(mu_32 == Approx(mu_resolved).epsilon(5e-4));
}

TEST_CASE("cross-validation of the symmetric triple stays inside the flag threshold") {
    const StarGraph g = symmetric_graph(3, 1.0);
    const QuadratureRule rule = build_rule_graded_both_ends(1.0, 8, 6);
    const CrossValidation rep = cross_validate(g, 5.0, rule, 96);
    CHECK(rep.lambda_nystrom == Approx(-8.0336694395781674).margin(1e-8));
    CHECK(rep.lambda_galerkin == Approx(rep.lambda_nystrom).margin(1e-3));
    CHECK(rep.discrepancy < 1e-4);
    CHECK_FALSE(rep.flagged);
    CHECK(rep.num_cells == 96);
    CHECK(rep.alpha == 5.0);
}

TEST_CASE("both discretizations respect the coupling-length scaling law") {
    const StarGraph g1 = make_star_graph(3, 1.0, {1.1, 2.3, two_pi - 3.4});
    const StarGraph g2 = make_star_graph(3, 2.0, {1.1, 2.3, two_pi - 3.4});
    const QuadratureRule r1 = build_rule_graded_both_ends(1.0, 8, 6);
    const QuadratureRule r2 = build_rule_graded_both_ends(2.0, 8, 6);

    const double n1 = lowest_eigenvalue(g1, 5.0, r1).lambda1;
    const double n2 = lowest_eigenvalue(g2, 2.5, r2).lambda1;
    CHECK(std::abs(n1 - 4.0 * n2) <= 1e-6 * std::abs(n1));

    const double g1v = galerkin_lambda1(g1, 5.0, 24, 2.8);
    const double g2v = galerkin_lambda1(g2, 2.5, 24, 1.4);
    CHECK(std::abs(g1v - 4.0 * g2v) <= 1e-6 * std::abs(g1v));
}

TEST_CASE("a long straight segment approaches the line threshold on both routes") {
    const StarGraph g = make_star_graph(2, 10.0, {two_pi / 2, two_pi / 2});
    const QuadratureRule rule = build_rule_graded_both_ends(10.0, 8, 6);
    const CrossValidation rep = cross_validate(g, 2.0, rule, 32);
    CHECK(std::abs(rep.lambda_nystrom + 1.0) <= 0.1);
    CHECK(std::abs(rep.lambda_galerkin + 1.0) <= 0.1);
    CHECK(rep.discrepancy < 1e-3);
}

TEST_CASE("cold-started galerkin root finding agrees with the warm start") {
    const StarGraph g = symmetric_graph(3, 1.0);
    const double cold = galerkin_lambda1(g, 5.0, 8);
    const double warm = galerkin_lambda1(g, 5.0, 8, 2.8);
    CHECK(cold == Approx(warm).epsilon(1e-9));
}

TEST_CASE("oracle assembly rejects bad arguments and exhausted budgets") {
    const StarGraph g = symmetric_graph(3, 1.0);
    CHECK_THROWS_AS(galerkin_assemble(g, 2.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(galerkin_assemble(g, 0.0, 8), std::invalid_argument);
    CHECK_THROWS_AS(galerkin_assemble(g, 2.0, 8, 0), std::invalid_argument);
    CHECK_THROWS_WITH(galerkin_assemble(g, 2.0, 8, 40), ContainsSubstring("budget"));
    CHECK_THROWS_AS(galerkin_assemble_segment(1.0, 2.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(galerkin_assemble_segment(-1.0, 2.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(galerkin_bs_value(g, -5.0, 2.0, 8), std::invalid_argument);
}
