#include "starspec/eigenpairs.hpp"

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "catch2/catch_amalgamated.hpp"
#include "oracles.hpp"

using namespace starspec;

namespace {

Eigen::MatrixXd random_symmetric(std::mt19937_64& gen, int n) {
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = uni(gen);
    return 0.5 * (a + a.transpose()).eval();
}

}  // namespace

TEST_CASE("scalar matrix returns its entry with a unit vector") {
    Eigen::MatrixXd a(1, 1);
    a(0, 0) = -3.75;
    const TopEigenpair p = top_eigenpair(a);
    CHECK(p.value == -3.75);
    REQUIRE(p.vector.size() == 1);
    CHECK(p.vector[0] == 1.0);
    CHECK(p.residual == 0.0);
}

TEST_CASE("diagonal matrix picks out the largest entry") {
    const int n = 12;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) a(i, i) = 1.0 + i;
    const TopEigenpair p = top_eigenpair(a);
    CHECK(p.value == Catch::Approx(12.0).epsilon(1e-13));
    CHECK(std::abs(p.vector[n - 1]) == Catch::Approx(1.0).epsilon(1e-10));
    CHECK((a * p.vector - p.value * p.vector).norm() <= 1e-11 * 12.0);
    CHECK(p.vector.norm() == Catch::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("identity shift moves the top eigenvalue by the shift") {
    std::mt19937_64 gen(60123u);
    const Eigen::MatrixXd a = random_symmetric(gen, 40);
    const double c = 2.75;
    const Eigen::MatrixXd b =
        a + c * Eigen::MatrixXd::Identity(a.rows(), a.cols());

    const TopEigenpair pa = top_eigenpair(a);
    const TopEigenpair pb = top_eigenpair(b);
    CHECK(pb.value - pa.value ==
          Catch::Approx(c).epsilon(1e-12));
    CHECK(std::abs(pa.vector.dot(pb.vector)) == Catch::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("random symmetric matrices match a dense decomposition oracle") {
    std::mt19937_64 gen(314159u);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::MatrixXd a = random_symmetric(gen, 50);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
        const int n = static_cast<int>(a.rows());
        const double want = es.eigenvalues()(n - 1);
        const double norm2 =
            std::max(std::abs(es.eigenvalues()(0)), std::abs(want));
        const double gap = want - es.eigenvalues()(n - 2);

        const TopEigenpair p = top_eigenpair(a);
        INFO("trial " << trial << " value " << p.value << " want " << want
                      << " iterations " << p.iterations);
        CHECK(std::abs(p.value - want) <= 1e-11 * norm2);
        CHECK((a * p.vector - p.value * p.vector).norm() <= 1e-11 * norm2);
        CHECK(p.vector.norm() == Catch::Approx(1.0).epsilon(1e-12));
        if (gap > 1e-3 * norm2) {
            const double align = std::abs(p.vector.dot(es.eigenvectors().col(n - 1)));
            CHECK(align >= 1.0 - 1e-9);
        }
    }
}

TEST_CASE("assembled kernel matrices satisfy the residual contract") {
    const QuadratureRule rule = build_rule(1.0, 6, 6, 2);
    const StarGraph g3 = symmetric_graph(3, 1.0);
    const StarGraph bent = make_star_graph(3, 1.0, {0.7, 2.9, two_pi - 3.6});
    for (const StarGraph* g : {&g3, &bent}) {
        const KernelMatrix km = assemble(*g, 1.0, rule);
        const TopEigenpair p = top_eigenpair(km);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(km.entries,
                                                          Eigen::EigenvaluesOnly);
        const double want = es.eigenvalues().maxCoeff();
        INFO("N = " << g->num_edges << " iterations " << p.iterations);
        CHECK(p.value == Catch::Approx(want).epsilon(1e-12));
        CHECK((km.entries * p.vector - p.value * p.vector).norm() <= 1e-11 * p.value);
    }
}

TEST_CASE("rank-one and zero matrices converge through subspace restarts") {
    const int n = 10;
    std::mt19937_64 gen(9000u);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Eigen::VectorXd u(n);
    for (int i = 0; i < n; ++i) u[i] = uni(gen);
    const Eigen::MatrixXd a = u * u.transpose();

    const TopEigenpair p = top_eigenpair(a);
    CHECK(p.value == Catch::Approx(u.squaredNorm()).epsilon(1e-12));
    CHECK(std::abs(p.vector.dot(u.normalized())) == Catch::Approx(1.0).epsilon(1e-12));

    const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(6, 6);
    const TopEigenpair pz = top_eigenpair(zero);
    CHECK(pz.value == 0.0);
    CHECK(pz.residual == 0.0);
    CHECK(pz.vector.norm() == Catch::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("exactly degenerate top pair still meets the residual bound") {
    const int n = 9;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    a(0, 0) = 5.0;
    a(1, 1) = 5.0;
    for (int i = 2; i < n; ++i) a(i, i) = 1.0 - 0.1 * i;
    const TopEigenpair p = top_eigenpair(a);
    CHECK(p.value == Catch::Approx(5.0).epsilon(1e-12));
    CHECK((a * p.vector - p.value * p.vector).norm() <= 1e-11 * 5.0);
    // The eigenvector must live in the degenerate coordinate plane.
    CHECK(p.vector.tail(n - 2).norm() <= 1e-9);
}

TEST_CASE("repeated solves are bitwise deterministic") {
    std::mt19937_64 gen(222u);
    const Eigen::MatrixXd a = random_symmetric(gen, 30);
    const TopEigenpair p1 = top_eigenpair(a);
    const TopEigenpair p2 = top_eigenpair(a);
    CHECK(p1.value == p2.value);
    CHECK(p1.iterations == p2.iterations);
    CHECK((p1.vector - p2.vector).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("solver validates input and reports non-convergence") {
    Eigen::MatrixXd rect(2, 3);
    rect.setZero();
    CHECK_THROWS_AS(top_eigenpair(rect), std::invalid_argument);

    Eigen::MatrixXd asym(3, 3);
    asym.setZero();
    asym(0, 1) = 1.0;  // transpose entry missing
    CHECK_THROWS_AS(top_eigenpair(asym), std::invalid_argument);

    Eigen::MatrixXd empty(0, 0);
    CHECK_THROWS_AS(top_eigenpair(empty), std::invalid_argument);

    std::mt19937_64 gen(5u);
    const Eigen::MatrixXd a = random_symmetric(gen, 30);
    EigenOptions tight;
    tight.max_iterations = 2;
    CHECK_THROWS_WITH(top_eigenpair(a, tight),
                      Catch::Matchers::ContainsSubstring("no convergence"));

    EigenOptions bad;
    bad.tolerance = 0.0;
    CHECK_THROWS_AS(top_eigenpair(a, bad), std::invalid_argument);
}
