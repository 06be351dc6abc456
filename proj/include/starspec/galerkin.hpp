#pragma once

// Piecewise-constant Galerkin compression of the interaction operator,
// assembled by adaptive subdivision quadrature.  This is the deliberately
// slow cross-check route: it shares the geometry and the Bessel evaluator
// with the production path but none of its singularity handling -- singular
// entries are refined by plain interval/box bisection until the integral
// stabilizes, instead of the production log-split rules.

#include <Eigen/Dense>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "starspec/bessel.hpp"
#include "starspec/eigenpairs.hpp"
#include "starspec/geometry.hpp"
#include "starspec/parallel.hpp"
#include "starspec/quadrature.hpp"
#include "starspec/solver.hpp"

namespace starspec {

// Subdivision stops once one refinement changes a cell integral by less
// than this, relative to the whole entry.
inline constexpr double galerkin_cell_tolerance = 1e-9;

struct GalerkinMatrix {
    double kappa = 0.0;
    StarGraph graph;
    int num_cells = 0;        // cells per edge; cell width is edge_length / num_cells
    Eigen::MatrixXd entries;  // (N*C) x (N*C), symmetric
};

namespace galdetail {

struct WorkBudget {
    long remaining;
};

inline void spend(WorkBudget& budget) {
    if (--budget.remaining < 0)
        throw std::runtime_error("galerkin_assemble: adaptive budget exceeded");
}

template <typename F>
double gauss_line(F&& f, double a, double b) {
    const ReferenceRule& rule = legendre_rule(15);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return half * sum;
}

template <typename F>
double refine_line(F&& f, double a, double b, double coarse, double tol, WorkBudget& budget,
                   int depth) {
    spend(budget);
    const double mid = 0.5 * (a + b);
    const double left = gauss_line(f, a, mid);
    const double right = gauss_line(f, mid, b);
    const double fine = left + right;
    if (std::abs(fine - coarse) <= tol || depth >= 52) return fine;
    return refine_line(f, a, mid, left, 0.5 * tol, budget, depth + 1) +
           refine_line(f, mid, b, right, 0.5 * tol, budget, depth + 1);
}

template <typename F>
double adaptive_line(F&& f, double a, double b, double tol, WorkBudget& budget) {
    return refine_line(f, a, b, gauss_line(f, a, b), tol, budget, 0);
}

// Unequal tensor orders keep the nodes off the s == t line on every box.
template <typename F>
double gauss_box(F&& f, double x0, double x1, double y0, double y1) {
    const ReferenceRule& rx = legendre_rule(8);
    const ReferenceRule& ry = legendre_rule(9);
    const double mx = 0.5 * (x0 + x1), hx = 0.5 * (x1 - x0);
    const double my = 0.5 * (y0 + y1), hy = 0.5 * (y1 - y0);
    double sum = 0.0;
    for (std::size_t i = 0; i < rx.nodes.size(); ++i) {
        const double x = mx + hx * rx.nodes[i];
        double row = 0.0;
        for (std::size_t j = 0; j < ry.nodes.size(); ++j)
            row += ry.weights[j] * f(x, my + hy * ry.nodes[j]);
        sum += rx.weights[i] * row;
    }
    return hx * hy * sum;
}

template <typename F>
double refine_box(F&& f, double x0, double x1, double y0, double y1, double coarse, double tol,
                  WorkBudget& budget, int depth) {
    spend(budget);
    const double mx = 0.5 * (x0 + x1), my = 0.5 * (y0 + y1);
    const double q00 = gauss_box(f, x0, mx, y0, my);
    const double q01 = gauss_box(f, x0, mx, my, y1);
    const double q10 = gauss_box(f, mx, x1, y0, my);
    const double q11 = gauss_box(f, mx, x1, my, y1);
    const double fine = q00 + q01 + q10 + q11;
    if (std::abs(fine - coarse) <= tol || depth >= 48) return fine;
    const double child_tol = 0.5 * tol;
    return refine_box(f, x0, mx, y0, my, q00, child_tol, budget, depth + 1) +
           refine_box(f, x0, mx, my, y1, q01, child_tol, budget, depth + 1) +
           refine_box(f, mx, x1, y0, my, q10, child_tol, budget, depth + 1) +
           refine_box(f, mx, x1, my, y1, q11, child_tol, budget, depth + 1);
}

template <typename F>
double adaptive_box(F&& f, double x0, double x1, double y0, double y1, double tol,
                    WorkBudget& budget) {
    return refine_box(f, x0, x1, y0, y1, gauss_box(f, x0, x1, y0, y1), tol, budget, 0);
}

// Integral of K0(kappa*|s-t|) over cell_i x cell_j of one straight edge.
// Fubini in w = s - t turns it into a single integral of the kernel against
// the overlap length of the shifted cells, a tent of height h centred at
// the cell offset; the kernel's log singularity at w = 0 can then only sit
// at an interval endpoint, where bisection clusters geometrically.
inline double same_edge_integral(double kappa, double h, int ci, int cj, WorkBudget& budget) {
    const double offset = h * std::abs(ci - cj);
    auto f = [&](double w) {
        return bessel_k0(kappa * std::abs(w)) * (h - std::abs(w - offset));
    };
    double rough;
    if (ci == cj)
        rough = 2.0 * gauss_line(f, 0.0, h);
    else
        rough = gauss_line(f, offset - h, offset + h);
    const double tol = galerkin_cell_tolerance * std::max(std::abs(rough), 1e-30);
    if (ci == cj) return 2.0 * adaptive_line(f, 0.0, h, 0.5 * tol, budget);
    return adaptive_line(f, offset - h, offset + h, tol, budget);
}

// Integral of K0(kappa*dist) over cell_i of edge n x cell_j of edge m,
// n != m.  The distance vanishes only at the common vertex (a box corner),
// which quadtree refinement isolates at geometric cost.
inline double cross_edge_integral(const StarGraph& g, double kappa, int n, int m, double h,
                                  int ci, int cj, WorkBudget& budget) {
    // The integrand is symmetric in (s, t) while the tensor rule is not;
    // ordering the cells makes congruent entries bitwise equal.
    if (cj < ci) std::swap(ci, cj);
    const double chord = chord_sq(g, n, m);
    auto f = [&](double s, double t) {
        const double diff = s - t;
        return bessel_k0(kappa * std::sqrt(diff * diff + s * t * chord));
    };
    const double s0 = h * ci, t0 = h * cj;
    const double rough = gauss_box(f, s0, s0 + h, t0, t0 + h);
    const double tol = galerkin_cell_tolerance * std::max(std::abs(rough), 1e-30);
    return adaptive_box(f, s0, s0 + h, t0, t0 + h, tol, budget);
}

}  // namespace galdetail

// Assemble the Galerkin matrix: entry (i, j) is the operator compressed
// onto unit-normalized indicators of uniform cells of width h, i.e.
// (1 / (2*pi*h)) times the kernel integral over cell_i x cell_j.
inline GalerkinMatrix galerkin_assemble(const StarGraph& g, double kappa, int num_cells,
                                        long pair_budget = 200000, int threads = 1) {
    if (!(kappa > 0.0) || !std::isfinite(kappa))
        throw std::invalid_argument("galerkin_assemble: kappa must be positive and finite");
    if (num_cells < 2) throw std::invalid_argument("galerkin_assemble: need at least two cells");
    if (pair_budget < 1) throw std::invalid_argument("galerkin_assemble: empty budget");

    const int C = num_cells;
    const int size = g.num_edges * C;
    const double h = g.edge_length / C;

    GalerkinMatrix result;
    result.kappa = kappa;
    result.graph = g;
    result.num_cells = C;
    result.entries.resize(size, size);

    const int num_pairs = size * (size + 1) / 2;
    std::atomic<bool> failed{false};
    std::mutex error_mutex;
    std::string error_message;

    parallel_for(num_pairs, resolve_threads(threads), [&](int pair) {
        if (failed.load(std::memory_order_relaxed)) return;
        // Unrank the upper-triangle pair index: row r, column c >= r.
        int r = 0;
        int remaining = pair;
        while (remaining >= size - r) {
            remaining -= size - r;
            ++r;
        }
        const int c = r + remaining;
        const int en = r / C, ci = r % C;
        const int em = c / C, cj = c % C;
        try {
            galdetail::WorkBudget budget{pair_budget};
            const double integral =
                en == em ? galdetail::same_edge_integral(kappa, h, ci, cj, budget)
                         : galdetail::cross_edge_integral(g, kappa, en, em, h, ci, cj, budget);
            const double entry = integral / (two_pi * h);
            result.entries(r, c) = entry;
            result.entries(c, r) = entry;
        } catch (const std::exception& ex) {
            failed.store(true, std::memory_order_relaxed);
            std::lock_guard<std::mutex> lock(error_mutex);
            if (error_message.empty()) error_message = ex.what();
        }
    });

    if (failed.load()) throw std::runtime_error(error_message);
    return result;
}

// Single straight edge of length L, C uniform cells: the same-edge entry
// machinery without any graph plumbing.  Used to self-test the oracle.
inline Eigen::MatrixXd galerkin_assemble_segment(double length, double kappa, int num_cells,
                                                 long pair_budget = 200000) {
    if (!(length > 0.0) || !(kappa > 0.0))
        throw std::invalid_argument("galerkin_assemble_segment: need positive length and kappa");
    if (num_cells < 2)
        throw std::invalid_argument("galerkin_assemble_segment: need at least two cells");
    const int C = num_cells;
    const double h = length / C;
    Eigen::MatrixXd m(C, C);
    for (int i = 0; i < C; ++i)
        for (int j = i; j < C; ++j) {
            galdetail::WorkBudget budget{pair_budget};
            const double entry =
                galdetail::same_edge_integral(kappa, h, i, j, budget) / (two_pi * h);
            m(i, j) = entry;
            m(j, i) = entry;
        }
    return m;
}

// Coupling times the top Galerkin eigenvalue: the oracle's analogue of the
// production bs_value.
inline double galerkin_bs_value(const StarGraph& g, double alpha, double kappa, int num_cells,
                                long pair_budget = 200000, int threads = 1) {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw std::invalid_argument("galerkin_bs_value: alpha must be positive and finite");
    return alpha * top_eigenpair(galerkin_assemble(g, kappa, num_cells, pair_budget, threads)
                                     .entries)
                       .value;
}

// Ground energy through the Galerkin route alone: root of
// alpha * mu_max(kappa) = 1 by bracket expansion plus Brent.
inline double galerkin_lambda1(const StarGraph& g, double alpha, int num_cells,
                               double kappa_guess = 1.0, long pair_budget = 200000,
                               int threads = 1) {
    auto f = [&](double kappa) {
        return galerkin_bs_value(g, alpha, kappa, num_cells, pair_budget, threads) - 1.0;
    };
    // Bracket the root around the guess with multiplicative steps whose
    // log-width doubles each time: tight when warm-started from the
    // production solve, still covering many decades when cold.
    const double guess = kappa_guess > 0.0 ? kappa_guess : 1.0;
    const double f_guess = f(guess);
    if (f_guess == 0.0) return -guess * guess;
    double lo = guess, hi = guess, f_lo = f_guess, f_hi = f_guess;
    double step = 0.995;
    int steps = 0;
    if (f_guess > 0.0) {
        do {
            if (++steps > 60)
                throw std::runtime_error("galerkin_lambda1: no eigenvalue found (upper bracket)");
            lo = hi;
            f_lo = f_hi;
            hi /= step;
            step *= step;
            f_hi = f(hi);
        } while (f_hi >= 0.0);
    } else {
        do {
            if (++steps > 60)
                throw std::runtime_error("galerkin_lambda1: no eigenvalue found (lower bracket)");
            hi = lo;
            f_hi = f_lo;
            lo *= step;
            step *= step;
            f_lo = f(lo);
        } while (f_lo <= 0.0);
    }
    const double kappa_star = detail::brent_root(f, lo, hi, f_lo, f_hi, 1e-10);
    return -kappa_star * kappa_star;
}

struct CrossValidation {
    double alpha = 0.0;
    int num_cells = 0;
    double lambda_nystrom = 0.0;
    double lambda_galerkin = 0.0;
    double discrepancy = 0.0;  // |lambda_n - lambda_g| / |lambda_n|
    bool flagged = false;      // discrepancy > 1e-4
};

// Solve the same ground-state problem through both discretizations and
// report their relative disagreement.
inline CrossValidation cross_validate(const StarGraph& g, double alpha,
                                      const QuadratureRule& nystrom_rule, int num_cells,
                                      long pair_budget = 200000, int threads = 1) {
    CrossValidation report;
    report.alpha = alpha;
    report.num_cells = num_cells;

    SolverOptions opts;
    opts.threads = threads;
    const SpectralResult nystrom = lowest_eigenvalue(g, alpha, nystrom_rule, opts);
    report.lambda_nystrom = nystrom.lambda1;
    report.lambda_galerkin =
        galerkin_lambda1(g, alpha, num_cells, nystrom.kappa_star, pair_budget, threads);
    report.discrepancy = std::abs(report.lambda_nystrom - report.lambda_galerkin) /
                         std::abs(report.lambda_nystrom);
    report.flagged = report.discrepancy > 1e-4;
    return report;
}

}  // namespace starspec
