#pragma once

// Ground-state solver.  The lowest eigenvalue of the planar Schrodinger
// operator with an attractive contact interaction on a star graph is
// lambda1 = -kappa*^2, where kappa* is the unique positive solution of
//   alpha * (top eigenvalue of the assembled kernel matrix at kappa) = 1.
// The left side is strictly decreasing in kappa (entries decrease pointwise
// and the matrix is positive), so a halving/doubling bracket plus Brent's
// method pins the root; the ground eigenfunction is read off the top
// eigenvector at the root.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "starspec/eigenpairs.hpp"
#include "starspec/kernel.hpp"

namespace starspec {

struct MeshInfo {
    double edge_length = 0.0;
    int num_panels = 0;
    int local_order = 0;
    int points_per_edge = 0;
};

inline MeshInfo describe_mesh(const QuadratureRule& rule) {
    return {rule.edge_length, rule.num_panels, rule.local_order, rule.points_per_edge()};
}

struct SolverOptions {
    double kappa_guess = 1.0;        // bracket expansion seed
    int max_bracket_steps = 60;      // halvings/doublings before giving up
    double kappa_tolerance = 1e-12;  // Brent tolerance, times max(1, kappa)
    double residual_limit = 1e-10;   // accepted |alpha * mu(kappa*) - 1|
    int panels = 8;                  // default mesh (both-end graded rule)
    int order = 6;
    int threads = 1;                 // assembly threads
    EigenOptions eigen;              // inner eigensolver settings
};

struct SpectralResult {
    double alpha = 0.0;
    double kappa_star = 0.0;
    double lambda1 = 0.0;            // -kappa_star^2
    Eigen::VectorXd psi_star;        // trace samples, weighted L2 norm 1
    double bs_residual = 0.0;        // |alpha * mu(kappa_star) - 1|
    double kappa_lo = 0.0;           // final root bracket
    double kappa_hi = 0.0;
    MeshInfo mesh;
};

// Default solve mesh: panels graded toward both edge ends, where the
// eigenfunctions have u*ln(u) profiles.
inline QuadratureRule solver_rule(double edge_length, const SolverOptions& opts = {}) {
    return build_rule_graded_both_ends(edge_length, opts.panels, opts.order);
}

// alpha times the top eigenvalue of the kernel matrix; strictly decreasing
// in kappa, and the bound-state condition reads bs_value = 1.
inline double bs_value(const StarGraph& g, double alpha, double kappa,
                       const QuadratureRule& rule, const SolverOptions& opts = {}) {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw std::invalid_argument("bs_value: alpha must be positive and finite");
    const KernelMatrix km = assemble(g, kappa, rule, opts.threads);
    return alpha * top_eigenpair(km, opts.eigen).value;
}

namespace detail {

// Classic Brent root bracketing refinement; f must change sign on [a, b].
template <typename F>
inline double brent_root(F&& f, double a, double b, double fa, double fb,
                         double tol_scale) {
    if (fa * fb > 0.0) throw std::logic_error("brent_root: endpoints do not bracket");
    double c = a, fc = fa;
    double d = b - a, e = d;
    for (int iter = 0; iter < 200; ++iter) {
        if (std::abs(fc) < std::abs(fb)) {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        const double tol1 =
            2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) +
            0.5 * tol_scale * std::max(1.0, std::abs(b));
        const double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1 || fb == 0.0) return b;
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            const double s = fb / fa;
            double p, q;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                const double qq = fa / fc;
                const double r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += std::abs(d) > tol1 ? d : std::copysign(tol1, xm);
        fb = f(b);
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
    }
    throw std::runtime_error("brent_root: iteration limit reached");
}

}  // namespace detail

inline SpectralResult lowest_eigenvalue(const StarGraph& g, double alpha,
                                        const QuadratureRule& rule,
                                        const SolverOptions& opts = {}) {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw std::invalid_argument("lowest_eigenvalue: alpha must be positive and finite");
    if (!(opts.kappa_guess > 0.0))
        throw std::invalid_argument("lowest_eigenvalue: kappa_guess must be positive");

    auto f = [&](double kappa) { return bs_value(g, alpha, kappa, rule, opts) - 1.0; };

    // Bracket: halve kappa_lo until the value exceeds one (always succeeds
    // eventually: the kernel grows logarithmically as kappa -> 0), double
    // kappa_hi until it drops below one (kernel decay).
    double lo = opts.kappa_guess, hi = opts.kappa_guess;
    double f_lo = f(lo), f_hi = f_lo;
    int steps = 0;
    while (f_lo <= 0.0) {
        if (++steps > opts.max_bracket_steps)
            throw std::runtime_error(
                "lowest_eigenvalue: no eigenvalue found (bracket expansion exhausted "
                "below; the mesh may be inadequate)");
        lo *= 0.5;
        f_lo = f(lo);
    }
    steps = 0;
    while (f_hi >= 0.0) {
        if (++steps > opts.max_bracket_steps)
            throw std::runtime_error(
                "lowest_eigenvalue: no eigenvalue found (bracket expansion exhausted "
                "above; the mesh may be inadequate)");
        hi *= 2.0;
        f_hi = f(hi);
    }
    // lo carries f > 0 and hi carries f < 0; they may have moved apart by
    // several octaves, which is fine for Brent.
    const double kappa_star =
        detail::brent_root(f, lo, hi, f_lo, f_hi, opts.kappa_tolerance);

    const KernelMatrix km = assemble(g, kappa_star, rule, opts.threads);
    const TopEigenpair top = top_eigenpair(km, opts.eigen);
    const double residual = std::abs(alpha * top.value - 1.0);
    if (residual > opts.residual_limit) {
        std::ostringstream msg;
        msg << "lowest_eigenvalue: root residual " << residual << " exceeds "
            << opts.residual_limit;
        throw std::runtime_error(msg.str());
    }

    // Trace samples: undo the weight symmetrization, so the weighted L2
    // normalization is inherited exactly from the unit eigenvector.
    const int points = rule.points_per_edge();
    Eigen::VectorXd psi = top.vector;
    for (int i = 0; i < psi.size(); ++i)
        psi[i] /= std::sqrt(rule.weights[static_cast<std::size_t>(i % points)]);

    double weighted_mean = 0.0;
    for (int i = 0; i < psi.size(); ++i)
        weighted_mean += rule.weights[static_cast<std::size_t>(i % points)] * psi[i];
    if (weighted_mean < 0.0) psi = -psi;
    const double min_entry = psi.minCoeff();
    if (min_entry < -1e-12) {
        std::ostringstream msg;
        msg << "lowest_eigenvalue: ground eigenfunction lost positivity (min entry "
            << min_entry << "); refine the mesh";
        throw std::runtime_error(msg.str());
    }

    SpectralResult out;
    out.alpha = alpha;
    out.kappa_star = kappa_star;
    out.lambda1 = -(kappa_star * kappa_star);
    out.psi_star = psi;
    out.bs_residual = residual;
    out.kappa_lo = lo;
    out.kappa_hi = hi;
    out.mesh = describe_mesh(rule);
    return out;
}

inline SpectralResult lowest_eigenvalue(const StarGraph& g, double alpha,
                                        const SolverOptions& opts = {}) {
    return lowest_eigenvalue(g, alpha, solver_rule(g.edge_length, opts), opts);
}

struct EigenfunctionReport {
    double min_entry = 0.0;       // positivity margin of psi_star
    double edge_deviation = 0.0;  // max relative cross-edge deviation at equal arclength
};

inline EigenfunctionReport eigenfunction_report(const SpectralResult& res,
                                                const StarGraph& g) {
    const int n = g.num_edges;
    if (n <= 0 || res.psi_star.size() == 0 || res.psi_star.size() % n != 0)
        throw std::invalid_argument("eigenfunction_report: result does not match the graph");
    const int m = static_cast<int>(res.psi_star.size()) / n;
    EigenfunctionReport rep;
    rep.min_entry = res.psi_star.minCoeff();
    const double scale = res.psi_star.cwiseAbs().maxCoeff();
    double dev = 0.0;
    for (int i = 0; i < m; ++i) {
        double lo = res.psi_star[i], hi = res.psi_star[i];
        for (int e = 1; e < n; ++e) {
            lo = std::min(lo, res.psi_star[e * m + i]);
            hi = std::max(hi, res.psi_star[e * m + i]);
        }
        dev = std::max(dev, (hi - lo) / scale);
    }
    rep.edge_deviation = dev;
    return rep;
}

struct LimitReport {
    std::vector<double> lengths;
    std::vector<double> lambdas;        // one solve per length, nonincreasing
    double limit_estimate = 0.0;        // Aitken-accelerated tail value
    double threshold = 0.0;             // -alpha^2 / 4
    bool below_threshold = false;       // limit strictly below the threshold
};

// Sweep increasing edge lengths and extrapolate lambda1 toward the
// infinite-length limit.  The finite-length values decrease with L; the
// limit sits strictly below -alpha^2/4 unless the graph is a straight
// two-edge segment, in which case the values approach that threshold from
// above.  Both facts are asserted, since their failure signals an
// inadequate mesh rather than admissible numerics.
inline LimitReport infinite_length_estimate(int num_edges, const std::vector<double>& phi,
                                            double alpha, std::vector<double> lengths = {},
                                            const SolverOptions& opts = {}) {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw std::invalid_argument("infinite_length_estimate: alpha must be positive");
    if (lengths.empty())
        for (const double scaled : {5.0, 10.0, 20.0, 40.0}) lengths.push_back(scaled / alpha);
    if (!std::is_sorted(lengths.begin(), lengths.end()) ||
        lengths.front() <= 0.0)
        throw std::invalid_argument(
            "infinite_length_estimate: lengths must be positive and increasing");

    LimitReport rep;
    rep.lengths = lengths;
    rep.threshold = -0.25 * alpha * alpha;
    for (const double length : lengths) {
        const StarGraph g = make_star_graph(num_edges, length, phi);
        SolverOptions local = opts;
        if (!rep.lambdas.empty())
            local.kappa_guess = std::sqrt(-rep.lambdas.back());  // warm start
        rep.lambdas.push_back(lowest_eigenvalue(g, alpha, local).lambda1);
    }

    for (std::size_t k = 1; k < rep.lambdas.size(); ++k) {
        const double slack = 1e-8 * std::max(1.0, std::abs(rep.lambdas[k]));
        if (rep.lambdas[k] > rep.lambdas[k - 1] + slack) {
            std::ostringstream msg;
            msg << "infinite_length_estimate: lambda1 sequence is not decreasing ("
                << rep.lambdas[k - 1] << " then " << rep.lambdas[k]
                << "); the mesh is inadequate for these lengths";
            throw std::runtime_error(msg.str());
        }
    }

    const std::size_t n = rep.lambdas.size();
    rep.limit_estimate = rep.lambdas.back();
    if (n >= 3) {
        // Aitken acceleration of the geometric tail.
        const double d1 = rep.lambdas[n - 2] - rep.lambdas[n - 3];
        const double d2 = rep.lambdas[n - 1] - rep.lambdas[n - 2];
        const double dd = d2 - d1;
        if (std::abs(dd) > 1e-14 * std::max(1.0, std::abs(rep.lambdas.back()))) {
            const double accel = rep.lambdas[n - 1] - d2 * d2 / dd;
            if (accel <= rep.lambdas.back()) rep.limit_estimate = accel;
        }
    }

    bool straight_segment = num_edges == 2;
    for (const double a : phi)
        if (std::abs(a - 0.5 * two_pi) > 1e-9) straight_segment = false;
    rep.below_threshold = rep.limit_estimate < rep.threshold;
    if (straight_segment) {
        for (const double lambda : rep.lambdas)
            if (lambda <= rep.threshold) {
                std::ostringstream msg;
                msg << "infinite_length_estimate: straight-segment value " << lambda
                    << " fell below the threshold " << rep.threshold
                    << "; the mesh is inadequate";
                throw std::runtime_error(msg.str());
            }
    } else if (!rep.below_threshold) {
        std::ostringstream msg;
        msg << "infinite_length_estimate: limit estimate " << rep.limit_estimate
            << " is not below the threshold " << rep.threshold
            << "; extend the length sweep or refine the mesh";
        throw std::runtime_error(msg.str());
    }
    return rep;
}

}  // namespace starspec
