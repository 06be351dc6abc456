#pragma once

// Search over star-graph shapes at fixed edge count, length, and coupling.
// The ground energy lambda1 is maximized by the equal-angle star; this
// module provides seeded random shapes, an ordering scan against that
// maximizer, and a derivative-free ascent that recovers it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "starspec/solver.hpp"

namespace starspec {

// Angles this close to collapsed (0 or full circle) are resampled/rejected.
inline constexpr double optimizer_angle_floor = 1e-3;

// Smallest congruence-aligned max-coordinate distance between two angle
// vectors, over cyclic rotations and reversal.
inline double aligned_angle_distance(const std::vector<double>& a,
                                     const std::vector<double>& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("aligned_angle_distance: dimension mismatch");
    const int n = static_cast<int>(a.size());
    double best = std::numeric_limits<double>::infinity();
    for (int rev = 0; rev < 2; ++rev) {
        std::vector<double> probe = b;
        if (rev) std::reverse(probe.begin(), probe.end());
        for (int shift = 0; shift < n; ++shift) {
            double dist = 0.0;
            for (int k = 0; k < n; ++k)
                dist = std::max(dist, std::abs(a[k] - probe[(k + shift) % n]));
            best = std::min(best, dist);
        }
    }
    return best;
}

// Seed-deterministic random star: angles are a flat Dirichlet sample scaled
// to the full circle, resampled until every angle clears the floor.
inline StarGraph random_graph(int num_edges, double edge_length, std::uint64_t seed) {
    if (num_edges < 2) throw std::invalid_argument("random_graph: need at least two edges");
    std::mt19937_64 gen(seed);
    auto uniform01 = [&]() { return (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53; };
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::vector<double> phi(num_edges);
        double sum = 0.0;
        for (double& a : phi) {
            a = -std::log(uniform01());
            sum += a;
        }
        bool valid = true;
        for (double& a : phi) {
            a *= two_pi / sum;
            if (a < optimizer_angle_floor || a > two_pi - optimizer_angle_floor) valid = false;
        }
        if (valid) return make_star_graph(num_edges, edge_length, std::move(phi));
    }
    throw std::runtime_error("random_graph: resampling failed to clear the angle floor");
}

struct ScanRow {
    std::uint64_t seed = 0;        // 0 for the symmetric reference row
    std::vector<double> phi;
    double lambda1 = 0.0;
    bool symmetric_reference = false;
    bool best = false;
};

struct ScanReport {
    std::vector<ScanRow> rows;     // symmetric reference first
    double symmetric_lambda1 = 0.0;
    int violations = 0;            // non-congruent samples at or above the reference
};

// Solve the symmetric graph and num_samples seeded random graphs on one
// shared rule, recording how every sample orders against the symmetric
// value.  Violations are counted, not thrown: they signal a discretization
// problem that the caller (CLI exit status, acceptance sweep) reports.
inline ScanReport scan(int num_edges, double edge_length, double alpha, int num_samples,
                       std::uint64_t seed, const QuadratureRule& rule,
                       const SolverOptions& opts = {}) {
    if (num_samples < 0) throw std::invalid_argument("scan: num_samples must be >= 0");
    ScanReport report;
    const StarGraph reference = symmetric_graph(num_edges, edge_length);
    report.symmetric_lambda1 = lowest_eigenvalue(reference, alpha, rule, opts).lambda1;

    ScanRow ref_row;
    ref_row.phi = reference.phi;
    ref_row.lambda1 = report.symmetric_lambda1;
    ref_row.symmetric_reference = true;
    report.rows.push_back(std::move(ref_row));

    for (int i = 0; i < num_samples; ++i) {
        ScanRow row;
        row.seed = seed + static_cast<std::uint64_t>(i);
        const StarGraph g = random_graph(num_edges, edge_length, row.seed);
        row.phi = g.phi;
        row.lambda1 = lowest_eigenvalue(g, alpha, rule, opts).lambda1;
        if (row.lambda1 >= report.symmetric_lambda1 && !is_congruent(g, reference))
            ++report.violations;
        report.rows.push_back(std::move(row));
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < report.rows.size(); ++i)
        if (report.rows[i].lambda1 > report.rows[best].lambda1) best = i;
    report.rows[best].best = true;
    return report;
}

struct OptimizeOptions {
    int starts = 5;                     // symmetric-or-given start plus random restarts
    std::vector<double> initial_phi;    // optional explicit first start
    int max_evaluations = 400;          // per start
    double simplex_tolerance = 1e-6;    // convergence diameter, radians
    double initial_step = 0.25;         // first simplex spread, radians
    std::uint64_t seed = 7u;            // seeds the random restarts
};

struct EvaluationRecord {
    int start = 0;
    std::uint64_t seed = 0;  // 0 for the deterministic first start
    std::vector<double> phi;
    double lambda1 = 0.0;
    bool improved = false;   // strictly raised the incumbent when evaluated
};

struct OptimizationTrace {
    std::vector<std::pair<std::vector<double>, double>> iterates;  // improvements only
    std::vector<EvaluationRecord> evaluated;                       // every solved shape
    std::vector<double> best_phi;
    double best_lambda1 = -std::numeric_limits<double>::infinity();
    long evaluations = 0;
    bool converged = false;             // every start reached the diameter tolerance
    double distance_to_symmetric = 0.0;
    std::vector<std::vector<double>> per_start_phi;
    std::vector<double> per_start_lambda1;
};

// Nelder-Mead ascent of lambda1 over the free angles (phi_1..phi_{N-1});
// the last angle closes the circle.  Invalid shapes act as a barrier.
inline OptimizationTrace maximize_lambda1(int num_edges, double edge_length, double alpha,
                                          const QuadratureRule& rule,
                                          const OptimizeOptions& opts = {},
                                          const SolverOptions& solver_opts = {}) {
    if (num_edges < 2)
        throw std::invalid_argument("maximize_lambda1: need at least two edges");
    if (opts.starts < 1 || opts.max_evaluations < 1)
        throw std::invalid_argument("maximize_lambda1: invalid optimization budget");
    if (!opts.initial_phi.empty() &&
        static_cast<int>(opts.initial_phi.size()) != num_edges)
        throw std::invalid_argument("maximize_lambda1: initial angles have wrong dimension");

    const int dim = num_edges - 1;
    OptimizationTrace trace;

    auto induced_phi = [&](const std::vector<double>& x) {
        std::vector<double> phi(x);
        double sum = 0.0;
        for (double a : x) sum += a;
        phi.push_back(two_pi - sum);
        return phi;
    };
    auto valid = [&](const std::vector<double>& phi) {
        for (double a : phi)
            if (!(a >= optimizer_angle_floor) || !(a <= two_pi - optimizer_angle_floor))
                return false;
        return true;
    };
    int current_start = 0;
    std::uint64_t current_seed = 0;

    // Minimized objective: negative ground energy, +inf outside the simplex.
    auto objective = [&](const std::vector<double>& x) {
        const std::vector<double> phi = induced_phi(x);
        if (!valid(phi)) return std::numeric_limits<double>::infinity();
        double lambda;
        try {
            lambda =
                lowest_eigenvalue(make_star_graph(num_edges, edge_length, phi), alpha,
                                  rule, solver_opts)
                    .lambda1;
        } catch (const std::runtime_error&) {
            return std::numeric_limits<double>::infinity();
        }
        ++trace.evaluations;
        EvaluationRecord record;
        record.start = current_start;
        record.seed = current_seed;
        record.phi = phi;
        record.lambda1 = lambda;
        record.improved = lambda > trace.best_lambda1;
        trace.evaluated.push_back(std::move(record));
        if (lambda > trace.best_lambda1) {
            trace.best_lambda1 = lambda;
            trace.best_phi = phi;
            trace.iterates.emplace_back(phi, lambda);
        }
        return -lambda;
    };

    std::mt19937_64 restart_gen(opts.seed);
    bool all_converged = true;
    for (int start = 0; start < opts.starts; ++start) {
        current_start = start;
        current_seed = 0;
        std::vector<double> origin;
        if (start == 0 && !opts.initial_phi.empty())
            origin.assign(opts.initial_phi.begin(), opts.initial_phi.end() - 1);
        else if (start == 0)
            origin.assign(static_cast<std::size_t>(dim), two_pi / num_edges);
        else {
            current_seed = restart_gen();
            const StarGraph g = random_graph(num_edges, edge_length, current_seed);
            origin.assign(g.phi.begin(), g.phi.end() - 1);
        }

        // Initial simplex: origin plus one step along each free coordinate,
        // stepping backwards when forwards leaves the valid region.
        std::vector<std::vector<double>> simplex(static_cast<std::size_t>(dim) + 1, origin);
        for (int k = 0; k < dim; ++k) {
            simplex[static_cast<std::size_t>(k) + 1][k] += opts.initial_step;
            if (!valid(induced_phi(simplex[static_cast<std::size_t>(k) + 1])))
                simplex[static_cast<std::size_t>(k) + 1][k] = origin[k] - opts.initial_step;
        }
        std::vector<double> value(simplex.size());
        int used = 0;
        for (std::size_t i = 0; i < simplex.size(); ++i, ++used) value[i] = objective(simplex[i]);

        bool run_converged = false;
        while (used < opts.max_evaluations) {
            std::vector<std::size_t> order(simplex.size());
            for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
            std::sort(order.begin(), order.end(),
                      [&](std::size_t a, std::size_t b) { return value[a] < value[b]; });

            double diameter = 0.0;
            for (std::size_t i = 1; i < simplex.size(); ++i)
                for (int k = 0; k < dim; ++k)
                    diameter = std::max(
                        diameter, std::abs(simplex[order[i]][k] - simplex[order[0]][k]));
            if (diameter < opts.simplex_tolerance &&
                std::isfinite(value[order[0]])) {
                run_converged = true;
                break;
            }

            const std::size_t worst = order.back();
            const std::size_t second = order[order.size() - 2];
            std::vector<double> centroid(static_cast<std::size_t>(dim), 0.0);
            for (std::size_t i = 0; i + 1 < order.size(); ++i)
                for (int k = 0; k < dim; ++k) centroid[k] += simplex[order[i]][k];
            for (int k = 0; k < dim; ++k) centroid[k] /= dim > 0 ? dim : 1;

            auto blend = [&](double t) {
                std::vector<double> x(static_cast<std::size_t>(dim));
                for (int k = 0; k < dim; ++k)
                    x[k] = centroid[k] + t * (centroid[k] - simplex[worst][k]);
                return x;
            };

            const std::vector<double> reflected = blend(1.0);
            const double fr = objective(reflected);
            ++used;
            if (fr < value[order[0]]) {
                const std::vector<double> expanded = blend(2.0);
                const double fe = objective(expanded);
                ++used;
                simplex[worst] = fe < fr ? expanded : reflected;
                value[worst] = std::min(fe, fr);
            } else if (fr < value[second]) {
                simplex[worst] = reflected;
                value[worst] = fr;
            } else {
                const std::vector<double> contracted = blend(fr < value[worst] ? 0.5 : -0.5);
                const double fc = objective(contracted);
                ++used;
                if (fc < std::min(fr, value[worst])) {
                    simplex[worst] = contracted;
                    value[worst] = fc;
                } else {
                    for (std::size_t i = 1; i < order.size(); ++i) {
                        for (int k = 0; k < dim; ++k)
                            simplex[order[i]][k] =
                                0.5 * (simplex[order[i]][k] + simplex[order[0]][k]);
                        value[order[i]] = objective(simplex[order[i]]);
                        ++used;
                    }
                }
            }
        }
        all_converged = all_converged && run_converged;

        std::size_t run_best = 0;
        for (std::size_t i = 1; i < simplex.size(); ++i)
            if (value[i] < value[run_best]) run_best = i;
        trace.per_start_phi.push_back(induced_phi(simplex[run_best]));
        trace.per_start_lambda1.push_back(-value[run_best]);
    }

    trace.converged = all_converged;
    if (!trace.best_phi.empty())
        trace.distance_to_symmetric =
            max_angle_deviation(make_star_graph(num_edges, edge_length, trace.best_phi));
    return trace;
}

}  // namespace starspec
