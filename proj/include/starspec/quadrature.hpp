#pragma once

// Composite Gauss-Legendre rules on graded panel meshes, plus reference
// moments of Legendre polynomials against logarithmic weights.  The moments
// make singularity subtraction exact: a kernel with a log factor is split
// into (smooth) * ln(distance^2) + (smooth), the smooth factors are
// interpolated at panel nodes, and the log part integrates in closed form.

#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace starspec {

struct ReferenceRule {
    std::vector<double> nodes;    // ascending, interior to (-1, 1)
    std::vector<double> weights;  // positive, sum to 2
    std::vector<double> bary;     // barycentric weights for the node set
};

namespace detail {

inline ReferenceRule make_legendre_rule(int order) {
    if (order < 1) throw std::invalid_argument("legendre_rule: order must be >= 1");
    const int n = order;
    ReferenceRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    rule.bary.assign(n, 1.0);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            if (i != j) rule.bary[j] /= (rule.nodes[j] - rule.nodes[i]);
    return rule;
}

}  // namespace detail

inline const ReferenceRule& legendre_rule(int order) {
    static std::map<int, ReferenceRule> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, detail::make_legendre_rule(order)).first;
    return it->second;
}

inline double legendre_p(int k, double x) {
    if (k == 0) return 1.0;
    double p0 = 1.0, p1 = x;
    for (int j = 2; j <= k; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

// Composite rule over one edge [0, L]: panel boundaries L * (j/P)^grading
// concentrate resolution at the vertex end, where every edge-pair kernel is
// singular.  Nodes are open (no node at 0 or L).
struct QuadratureRule {
    double edge_length = 1.0;
    int num_panels = 8;
    int local_order = 6;
    double grading = 2.0;
    std::vector<double> boundaries;  // num_panels + 1 ascending values, 0 .. L
    std::vector<double> nodes;       // num_panels * local_order, ascending
    std::vector<double> weights;

    int points_per_edge() const { return static_cast<int>(nodes.size()); }
    double panel_lo(int q) const { return boundaries[q]; }
    double panel_hi(int q) const { return boundaries[q + 1]; }
};

inline QuadratureRule build_rule(double edge_length, int num_panels = 8, int local_order = 6,
                                 double grading = 2.0) {
    if (!(edge_length > 0.0) || !std::isfinite(edge_length))
        throw std::invalid_argument(
            "build_rule: edge length must be positive and finite (use the length-sweep "
            "extrapolation for the infinite case)");
    if (num_panels < 1) throw std::invalid_argument("build_rule: need at least one panel");
    if (local_order < 2) throw std::invalid_argument("build_rule: local order must be >= 2");
    if (!(grading >= 1.0)) throw std::invalid_argument("build_rule: grading must be >= 1");

    QuadratureRule rule;
    rule.edge_length = edge_length;
    rule.num_panels = num_panels;
    rule.local_order = local_order;
    rule.grading = grading;
    rule.boundaries.resize(num_panels + 1);
    for (int j = 0; j <= num_panels; ++j)
        rule.boundaries[j] =
            edge_length * std::pow(static_cast<double>(j) / num_panels, grading);
    rule.boundaries[0] = 0.0;
    rule.boundaries[num_panels] = edge_length;

    const ReferenceRule& ref = legendre_rule(local_order);
    rule.nodes.reserve(static_cast<std::size_t>(num_panels) * local_order);
    rule.weights.reserve(rule.nodes.capacity());
    for (int q = 0; q < num_panels; ++q) {
        const double mid = 0.5 * (rule.boundaries[q] + rule.boundaries[q + 1]);
        const double half = 0.5 * (rule.boundaries[q + 1] - rule.boundaries[q]);
        for (int j = 0; j < local_order; ++j) {
            rule.nodes.push_back(mid + half * ref.nodes[j]);
            rule.weights.push_back(half * ref.weights[j]);
        }
    }
    return rule;
}

// Variant graded toward BOTH interval ends via the symmetric map
// m(x) = x^g / (x^g + (1-x)^g).  Kernel eigenfunctions have a u*ln(u)
// profile at both the vertex and the free end of an edge, so spectral
// mesh-convergence studies need resolution at both ends; one-sided grading
// caps the observable convergence at second order.
inline QuadratureRule build_rule_graded_both_ends(double edge_length, int num_panels = 8,
                                                  int local_order = 6, double grading = 2.0) {
    QuadratureRule rule = build_rule(edge_length, num_panels, local_order, grading);
    for (int j = 1; j < num_panels; ++j) {
        const double x = static_cast<double>(j) / num_panels;
        const double a = std::pow(x, grading), b = std::pow(1.0 - x, grading);
        rule.boundaries[j] = edge_length * (a / (a + b));
    }
    const ReferenceRule& ref = legendre_rule(local_order);
    for (int q = 0; q < num_panels; ++q) {
        const double mid = 0.5 * (rule.boundaries[q] + rule.boundaries[q + 1]);
        const double half = 0.5 * (rule.boundaries[q + 1] - rule.boundaries[q]);
        for (int j = 0; j < local_order; ++j) {
            rule.nodes[static_cast<std::size_t>(q) * local_order + j] = mid + half * ref.nodes[j];
            rule.weights[static_cast<std::size_t>(q) * local_order + j] = half * ref.weights[j];
        }
    }
    return rule;
}

namespace detail {

// Legendre functions of the second kind, real argument.  For |x| < 1 these
// are the principal-value (on-cut) values.  Forward recurrence is stable in
// the near regime |x| <~ 1.25, which is the only place the closed-form
// moments use them.
inline void legendre_q_real(double x, int kmax, std::vector<double>& q) {
    q.resize(kmax + 1);
    if (std::abs(x) == 1.0) x = std::copysign(1.0 - 1e-16, x);
    const double q0 = 0.5 * std::log(std::abs((1.0 + x) / (1.0 - x)));
    q[0] = q0;
    if (kmax >= 1) q[1] = x * q0 - 1.0;
    for (int k = 1; k < kmax; ++k)
        q[k + 1] = ((2.0 * k + 1.0) * x * q[k] - k * q[k - 1]) / (k + 1.0);
}

inline void legendre_q_complex(std::complex<double> z, int kmax,
                               std::vector<std::complex<double>>& q) {
    q.resize(kmax + 1);
    const std::complex<double> q0 =
        0.5 * (std::log(1.0 + z) - std::log(z - 1.0));
    q[0] = q0;
    if (kmax >= 1) q[1] = z * q0 - 1.0;
    for (int k = 1; k < kmax; ++k)
        q[k + 1] = ((2.0 * k + 1.0) * z * q[k] - static_cast<double>(k) * q[k - 1]) / (k + 1.0);
}

// int_{-1}^{1} P_k(x) ln|x - u| dx for a singular point near the interval.
inline double log_moment_reference(double u, int k) {
    if (k == 0) {
        const double a = 1.0 - u, b = 1.0 + u;
        const double ta = (a == 0.0) ? 0.0 : a * std::log(std::abs(a));
        const double tb = (b == 0.0) ? 0.0 : b * std::log(std::abs(b));
        return ta + tb - 2.0;
    }
    std::vector<double> q;
    legendre_q_real(u, k + 1, q);
    return 2.0 / (2.0 * k + 1.0) * (q[k + 1] - q[k - 1]);
}

// int_{-1}^{1} P_k(x) ln((x - u)^2 + v^2) dx.
inline double log_moment_quadratic_reference(double u, double v, int k) {
    v = std::abs(v);
    if (k == 0) {
        const double a = 1.0 - u, b = 1.0 + u;
        const double ra = a * a + v * v, rb = b * b + v * v;
        double val = -4.0;
        val += (ra == 0.0) ? 0.0 : a * std::log(ra);
        val += (rb == 0.0) ? 0.0 : b * std::log(rb);
        if (v > 0.0) val += 2.0 * v * (std::atan(a / v) + std::atan(b / v));
        return val;
    }
    if (v < 1e-14 * (1.0 + std::abs(u))) return 2.0 * log_moment_reference(u, k);
    std::vector<std::complex<double>> q;
    legendre_q_complex({u, v}, k + 1, q);
    return 4.0 / (2.0 * k + 1.0) * (q[k + 1] - q[k - 1]).real();
}

inline double distance_to_unit_interval(double u, double v) {
    const double du = (u < -1.0) ? (-1.0 - u) : (u > 1.0 ? u - 1.0 : 0.0);
    return std::hypot(du, v);
}

// Once the singular point is well separated from the interval the integrand
// is smooth; a fixed high-order Gauss rule is then both simpler and immune
// to the mild forward-recurrence error growth of the Q functions far away.
inline double log_moment_by_gauss(double u, double v, int k) {
    const ReferenceRule& ref = legendre_rule(24);
    double sum = 0.0;
    for (std::size_t i = 0; i < ref.nodes.size(); ++i) {
        const double x = ref.nodes[i];
        const double d2 = (x - u) * (x - u) + v * v;
        sum += ref.weights[i] * legendre_p(k, x) * std::log(d2);
    }
    return sum;
}

inline constexpr double log_moment_near_threshold = 0.25;

}  // namespace detail

// Moment of the mapped Legendre polynomial of the given degree against
// ln|x - t| over the panel [a, b].
inline double log_moment(double a, double b, double x, int degree) {
    if (!(b > a)) throw std::invalid_argument("log_moment: empty panel");
    if (degree < 0) throw std::invalid_argument("log_moment: negative degree");
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    const double u = (x - mid) / half;
    double ref;
    if (detail::distance_to_unit_interval(u, 0.0) <= detail::log_moment_near_threshold)
        ref = detail::log_moment_reference(u, degree);
    else
        ref = 0.5 * detail::log_moment_by_gauss(u, 0.0, degree);
    const double log_scale = (degree == 0) ? 2.0 * std::log(half) : 0.0;
    return half * (log_scale + ref);
}

// Moment against ln((t - u)^2 + v^2); this is the v > 0 companion used when
// the singular point sits off the integration line (vertex-adjacent pairs).
inline double log_moment_quadratic(double a, double b, double u, double v, int degree) {
    if (!(b > a)) throw std::invalid_argument("log_moment_quadratic: empty panel");
    if (degree < 0) throw std::invalid_argument("log_moment_quadratic: negative degree");
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    const double uh = (u - mid) / half, vh = std::abs(v) / half;
    double ref;
    if (detail::distance_to_unit_interval(uh, vh) <= detail::log_moment_near_threshold)
        ref = detail::log_moment_quadratic_reference(uh, vh, degree);
    else
        ref = detail::log_moment_by_gauss(uh, vh, degree);
    const double log_scale = (degree == 0) ? 4.0 * std::log(half) : 0.0;
    return half * (log_scale + ref);
}

}  // namespace starspec
