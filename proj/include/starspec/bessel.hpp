#pragma once

// Modified Bessel functions K0, K1, I0, I1 for real positive arguments,
// plus the additive split of K0 into a logarithmic and a smooth part that
// the singular quadrature machinery consumes.
//
// Evaluation strategy:
//   z <= 2          classical ascending series (full double precision)
//   2 < z < 20      Chebyshev interpolant of exp(z)*sqrt(z)*K(z) in 1/z;
//                   coefficients are generated once at first use from the
//                   integral representation K_n(z) = int_0^inf
//                   exp(-z cosh t) cosh(nt) dt evaluated by trapezoid sums
//   z >= 20         truncated large-argument asymptotic series
// Relative accuracy target: 1e-13 over [1e-12, 700].

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>

namespace starspec {

inline constexpr double euler_gamma = 0.57721566490153286060651209008;

// K0 and K1 fall below the normal double range near z ~ 705; callers get a
// hard zero there and can query the flag via the *_checked variants.
inline constexpr double bessel_underflow_cutoff = 705.0;

struct BesselEval {
    double value = 0.0;
    bool underflow = false;
};

namespace detail {

// Ascending series for I0 and I1; usable over the whole double range but
// cheap and fully accurate only while the terms stay modest (z <~ 18).
inline double i0_series(double z) {
    const double b = 0.25 * z * z;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 200; ++k) {
        term *= b / (static_cast<double>(k) * k);
        sum += term;
        if (term < sum * 1e-18) break;
    }
    return sum;
}

inline double i1_series(double z) {
    const double b = 0.25 * z * z;
    double term = 0.5 * z, sum = term;
    for (int k = 1; k < 200; ++k) {
        term *= b / (static_cast<double>(k) * (k + 1));
        sum += term;
        if (term < sum * 1e-18) break;
    }
    return sum;
}

// Large-argument expansions; mu = 4*nu^2 selects the order.
inline double iv_asymptotic(double z, double mu) {
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 40; ++k) {
        const double c = (2.0 * k - 1.0) * (2.0 * k - 1.0) - mu;
        term *= c / (8.0 * z * k);
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
        sum += term;
    }
    return std::exp(z) / std::sqrt(2.0 * M_PI * z) * sum;
}

inline double kv_asymptotic(double z, double mu) {
    double term = 1.0, sum = 1.0, prev = std::numeric_limits<double>::max();
    for (int k = 1; k < 60; ++k) {
        const double c = mu - (2.0 * k - 1.0) * (2.0 * k - 1.0);
        term *= c / (8.0 * z * k);
        if (std::abs(term) > prev) break;  // asymptotic tail started growing
        prev = std::abs(term);
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return std::sqrt(M_PI / (2.0 * z)) * std::exp(-z) * sum;
}

// Series for the non-logarithmic companion of K0:
//   K0(z) = -(ln(z/2) + gamma) I0(z) + sum_{k>=1} H_k (z^2/4)^k / (k!)^2
// where H_k is the k-th harmonic number.  All terms are positive.
inline double k0_companion_series(double z) {
    const double b = 0.25 * z * z;
    double term = 1.0, harmonic = 0.0, sum = 0.0;
    for (int k = 1; k < 200; ++k) {
        term *= b / (static_cast<double>(k) * k);
        harmonic += 1.0 / k;
        const double add = term * harmonic;
        sum += add;
        if (add < (sum + 1e-300) * 1e-18) break;
    }
    return sum;
}

inline double k0_small(double z) {
    return -(std::log(0.5 * z) + euler_gamma) * i0_series(z) + k0_companion_series(z);
}

inline double k1_small(double z) {
    // K1(z) = 1/z + ln(z/2) I1(z)
    //         - (z/4) sum_{k>=0} (H_k + H_{k+1} - 2 gamma) (z^2/4)^k / (k!(k+1)!)
    const double b = 0.25 * z * z;
    double term = 1.0, hk = 0.0, hk1 = 1.0;
    double sum = term * (hk + hk1 - 2.0 * euler_gamma);
    for (int k = 1; k < 200; ++k) {
        term *= b / (static_cast<double>(k) * (k + 1));
        hk += 1.0 / k;
        hk1 += 1.0 / (k + 1);
        const double add = term * (hk + hk1 - 2.0 * euler_gamma);
        sum += add;
        if (std::abs(add) < 1e-18 * std::abs(sum)) break;
    }
    return 1.0 / z + std::log(0.5 * z) * i1_series(z) - 0.25 * z * sum;
}

// Reference evaluation of exp(z) K_n(z), n in {0,1}, by a trapezoid sum on
// the integral representation.  Slow; used only to seed the Chebyshev
// tables for the mid-range 2 < z < 20.
inline long double exp_scaled_k_integral(int n, long double z) {
    const long double h = 0.02L;
    // stop once exp(-z (cosh t - 1)) is below 1e-24
    const long double arg_span = 56.0L / z;
    const long double t_max = std::acosh(1.0L + arg_span);
    long double sum = 0.5L;  // t = 0 term: cosh(0) = 1, weight 1/2
    if (n == 1) sum = 0.5L;
    for (long double t = h; t <= t_max; t += h) {
        const long double c = std::cosh(t);
        const long double f = std::exp(-z * (c - 1.0L));
        sum += (n == 0) ? f : f * c;
    }
    return sum * h;
}

struct ChebTable {
    static constexpr int degree = 44;
    static constexpr double w_lo = 0.05;  // 1/z at z = 20
    static constexpr double w_hi = 0.50;  // 1/z at z = 2
    std::array<double, degree> c0{}, c1{};

    ChebTable() {
        constexpr int nodes = 64;
        std::array<long double, nodes> g0{}, g1{};
        for (int j = 0; j < nodes; ++j) {
            const long double u = std::cos(M_PIl * (j + 0.5L) / nodes);
            const long double w = 0.5L * (w_lo + w_hi) + 0.5L * (w_hi - w_lo) * u;
            const long double z = 1.0L / w;
            const long double s = std::sqrt(z);
            g0[j] = s * exp_scaled_k_integral(0, z);
            g1[j] = s * exp_scaled_k_integral(1, z);
        }
        for (int k = 0; k < degree; ++k) {
            long double a0 = 0.0L, a1 = 0.0L;
            for (int j = 0; j < nodes; ++j) {
                const long double ck = std::cos(M_PIl * k * (j + 0.5L) / nodes);
                a0 += g0[j] * ck;
                a1 += g1[j] * ck;
            }
            c0[k] = static_cast<double>(2.0L / nodes * a0);
            c1[k] = static_cast<double>(2.0L / nodes * a1);
        }
    }

    double eval(const std::array<double, degree>& c, double z) const {
        const double w = 1.0 / z;
        const double u = (2.0 * w - (w_lo + w_hi)) / (w_hi - w_lo);
        double b1 = 0.0, b2 = 0.0;
        for (int k = degree - 1; k >= 1; --k) {
            const double b0 = 2.0 * u * b1 - b2 + c[k];
            b2 = b1;
            b1 = b0;
        }
        const double g = u * b1 - b2 + 0.5 * c[0];
        return g * std::exp(-z) / std::sqrt(z);
    }
};

inline const ChebTable& cheb_table() {
    static const ChebTable table;
    return table;
}

inline void require_positive(double z, const char* who) {
    if (!(z > 0.0)) throw std::domain_error(std::string(who) + ": argument must be positive");
}

}  // namespace detail

inline BesselEval bessel_k0_checked(double z) {
    detail::require_positive(z, "bessel_k0");
    if (z > bessel_underflow_cutoff) return {0.0, true};
    if (z <= 2.0) return {detail::k0_small(z), false};
    if (z < 20.0) return {detail::cheb_table().eval(detail::cheb_table().c0, z), false};
    return {detail::kv_asymptotic(z, 0.0), false};
}

inline BesselEval bessel_k1_checked(double z) {
    detail::require_positive(z, "bessel_k1");
    if (z > bessel_underflow_cutoff) return {0.0, true};
    if (z <= 2.0) return {detail::k1_small(z), false};
    if (z < 20.0) return {detail::cheb_table().eval(detail::cheb_table().c1, z), false};
    return {detail::kv_asymptotic(z, 4.0), false};
}

inline double bessel_k0(double z) { return bessel_k0_checked(z).value; }
inline double bessel_k1(double z) { return bessel_k1_checked(z).value; }

inline double bessel_i0(double z) {
    if (z < 0.0) throw std::domain_error("bessel_i0: argument must be non-negative");
    return (z <= 18.0) ? detail::i0_series(z) : detail::iv_asymptotic(z, 0.0);
}

inline double bessel_i1(double z) {
    if (z < 0.0) throw std::domain_error("bessel_i1: argument must be non-negative");
    return (z <= 18.0) ? detail::i1_series(z) : detail::iv_asymptotic(z, 4.0);
}

// Exact additive split K0(z) = log_coefficient * ln(z) + smooth_part with
// log_coefficient = -I0(z).  Both components are analytic in z^2, so a
// quadrature code can interpolate them across a singular point.  As z -> 0
// the smooth part tends to ln(2) - gamma = 0.11593151565841244...
struct K0Split {
    double log_coefficient = -1.0;
    double smooth_part = 0.0;
};

inline K0Split k0_log_split(double z, double z_max = 2.0) {
    detail::require_positive(z, "k0_log_split");
    if (z > z_max) throw std::domain_error("k0_log_split: argument exceeds split validity bound");
    const double i0 = detail::i0_series(z);
    const double smooth = (M_LN2 - euler_gamma) * i0 + detail::k0_companion_series(z);
    return {-i0, smooth};
}

}  // namespace starspec
