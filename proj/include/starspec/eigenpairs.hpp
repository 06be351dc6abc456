#pragma once

// Largest eigenpair of a dense symmetric matrix by Lanczos iteration with
// full reorthogonalization.  The projected tridiagonal problem is solved by
// an implicit-shift QL sweep (eigenvalues) plus shifted inverse iteration
// (the top Ritz coordinate vector), so the routine is self-contained and can
// be cross-checked against an independent dense decomposition in the tests.
//
// Accuracy contract: the returned pair satisfies ||A v - mu v|| <= tol*||A||
// with tol = 1e-11 by default; non-convergence within the iteration cap
// raises an error carrying the best residual seen.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "starspec/kernel.hpp"

namespace starspec {

struct EigenOptions {
    double tolerance = 1e-11;      // residual bound relative to the matrix norm
    int max_iterations = 500;      // Lanczos basis cap (also bounded by n)
    std::uint64_t seed = 0x2545f4914f6cdd1dULL;  // start-vector generator seed
};

struct TopEigenpair {
    double value = 0.0;
    Eigen::VectorXd vector;
    double residual = 0.0;  // ||A v - mu v|| actually achieved
    int iterations = 0;
};

namespace detail {

// Implicit-shift QL eigenvalues of a symmetric tridiagonal matrix with
// diagonal d and subdiagonal e (e[i] couples rows i and i+1).  Overwrites d
// with the eigenvalues in unspecified order.
inline void tridiagonal_eigenvalues(std::vector<double>& d, std::vector<double> e) {
    const int n = static_cast<int>(d.size());
    if (n <= 1) return;
    e.resize(n, 0.0);
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= std::numeric_limits<double>::epsilon() * dd) break;
            }
            if (m != l) {
                if (iter++ == 64)
                    throw std::runtime_error("tridiagonal_eigenvalues: QL sweep stalled");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                bool underflow = false;
                for (int i = m - 1; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                }
                if (underflow) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

// Solve (T - sigma I) x = rhs for symmetric tridiagonal T by elimination
// with partial pivoting; near-singular pivots are floored, which is exactly
// what inverse iteration wants.
inline void shifted_tridiagonal_solve(const std::vector<double>& diag,
                                      const std::vector<double>& sub, double sigma,
                                      std::vector<double>& x) {
    const int n = static_cast<int>(diag.size());
    std::vector<double> b(n), c0(n, 0.0), c1(n, 0.0), a(n, 0.0);
    for (int i = 0; i < n; ++i) b[i] = diag[i] - sigma;
    for (int i = 0; i + 1 < n; ++i) {
        c0[i] = sub[i];      // superdiagonal (symmetric)
        a[i + 1] = sub[i];   // subdiagonal
    }
    double floor_pivot = 0.0;
    for (int i = 0; i < n; ++i)
        floor_pivot = std::max(floor_pivot, std::abs(b[i]) + 2.0 * std::abs(c0[i]));
    floor_pivot = std::max(floor_pivot, 1.0) * std::numeric_limits<double>::epsilon();

    for (int i = 0; i + 1 < n; ++i) {
        if (std::abs(a[i + 1]) > std::abs(b[i])) {
            std::swap(b[i], a[i + 1]);
            std::swap(c0[i], b[i + 1]);
            std::swap(c1[i], c0[i + 1]);
            std::swap(x[i], x[i + 1]);
        }
        if (std::abs(b[i]) < floor_pivot) b[i] = std::copysign(floor_pivot, b[i] == 0.0 ? 1.0 : b[i]);
        const double m = a[i + 1] / b[i];
        b[i + 1] -= m * c0[i];
        c0[i + 1] -= m * c1[i];
        x[i + 1] -= m * x[i];
    }
    if (std::abs(b[n - 1]) < floor_pivot)
        b[n - 1] = std::copysign(floor_pivot, b[n - 1] == 0.0 ? 1.0 : b[n - 1]);

    x[n - 1] /= b[n - 1];
    if (n >= 2) x[n - 2] = (x[n - 2] - c0[n - 2] * x[n - 1]) / b[n - 2];
    for (int i = n - 3; i >= 0; --i)
        x[i] = (x[i] - c0[i] * x[i + 1] - c1[i] * x[i + 2]) / b[i];
}

// Coordinates of the Ritz vector for the eigenvalue nearest sigma, by two
// rounds of inverse iteration; returns a unit vector.
inline std::vector<double> ritz_coordinates(const std::vector<double>& diag,
                                            const std::vector<double>& sub, double sigma) {
    const int n = static_cast<int>(diag.size());
    std::vector<double> s(n, 1.0 / std::sqrt(static_cast<double>(n)));
    for (int round = 0; round < 2; ++round) {
        shifted_tridiagonal_solve(diag, sub, sigma, s);
        double norm = 0.0;
        for (double v : s) norm += v * v;
        norm = std::sqrt(norm);
        if (!(norm > 0.0) || !std::isfinite(norm)) {
            std::fill(s.begin(), s.end(), 0.0);
            s[n - 1] = 1.0;
            break;
        }
        for (double& v : s) v /= norm;
    }
    return s;
}

}  // namespace detail

inline TopEigenpair top_eigenpair(const Eigen::MatrixXd& a, const EigenOptions& opts = {}) {
    const int n = static_cast<int>(a.rows());
    if (n == 0 || a.cols() != n)
        throw std::invalid_argument("top_eigenpair: matrix must be square and non-empty");
    const double entry_scale = a.cwiseAbs().maxCoeff();
    if (!std::isfinite(entry_scale))
        throw std::invalid_argument("top_eigenpair: matrix has non-finite entries");
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-13 * (1.0 + entry_scale))
        throw std::invalid_argument("top_eigenpair: matrix is not symmetric");
    if (!(opts.tolerance > 0.0) || opts.max_iterations < 1)
        throw std::invalid_argument("top_eigenpair: invalid options");

    if (n == 1) {
        TopEigenpair out;
        out.value = a(0, 0);
        out.vector = Eigen::VectorXd::Ones(1);
        out.residual = 0.0;
        out.iterations = 0;
        return out;
    }

    const int cap = std::min(n, opts.max_iterations);
    std::mt19937_64 gen(opts.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto fresh_vector = [&](const Eigen::MatrixXd& ortho_to, int cols) {
        Eigen::VectorXd v(n);
        for (int attempt = 0; attempt < 8; ++attempt) {
            for (int i = 0; i < n; ++i) v[i] = normal(gen);
            if (cols > 0) {
                const auto vb = ortho_to.leftCols(cols);
                v -= vb * (vb.transpose() * v);
                v -= vb * (vb.transpose() * v);
            }
            const double norm = v.norm();
            if (norm > 1e-8 * std::sqrt(static_cast<double>(n))) return Eigen::VectorXd(v / norm);
        }
        throw std::runtime_error("top_eigenpair: could not generate an independent start vector");
    };

    Eigen::MatrixXd basis(n, cap);
    std::vector<double> diag, sub;
    basis.col(0) = fresh_vector(basis, 0);

    double best_residual = std::numeric_limits<double>::infinity();
    double best_value = 0.0;
    Eigen::VectorXd best_vector;

    for (int j = 0; j < cap; ++j) {
        const Eigen::VectorXd av = a * basis.col(j);
        const double alpha = basis.col(j).dot(av);
        diag.push_back(alpha);

        Eigen::VectorXd w = av - alpha * basis.col(j);
        if (j > 0) w -= sub[j - 1] * basis.col(j - 1);
        {   // full reorthogonalization, twice
            const auto vb = basis.leftCols(j + 1);
            w -= vb * (vb.transpose() * w);
            w -= vb * (vb.transpose() * w);
        }
        const double beta = w.norm();

        // Ritz data of the projected (j+1) x (j+1) problem.
        std::vector<double> values = diag;
        detail::tridiagonal_eigenvalues(values, sub);
        double theta = values[0], spread = std::abs(values[0]);
        for (double v : values) {
            theta = std::max(theta, v);
            spread = std::max(spread, std::abs(v));
        }
        const std::vector<double> s = detail::ritz_coordinates(diag, sub, theta);
        const double bound = std::abs(beta * s[j]);

        if (bound <= 0.5 * opts.tolerance * spread || j + 1 == cap || beta <= 1e-14 * spread) {
            Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
            for (int i = 0; i <= j; ++i) y += s[i] * basis.col(i);
            const double norm = y.norm();
            if (norm > 0.0) y /= norm;
            const Eigen::VectorXd ay = a * y;
            const double mu = y.dot(ay);          // Rayleigh polish
            const double residual = (ay - mu * y).norm();
            if (residual < best_residual) {
                best_residual = residual;
                best_value = mu;
                best_vector = y;
            }
            if (residual <= opts.tolerance * std::max(spread, std::abs(mu))) {
                TopEigenpair out;
                out.value = mu;
                out.vector = y;
                out.residual = residual;
                out.iterations = j + 1;
                return out;
            }
        }

        if (j + 1 == cap) break;
        if (beta <= 1e-14 * spread || beta == 0.0) {
            // Invariant subspace found; continue in its orthogonal complement.
            sub.push_back(0.0);
            basis.col(j + 1) = fresh_vector(basis, j + 1);
        } else {
            sub.push_back(beta);
            basis.col(j + 1) = w / beta;
        }
    }

    std::ostringstream msg;
    msg << "top_eigenpair: no convergence after " << cap << " iterations (best residual "
        << best_residual << ", value " << best_value << ", required "
        << opts.tolerance << " * matrix norm)";
    throw std::runtime_error(msg.str());
}

inline TopEigenpair top_eigenpair(const KernelMatrix& km, const EigenOptions& opts = {}) {
    return top_eigenpair(km.entries, opts);
}

}  // namespace starspec
