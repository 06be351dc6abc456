#pragma once

// Star graph geometry.  A star is N >= 2 straight edges of equal length L
// meeting at one vertex; its shape is the vector of consecutive angular gaps
// phi (clockwise, summing to 2 pi).  Distances between points on two edges
// reduce to the gap between the edges through the chord of the unit circle,
// which is all the spectral code ever needs.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace starspec {

inline constexpr double two_pi = 6.283185307179586476925286766559;
inline constexpr double angle_floor = 1e-10;      // rejects collapsed edge pairs
inline constexpr double angle_sum_slack = 1e-8;   // accepted drift before renormalizing

struct StarGraph {
    int num_edges = 0;
    double edge_length = 0.0;
    std::vector<double> phi;  // gap from edge k to edge k+1 (cyclic), sum 2 pi
};

inline StarGraph make_star_graph(int num_edges, double edge_length, std::vector<double> phi) {
    if (num_edges < 2) throw std::invalid_argument("make_star_graph: need at least two edges");
    if (!(edge_length > 0.0) || !std::isfinite(edge_length))
        throw std::invalid_argument("make_star_graph: edge length must be positive and finite");
    if (static_cast<int>(phi.size()) != num_edges)
        throw std::invalid_argument("make_star_graph: angle count must equal edge count");
    double sum = 0.0;
    for (double a : phi) {
        if (!std::isfinite(a)) throw std::invalid_argument("make_star_graph: non-finite angle");
        sum += a;
    }
    if (std::abs(sum - two_pi) > angle_sum_slack)
        throw std::invalid_argument("make_star_graph: angles must sum to 2 pi");
    const double scale = two_pi / sum;
    for (double& a : phi) a *= scale;
    for (double a : phi)
        if (a <= angle_floor || a >= two_pi - angle_floor)
            throw std::invalid_argument("make_star_graph: angle outside the open admissible range");
    return {num_edges, edge_length, std::move(phi)};
}

inline StarGraph symmetric_graph(int num_edges, double edge_length) {
    std::vector<double> phi(num_edges, two_pi / num_edges);
    return make_star_graph(num_edges, edge_length, std::move(phi));
}

// Clockwise gap from edge n to edge m, in (0, 2 pi); zero only for n == m.
inline double angle_between(const StarGraph& g, int n, int m) {
    const int N = g.num_edges;
    if (n < 0 || n >= N || m < 0 || m >= N)
        throw std::invalid_argument("angle_between: edge index out of range");
    if (n == m) return 0.0;
    double sum = 0.0;
    for (int k = n; k != m; k = (k + 1) % N) sum += g.phi[k];
    return sum;
}

// Squared distance of the unit-circle points in the directions of edges n
// and m: 4 sin^2(gap / 2), in [0, 4].  Evaluated from the minor gap (the
// smaller of the two directed sums, an identical value since sin(pi - x) =
// sin(x)), so the result is bitwise symmetric in (n, m) and pairs related by
// a graph symmetry produce bitwise-equal chords -- which downstream assembly
// relies on to deduplicate kernel blocks exactly.
inline double chord_sq(const StarGraph& g, int n, int m) {
    if (n == m) return 0.0;
    const double half_gap = 0.5 * std::min(angle_between(g, n, m), angle_between(g, m, n));
    const double s = std::sin(half_gap);
    return 4.0 * s * s;
}

// Squared distance between arclength position s on edge n and t on edge m.
inline double distance_sq(const StarGraph& g, int n, double s, int m, double t) {
    if (s < 0.0 || s > g.edge_length || t < 0.0 || t > g.edge_length)
        throw std::invalid_argument("distance_sq: arclength outside [0, L]");
    const double diff = s - t;
    return diff * diff + s * t * chord_sq(g, n, m);
}

// Unit vectors along the edges, as cumulative clockwise angles.
struct UnitChordPoints {
    std::vector<double> theta;

    double x(int n) const { return std::cos(theta[n]); }
    double y(int n) const { return -std::sin(theta[n]); }
};

inline UnitChordPoints unit_chords(const StarGraph& g) {
    UnitChordPoints pts;
    pts.theta.resize(g.num_edges);
    pts.theta[0] = 0.0;
    for (int n = 1; n < g.num_edges; ++n) pts.theta[n] = pts.theta[n - 1] + g.phi[n - 1];
    return pts;
}

// Congruence = same N and L, and angle vectors equal up to a cyclic
// rotation, possibly composed with a reversal.
inline bool is_congruent(const StarGraph& a, const StarGraph& b, double tol = 1e-9) {
    if (a.num_edges != b.num_edges) return false;
    if (std::abs(a.edge_length - b.edge_length) > tol * std::max(1.0, a.edge_length))
        return false;
    const int N = a.num_edges;
    for (int rev = 0; rev < 2; ++rev) {
        std::vector<double> probe = b.phi;
        if (rev) std::reverse(probe.begin(), probe.end());
        for (int shift = 0; shift < N; ++shift) {
            bool match = true;
            for (int k = 0; k < N && match; ++k)
                match = std::abs(a.phi[k] - probe[(k + shift) % N]) <= tol;
            if (match) return true;
        }
    }
    return false;
}

// Largest deviation of any gap from the equal-gap value 2 pi / N.  The
// equal-gap target is permutation invariant, so no alignment is needed.
inline double max_angle_deviation(const StarGraph& g) {
    const double target = two_pi / g.num_edges;
    double dev = 0.0;
    for (double a : g.phi) dev = std::max(dev, std::abs(a - target));
    return dev;
}

// ---- flat text record ------------------------------------------------------
//
//   star_graph 1
//   N 3
//   L 1
//   units rad            (or "frac": angles as fractions of 2 pi)
//   phi 2.094... 2.094... 2.094...

inline void write_graph(std::ostream& out, const StarGraph& g) {
    out << "star_graph 1\n";
    out << "N " << g.num_edges << "\n";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", g.edge_length);
    out << "L " << buf << "\n";
    out << "units rad\nphi";
    for (double a : g.phi) {
        std::snprintf(buf, sizeof buf, "%.17g", a);
        out << " " << buf;
    }
    out << "\n";
}

inline StarGraph read_graph(std::istream& in) {
    int num_edges = -1;
    double edge_length = -1.0;
    bool fractions = false;
    std::vector<double> phi;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key) || key.empty() || key[0] == '#') continue;
        if (key == "star_graph") continue;
        if (key == "N") ls >> num_edges;
        else if (key == "L") ls >> edge_length;
        else if (key == "units") {
            std::string units;
            ls >> units;
            if (units == "frac") fractions = true;
            else if (units != "rad")
                throw std::invalid_argument("read_graph: unknown units '" + units + "'");
        } else if (key == "phi") {
            double v;
            while (ls >> v) phi.push_back(v);
        } else {
            throw std::invalid_argument("read_graph: unknown key '" + key + "'");
        }
    }
    if (num_edges < 0 || edge_length < 0.0 || phi.empty())
        throw std::invalid_argument("read_graph: record is missing N, L, or phi");
    if (fractions)
        for (double& a : phi) a *= two_pi;
    return make_star_graph(num_edges, edge_length, std::move(phi));
}

}  // namespace starspec
