#pragma once

// Discrete chord-length inequality on the unit circle: for the edge
// directions y_1..y_N of a star graph and each shift m, the sum of squared
// chords between edges m apart is compared against the equal-angle value
//   sum_n |y_{n+m} - y_n|^2  vs  4 N sin^2(pi m / N).
// The report records both sides and the slack for every shift; equality at
// every m characterizes the symmetric star.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "starspec/geometry.hpp"

namespace starspec {

// Slack below this magnitude counts as numerical zero in the report flags.
inline constexpr double chord_slack_tolerance = 1e-12;

struct ChordReport {
    int num_edges = 0;
    std::vector<double> lhs;    // index m-1, for m = 1..N-1
    std::vector<double> rhs;
    std::vector<double> slack;  // rhs - lhs
    bool all_nonneg = false;    // every slack >= -chord_slack_tolerance
    bool strict_at_1 = false;   // slack at m = 1 resolvably positive
};

// Sum of squared chords between edges m apart (cyclically).  m = N is the
// full cycle and gives exactly zero.
inline double chord_sum(const StarGraph& g, int m) {
    const int n = g.num_edges;
    if (m < 1 || m > n)
        throw std::invalid_argument("chord_sum: shift must lie in [1, N]");
    double sum = 0.0;
    for (int k = 0; k < n; ++k) sum += chord_sq(g, (k + m) % n, k);
    return sum;
}

// Equal-angle value 4 N sin^2(pi m / N) of the chord sum.
inline double jensen_bound(int num_edges, int m) {
    if (num_edges < 2) throw std::invalid_argument("jensen_bound: need at least two edges");
    if (m < 1 || m > num_edges - 1)
        throw std::invalid_argument("jensen_bound: shift must lie in [1, N-1]");
    const double s = std::sin(M_PI * m / num_edges);
    return 4.0 * num_edges * s * s;
}

inline ChordReport verify_inequality(const StarGraph& g) {
    ChordReport rep;
    rep.num_edges = g.num_edges;
    rep.all_nonneg = true;
    for (int m = 1; m <= g.num_edges - 1; ++m) {
        const double lhs = chord_sum(g, m);
        const double rhs = jensen_bound(g.num_edges, m);
        rep.lhs.push_back(lhs);
        rep.rhs.push_back(rhs);
        rep.slack.push_back(rhs - lhs);
        if (rhs - lhs < -chord_slack_tolerance) rep.all_nonneg = false;
    }
    rep.strict_at_1 = !rep.slack.empty() && rep.slack.front() > chord_slack_tolerance;
    return rep;
}

}  // namespace starspec
