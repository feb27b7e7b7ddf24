#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>
#include <unordered_set>
#include <vector>

#include "horospec/detail/rng.hpp"
#include "horospec/errors.hpp"
#include "horospec/phase.hpp"

namespace horospec {

// Regular-octagon closing condition (vertex angle pi/4): the right triangle
// center / edge-midpoint / vertex has angles pi/8, pi/2, pi/8, which fixes
//   inradius     r  = arccosh(cot(pi/8)) = arccosh(1+sqrt(2)),
//   circumradius R  = arccosh(cot^2(pi/8)) = arccosh(3+2 sqrt(2)),
// and the side-pairing translation length 2r.
struct OctagonGeometry {
    static double inradius() { return std::acosh(1.0 + std::sqrt(2.0)); }
    static double circumradius() { return std::acosh(3.0 + 2.0 * std::sqrt(2.0)); }
    static double translation_length() { return 2.0 * inradius(); }
};

// Genus-2 cocompact group of the regular octagon. generators[0..3] are
// g1..g4, generators[4..7] their inverses.
struct FuchsianGroup {
    std::array<GroupElement, 8> generators;
    std::vector<int> relation_word; // signed 1-based generator indices
    HPoint dirichlet_center{0.0, 1.0};
    double translation_length = 0.0;
    double inradius = 0.0;
    double circumradius = 0.0;

    const GroupElement& gen(int signed_index) const {
        return signed_index > 0 ? generators[static_cast<std::size_t>(signed_index - 1)]
                                : generators[static_cast<std::size_t>(3 - signed_index)];
    }
};

inline GroupElement evaluate_word(const FuchsianGroup& G, const std::vector<int>& word) {
    GroupElement m = identity_element();
    for (int j : word) m = compose(m, G.gen(j));
    return m;
}

// entrywise distance to +-I (PSL identity)
inline double identity_residual(const GroupElement& m) {
    const double plus = std::max({std::abs(m.a - 1.0), std::abs(m.b), std::abs(m.c),
                                  std::abs(m.d - 1.0)});
    const double minus = std::max({std::abs(m.a + 1.0), std::abs(m.b), std::abs(m.c),
                                   std::abs(m.d + 1.0)});
    return std::min(plus, minus);
}

namespace detail {

inline void check_group(const FuchsianGroup& G) {
    const double res = identity_residual(evaluate_word(G, G.relation_word));
    if (!(res <= 1e-10))
        throw construction_error("group relation word does not close (residual " +
                                 std::to_string(res) + ")");
    for (const auto& g : G.generators)
        if (!(std::abs(g.trace()) > 2.0))
            throw construction_error("group generator is not hyperbolic");
}

} // namespace detail

// The four side-pairing translations g_k = R_{k pi/4} T R_{k pi/4}^{-1},
// k = 0..3, with T the translation of length 2 arccosh(1+sqrt(2)) along the
// axis through i. They pair opposite sides of the regular octagon; the single
// vertex cycle gives the defining relator
//   g1 g2^{-1} g3 g4^{-1} g1^{-1} g2 g3^{-1} g4 = 1.
inline FuchsianGroup build_bolza() {
    FuchsianGroup G;
    G.translation_length = OctagonGeometry::translation_length();
    G.inradius = OctagonGeometry::inradius();
    G.circumradius = OctagonGeometry::circumradius();
    const GroupElement T = geodesic_element(G.translation_length);
    for (int k = 0; k < 4; ++k) {
        const GroupElement R = rotation_element(k * (3.14159265358979323846 / 4.0));
        G.generators[static_cast<std::size_t>(k)] = compose(compose(R, T), inverse(R));
    }
    for (int k = 0; k < 4; ++k)
        G.generators[static_cast<std::size_t>(k + 4)] =
            inverse(G.generators[static_cast<std::size_t>(k)]);
    G.relation_word = {1, -2, 3, -4, -1, 2, -3, 4};
    detail::check_group(G);
    return G;
}

// plain-text matrix list, 16 decimal digits, one generator per line (a b c d)
inline void export_generators(const FuchsianGroup& G, std::ostream& os) {
    os.precision(16);
    os << std::scientific;
    for (int k = 0; k < 4; ++k) {
        const auto& g = G.generators[static_cast<std::size_t>(k)];
        os << g.a << ' ' << g.b << ' ' << g.c << ' ' << g.d << '\n';
    }
}

inline FuchsianGroup import_generators(std::istream& is) {
    FuchsianGroup G;
    G.translation_length = OctagonGeometry::translation_length();
    G.inradius = OctagonGeometry::inradius();
    G.circumradius = OctagonGeometry::circumradius();
    for (int k = 0; k < 4; ++k) {
        double a, b, c, d;
        if (!(is >> a >> b >> c >> d))
            throw construction_error("generator file: expected 4 matrices of 4 entries");
        G.generators[static_cast<std::size_t>(k)] = make_element(a, b, c, d);
    }
    for (int k = 0; k < 4; ++k)
        G.generators[static_cast<std::size_t>(k + 4)] =
            inverse(G.generators[static_cast<std::size_t>(k)]);
    G.relation_word = {1, -2, 3, -4, -1, 2, -3, 4};
    detail::check_group(G);
    return G;
}

// Greedy descent to the canonical coset representative: repeatedly apply the
// generator giving the largest strict decrease (> 1e-13) of the base-point
// distance to the Dirichlet center, ties broken by lowest generator index.
inline PhasePoint reduce(PhasePoint p, const FuchsianGroup& G, int max_iter = 10000) {
    if (p.kind != BackendKind::hyperbolic)
        throw precondition_error("reduce: hyperbolic backend only");
    const HPoint c = G.dirichlet_center;
    for (int it = 0; it < max_iter; ++it) {
        const double d0 = hyp_distance(base_point(p), c);
        int best = -1;
        double best_d = d0 - 1e-13;
        for (int k = 0; k < 8; ++k) {
            const GroupElement cand = compose(G.generators[static_cast<std::size_t>(k)], p.rep);
            const double dk = hyp_distance(mobius_act(cand, HPoint(0.0, 1.0)), c);
            if (dk < best_d) {
                best = k;
                best_d = dk;
            }
        }
        if (best < 0) {
            p.reduced = true;
            return p;
        }
        p.rep = compose(G.generators[static_cast<std::size_t>(best)], p.rep);
    }
    throw reduction_failure("reduce: descent did not terminate (corrupted representative)");
}

// Polar equation of the octagon boundary seen from the center: the ray at
// angle phi exits through the side whose normal direction psi_k minimizes
// the crossing radius, tanh(rho) cos(phi - psi_k) = tanh(inradius).
inline double octagon_boundary_radius(double phi) {
    const double tr = std::tanh(OctagonGeometry::inradius());
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 8; ++k) {
        const double psi = 1.5707963267948966 + k * (3.14159265358979323846 / 4.0);
        const double cs = std::cos(phi - psi);
        if (cs <= 0.0) continue;
        const double t = tr / cs;
        if (t < 1.0) best = std::min(best, std::atanh(t));
    }
    return best;
}

// phase point from octagon-polar coordinates plus fiber angle
inline PhasePoint phase_from_polar(double phi, double rho, double theta) {
    GroupElement m = compose(rotation_element(phi), geodesic_element(rho));
    m = compose(m, rotation_element(theta));
    return hyperbolic_point(m);
}

// n points distributed per the invariant probability measure: base points
// uniform w.r.t. hyperbolic area in the Dirichlet octagon (rejection from the
// circumradius disk), independent uniform fiber angle.
inline std::vector<PhasePoint> sample_phase(const FuchsianGroup& G, std::size_t n,
                                            std::uint64_t seed) {
    std::vector<PhasePoint> out;
    out.reserve(n);
    detail::Rng rng(seed);
    const double coshR = std::cosh(G.circumradius);
    while (out.size() < n) {
        const double phi = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
        const double rho = std::acosh(1.0 + rng.uniform() * (coshR - 1.0));
        const double theta = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
        PhasePoint cand = phase_from_polar(phi, rho, theta);
        PhasePoint red = reduce(cand, G);
        if (hyp_distance(base_point(red), base_point(cand)) < 1e-9) {
            cand.reduced = true;
            out.push_back(cand);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Orbit enumeration and the invariant series built on it
// ---------------------------------------------------------------------------

struct OrbitBall {
    std::vector<HPoint> centers; // gamma * center, sorted by distance
    std::vector<double> dist;    // distance of each center from the base center
    int max_word_length = 0;
    double d_keep = 0.0;
};

namespace detail {

struct OrbitKey {
    std::int64_t q1, q2;
    bool operator==(const OrbitKey& o) const { return q1 == o.q1 && q2 == o.q2; }
};

struct OrbitKeyHash {
    std::size_t operator()(const OrbitKey& k) const {
        return std::hash<std::int64_t>()(k.q1) ^
               (std::hash<std::int64_t>()(k.q2) * 0x9e3779b97f4a7c15ULL);
    }
};

// quantization adapted to the hyperbolic metric: distinct orbit points are
// separated by at least the systole (~3.06), so 1e-4 bins cannot merge them
inline OrbitKey orbit_key(const HPoint& z) {
    return OrbitKey{static_cast<std::int64_t>(std::llround(z.real() / z.imag() / 1e-4)),
                    static_cast<std::int64_t>(std::llround(std::log(z.imag()) / 1e-4))};
}

} // namespace detail

// Breadth-first enumeration of {gamma * center : d(gamma center, center) <= d_keep},
// pruned at d_keep + prune_margin. The margin covers the detour a shortest
// word path can make relative to the metric geodesic.
inline OrbitBall enumerate_orbit(const FuchsianGroup& G, const HPoint& center, double d_keep,
                                 int max_word_length = 12, double prune_margin = 3.2) {
    OrbitBall ball;
    ball.d_keep = d_keep;
    std::unordered_set<detail::OrbitKey, detail::OrbitKeyHash> seen;
    struct Node {
        GroupElement m;
        HPoint z;
    };
    std::vector<Node> frontier{{identity_element(), center}};
    seen.insert(detail::orbit_key(center));
    ball.centers.push_back(center);
    ball.dist.push_back(0.0);
    int depth = 0;
    while (!frontier.empty()) {
        ++depth;
        if (depth > max_word_length)
            throw config_error("orbit enumeration: word length cap exceeded");
        std::vector<Node> next;
        for (const auto& node : frontier) {
            for (int k = 0; k < 8; ++k) {
                GroupElement m = compose(G.generators[static_cast<std::size_t>(k)], node.m);
                const HPoint z = mobius_act(m, center);
                const double d = hyp_distance(z, center);
                if (d > d_keep + prune_margin) continue;
                if (!seen.insert(detail::orbit_key(z)).second) continue;
                if (d <= d_keep) {
                    ball.centers.push_back(z);
                    ball.dist.push_back(d);
                }
                next.push_back({m, z});
            }
        }
        frontier = std::move(next);
    }
    ball.max_word_length = depth;
    std::vector<std::size_t> order(ball.centers.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return ball.dist[i] < ball.dist[j]; });
    OrbitBall sorted;
    sorted.d_keep = ball.d_keep;
    sorted.max_word_length = ball.max_word_length;
    sorted.centers.reserve(order.size());
    sorted.dist.reserve(order.size());
    for (std::size_t i : order) {
        // drop numerically duplicated elements (same point re-reached across a
        // quantization bin boundary); distinct orbit points are systole-separated,
        // so only entries at essentially equal distance can collide
        bool dup = false;
        for (std::size_t j = sorted.centers.size(); j-- > 0;) {
            if (ball.dist[i] - sorted.dist[j] > 1e-6) break;
            if (hyp_distance(ball.centers[i], sorted.centers[j]) < 0.5) {
                dup = true;
                break;
            }
        }
        if (dup) continue;
        sorted.centers.push_back(ball.centers[i]);
        sorted.dist.push_back(ball.dist[i]);
    }
    return sorted;
}

// Truncated invariant series u(z) = sum_gamma exp(-beta cosh(d(z, gamma c)/radius)).
// Terms with d(gamma c, z) > cut_span are below 1e-13 in aggregate and are
// skipped via a binary search on the sorted center distances.
struct PoincareSeries {
    std::shared_ptr<const OrbitBall> ball;
    double beta = 2.0;
    double radius = 1.0;
    HPoint center{0.0, 1.0};
    double cut_span = 0.0;     // per-evaluation inclusion span around d(z, center)
    double tail_bound = 0.0;   // omitted-orbit bound over the evaluation region
    double eval_radius = 0.0;  // region d(z, center) <= eval_radius where the bound holds

    double value(const HPoint& z) const {
        const auto& cs = ball->centers;
        const auto& ds = ball->dist;
        const double zi = z.imag();
        const double dz =
            2.0 * std::asinh(std::abs(z - center) / (2.0 * std::sqrt(zi * center.imag())));
        const auto last = std::upper_bound(ds.begin(), ds.end(), dz + cut_span);
        const std::size_t n = static_cast<std::size_t>(last - ds.begin());
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double d =
                2.0 * std::asinh(std::abs(z - cs[j]) / (2.0 * std::sqrt(zi * cs[j].imag())));
            acc += std::exp(-beta * std::cosh(d / radius));
        }
        return acc;
    }

    ScalarField field() const {
        PoincareSeries self = *this;
        ScalarField f;
        f.eval = [self](const PhasePoint& p) {
            return std::complex<double>(self.value(base_point(p)), 0.0);
        };
        f.smoothness_scale = radius;
        f.label = "poincare(beta=" + std::to_string(beta) + ",radius=" + std::to_string(radius) + ")";
        return f;
    }
};

namespace detail {

// conservative orbit-count majorant fitted on an enumerated ball: the number
// of orbit points with distance <= d is bounded by coef * e^d
inline double orbit_count_coef(const OrbitBall& ball) {
    double coef = 1.0;
    for (double d = 3.0; d <= ball.d_keep; d += 0.5) {
        const auto it = std::upper_bound(ball.dist.begin(), ball.dist.end(), d);
        const double n = static_cast<double>(it - ball.dist.begin());
        coef = std::max(coef, n / std::exp(d));
    }
    return 4.0 * coef;
}

} // namespace detail

// Builds the truncated series with a certified omitted-tail bound <= 1e-10
// over {d(z, center) <= circumradius + 3.2} (the octagon plus one generator
// step, which is where the flows evaluate it).
inline PoincareSeries make_poincare_series(const FuchsianGroup& G, double beta, double radius,
                                           HPoint center = HPoint(0.0, 1.0)) {
    if (!(beta > 0.0) || !(radius > 0.0))
        throw precondition_error("poincare series: beta and radius must be positive");
    PoincareSeries s;
    s.beta = beta;
    s.radius = radius;
    s.center = center;
    s.eval_radius = OctagonGeometry::circumradius() + 3.2;

    const auto prof = [&](double d) { return std::exp(-beta * std::cosh(std::max(0.0, d) / radius)); };
    OrbitBall probe = enumerate_orbit(G, center, 7.0);
    const double coef = detail::orbit_count_coef(probe);

    // tail of all orbit points farther than dz + span from an evaluation point
    // at distance dz <= eval_radius from the center
    const auto tail_beyond_span = [&](double span) {
        double t = 0.0;
        for (int m = 0; m < 64; ++m) {
            const double cnt = coef * std::exp(s.eval_radius + span + m + 1.0);
            const double term = cnt * prof(span + m);
            t += term;
            if (term < 1e-300) break;
        }
        return t;
    };

    bool found = false;
    for (double span = 1.0; span <= 14.0; span += 0.25) {
        if (tail_beyond_span(span) <= 1e-10) {
            s.cut_span = span;
            found = true;
            break;
        }
    }
    if (!found)
        throw config_error("poincare series: tail bound 1e-10 not achievable (profile too flat)");

    const double d_keep = s.eval_radius + s.cut_span;
    auto ball = std::make_shared<OrbitBall>(enumerate_orbit(G, center, d_keep));
    if (ball->max_word_length > 12)
        throw config_error("poincare series: truncation word length exceeds 12");
    s.tail_bound = tail_beyond_span(s.cut_span);
    s.ball = std::move(ball);
    return s;
}

inline ScalarField periodic_function(const FuchsianGroup& G, double beta, double radius,
                                     HPoint center = HPoint(0.0, 1.0)) {
    return make_poincare_series(G, beta, radius, center).field();
}

} // namespace horospec
