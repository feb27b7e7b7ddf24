#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <complex>
#include <sstream>

#include "horospec/detail/quadrature.hpp"
#include "horospec/detail/rng.hpp"
#include "horospec/surface.hpp"

using namespace horospec;

namespace {

constexpr double kPi = 3.14159265358979323846;

double entrywise_diff(const GroupElement& g, const GroupElement& h) {
    return std::max({std::abs(g.a - h.a), std::abs(g.b - h.b), std::abs(g.c - h.c),
                     std::abs(g.d - h.d)});
}

// independent long double evaluation of the relation word (construction oracle)
long double relation_residual_extended() {
    using C = std::array<long double, 4>; // a b c d
    const long double ell = 2.0L * std::acosh(1.0L + std::sqrt(2.0L));
    auto mul = [](const C& g, const C& h) {
        return C{g[0] * h[0] + g[1] * h[2], g[0] * h[1] + g[1] * h[3],
                 g[2] * h[0] + g[3] * h[2], g[2] * h[1] + g[3] * h[3]};
    };
    auto rot = [](long double th) {
        return C{std::cos(th / 2), std::sin(th / 2), -std::sin(th / 2), std::cos(th / 2)};
    };
    const C T{std::exp(ell / 2), 0.0L, 0.0L, std::exp(-ell / 2)};
    std::array<C, 4> g;
    for (int k = 0; k < 4; ++k) {
        const C R = rot(k * (static_cast<long double>(kPi) / 4));
        const C Ri{R[3], -R[1], -R[2], R[0]};
        g[static_cast<std::size_t>(k)] = mul(mul(R, T), Ri);
    }
    auto inv = [](const C& m) { return C{m[3], -m[1], -m[2], m[0]}; };
    const std::array<int, 8> word{1, -2, 3, -4, -1, 2, -3, 4};
    C acc{1.0L, 0.0L, 0.0L, 1.0L};
    for (int j : word)
        acc = mul(acc, j > 0 ? g[static_cast<std::size_t>(j - 1)]
                             : inv(g[static_cast<std::size_t>(-j - 1)]));
    const long double plus = std::max({std::abs(acc[0] - 1), std::abs(acc[1]), std::abs(acc[2]),
                                       std::abs(acc[3] - 1)});
    const long double minus = std::max({std::abs(acc[0] + 1), std::abs(acc[1]), std::abs(acc[2]),
                                        std::abs(acc[3] + 1)});
    return std::min(plus, minus);
}

// quadrature over the octagon in geodesic polar coordinates about i:
// integral of F(z) dA = int_phi int_0^{rho_max(phi)} F sinh(rho) drho dphi
double octagon_integral(const std::function<double(const HPoint&)>& F, int phi_panels = 64,
                        int gl_nodes = 16) {
    std::vector<double> x, w;
    detail::gauss_legendre(gl_nodes, x, w);
    double total = 0.0;
    for (int pp = 0; pp < phi_panels; ++pp) {
        const double a = 2.0 * kPi * pp / phi_panels, b = 2.0 * kPi * (pp + 1) / phi_panels;
        for (int i = 0; i < gl_nodes; ++i) {
            const double phi = 0.5 * (a + b) + 0.5 * (b - a) * x[static_cast<std::size_t>(i)];
            const double wphi = 0.5 * (b - a) * w[static_cast<std::size_t>(i)];
            const double rmax = octagon_boundary_radius(phi);
            double inner = 0.0;
            for (int k = 0; k < gl_nodes; ++k) {
                const double rho = 0.5 * rmax * (1.0 + x[static_cast<std::size_t>(k)]);
                const double wr = 0.5 * rmax * w[static_cast<std::size_t>(k)];
                const HPoint z = mobius_act(
                    compose(rotation_element(phi), geodesic_element(rho)), HPoint(0.0, 1.0));
                inner += wr * F(z) * std::sinh(rho);
            }
            total += wphi * inner;
        }
    }
    return total;
}

} // namespace

TEST_CASE("regular octagon closing condition") {
    CHECK(OctagonGeometry::inradius() == Catch::Approx(std::acosh(1.0 + std::sqrt(2.0))));
    CHECK(OctagonGeometry::circumradius() == Catch::Approx(2.4484524476780756));
    // polar boundary hits the inradius at edge normals, circumradius at vertices
    CHECK(octagon_boundary_radius(kPi / 2.0) == Catch::Approx(OctagonGeometry::inradius()));
    CHECK(octagon_boundary_radius(kPi / 2.0 + kPi / 8.0) ==
          Catch::Approx(OctagonGeometry::circumradius()));
    // total area 4 pi (genus-2 Gauss-Bonnet)
    const double area = octagon_integral([](const HPoint&) { return 1.0; });
    CHECK(area == Catch::Approx(4.0 * kPi).epsilon(1e-10));
}

TEST_CASE("bolza group construction") {
    const FuchsianGroup G = build_bolza();
    CHECK(identity_residual(evaluate_word(G, G.relation_word)) <= 1e-10);
    CHECK(static_cast<double>(relation_residual_extended()) < 1e-16);
    for (const auto& g : G.generators) CHECK(std::abs(g.trace()) > 2.0);
    CHECK(std::abs(G.generators[0].trace()) ==
          Catch::Approx(2.0 * (1.0 + std::sqrt(2.0))).epsilon(1e-14));

    // construction symmetry: conjugating g1 by the pi/4 rotation gives g2
    const GroupElement R = rotation_element(kPi / 4.0);
    const GroupElement g2 = compose(compose(R, G.generators[0]), inverse(R));
    CHECK(entrywise_diff(g2, G.generators[1]) < 1e-12);
}

TEST_CASE("generator export/import round trip and fault injection") {
    const FuchsianGroup G = build_bolza();
    std::stringstream ss;
    export_generators(G, ss);
    const FuchsianGroup H = import_generators(ss);
    for (int k = 0; k < 8; ++k)
        CHECK(entrywise_diff(G.generators[static_cast<std::size_t>(k)],
                             H.generators[static_cast<std::size_t>(k)]) < 1e-12);

    std::stringstream broken;
    broken << "1.01 0 0 0.9901\n0 1 -1 0\n1 1 0 1\n1 0 1 1\n";
    CHECK_THROWS_AS(import_generators(broken), construction_error);
}

TEST_CASE("reduce properties") {
    const FuchsianGroup G = build_bolza();
    const HPoint i(0.0, 1.0);

    // identity representative is already minimal
    PhasePoint id = hyperbolic_point(identity_element());
    PhasePoint idr = reduce(id, G);
    CHECK(entrywise_diff(idr.rep, identity_element()) < 1e-15);
    CHECK(idr.reduced);

    detail::Rng rng(101);
    double worst_coset = 0.0;
    double worst_radius = 0.0;
    for (int trial = 0; trial < 10000; ++trial) {
        const double phi = rng.uniform(0.0, 2.0 * kPi);
        const double rho = rng.uniform(0.0, 5.0);
        const double th = rng.uniform(0.0, 2.0 * kPi);
        PhasePoint p = phase_from_polar(phi, rho, th);
        PhasePoint r = reduce(p, G);

        // circumradius bound
        worst_radius = std::max(worst_radius, hyp_distance(base_point(r), i));

        // idempotence: exactly the same representative
        PhasePoint r2 = reduce(r, G);
        CHECK(entrywise_diff(r2.rep, r.rep) == 0.0);

        // same coset reduces to the same base point
        const auto k = rng.index(8);
        PhasePoint q = hyperbolic_point(compose(G.generators[k], p.rep));
        PhasePoint rq = reduce(q, G);
        worst_coset = std::max(worst_coset, hyp_distance(base_point(rq), base_point(r)));
    }
    CHECK(worst_radius <= OctagonGeometry::circumradius() + 1e-9);
    CHECK(worst_coset <= 1e-10);
}

TEST_CASE("phase sampling is deterministic and area-uniform") {
    const FuchsianGroup G = build_bolza();
    const auto pts1 = sample_phase(G, 2000, 77);
    const auto pts2 = sample_phase(G, 2000, 77);
    for (std::size_t k = 0; k < pts1.size(); ++k)
        CHECK(entrywise_diff(pts1[k].rep, pts2[k].rep) == 0.0);

    // half-plane cut Re z > 0.3: empirical fraction vs quadrature oracle
    const std::size_t n = 100000;
    const auto pts = sample_phase(G, n, 12345);
    double cnt = 0.0;
    for (const auto& p : pts) cnt += base_point(p).real() > 0.3 ? 1.0 : 0.0;
    const double frac = cnt / static_cast<double>(n);
    const double oracle =
        octagon_integral([](const HPoint& z) { return z.real() > 0.3 ? 1.0 : 0.0; },
                         512, 24) /
        (4.0 * kPi);
    const double sigma = std::sqrt(oracle * (1.0 - oracle) / static_cast<double>(n));
    CHECK(std::abs(frac - oracle) <= 3.0 * sigma + 2e-4); // oracle kink error allowance
}

TEST_CASE("invariant series") {
    const FuchsianGroup G = build_bolza();
    const PoincareSeries series = make_poincare_series(G, 2.0, 1.0);
    CHECK(series.tail_bound <= 1e-10);
    const ScalarField u = series.field();

    detail::Rng rng(301);
    double worst = 0.0;
    double umin = 1e300;
    for (int trial = 0; trial < 200; ++trial) {
        PhasePoint p = reduce(phase_from_polar(rng.uniform(0.0, 2.0 * kPi),
                                               rng.uniform(0.0, 2.4), 0.0),
                              G);
        const double uz = u(p).real();
        umin = std::min(umin, uz);
        for (int k = 0; k < 8; ++k) {
            PhasePoint q = hyperbolic_point(compose(G.generators[static_cast<std::size_t>(k)],
                                                    p.rep));
            worst = std::max(worst, std::abs(uz - u(q).real()));
        }
    }
    CHECK(worst <= 1e-9);
    CHECK(umin > 0.0);

    // identity-term lower bound at the center
    PhasePoint center = hyperbolic_point(identity_element(), true);
    CHECK(u(center).real() >= std::exp(-2.0));
}

TEST_CASE("sample mean against quadrature oracle") {
    const FuchsianGroup G = build_bolza();
    const PoincareSeries series = make_poincare_series(G, 2.0, 1.0);
    const ScalarField u = series.field();

    const std::size_t n = 100000;
    const auto pts = sample_phase(G, n, 999);
    double mean = 0.0, m2 = 0.0;
    for (const auto& p : pts) {
        const double v = u(p).real();
        mean += v;
        m2 += v * v;
    }
    mean /= static_cast<double>(n);
    const double var = m2 / static_cast<double>(n) - mean * mean;
    const double sigma = std::sqrt(var / static_cast<double>(n));

    // deterministic product quadrature over octagon x fiber; the series is
    // fiber-independent, so the fiber average is trivial
    const double oracle =
        octagon_integral([&](const HPoint& z) { return series.value(z); }, 64, 20) /
        (4.0 * kPi);
    CHECK(std::abs(mean - oracle) <= 3.0 * sigma);
}
