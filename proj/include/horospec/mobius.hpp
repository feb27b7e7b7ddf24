#pragma once

#include <cmath>
#include <complex>

#include "horospec/errors.hpp"

namespace horospec {

using HPoint = std::complex<double>; // upper half-plane, Im > 0

inline HPoint make_hpoint(double re, double im) {
    if (!(im > 0.0) || !std::isfinite(re) || !std::isfinite(im))
        throw precondition_error("hpoint: Im(z) must be strictly positive and finite");
    return HPoint(re, im);
}

// Unit-determinant 2x2 real matrix [[a,b],[c,d]], sign-normalized so that the
// first nonzero entry in reading order is positive (one representative per
// element of PSL(2;R)).
struct GroupElement {
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

    double det() const { return a * d - b * c; }
    double trace() const { return a + d; }
};

namespace detail {

inline void sign_normalize(GroupElement& g) {
    double lead = g.a;
    if (lead == 0.0) lead = g.b;
    if (lead == 0.0) lead = g.c;
    if (lead == 0.0) lead = g.d;
    if (lead < 0.0) { g.a = -g.a; g.b = -g.b; g.c = -g.c; g.d = -g.d; }
}

// restore det = 1 when drift exceeds 1e-13, then pick the PSL sign
inline void renormalize(GroupElement& g) {
    const double dt = g.det();
    if (std::abs(dt - 1.0) > 1e-13) {
        const double s = 1.0 / std::sqrt(dt);
        g.a *= s; g.b *= s; g.c *= s; g.d *= s;
    }
    sign_normalize(g);
}

} // namespace detail

inline GroupElement identity_element() { return GroupElement{}; }

inline GroupElement make_element(double a, double b, double c, double d) {
    GroupElement g{a, b, c, d};
    detail::renormalize(g);
    return g;
}

inline GroupElement compose(const GroupElement& g, const GroupElement& h) {
    GroupElement r{g.a * h.a + g.b * h.c, g.a * h.b + g.b * h.d,
                   g.c * h.a + g.d * h.c, g.c * h.b + g.d * h.d};
    detail::renormalize(r);
    return r;
}

inline GroupElement inverse(const GroupElement& g) {
    GroupElement r{g.d, -g.b, -g.c, g.a};
    detail::renormalize(r);
    return r;
}

// a_s = diag(e^{s/2}, e^{-s/2}); conjugating the unipotent subgroup by a_s
// rescales its parameter by e^{s}
inline GroupElement geodesic_element(double s) {
    if (!(std::abs(s) <= 700.0))
        throw range_error("geodesic_element: |s| must be <= 700");
    const double e = std::exp(0.5 * s);
    return GroupElement{e, 0.0, 0.0, 1.0 / e};
}

// n_t = [[1,t],[0,1]]; satisfies a_s n_t a_{-s} = n_{e^s t} exactly
inline GroupElement horocycle_element(double t) {
    if (!std::isfinite(t)) throw range_error("horocycle_element: t must be finite");
    return GroupElement{1.0, t, 0.0, 1.0};
}

// lower-triangular variant used by the positive-orientation convention
inline GroupElement horocycle_element_neg(double t) {
    if (!std::isfinite(t)) throw range_error("horocycle_element_neg: t must be finite");
    return GroupElement{1.0, 0.0, t, 1.0};
}

// rotation by angle theta about i (the stabilizer circle of i)
inline GroupElement rotation_element(double theta) {
    const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
    GroupElement g{c, s, -s, c};
    detail::sign_normalize(g);
    return g;
}

inline HPoint mobius_act(const GroupElement& g, const HPoint& z) {
    const std::complex<double> q(g.c * z.real() + g.d, g.c * z.imag());
    const double q2 = std::norm(q);
    if (!(std::sqrt(q2) >= 1e-300))
        throw degenerate_action_error("mobius_act: |cz+d| below representable scale");
    const std::complex<double> p(g.a * z.real() + g.b, g.a * z.imag());
    // imaginary part computed as Im z / |cz+d|^2: exact positivity
    const double re = (p.real() * q.real() + p.imag() * q.imag()) / q2;
    const double im = z.imag() / q2;
    return HPoint(re, im);
}

// d(z,w) = 2 asinh(|z-w| / (2 sqrt(Im z Im w))); equivalent to the arccosh
// form but stable near coincident points
inline double hyp_distance(const HPoint& z, const HPoint& w) {
    return 2.0 * std::asinh(std::abs(z - w) / (2.0 * std::sqrt(z.imag() * w.imag())));
}

} // namespace horospec
