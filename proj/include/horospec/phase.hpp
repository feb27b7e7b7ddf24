#pragma once

#include <complex>
#include <functional>
#include <string>

#include "horospec/mobius.hpp"

namespace horospec {

enum class BackendKind { hyperbolic, planar };

// A point of the phase manifold. Hyperbolic backend: coset representative of
// Gamma g, fiber stored implicitly in the group element. Planar backend:
// coordinates (x, y).
struct PhasePoint {
    BackendKind kind = BackendKind::hyperbolic;
    GroupElement rep;       // hyperbolic
    bool reduced = false;
    double x = 0.0, y = 0.0; // planar
};

inline PhasePoint hyperbolic_point(const GroupElement& rep, bool reduced = false) {
    PhasePoint p;
    p.kind = BackendKind::hyperbolic;
    p.rep = rep;
    p.reduced = reduced;
    return p;
}

inline PhasePoint planar_point(double x, double y) {
    PhasePoint p;
    p.kind = BackendKind::planar;
    p.x = x;
    p.y = y;
    return p;
}

// projected base point on the upper half-plane (hyperbolic backend)
inline HPoint base_point(const PhasePoint& p) {
    return mobius_act(p.rep, HPoint(0.0, 1.0));
}

// Complex-valued field on the phase manifold. smoothness_scale is the
// characteristic length used to pick finite-difference steps.
struct ScalarField {
    std::function<std::complex<double>(const PhasePoint&)> eval;
    double smoothness_scale = 1.0;
    std::string label;

    std::complex<double> operator()(const PhasePoint& p) const { return eval(p); }
};

inline ScalarField constant_field(std::complex<double> c, std::string label = "const") {
    return ScalarField{[c](const PhasePoint&) { return c; }, 1.0, std::move(label)};
}

} // namespace horospec
