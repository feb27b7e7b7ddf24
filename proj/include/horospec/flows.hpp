#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "horospec/detail/ode.hpp"
#include "horospec/errors.hpp"
#include "horospec/phase.hpp"
#include "horospec/surface.hpp"

namespace horospec {

// Realization of the flow pair on a backend. The built-in backends realize
// the rescaling isomorphism e(s) = e^s exactly; the positive orientation flag
// swaps to the opposite unipotent family (and reverses the translation flow
// on the planar backend) so that e(s) = e^s is preserved.
struct FlowBackend {
    BackendKind kind = BackendKind::planar;
    std::shared_ptr<const FuchsianGroup> group; // hyperbolic only
    bool positive_orientation = false;
    double e_prime0 = 1.0;
};

inline FlowBackend bolza_backend(std::shared_ptr<const FuchsianGroup> G,
                                 bool positive_orientation = false) {
    if (!G) throw precondition_error("bolza_backend: group required");
    FlowBackend b;
    b.kind = BackendKind::hyperbolic;
    b.group = std::move(G);
    b.positive_orientation = positive_orientation;
    return b;
}

inline FlowBackend planar_backend(bool positive_orientation = false) {
    FlowBackend b;
    b.kind = BackendKind::planar;
    b.positive_orientation = positive_orientation;
    return b;
}

// unipotent flow: right translation by n_t, reduced to the canonical
// representative; planar model: translation in x
inline PhasePoint horocycle(const FlowBackend& bk, const PhasePoint& p, double t) {
    if (bk.kind == BackendKind::planar) {
        return planar_point(p.x + (bk.positive_orientation ? -t : t), p.y);
    }
    const GroupElement n =
        bk.positive_orientation ? horocycle_element_neg(t) : horocycle_element(t);
    PhasePoint q = hyperbolic_point(compose(p.rep, n));
    return reduce(q, *bk.group);
}

// diagonal flow: right translation by a_s; planar model: the area-preserving
// shear (x, y) -> (e^{-s} x, e^{s} y)
inline PhasePoint geodesic(const FlowBackend& bk, const PhasePoint& p, double s) {
    if (bk.kind == BackendKind::planar) {
        return planar_point(std::exp(-s) * p.x, std::exp(s) * p.y);
    }
    const GroupElement a = geodesic_element(bk.positive_orientation ? -s : s);
    PhasePoint q = hyperbolic_point(compose(p.rep, a));
    return reduce(q, *bk.group);
}

inline PhasePoint flow(const FlowBackend& bk, int j, const PhasePoint& p, double t) {
    if (j == 1) return horocycle(bk, p, t);
    if (j == 2) return geodesic(bk, p, t);
    throw precondition_error("flow: index must be 1 or 2");
}

struct ReparamResult {
    double h = 0.0;         // reparametrized time
    PhasePoint endpoint;
    long steps = 0;
    double est_error = 0.0;
};

namespace detail {

template <class SpeedEval>
struct ReparamRhs {
    const SpeedEval& speed;
    double operator()(double h) const { return speed(h); }
};

} // namespace detail

// Solves dh/dt = speed(F_{1,h}(p)), h(0) = 0, up to time t by adaptive
// embedded Runge-Kutta. speed must be bounded below by delta > 0.
inline ReparamResult reparam_speed(const FlowBackend& bk, const PhasePoint& p, double t,
                                   const ScalarField& speed, double delta, double tol) {
    if (!(delta > 0.0))
        throw precondition_error("reparam: speed function must have a positive lower bound");
    if (!(tol >= 1e-12 && tol <= 1e-6))
        throw precondition_error("reparam: tol must lie in [1e-12, 1e-6]");
    const auto rhs = [&](double h) { return speed(horocycle(bk, p, h)).real(); };
    detail::Dopri5 solver(rhs, 0.0, 0.0, tol);
    solver.advance(t);
    ReparamResult r;
    r.h = solver.y();
    r.steps = solver.stats().steps;
    r.est_error = solver.stats().est_error;
    r.endpoint = horocycle(bk, p, r.h);
    return r;
}

// One integration pass producing h(p, t_k) on a monotone grid of times
// (all >= 0 or all <= 0), reusing the integrator state across outputs.
inline std::vector<double> reparam_grid(const FlowBackend& bk, const PhasePoint& p,
                                        const std::vector<double>& times,
                                        const ScalarField& speed, double delta, double tol) {
    if (!(delta > 0.0))
        throw precondition_error("reparam: speed function must have a positive lower bound");
    if (!(tol >= 1e-12 && tol <= 1e-6))
        throw precondition_error("reparam: tol must lie in [1e-12, 1e-6]");
    const auto rhs = [&](double h) { return speed(horocycle(bk, p, h)).real(); };
    detail::Dopri5 solver(rhs, 0.0, 0.0, tol);
    std::vector<double> out;
    out.reserve(times.size());
    for (double tk : times) {
        solver.advance(tk);
        out.push_back(solver.y());
    }
    return out;
}

} // namespace horospec
