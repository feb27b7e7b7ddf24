#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "horospec/detail/rng.hpp"
#include "horospec/errors.hpp"
#include "horospec/flows.hpp"

namespace horospec {

// Derivative of phi along flow j at p: 4th-order central difference
// (-phi(F_{j,2h}) + 8 phi(F_{j,h}) - 8 phi(F_{j,-h}) + phi(F_{j,-2h})) / (12h).
inline std::complex<double> lie_derivative(const FlowBackend& bk, int j, const ScalarField& phi,
                                           const PhasePoint& p, double step) {
    if (!(step >= 1e-4 && step <= 1e-1))
        throw range_error("lie_derivative: step must lie in [1e-4, 1e-1]");
    const double h = step;
    return (-phi(flow(bk, j, p, 2.0 * h)) + 8.0 * phi(flow(bk, j, p, h)) -
            8.0 * phi(flow(bk, j, p, -h)) + phi(flow(bk, j, p, -2.0 * h))) /
           (12.0 * h);
}

inline double default_fd_step(const ScalarField& phi) {
    return std::clamp(1e-2 * phi.smoothness_scale, 1e-4, 1e-1);
}

// field-valued derivative along flow j (for nested differentiation)
inline ScalarField lie_derivative_field(const FlowBackend& bk, int j, const ScalarField& phi,
                                        double step = 0.0) {
    const double h = step > 0.0 ? step : default_fd_step(phi);
    ScalarField out;
    out.eval = [bk, j, phi, h](const PhasePoint& p) { return lie_derivative(bk, j, phi, p, h); };
    out.smoothness_scale = phi.smoothness_scale;
    out.label = "d" + std::to_string(j) + "(" + phi.label + ")";
    return out;
}

// Positive speed function with its derived auxiliary function
//   g = (e'(0) f + d_2 f) / (2 f),
// where d_2 is the derivative along flow 2. (The conjugation by the flow-2
// group that both commutator identities refer to is d/ds [ . o F_{2,s} ] at
// s = 0, which is +d_2; the lower bounds delta_f, delta_g are sampled
// certificates filled in by check_assumption.)
struct TimeChange {
    ScalarField f;
    ScalarField l2f; // derivative of f along flow 2 (finite differences or closed form)
    ScalarField g;
    double delta_f = 0.0;
    double delta_g = 0.0;
    double e_prime0 = 1.0;
    bool analytic_l2f = false;
};

inline TimeChange make_time_change(const FlowBackend& bk, ScalarField f,
                                   std::optional<ScalarField> analytic_l2f = std::nullopt,
                                   double fd_step = 0.0) {
    TimeChange tc;
    tc.e_prime0 = bk.e_prime0;
    tc.f = std::move(f);
    if (analytic_l2f) {
        tc.l2f = *analytic_l2f;
        tc.analytic_l2f = true;
    } else {
        tc.l2f = lie_derivative_field(bk, 2, tc.f, fd_step);
    }
    const ScalarField ff = tc.f;
    const ScalarField l2 = tc.l2f;
    const double e0 = tc.e_prime0;
    tc.g.eval = [ff, l2, e0](const PhasePoint& p) {
        const std::complex<double> fv = ff(p);
        return (e0 * fv + l2(p)) / (2.0 * fv);
    };
    tc.g.smoothness_scale = tc.f.smoothness_scale;
    tc.g.label = "g[" + tc.f.label + "]";
    return tc;
}

inline TimeChange constant_time_change(double c, double e_prime0 = 1.0) {
    if (!(c > 0.0)) throw precondition_error("constant time change must be positive");
    TimeChange tc;
    tc.f = constant_field(c, "const(" + std::to_string(c) + ")");
    tc.l2f = constant_field(0.0, "0");
    tc.analytic_l2f = true;
    tc.g = constant_field(0.5 * e_prime0, "g[const]");
    tc.delta_f = c;
    tc.delta_g = 0.5 * e_prime0;
    tc.e_prime0 = e_prime0;
    return tc;
}

// --- reparametrized flow -----------------------------------------------------

inline ReparamResult reparam(const FlowBackend& bk, const PhasePoint& p, double t,
                             const TimeChange& tc, double tol = 1e-10) {
    return reparam_speed(bk, p, t, tc.f, tc.delta_f, tol);
}

inline PhasePoint time_changed_flow(const FlowBackend& bk, const PhasePoint& p, double t,
                                    const TimeChange& tc, double tol = 1e-10) {
    return reparam(bk, p, t, tc, tol).endpoint;
}

// --- H = f^{1/2} H_1 f^{1/2} -------------------------------------------------

namespace detail {

// product-rule form: -i f d_1 phi - (i/2) (d_1 f) phi
inline std::complex<double> apply_h_product(const FlowBackend& bk, const ScalarField& phi,
                                            const ScalarField& f, const PhasePoint& p,
                                            double step) {
    const std::complex<double> i_unit(0.0, 1.0);
    const std::complex<double> d1phi = lie_derivative(bk, 1, phi, p, step);
    const std::complex<double> d1f = lie_derivative(bk, 1, f, p, step);
    return -i_unit * f(p) * d1phi - 0.5 * i_unit * d1f * phi(p);
}

// literal nesting: f^{1/2} (-i d_1) (f^{1/2} phi)
inline std::complex<double> apply_h_literal(const FlowBackend& bk, const ScalarField& phi,
                                            const ScalarField& f, const PhasePoint& p,
                                            double step) {
    ScalarField inner;
    inner.eval = [phi, f](const PhasePoint& q) { return std::sqrt(f(q).real()) * phi(q); };
    inner.smoothness_scale = phi.smoothness_scale;
    const std::complex<double> i_unit(0.0, 1.0);
    return std::sqrt(f(p).real()) * (-i_unit) * lie_derivative(bk, 1, inner, p, step);
}

} // namespace detail

// Applies H to phi at p. Primary route is the product-rule form (one fewer
// nested difference); when audit is set the literal nesting is evaluated too
// and a relative disagreement above 1e-5 raises.
inline std::complex<double> apply_H(const FlowBackend& bk, const ScalarField& phi,
                                    const TimeChange& tc, const PhasePoint& p, double step = 0.0,
                                    bool audit = false) {
    const double h = step > 0.0 ? step : default_fd_step(phi);
    const std::complex<double> v = detail::apply_h_product(bk, phi, tc.f, p, h);
    if (audit) {
        const std::complex<double> w = detail::apply_h_literal(bk, phi, tc.f, p, h);
        const double scale =
            std::max(std::abs(v), std::abs(w)) + std::abs(phi(p)) + std::abs(tc.f(p));
        if (std::abs(v - w) > 1e-5 * scale)
            throw numerical_differentiation_error(
                "apply_H: product-rule and literal forms disagree beyond 1e-5");
    }
    return v;
}

inline ScalarField apply_H_field(const FlowBackend& bk, const ScalarField& phi,
                                 const ScalarField& f, double step) {
    ScalarField out;
    out.eval = [bk, phi, f, step](const PhasePoint& p) {
        return detail::apply_h_product(bk, phi, f, p, step);
    };
    out.smoothness_scale = phi.smoothness_scale;
    out.label = "H(" + phi.label + ")";
    return out;
}

// --- commutator diagnostics --------------------------------------------------

// Defect of the rescaling commutation identity at p: with d_j the forward
// flow derivatives, (d_2 d_1 - d_1 d_2) phi - e'(0) d_1 phi, which vanishes
// identically when the backend satisfies the conjugation law with e(s) = e^s.
inline std::complex<double> commutator_defect_h1h2(const FlowBackend& bk, const ScalarField& phi,
                                                   const PhasePoint& p, double step) {
    const ScalarField d1 = lie_derivative_field(bk, 1, phi, step);
    const ScalarField d2 = lie_derivative_field(bk, 2, phi, step);
    return lie_derivative(bk, 2, d1, p, step) - lie_derivative(bk, 1, d2, p, step) -
           bk.e_prime0 * lie_derivative(bk, 1, phi, p, step);
}

// Both routes to the conjugation derivative of H^2:
//   A = (H^2 g + 2 H g H + g H^2) phi (p), nested applications;
//   B = d/ds [ e^{2s} H[f o F_{2,s}]^2 phi ](p) at s = 0 by central differences,
// where H[q] = q^{1/2} H_1 q^{1/2} (conjugating H by the flow-2 group rescales
// the unipotent derivative by e^s and transports f).
struct HsqCommutator {
    std::complex<double> conjugation_a; // operator-expression route
    std::complex<double> conjugation_b; // flow-conjugation route
};

inline HsqCommutator hsq_commutator(const FlowBackend& bk, const ScalarField& phi,
                                    const TimeChange& tc, const PhasePoint& p,
                                    double s_step = 2e-2) {
    const double h = default_fd_step(phi);

    const ScalarField g = tc.g;
    ScalarField g_phi;
    g_phi.eval = [g, phi](const PhasePoint& q) { return g(q) * phi(q); };
    g_phi.smoothness_scale = phi.smoothness_scale;

    const ScalarField h_phi = apply_H_field(bk, phi, tc.f, h);
    ScalarField g_h_phi;
    g_h_phi.eval = [g, h_phi](const PhasePoint& q) { return g(q) * h_phi(q); };
    g_h_phi.smoothness_scale = phi.smoothness_scale;

    const std::complex<double> term1 =
        apply_H_field(bk, apply_H_field(bk, g_phi, tc.f, h), tc.f, h)(p);
    const std::complex<double> term2 = 2.0 * apply_H_field(bk, g_h_phi, tc.f, h)(p);
    const std::complex<double> term3 =
        g(p) * apply_H_field(bk, h_phi, tc.f, h)(p);

    HsqCommutator out;
    out.conjugation_a = term1 + term2 + term3;

    const auto psi_at = [&](double s) {
        ScalarField fs;
        const ScalarField f = tc.f;
        fs.eval = [bk, f, s](const PhasePoint& q) { return f(geodesic(bk, q, s)); };
        fs.smoothness_scale = f.smoothness_scale;
        const ScalarField h1 = apply_H_field(bk, phi, fs, h);
        return std::exp(2.0 * s) * apply_H_field(bk, h1, fs, h)(p);
    };
    out.conjugation_b = (-psi_at(2.0 * s_step) + 8.0 * psi_at(s_step) - 8.0 * psi_at(-s_step) +
                         psi_at(-2.0 * s_step)) /
                        (12.0 * s_step);
    return out;
}

// --- positivity checker --------------------------------------------------------

struct AssumptionReport {
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::string f_label;
    double min_f = 0.0, min_g = 0.0;
    double sup_f = 0.0, sup_l1f = 0.0, sup_l2f = 0.0, sup_l1l2f = 0.0, sup_l2l2f = 0.0;
    double min_f_refined = 0.0, min_g_refined = 0.0;
    bool pass = false;

    // flat key-value block
    std::string serialize() const {
        std::ostringstream os;
        os.precision(16);
        os << "f_label = " << f_label << "\n"
           << "n = " << n << "\n"
           << "seed = " << seed << "\n"
           << "min_f = " << min_f << "\n"
           << "min_g = " << min_g << "\n"
           << "min_f_refined = " << min_f_refined << "\n"
           << "min_g_refined = " << min_g_refined << "\n"
           << "sup_abs_f = " << sup_f << "\n"
           << "sup_abs_l1f = " << sup_l1f << "\n"
           << "sup_abs_l2f = " << sup_l2f << "\n"
           << "sup_abs_l1l2f = " << sup_l1l2f << "\n"
           << "sup_abs_l2l2f = " << sup_l2l2f << "\n"
           << "margin_f = " << min_f_refined << "\n"
           << "margin_g = " << min_g_refined << "\n"
           << "verdict = " << (pass ? "pass" : "fail") << "\n";
        return os.str();
    }
};

inline std::vector<PhasePoint> sample_planar_box(double half_width, std::size_t n,
                                                 std::uint64_t seed) {
    detail::Rng rng(seed);
    std::vector<PhasePoint> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(planar_point(rng.uniform(-half_width, half_width),
                                   rng.uniform(-half_width, half_width)));
    return out;
}

inline std::vector<PhasePoint> sample_backend(const FlowBackend& bk, std::size_t n,
                                              std::uint64_t seed, double planar_half_width = 8.0) {
    if (bk.kind == BackendKind::hyperbolic) return sample_phase(*bk.group, n, seed);
    return sample_planar_box(planar_half_width, n, seed);
}

namespace detail {

// golden-section local minimization of field(F_{j,t} p) over t in [-1, 1]
template <class Field>
PhasePoint golden_refine(const FlowBackend& bk, int j, const Field& field, PhasePoint p,
                         int iters = 50) {
    const double gr = 0.6180339887498949;
    double a = -1.0, b = 1.0;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = field(flow(bk, j, p, x1)), f2 = field(flow(bk, j, p, x2));
    for (int it = 0; it < iters; ++it) {
        if (f1 < f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - gr * (b - a);
            f1 = field(flow(bk, j, p, x1));
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + gr * (b - a);
            f2 = field(flow(bk, j, p, x2));
        }
    }
    return flow(bk, j, p, 0.5 * (a + b));
}

} // namespace detail

// Samples the positivity condition: min f, min g, sups of the first and mixed
// second derivatives of f, then tightens the minima by golden-section descent
// along both flows from the worst sample. Always returns a report.
inline AssumptionReport check_assumption(const FlowBackend& bk, const TimeChange& tc,
                                         std::size_t n, std::uint64_t seed,
                                         double planar_half_width = 8.0) {
    if (n < 1000) throw precondition_error("check_assumption: n must be >= 1000");
    AssumptionReport rep;
    rep.n = n;
    rep.seed = seed;
    rep.f_label = tc.f.label;

    const double h = default_fd_step(tc.f);
    const ScalarField l1f = lie_derivative_field(bk, 1, tc.f, h);
    const ScalarField l2f = tc.l2f;
    const ScalarField l1l2f = lie_derivative_field(bk, 1, tc.l2f, h);
    const ScalarField l2l2f = lie_derivative_field(bk, 2, tc.l2f, h);

    const auto pts = sample_backend(bk, n, seed, planar_half_width);
    rep.min_f = std::numeric_limits<double>::infinity();
    rep.min_g = std::numeric_limits<double>::infinity();
    PhasePoint worst_f = pts.front(), worst_g = pts.front();
    for (const auto& p : pts) {
        const double fv = tc.f(p).real();
        const double gv = tc.g(p).real();
        if (fv < rep.min_f) { rep.min_f = fv; worst_f = p; }
        if (gv < rep.min_g) { rep.min_g = gv; worst_g = p; }
        rep.sup_f = std::max(rep.sup_f, std::abs(fv));
        rep.sup_l1f = std::max(rep.sup_l1f, std::abs(l1f(p)));
        rep.sup_l2f = std::max(rep.sup_l2f, std::abs(l2f(p)));
        rep.sup_l1l2f = std::max(rep.sup_l1l2f, std::abs(l1l2f(p)));
        rep.sup_l2l2f = std::max(rep.sup_l2l2f, std::abs(l2l2f(p)));
    }

    const auto fval = [&](const PhasePoint& q) { return tc.f(q).real(); };
    const auto gval = [&](const PhasePoint& q) { return tc.g(q).real(); };
    PhasePoint pf = detail::golden_refine(bk, 1, fval, worst_f);
    pf = detail::golden_refine(bk, 2, fval, pf);
    rep.min_f_refined = std::min(rep.min_f, fval(pf));
    PhasePoint pg = detail::golden_refine(bk, 1, gval, worst_g);
    pg = detail::golden_refine(bk, 2, gval, pg);
    rep.min_g_refined = std::min(rep.min_g, gval(pg));

    rep.pass = rep.min_f_refined > 0.0 && rep.min_g_refined > 0.0;
    return rep;
}

// install the sampled lower bounds as the time change's certificates
inline void certify_time_change(TimeChange& tc, const AssumptionReport& rep) {
    tc.delta_f = rep.min_f_refined;
    tc.delta_g = rep.min_g_refined;
}

} // namespace horospec
