#include "weilfield/zuckerman.hpp"

#include <algorithm>
#include <cmath>

#include "weilfield/errors.hpp"

namespace weilfield {

WeilGrid pointwise_product(const WeilGrid& a, const WeilGrid& b) {
    require_compatible(a.algebra(), b.algebra(), "pointwise_product");
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw ValidationError("grid shape mismatch");
    WeilGrid out(a.algebra(), a.rows(), a.cols());
    const auto& alg = *a.algebra();
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) alg.multiply(a.at(r, c), b.at(r, c), out.at(r, c));
    return out;
}

namespace {

WeilArray pointwise_product(const WeilArray& a, const WeilArray& b) {
    WeilArray out(a.algebra(), a.size());
    for (std::size_t i = 0; i < a.size(); ++i) a.algebra()->multiply(a.at(i), b.at(i), out.at(i));
    return out;
}

void subtract_into(WeilGrid& acc, const WeilGrid& other) {
    auto dst = acc.raw();
    auto src = other.raw();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] -= src[k];
}

std::vector<SupportWindow> cone_windows(const LatticeSpacetime& lat, const CauchyData& a) {
    SupportWindow k = window_hull(lat, support_of(lat, a.phi), support_of(lat, a.pi));
    std::vector<SupportWindow> w;
    w.reserve(lat.n_rows());
    for (int n = 0; n < lat.n_rows(); ++n) w.push_back(causal_cone(lat, k, n));
    return w;
}

void require_sc_rule(const TangentSolution& v, const TangentSolution& w) {
    if (v.lattice().topology() == Topology::line && !v.spacelike_compact() && !w.spacelike_compact())
        throw ValidationError("line topology: at least one tangent factor must be spacelike compact");
}

}  // namespace

TangentSolution make_tangent_solution(const CauchyData& d, const CauchyData& a, const Interaction& rho,
                                      const LatticeSpacetime& lat, bool spacelike_compact) {
    FieldHistory h = tangent_lift(d, a, rho, lat);
    TangentSolution v{h.dual_part(d.algebra(), 0), h.dual_part(d.algebra(), 1), std::nullopt};
    if (spacelike_compact) v.sc_windows = cone_windows(lat, a);
    return v;
}

std::pair<TangentSolution, TangentSolution> make_tangent_pair(const CauchyData& d, const CauchyData& a,
                                                              const CauchyData& b, const Interaction& rho,
                                                              const LatticeSpacetime& lat, bool a_compact,
                                                              bool b_compact) {
    const AlgebraPtr& w = d.algebra();
    AlgebraPtr e1 = extend_dual(w);
    AlgebraPtr e2 = extend_dual(e1);
    CauchyData data = add_epsilon(add_epsilon(d, a, e1), b.embedded(e1), e2);
    FieldHistory h = solve_cauchy(data, rho, lat);
    FieldHistory eps2_0 = h.dual_part(e1, 0);
    FieldHistory eps2_1 = h.dual_part(e1, 1);
    FieldHistory base = eps2_0.dual_part(w, 0);
    TangentSolution va{base, eps2_0.dual_part(w, 1), std::nullopt};
    TangentSolution vb{base, eps2_1.dual_part(w, 0), std::nullopt};
    if (a_compact) va.sc_windows = cone_windows(lat, a);
    if (b_compact) vb.sc_windows = cone_windows(lat, b);
    return {std::move(va), std::move(vb)};
}

double validate_tangent(const TangentSolution& v, const Interaction& rho) {
    if (v.sc_windows) {
        const auto& lat = v.lattice();
        if (static_cast<int>(v.sc_windows->size()) != lat.n_rows())
            throw ValidationError("one support window per time row required");
        for (int n = 0; n < lat.n_rows(); ++n) {
            const SupportWindow& win = (*v.sc_windows)[n];
            for (int i = 0; i < lat.n_space(); ++i) {
                if (win.contains(i, lat)) continue;
                for (double c : v.fiber.values.at(n, i))
                    if (c != 0.0)
                        throw ValidationError("fiber leaves its spacelike-compact window at row " +
                                              std::to_string(n) + ", site " + std::to_string(i));
            }
        }
    }
    return linearize_residual(v.base, v.fiber, rho).values.max_abs();
}

Current theta(const TangentSolution& v) {
    Current d = hodge_d(v.lattice(), v.base.values);
    Current out{pointwise_product(v.fiber.values, d.t_component), pointwise_product(v.fiber.values, d.x_component)};
    for (double& c : out.t_component.raw()) c = -c;
    for (double& c : out.x_component.raw()) c = -c;
    return out;
}

Current current_u(const TangentSolution& v, const TangentSolution& w) {
    require_sc_rule(v, w);
    require_compatible(v.fiber.algebra(), w.fiber.algebra(), "current_u");
    const auto& lat = v.lattice();
    Current dv = hodge_d(lat, v.fiber.values);
    Current dw = hodge_d(lat, w.fiber.values);
    Current out{pointwise_product(v.fiber.values, dw.t_component), pointwise_product(v.fiber.values, dw.x_component)};
    subtract_into(out.t_component, pointwise_product(w.fiber.values, dv.t_component));
    subtract_into(out.x_component, pointwise_product(w.fiber.values, dv.x_component));
    return out;
}

std::optional<SupportWindow> current_window(const TangentSolution& v, const TangentSolution& w, int n) {
    const auto& lat = v.lattice();
    // each term carries one undifferentiated factor and one derivative whose
    // stencil reaches one site / one row further than the factor's window
    auto widened = [&](const TangentSolution& s) {
        int row = std::min(n + 1, lat.n_rows() - 1);
        return window_hull(lat, (*s.sc_windows)[n], causal_cone(lat, (*s.sc_windows)[row], 1));
    };
    if (v.spacelike_compact() && w.spacelike_compact()) {
        SupportWindow a = widened(v), b = widened(w);
        return a.length <= b.length ? a : b;
    }
    if (v.spacelike_compact()) return widened(v);
    if (w.spacelike_compact()) return widened(w);
    return std::nullopt;
}

double closedness_residual(const TangentSolution& v, const TangentSolution& w) {
    const auto& lat = v.lattice();
    WeilGrid div = divergence(lat, current_u(v, w));
    const bool line = lat.topology() == Topology::line;
    const std::size_t c0 = line ? 1 : 0;
    const std::size_t c1 = line ? div.cols() - 1 : div.cols();
    double m = 0.0;
    // rows 1 and n_time-1 see the one-sided time derivatives of the boundary rows
    for (std::size_t r = 2; r + 2 < div.rows(); ++r)
        for (std::size_t c = c0; c < c1; ++c)
            for (double x : div.at(r, c)) m = std::max(m, std::abs(x));
    return m;
}

WeilValue presymplectic_form(const TangentSolution& v, const TangentSolution& w, int slice) {
    require_sc_rule(v, w);
    const auto& lat = v.lattice();
    WeilArray psi_v = v.fiber.values.row_array(slice);
    WeilArray psi_w = w.fiber.values.row_array(slice);
    WeilArray dt_v = time_derivative(lat, v.fiber.values, slice);
    WeilArray dt_w = time_derivative(lat, w.fiber.values, slice);
    WeilArray density = pointwise_product(psi_v, dt_w);
    density.axpy(-1.0, pointwise_product(psi_w, dt_v));
    return integrate_slice(lat, density);
}

namespace {

struct DirectionalTheta {
    WeilGrid derivative_of_theta_t;  // a(theta(b)), density
    WeilGrid derivative_of_theta_x;  // a(theta(b)), flux
    WeilGrid derivative_of_fiber;    // a(Psi_b)
    WeilGrid base;                   // Phi
};

// Directional derivative along the constant field a of theta(b) and of the
// fiber Psi_b, both as functions of the base point.
DirectionalTheta directional_theta(const CauchyData& d, const CauchyData& a, const CauchyData& b,
                                   const Interaction& rho, const LatticeSpacetime& lat) {
    const AlgebraPtr& w = d.algebra();
    AlgebraPtr e1 = extend_dual(w);   // eps1: direction a
    AlgebraPtr e2 = extend_dual(e1);  // eps2: fiber of b
    CauchyData point = add_epsilon(d, a, e1);
    FieldHistory h = solve_cauchy(add_epsilon(point, b.embedded(e1), e2), rho, lat);
    FieldHistory base_e1 = h.dual_part(e1, 0);   // Phi + eps1 Psi_a
    FieldHistory fiber_e1 = h.dual_part(e1, 1);  // Psi_b + eps1 a(Psi_b)
    TangentSolution tb{base_e1, fiber_e1, std::nullopt};
    Current th = theta(tb);
    return {th.t_component.dual_part(w, 1), th.x_component.dual_part(w, 1), fiber_e1.values.dual_part(w, 1),
            base_e1.values.dual_part(w, 0)};
}

}  // namespace

Current koszul_current(const CauchyData& d, const CauchyData& a, const CauchyData& b, const Interaction& rho,
                       const LatticeSpacetime& lat) {
    DirectionalTheta ab = directional_theta(d, a, b, rho, lat);
    DirectionalTheta ba = directional_theta(d, b, a, rho, lat);

    // fiber of [v, w] = v(Psi_w) - w(Psi_v); theta of it = -(that) *dPhi
    WeilGrid bracket_fiber = ab.derivative_of_fiber;
    subtract_into(bracket_fiber, ba.derivative_of_fiber);
    Current dphi = hodge_d(lat, ab.base);
    WeilGrid th_t = pointwise_product(bracket_fiber, dphi.t_component);
    WeilGrid th_x = pointwise_product(bracket_fiber, dphi.x_component);

    Current out{ab.derivative_of_theta_t, ab.derivative_of_theta_x};
    subtract_into(out.t_component, ba.derivative_of_theta_t);
    subtract_into(out.x_component, ba.derivative_of_theta_x);
    // minus theta([v,w]) = + bracket_fiber *dPhi
    auto add = [](WeilGrid& acc, const WeilGrid& o) {
        auto dst = acc.raw();
        auto src = o.raw();
        for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    };
    add(out.t_component, th_t);
    add(out.x_component, th_x);
    return out;
}

}  // namespace weilfield
