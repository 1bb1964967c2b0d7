#pragma once

// Theta form, presymplectic current and presymplectic form on the solution
// space, evaluated on lattice histories.

#include <optional>
#include <vector>

#include "weilfield/dynamics.hpp"
#include "weilfield/lattice.hpp"

namespace weilfield {

/// A tangent vector Phi + eps Psi to the solution space: base history and the
/// linearised solution along it.  sc_windows, when present, holds one window
/// per time row outside of which the fiber vanishes (spacelike compact).
struct TangentSolution {
    FieldHistory base;
    FieldHistory fiber;
    std::optional<std::vector<SupportWindow>> sc_windows;

    bool spacelike_compact() const { return sc_windows.has_value(); }
    const LatticeSpacetime& lattice() const { return base.lattice; }
};

/// Lift Cauchy data (d, a) to a tangent solution.  With spacelike_compact the
/// windows are the lattice causal cones of the support of a.
TangentSolution make_tangent_solution(const CauchyData& d, const CauchyData& a, const Interaction& rho,
                                      const LatticeSpacetime& lat, bool spacelike_compact = false);

/// Two tangent solutions over the same base from one solve in
/// W (x) R[eps1] (x) R[eps2].
std::pair<TangentSolution, TangentSolution> make_tangent_pair(const CauchyData& d, const CauchyData& a,
                                                              const CauchyData& b, const Interaction& rho,
                                                              const LatticeSpacetime& lat,
                                                              bool a_compact = false, bool b_compact = false);

/// max |linearize_residual(base, fiber)| and exact containment of the fiber
/// in its windows; throws ValidationError when the windows are violated.
double validate_tangent(const TangentSolution& v, const Interaction& rho);

/// theta(v) = -Psi *dPhi
Current theta(const TangentSolution& v);

/// u(v, v') = Psi *dPsi' - Psi' *dPsi.  On a line lattice at least one factor
/// must be spacelike compact (ValidationError otherwise).
Current current_u(const TangentSolution& v, const TangentSolution& w);

/// Window on row n outside of which current_u(v, w) vanishes, if either
/// factor is spacelike compact.
std::optional<SupportWindow> current_window(const TangentSolution& v, const TangentSolution& w, int n);

/// Max-norm of divergence(current_u(v, w)) over rows 2..n_time-2, where every
/// stencil involved is centred (and away from the one-sided line ends).
double closedness_residual(const TangentSolution& v, const TangentSolution& w);

/// Slice integral of the density of current_u(v, w) on time row `slice`.
WeilValue presymplectic_form(const TangentSolution& v, const TangentSolution& w, int slice);

/// u(v, w) from the Koszul formula  v(theta(w)) - w(theta(v)) - theta([v, w])
/// for the vector fields that are constant (a and b) in Cauchy coordinates,
/// with all directional derivatives taken by nilpotent arithmetic.
Current koszul_current(const CauchyData& d, const CauchyData& a, const CauchyData& b, const Interaction& rho,
                       const LatticeSpacetime& lat);

/// Pointwise Weil product of two grids.
WeilGrid pointwise_product(const WeilGrid& a, const WeilGrid& b);

}  // namespace weilfield
