#pragma once

// Mode-sum commutator function of the free (massive) field on a periodic
// lattice, used as an independent oracle for free-field brackets.

#include <span>

#include "weilfield/lattice.hpp"

namespace weilfield {

/// G(tau, x) = sum_k sin(w_k tau) / (w_k L) cos(k x),  w_k = sqrt(k^2 + m^2),
/// over the n_modes wavenumbers k = 2 pi j / L, j = -n_modes/2 .. n_modes/2 - 1.
/// The k = 0 term of the massless field uses its limit tau / L.
double pauli_jordan_function(double tau, double x, double length, int n_modes, double mass);

/// d/dtau of G.
double pauli_jordan_rate(double tau, double x, double length, int n_modes, double mass);

/// sum_{t,x} sum_{s,y} f(t,x) G(s - t, x - y) g(s,y) with trapezoid weights in
/// time and dx in space; f and g are row-major (n_time+1) x n_space grids on
/// a circle lattice.  Evaluated mode by mode in O(modes * grid).
double pauli_jordan_bracket(const LatticeSpacetime& lat, double mass, std::span<const double> f,
                            std::span<const double> g);

}  // namespace weilfield
