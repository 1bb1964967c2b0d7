#pragma once

// Semilinear wave equation  P(Phi) = box Phi + rho(Phi) = 0,  box = d_t^2 - d_x^2,
// solved by explicit leapfrog in arbitrary Weil-algebra arithmetic.

#include <string>
#include <utility>

#include "weilfield/lattice.hpp"
#include "weilfield/weil.hpp"

namespace weilfield {

/// The potential term rho of the field equation with its derivative.
struct Interaction {
    std::string name;
    SmoothMap rho;
    SmoothMap rho_prime;

    static Interaction free();
    /// rho(x) = m^2 x
    static Interaction mass(double m);
    /// rho(x) = lambda x^3
    static Interaction phi4(double lambda);
    /// rho(x) = sin x
    static Interaction sine_gordon();
    /// rho(x) = sum_k coeffs[k] x^k
    static Interaction custom(std::vector<double> coeffs);
    static Interaction from_map(std::string name, SmoothMap rho);
};

/// Weil-valued field on every grid point of a lattice, rows = n_time + 1.
struct FieldHistory {
    LatticeSpacetime lattice;
    WeilGrid values;

    const AlgebraPtr& algebra() const { return values.algebra(); }
    /// eps^0 / eps^1 part of a history over extend_dual(base).
    FieldHistory dual_part(const AlgebraPtr& base, int part) const {
        return {lattice, values.dual_part(base, part)};
    }
};

/// Initial position and velocity on a time slice.
struct CauchyData {
    WeilArray phi;
    WeilArray pi;
    int slice = 0;

    const AlgebraPtr& algebra() const { return phi.algebra(); }
    std::size_t size() const { return phi.size(); }

    static CauchyData zeros(const AlgebraPtr& alg, std::size_t n);
    static CauchyData from_real(const AlgebraPtr& alg, std::span<const double> phi, std::span<const double> pi);

    CauchyData& operator+=(const CauchyData& o);
    CauchyData& operator*=(double s);
    void axpy(double s, const CauchyData& o);
    double max_abs() const;
    CauchyData embedded(const AlgebraPtr& extended) const;
    CauchyData dual_part(const AlgebraPtr& base, int part) const;
};

/// d + eps * v over extend_dual(d.algebra()).
CauchyData add_epsilon(const CauchyData& d, const CauchyData& v, const AlgebraPtr& extended);

/// (d_t^2 - d_x^2) Phi + rho(Phi) with compact second differences, on
/// interior rows 1..n_time-1.  Rows 0 and n_time are returned as zero.
FieldHistory eom_residual(const FieldHistory& phi, const Interaction& rho);

/// (d_t^2 - d_x^2) Psi + rho'(Phi) Psi on interior rows.
FieldHistory linearize_residual(const FieldHistory& phi, const FieldHistory& psi, const Interaction& rho);

/// Leapfrog with a second-order Taylor start.  On a line lattice the
/// nilpotent part of the data must keep its lattice causal cone off the guard
/// band for the whole run (ConeEscape otherwise).
FieldHistory solve_cauchy(const CauchyData& d, const Interaction& rho, const LatticeSpacetime& lat);

/// (Phi on the slice, d_t Phi on the slice).  Boundary slices use one-sided
/// second-order time differences.
CauchyData restrict_data(const FieldHistory& phi, int slice);

/// solve_cauchy over extend_dual(W) with data d + eps v; the eps part is the
/// linearised solution around the solution with data d.
FieldHistory tangent_lift(const CauchyData& d, const CauchyData& v, const Interaction& rho,
                          const LatticeSpacetime& lat);

/// Interior-row max-norm of the field-equation residual.
double eom_residual_norm(const FieldHistory& phi, const Interaction& rho);

}  // namespace weilfield
