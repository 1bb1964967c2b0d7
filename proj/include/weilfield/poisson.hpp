#pragma once

// Observables and vector fields on the solution space in Cauchy-data
// coordinates, the presymplectic form as an operator, Hamiltonian vector
// fields, and the Poisson algebra of pairs (F, v) with dF = i_v omega.
//
// Every evaluator is Weil-polymorphic: it accepts Cauchy data over any Weil
// algebra and answers over the same algebra.  Differentials and directional
// derivatives are taken by extending the algebra with a fresh eps.
//
// Conventions: omega((psi,pi),(psi',pi')) = sum_i (psi_i pi'_i - pi_i psi'_i) dx
// on the reference slice, and the interior product contracts the last slot,
// (i_v omega)(X) = omega(X, v).  Then {(F,v),(F',v')} = omega(v, v') and
// {int f phi, int g pi} = +sum f g dx.

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "weilfield/dynamics.hpp"
#include "weilfield/lattice.hpp"
#include "weilfield/weil.hpp"

namespace weilfield {

/// Components of a 1-form on Cauchy data; pairs with tangent data by
/// <c, X> = sum_i c.phi_i X.phi_i + c.pi_i X.pi_i.
struct Covector {
    WeilArray phi;
    WeilArray pi;

    double norm() const;  // Euclidean over all sites and coefficients
};

/// A smooth function on the solution space.
class Observable {
public:
    enum class Kind { slice_phi, slice_pi, spacetime, poly_composite, constant, bracket, custom };
    using Evaluator = std::function<WeilValue(const CauchyData&)>;

    /// support: the sites of Cauchy data the observable depends on; nullopt
    /// when that set is not compact.
    Observable(Kind kind, std::string label, Evaluator eval, std::optional<SupportWindow> support);

    WeilValue operator()(const CauchyData& at) const { return eval_(at); }
    Kind kind() const { return kind_; }
    const std::string& label() const { return label_; }
    const std::optional<SupportWindow>& support() const { return support_; }

    /// sum_i f_i phi_i dx
    static Observable slice_phi(const LatticeSpacetime& lat, std::vector<double> f);
    /// sum_i g_i pi_i dx
    static Observable slice_pi(const LatticeSpacetime& lat, std::vector<double> g);
    /// sum_{n,i} w_n g_{n,i} Phi_{n,i} dx dt over the solution with the given
    /// data (trapezoid weights w_n in time); g is row-major (n_time+1) x n_space.
    static Observable spacetime(const LatticeSpacetime& lat, Interaction rho, std::vector<double> g);
    static Observable constant(double c);

    friend Observable operator*(const Observable& a, const Observable& b);
    friend Observable operator+(const Observable& a, const Observable& b);
    friend Observable operator*(double s, const Observable& a);

private:
    Kind kind_;
    std::string label_;
    Evaluator eval_;
    std::optional<SupportWindow> support_;
};

/// dF at `at`: component j is the eps-coefficient of F(at + eps e_j).
Covector differential(const Observable& f, const CauchyData& at);

/// Antisymmetric bilinear form on tangent Cauchy data.
class OmegaOperator {
public:
    /// Closed form sum_i (psi_i pi'_i - pi_i psi'_i) dx.
    static OmegaOperator canonical(const LatticeSpacetime& lat);
    /// omega(X, Y) = X^T A Y with X = (phi_0..phi_{n-1}, pi_0..pi_{n-1}).
    /// A must be antisymmetric.  rank_tol is the relative singular value
    /// cut-off of the minimal-norm solve.
    static OmegaOperator dense(Eigen::MatrixXd a, double rank_tol = 1e-10);
    /// Assembled by inserting the 2n unit tangent data at the reference slice,
    /// lifting them to linearised solutions around the solution with data
    /// `base`, and integrating the presymplectic current on `slice`.
    static OmegaOperator assembled(const CauchyData& base, const Interaction& rho, const LatticeSpacetime& lat,
                                   int slice);
    /// The canonical form with the null vector `null_dir` projected out on
    /// both sides, A' = P^T A P with P = 1 - n n^T.
    static OmegaOperator degenerate(const LatticeSpacetime& lat, const Eigen::VectorXd& null_dir);

    bool is_canonical() const { return canonical_; }
    std::size_t n_space() const { return n_; }
    Eigen::MatrixXd matrix() const;

    WeilValue operator()(const CauchyData& x, const CauchyData& y) const;
    /// i_v omega = omega(., v)
    Covector contract(const CauchyData& v) const;

    struct Solution {
        CauchyData v;
        double residual;  // ||i_v omega - dF|| / ||dF|| (absolute when dF = 0)
    };
    /// Minimal-norm least-squares solution of i_v omega = dF.
    Solution solve(const Covector& df) const;

private:
    OmegaOperator() = default;

    bool canonical_ = false;
    std::size_t n_ = 0;
    double dx_ = 0.0;
    Eigen::MatrixXd a_;
    Eigen::MatrixXd pinv_;
};

/// A section of the tangent bundle of the solution space: base data in,
/// tangent data (the fiber) out.
class SolVectorField {
public:
    using Evaluator = std::function<CauchyData(const CauchyData&)>;

    SolVectorField(std::string label, Evaluator eval, std::optional<SupportWindow> window);

    CauchyData operator()(const CauchyData& at) const { return eval_(at); }
    const std::string& label() const { return label_; }
    bool spacelike_compact() const { return window_.has_value(); }
    const std::optional<SupportWindow>& window() const { return window_; }

    static SolVectorField zero(std::size_t n_space);
    /// Constant in Cauchy coordinates.
    static SolVectorField constant(const LatticeSpacetime& lat, std::vector<double> phi, std::vector<double> pi);
    /// v(at) = minimal-norm solution of i_v omega = dF(at).
    static SolVectorField hamiltonian(const Observable& f, const OmegaOperator& omega);
    /// [v, w] evaluated pointwise by lie_bracket.
    static SolVectorField lie_bracket_of(const SolVectorField& v, const SolVectorField& w, const LatticeSpacetime& lat);
    /// F . v
    static SolVectorField scaled_by(const Observable& f, const SolVectorField& v);

    friend SolVectorField operator+(const SolVectorField& a, const SolVectorField& b);

private:
    std::string label_;
    Evaluator eval_;
    std::optional<SupportWindow> window_;
};

/// Vector field whose 2n components are polynomials in the 2n Cauchy
/// coordinates (phi_0..phi_{n-1}, pi_0..pi_{n-1}).
struct PolynomialVectorField {
    struct Monomial {
        double coeff = 0.0;
        std::vector<std::pair<int, int>> factors;  // (variable, exponent)
    };
    std::size_t n_space = 0;
    std::vector<std::vector<Monomial>> components;  // size 2 n_space

    CauchyData operator()(const CauchyData& at) const;
    SolVectorField field(const LatticeSpacetime& lat) const;
};

struct HamiltonianSolve {
    CauchyData v;
    double residual = 0.0;
    double support_defect = 0.0;  // max |v| on the guard band when sc is required
    bool admissible = false;
};

/// Solve dF = i_v omega at one base point and classify F there.
HamiltonianSolve hamiltonian_vf(const Observable& f, const CauchyData& at, const OmegaOperator& omega,
                                const LatticeSpacetime& lat, bool sc_required = false,
                                double admissibility_tol = 1e-8);

/// [v, w](at) = v(Psi_w) - w(Psi_v), each directional derivative taken by
/// evaluating at at + eps v(at) over W (x) R[eps].
CauchyData lie_bracket(const SolVectorField& v, const SolVectorField& w, const CauchyData& at);

/// The commutator of flows tau(at, d1, d2) = w~(v~(w~(v~(at, d1), d2), -d1), -d2)
/// over W (x) R[eps1] (x) R[eps2] with d1 = eps1, d2 = eps2.
CauchyData tau_map(const SolVectorField& v, const SolVectorField& w, const CauchyData& at);
/// eps1 eps2 coefficient of tau_map, over the algebra of `at`.
CauchyData tau_bracket(const SolVectorField& v, const SolVectorField& w, const CauchyData& at);

/// Element (F, v) of the Poisson algebra; residual is the largest relative
/// defect of dF = i_v omega over the sampled base points.
struct HamiltonianPair {
    Observable f;
    SolVectorField v;
    double residual = 0.0;
};

struct PoissonContext {
    LatticeSpacetime lattice;
    OmegaOperator omega;
    std::vector<CauchyData> samples;
    double admissibility_tol = 1e-8;
    bool revalidate = true;
};

/// max over samples of ||dF - i_v omega|| / ||dF||.
double pair_residual(const Observable& f, const SolVectorField& v, const PoissonContext& ctx);

/// (F, Hamiltonian field of F) with its sampled residual.
HamiltonianPair make_pair(const Observable& f, const PoissonContext& ctx);

/// {(F,v),(F',v')} = (omega(v, v'), [v, v']).  On a line lattice at most one
/// of v, v' may fail to be spacelike compact.
HamiltonianPair bracket(const HamiltonianPair& p, const HamiltonianPair& q, const PoissonContext& ctx);
/// (F F', F v' + F' v)
HamiltonianPair product(const HamiltonianPair& p, const HamiltonianPair& q, const PoissonContext& ctx);
/// (1, 0)
HamiltonianPair unit(const PoissonContext& ctx);

struct AxiomReport {
    double antisymmetry_f = 0.0;
    double antisymmetry_v = 0.0;
    double jacobi_f = 0.0;
    double jacobi_v = 0.0;
    double leibniz_f = 0.0;
    double leibniz_v = 0.0;
    double bracket_residual = 0.0;  // re-validated residual of {p, p'}
    double input_residual = 0.0;    // max residual of p, p', p''
};

/// Relative defects of antisymmetry, Jacobi and Leibniz for (p, q, r) at the
/// context samples (maximum over samples).
AxiomReport verify_axioms(const HamiltonianPair& p, const HamiltonianPair& q, const HamiltonianPair& r,
                          const PoissonContext& ctx);

/// Pointwise Weil product of two arrays.
WeilArray multiply_arrays(const WeilArray& a, const WeilArray& b);
/// w . a for a Weil scalar w.
CauchyData scale_data(const WeilValue& w, const CauchyData& a);

}  // namespace weilfield
