#pragma once

// Weil algebras R[x_1..x_k]/(x_1^{k_1}, ..., x_k^{k_k}) and the C-infinity ring
// action of smooth maps on them (Taylor expansion in the nilpotent part).

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace weilfield {

using MultiIndex = std::vector<int>;

class WeilAlgebra;
using AlgebraPtr = std::shared_ptr<const WeilAlgebra>;

/// Truncated polynomial algebra with a dense multiplication table.
///
/// Basis monomials are enumerated in mixed radix with generator 0 varying
/// fastest, so index 0 is always the unit and, for tensor(A, B), the basis
/// index of a_i * b_j is i + dim(A) * j.  Immutable after construction.
class WeilAlgebra {
public:
    /// orders[g] = k_g means generator g satisfies x_g^{k_g} = 0.  Every
    /// order must be >= 1 (order 1 is a degenerate generator equal to zero).
    static AlgebraPtr create(std::vector<int> orders);

    std::size_t dim() const { return basis_.size(); }
    std::size_t num_generators() const { return orders_.size(); }
    const std::vector<int>& orders() const { return orders_; }

    const MultiIndex& monomial(std::size_t k) const { return basis_.at(k); }
    const std::vector<MultiIndex>& basis() const { return basis_; }
    std::optional<std::size_t> index_of(const MultiIndex& m) const;
    int degree(std::size_t k) const { return degrees_[k]; }

    /// Basis index of e_i * e_j, or -1 when the product is zero.
    int product_index(std::size_t i, std::size_t j) const { return table_[i * dim() + j]; }

    /// Largest total degree of a nonzero monomial; every nilpotent element
    /// h satisfies h^(max_degree()+1) = 0.
    int max_degree() const { return max_degree_; }

    bool same_structure(const WeilAlgebra& other) const { return orders_ == other.orders_; }

    /// out = a * b.  out must not alias a or b.
    void multiply(std::span<const double> a, std::span<const double> b, std::span<double> out) const;
    /// out += s * a * b.
    void multiply_add(std::span<const double> a, std::span<const double> b, double s,
                      std::span<double> out) const;

    std::string describe() const;

private:
    struct Term {
        std::size_t i, j, k;
    };

    explicit WeilAlgebra(std::vector<int> orders);

    std::vector<int> orders_;
    std::vector<MultiIndex> basis_;
    std::vector<int> degrees_;
    std::vector<int> table_;
    std::vector<Term> nonzero_;
    int max_degree_ = 0;
};

AlgebraPtr make_real();
AlgebraPtr make_dual();
/// R[t]/(t^order), the algebra of (order-1)-jets in one variable.
AlgebraPtr make_jet(int order);
AlgebraPtr tensor(const AlgebraPtr& a, const AlgebraPtr& b);
/// tensor(w, R[eps]); the new generator is the last (slowest) one.
AlgebraPtr extend_dual(const AlgebraPtr& w);

/// True when both pointers describe the same algebra (same truncation orders).
bool compatible(const AlgebraPtr& a, const AlgebraPtr& b);
void require_compatible(const AlgebraPtr& a, const AlgebraPtr& b, const char* where);

/// Element of a Weil algebra: one real coefficient per basis monomial.
class WeilValue {
public:
    WeilValue() = default;
    explicit WeilValue(AlgebraPtr alg, double scalar = 0.0);
    WeilValue(AlgebraPtr alg, std::vector<double> coeffs);

    /// coeff * x_g
    static WeilValue generator(AlgebraPtr alg, std::size_t g, double coeff = 1.0);

    const AlgebraPtr& algebra() const { return alg_; }
    std::span<const double> coeffs() const { return coeffs_; }
    std::span<double> coeffs() { return coeffs_; }

    double scalar() const { return coeffs_.empty() ? 0.0 : coeffs_[0]; }
    WeilValue nilpotent() const;
    std::pair<double, WeilValue> decompose() const { return {scalar(), nilpotent()}; }

    double coefficient(const MultiIndex& m) const;
    double coefficient(std::size_t basis_index) const;

    WeilValue& operator+=(const WeilValue& o);
    WeilValue& operator-=(const WeilValue& o);
    WeilValue& operator*=(double s);

    friend WeilValue operator+(WeilValue a, const WeilValue& b) { return a += b; }
    friend WeilValue operator-(WeilValue a, const WeilValue& b) { return a -= b; }
    friend WeilValue operator*(WeilValue a, double s) { return a *= s; }
    friend WeilValue operator*(double s, WeilValue a) { return a *= s; }
    friend WeilValue operator*(const WeilValue& a, const WeilValue& b);
    WeilValue operator-() const { return *this * -1.0; }

    bool operator==(const WeilValue& o) const;
    bool is_zero() const;
    double max_abs() const;

private:
    AlgebraPtr alg_;
    std::vector<double> coeffs_;
};

WeilValue add(const WeilValue& a, const WeilValue& b);
WeilValue mul(const WeilValue& a, const WeilValue& b);
WeilValue scale(const WeilValue& a, double s);
double coefficient(const WeilValue& w, const MultiIndex& m);

/// Embed w into extend_dual(w.algebra()) with zero epsilon part.
WeilValue embed_dual(const WeilValue& w, const AlgebraPtr& extended);
/// Split a value of extend_dual(W) into its eps^0 and eps^1 parts over W.
std::pair<WeilValue, WeilValue> split_dual(const WeilValue& w, const AlgebraPtr& base);

// ---------------------------------------------------------------------------
// Smooth maps

/// Multi-indices beta in N^arity with |beta| <= order, ordered by total degree
/// and then lexicographically.  This is the layout of SmoothMap derivatives.
const std::vector<MultiIndex>& derivative_layout(int arity, int order);

/// A smooth map R^n -> R together with an oracle for its partial derivatives.
class SmoothMap {
public:
    /// Fill out[k] with the partial derivative for derivative_layout(arity, order)[k].
    using Evaluator = std::function<void(std::span<const double> x, int order, std::span<double> out)>;

    static constexpr int kUnbounded = -1;

    SmoothMap(std::string name, int arity, int max_order, Evaluator eval);

    const std::string& name() const { return name_; }
    int arity() const { return arity_; }
    int max_order() const { return max_order_; }

    std::vector<double> derivatives(std::span<const double> x, int order) const;
    /// Unary fast path: out[k] = f^(k)(x), k = 0..order.
    void derivatives_unary(double x, int order, std::span<double> out) const;

    double operator()(std::span<const double> x) const;
    double operator()(double x) const;

private:
    void check_order(int order) const;

    std::string name_;
    int arity_;
    int max_order_;
    Evaluator eval_;
};

namespace smooth {

SmoothMap identity();
SmoothMap zero();
SmoothMap constant(double c);
/// pi_i : R^arity -> R
SmoothMap projection(int arity, int i);
/// x^p for integer p >= 0
SmoothMap power(int p);
/// sum_k coeffs[k] x^k
SmoothMap polynomial(std::vector<double> coeffs);
SmoothMap sin();
SmoothMap cos();
SmoothMap exp();
/// (x, y) -> x * y
SmoothMap product();
/// (x, y) -> x + y
SmoothMap sum();
/// c * f
SmoothMap scaled(double c, SmoothMap f);
/// g o f for unary maps; derivatives via jet arithmetic.
SmoothMap compose(SmoothMap g, SmoothMap f);
/// f' for a unary map.
SmoothMap derivative(SmoothMap f);

}  // namespace smooth

/// Taylor expansion of f around the scalar parts, in the nilpotent parts.
/// Exact in the quotient ring.
WeilValue apply_smooth(const SmoothMap& f, std::span<const WeilValue> args);
WeilValue apply_smooth(const SmoothMap& f, const WeilValue& arg);

/// Scratch buffers for array-level application of unary smooth maps.
class SmoothWorkspace {
public:
    explicit SmoothWorkspace(const WeilAlgebra& alg);

    /// out = f(in) for a single value given as raw coefficients.
    void apply_unary(const SmoothMap& f, std::span<const double> in, std::span<double> out);

private:
    const WeilAlgebra* alg_;
    std::vector<double> derivs_;
    std::vector<double> h_;
    std::vector<double> pow_;
    std::vector<double> next_;
};

}  // namespace weilfield
