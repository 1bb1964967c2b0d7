#include "weilfield/weil.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include "weilfield/errors.hpp"

namespace weilfield {

WeilAlgebra::WeilAlgebra(std::vector<int> orders) : orders_(std::move(orders)) {
    std::size_t dim = 1;
    for (int k : orders_) {
        if (k < 1) throw ValidationError("Weil algebra truncation orders must be >= 1");
        dim *= static_cast<std::size_t>(k);
    }
    basis_.reserve(dim);
    MultiIndex m(orders_.size(), 0);
    for (std::size_t n = 0; n < dim; ++n) {
        basis_.push_back(m);
        int deg = 0;
        for (int e : m) deg += e;
        degrees_.push_back(deg);
        max_degree_ = std::max(max_degree_, deg);
        for (std::size_t g = 0; g < m.size(); ++g) {
            if (++m[g] < orders_[g]) break;
            m[g] = 0;
        }
    }

    std::vector<std::size_t> stride(orders_.size(), 1);
    for (std::size_t g = 1; g < orders_.size(); ++g) stride[g] = stride[g - 1] * orders_[g - 1];

    table_.assign(dim * dim, -1);
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            std::size_t idx = 0;
            bool nonzero = true;
            for (std::size_t g = 0; g < orders_.size(); ++g) {
                int e = basis_[i][g] + basis_[j][g];
                if (e >= orders_[g]) {
                    nonzero = false;
                    break;
                }
                idx += stride[g] * e;
            }
            if (nonzero) {
                table_[i * dim + j] = static_cast<int>(idx);
                nonzero_.push_back({i, j, idx});
            }
        }
    }
}

AlgebraPtr WeilAlgebra::create(std::vector<int> orders) {
    return AlgebraPtr(new WeilAlgebra(std::move(orders)));
}

std::optional<std::size_t> WeilAlgebra::index_of(const MultiIndex& m) const {
    if (m.size() != orders_.size()) return std::nullopt;
    std::size_t idx = 0, stride = 1;
    for (std::size_t g = 0; g < m.size(); ++g) {
        if (m[g] < 0 || m[g] >= orders_[g]) return std::nullopt;
        idx += stride * m[g];
        stride *= orders_[g];
    }
    return idx;
}

void WeilAlgebra::multiply(std::span<const double> a, std::span<const double> b,
                           std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    for (const Term& t : nonzero_) out[t.k] += a[t.i] * b[t.j];
}

void WeilAlgebra::multiply_add(std::span<const double> a, std::span<const double> b, double s,
                               std::span<double> out) const {
    for (const Term& t : nonzero_) out[t.k] += s * a[t.i] * b[t.j];
}

std::string WeilAlgebra::describe() const {
    std::ostringstream os;
    os << "{generators: " << orders_.size() << ", orders: [";
    for (std::size_t g = 0; g < orders_.size(); ++g) os << (g ? ", " : "") << orders_[g];
    os << "]}";
    return os.str();
}

AlgebraPtr make_real() { return WeilAlgebra::create({}); }
AlgebraPtr make_dual() { return WeilAlgebra::create({2}); }
AlgebraPtr make_jet(int order) { return WeilAlgebra::create({order}); }

AlgebraPtr tensor(const AlgebraPtr& a, const AlgebraPtr& b) {
    std::vector<int> orders = a->orders();
    orders.insert(orders.end(), b->orders().begin(), b->orders().end());
    return WeilAlgebra::create(std::move(orders));
}

AlgebraPtr extend_dual(const AlgebraPtr& w) {
    std::vector<int> orders = w->orders();
    orders.push_back(2);
    return WeilAlgebra::create(std::move(orders));
}

bool compatible(const AlgebraPtr& a, const AlgebraPtr& b) {
    return a == b || (a && b && a->same_structure(*b));
}

void require_compatible(const AlgebraPtr& a, const AlgebraPtr& b, const char* where) {
    if (!compatible(a, b)) {
        throw AlgebraMismatch(std::string(where) + ": operands in different Weil algebras " +
                              (a ? a->describe() : "null") + " vs " + (b ? b->describe() : "null"));
    }
}

// ---------------------------------------------------------------------------

WeilValue::WeilValue(AlgebraPtr alg, double scalar) : alg_(std::move(alg)), coeffs_(alg_->dim(), 0.0) {
    coeffs_[0] = scalar;
}

WeilValue::WeilValue(AlgebraPtr alg, std::vector<double> coeffs)
    : alg_(std::move(alg)), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != alg_->dim()) throw OutOfBasis("coefficient count does not match algebra dimension");
}

WeilValue WeilValue::generator(AlgebraPtr alg, std::size_t g, double coeff) {
    if (g >= alg->num_generators()) throw OutOfBasis("generator index out of range");
    MultiIndex m(alg->num_generators(), 0);
    m[g] = 1;
    auto idx = alg->index_of(m);
    WeilValue w(alg, 0.0);
    if (idx) w.coeffs_[*idx] = coeff;  // order-1 generators are identically zero
    return w;
}

WeilValue WeilValue::nilpotent() const {
    WeilValue n = *this;
    n.coeffs_[0] = 0.0;
    return n;
}

double WeilValue::coefficient(const MultiIndex& m) const {
    auto idx = alg_->index_of(m);
    if (!idx) throw OutOfBasis("multi-index not in the algebra basis");
    return coeffs_[*idx];
}

double WeilValue::coefficient(std::size_t basis_index) const {
    if (basis_index >= coeffs_.size()) throw OutOfBasis("basis index out of range");
    return coeffs_[basis_index];
}

WeilValue& WeilValue::operator+=(const WeilValue& o) {
    require_compatible(alg_, o.alg_, "add");
    for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] += o.coeffs_[k];
    return *this;
}

WeilValue& WeilValue::operator-=(const WeilValue& o) {
    require_compatible(alg_, o.alg_, "sub");
    for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] -= o.coeffs_[k];
    return *this;
}

WeilValue& WeilValue::operator*=(double s) {
    for (double& c : coeffs_) c *= s;
    return *this;
}

WeilValue operator*(const WeilValue& a, const WeilValue& b) {
    require_compatible(a.alg_, b.alg_, "mul");
    WeilValue out(a.alg_, 0.0);
    a.alg_->multiply(a.coeffs_, b.coeffs_, out.coeffs_);
    return out;
}

bool WeilValue::operator==(const WeilValue& o) const {
    return compatible(alg_, o.alg_) && coeffs_ == o.coeffs_;
}

bool WeilValue::is_zero() const {
    return std::all_of(coeffs_.begin(), coeffs_.end(), [](double c) { return c == 0.0; });
}

double WeilValue::max_abs() const {
    double m = 0.0;
    for (double c : coeffs_) m = std::max(m, std::abs(c));
    return m;
}

WeilValue add(const WeilValue& a, const WeilValue& b) { return a + b; }
WeilValue mul(const WeilValue& a, const WeilValue& b) { return a * b; }
WeilValue scale(const WeilValue& a, double s) { return a * s; }
double coefficient(const WeilValue& w, const MultiIndex& m) { return w.coefficient(m); }

WeilValue embed_dual(const WeilValue& w, const AlgebraPtr& extended) {
    if (extended->dim() != 2 * w.algebra()->dim()) throw AlgebraMismatch("embed_dual: not an extension");
    std::vector<double> c(extended->dim(), 0.0);
    std::copy(w.coeffs().begin(), w.coeffs().end(), c.begin());
    return WeilValue(extended, std::move(c));
}

std::pair<WeilValue, WeilValue> split_dual(const WeilValue& w, const AlgebraPtr& base) {
    const std::size_t d = base->dim();
    if (w.algebra()->dim() != 2 * d) throw AlgebraMismatch("split_dual: not an extension");
    auto c = w.coeffs();
    return {WeilValue(base, std::vector<double>(c.begin(), c.begin() + d)),
            WeilValue(base, std::vector<double>(c.begin() + d, c.end()))};
}

// ---------------------------------------------------------------------------

const std::vector<MultiIndex>& derivative_layout(int arity, int order) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::vector<MultiIndex>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(arity, order);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    std::vector<MultiIndex> out;
    for (int deg = 0; deg <= order; ++deg) {
        // all beta with |beta| = deg, lexicographically descending in beta[0]
        MultiIndex beta(arity, 0);
        std::function<void(int, int)> rec = [&](int pos, int remaining) {
            if (pos == arity - 1) {
                beta[pos] = remaining;
                out.push_back(beta);
                return;
            }
            for (int e = remaining; e >= 0; --e) {
                beta[pos] = e;
                rec(pos + 1, remaining - e);
            }
        };
        if (arity == 0) {
            if (deg == 0) out.push_back({});
        } else {
            rec(0, deg);
        }
    }
    return cache.emplace(key, std::move(out)).first->second;
}

SmoothMap::SmoothMap(std::string name, int arity, int max_order, Evaluator eval)
    : name_(std::move(name)), arity_(arity), max_order_(max_order), eval_(std::move(eval)) {}

void SmoothMap::check_order(int order) const {
    if (max_order_ != kUnbounded && order > max_order_) {
        throw DerivativeOrderUnavailable(name_ + ": derivative order " + std::to_string(order) +
                                         " unavailable (max " + std::to_string(max_order_) + ")");
    }
}

std::vector<double> SmoothMap::derivatives(std::span<const double> x, int order) const {
    if (static_cast<int>(x.size()) != arity_) throw ValidationError(name_ + ": arity mismatch");
    check_order(order);
    std::vector<double> out(derivative_layout(arity_, order).size(), 0.0);
    eval_(x, order, out);
    return out;
}

void SmoothMap::derivatives_unary(double x, int order, std::span<double> out) const {
    check_order(order);
    eval_(std::span<const double>(&x, 1), order, out.first(order + 1));
}

double SmoothMap::operator()(std::span<const double> x) const { return derivatives(x, 0)[0]; }

double SmoothMap::operator()(double x) const {
    double out = 0.0;
    derivatives_unary(x, 0, std::span<double>(&out, 1));
    return out;
}

namespace smooth {

SmoothMap identity() { return polynomial({0.0, 1.0}); }

SmoothMap zero() { return polynomial({}); }

SmoothMap constant(double c) { return polynomial({c}); }

SmoothMap projection(int arity, int i) {
    if (i < 0 || i >= arity) throw ValidationError("projection index out of range");
    return SmoothMap("pi_" + std::to_string(i), arity, SmoothMap::kUnbounded,
                     [arity, i](std::span<const double> x, int order, std::span<double> out) {
                         const auto& layout = derivative_layout(arity, order);
                         for (std::size_t k = 0; k < layout.size(); ++k) {
                             int deg = 0;
                             for (int e : layout[k]) deg += e;
                             if (deg == 0) out[k] = x[i];
                             else if (deg == 1 && layout[k][i] == 1) out[k] = 1.0;
                             else out[k] = 0.0;
                         }
                     });
}

SmoothMap power(int p) {
    if (p < 0) throw ValidationError("power: exponent must be >= 0");
    std::vector<double> c(p + 1, 0.0);
    c[p] = 1.0;
    return SmoothMap("x^" + std::to_string(p), 1, SmoothMap::kUnbounded,
                     [p](std::span<const double> x, int order, std::span<double> out) {
                         double falling = 1.0;  // p (p-1) ... (p-k+1)
                         for (int k = 0; k <= order; ++k) {
                             out[k] = k > p ? 0.0 : falling * std::pow(x[0], p - k);
                             falling *= (p - k);
                         }
                     });
}

SmoothMap polynomial(std::vector<double> coeffs) {
    return SmoothMap("polynomial", 1, SmoothMap::kUnbounded,
                     [coeffs = std::move(coeffs)](std::span<const double> x, int order, std::span<double> out) {
                         const int n = static_cast<int>(coeffs.size());
                         for (int k = 0; k <= order; ++k) {
                             // sum_{j>=k} c_j j!/(j-k)! x^{j-k}, Horner in x
                             double v = 0.0;
                             for (int j = n - 1; j >= k; --j) {
                                 double ff = 1.0;
                                 for (int r = 0; r < k; ++r) ff *= (j - r);
                                 v = v * x[0] + coeffs[j] * ff;
                             }
                             out[k] = v;
                         }
                     });
}

SmoothMap sin() {
    return SmoothMap("sin", 1, SmoothMap::kUnbounded,
                     [](std::span<const double> x, int order, std::span<double> out) {
                         const double s = std::sin(x[0]), c = std::cos(x[0]);
                         const double cyc[4] = {s, c, -s, -c};
                         for (int k = 0; k <= order; ++k) out[k] = cyc[k % 4];
                     });
}

SmoothMap cos() {
    return SmoothMap("cos", 1, SmoothMap::kUnbounded,
                     [](std::span<const double> x, int order, std::span<double> out) {
                         const double s = std::sin(x[0]), c = std::cos(x[0]);
                         const double cyc[4] = {c, -s, -c, s};
                         for (int k = 0; k <= order; ++k) out[k] = cyc[k % 4];
                     });
}

SmoothMap exp() {
    return SmoothMap("exp", 1, SmoothMap::kUnbounded,
                     [](std::span<const double> x, int order, std::span<double> out) {
                         const double e = std::exp(x[0]);
                         for (int k = 0; k <= order; ++k) out[k] = e;
                     });
}

SmoothMap product() {
    return SmoothMap("product", 2, SmoothMap::kUnbounded,
                     [](std::span<const double> x, int order, std::span<double> out) {
                         const auto& layout = derivative_layout(2, order);
                         for (std::size_t k = 0; k < layout.size(); ++k) {
                             const int a = layout[k][0], b = layout[k][1];
                             if (a > 1 || b > 1) out[k] = 0.0;
                             else out[k] = (a ? 1.0 : x[0]) * (b ? 1.0 : x[1]);
                         }
                     });
}

SmoothMap sum() {
    return SmoothMap("sum", 2, SmoothMap::kUnbounded,
                     [](std::span<const double> x, int order, std::span<double> out) {
                         const auto& layout = derivative_layout(2, order);
                         for (std::size_t k = 0; k < layout.size(); ++k) {
                             const int deg = layout[k][0] + layout[k][1];
                             out[k] = deg == 0 ? x[0] + x[1] : (deg == 1 ? 1.0 : 0.0);
                         }
                     });
}

SmoothMap scaled(double c, SmoothMap f) {
    const int arity = f.arity();
    const int max_order = f.max_order();
    std::string name = std::to_string(c) + "*" + f.name();
    return SmoothMap(std::move(name), arity, max_order,
                     [c, f = std::move(f)](std::span<const double> x, int order, std::span<double> out) {
                         std::vector<double> d = f.derivatives(x, order);
                         for (std::size_t k = 0; k < d.size(); ++k) out[k] = c * d[k];
                     });
}

SmoothMap compose(SmoothMap g, SmoothMap f) {
    if (g.arity() != 1 || f.arity() != 1) throw ValidationError("compose: unary maps only");
    int max_order = SmoothMap::kUnbounded;
    if (g.max_order() != SmoothMap::kUnbounded) max_order = g.max_order();
    if (f.max_order() != SmoothMap::kUnbounded)
        max_order = max_order == SmoothMap::kUnbounded ? f.max_order() : std::min(max_order, f.max_order());
    std::string name = g.name() + "o" + f.name();
    return SmoothMap(std::move(name), 1, max_order,
                     [g = std::move(g), f = std::move(f)](std::span<const double> x, int order,
                                                          std::span<double> out) {
                         // (g o f)(x + t) in R[t]/(t^{order+1}); k-th coefficient times k!
                         auto jet = make_jet(order + 1);
                         WeilValue w(jet, x[0]);
                         if (order >= 1) w.coeffs()[1] = 1.0;
                         WeilValue z = apply_smooth(g, apply_smooth(f, w));
                         double fact = 1.0;
                         for (int k = 0; k <= order; ++k) {
                             if (k > 0) fact *= k;
                             out[k] = z.coeffs()[k] * fact;
                         }
                     });
}

SmoothMap derivative(SmoothMap f) {
    if (f.arity() != 1) throw ValidationError("derivative: unary maps only");
    const int max_order = f.max_order() == SmoothMap::kUnbounded ? SmoothMap::kUnbounded : f.max_order() - 1;
    std::string name = f.name() + "'";
    return SmoothMap(std::move(name), 1, max_order,
                     [f = std::move(f)](std::span<const double> x, int order, std::span<double> out) {
                         std::vector<double> d(order + 2);
                         f.derivatives_unary(x[0], order + 1, d);
                         for (int k = 0; k <= order; ++k) out[k] = d[k + 1];
                     });
}

}  // namespace smooth

// ---------------------------------------------------------------------------

WeilValue apply_smooth(const SmoothMap& f, std::span<const WeilValue> args) {
    if (static_cast<int>(args.size()) != f.arity()) throw ValidationError(f.name() + ": arity mismatch");
    if (args.empty()) return WeilValue(make_real(), f.derivatives({}, 0)[0]);
    const AlgebraPtr& alg = args[0].algebra();
    for (const auto& a : args) require_compatible(alg, a.algebra(), "apply_smooth");

    const int K = alg->max_degree();
    const int n = f.arity();
    std::vector<double> base(n);
    for (int j = 0; j < n; ++j) base[j] = args[j].scalar();
    std::vector<double> d = f.derivatives(base, K);
    const auto& layout = derivative_layout(n, K);

    // powers[j][p] = h_j^p
    std::vector<std::vector<WeilValue>> powers(n);
    for (int j = 0; j < n; ++j) {
        WeilValue h = args[j].nilpotent();
        powers[j].reserve(K + 1);
        powers[j].emplace_back(alg, 1.0);
        for (int p = 1; p <= K; ++p) powers[j].push_back(powers[j].back() * h);
    }

    WeilValue result(alg, 0.0);
    for (std::size_t k = 0; k < layout.size(); ++k) {
        if (d[k] == 0.0) continue;
        const MultiIndex& beta = layout[k];
        double factorial = 1.0;
        WeilValue term(alg, 1.0);
        bool is_unit = true;
        for (int j = 0; j < n; ++j) {
            for (int e = 2; e <= beta[j]; ++e) factorial *= e;
            if (beta[j] > 0) {
                term = is_unit ? powers[j][beta[j]] : term * powers[j][beta[j]];
                is_unit = false;
            }
        }
        if (is_unit) {
            result.coeffs()[0] += d[k];
        } else {
            result += term * (d[k] / factorial);
        }
    }
    return result;
}

WeilValue apply_smooth(const SmoothMap& f, const WeilValue& arg) {
    return apply_smooth(f, std::span<const WeilValue>(&arg, 1));
}

SmoothWorkspace::SmoothWorkspace(const WeilAlgebra& alg)
    : alg_(&alg), derivs_(alg.max_degree() + 1), h_(alg.dim()), pow_(alg.dim()), next_(alg.dim()) {}

void SmoothWorkspace::apply_unary(const SmoothMap& f, std::span<const double> in, std::span<double> out) {
    const int K = alg_->max_degree();
    f.derivatives_unary(in[0], K, derivs_);
    const std::size_t dim = alg_->dim();
    if (dim == 2) {  // dual numbers
        out[0] = derivs_[0];
        out[1] = derivs_[1] * in[1];
        return;
    }
    std::fill(out.begin(), out.end(), 0.0);
    out[0] = derivs_[0];
    if (K == 0) return;
    std::copy(in.begin(), in.end(), h_.begin());
    h_[0] = 0.0;
    std::copy(h_.begin(), h_.end(), pow_.begin());
    double factorial = 1.0;
    for (int k = 1; k <= K; ++k) {
        factorial *= k;
        const double c = derivs_[k] / factorial;
        if (c != 0.0)
            for (std::size_t i = 1; i < dim; ++i) out[i] += c * pow_[i];
        if (k < K) {
            alg_->multiply(pow_, h_, next_);
            std::swap(pow_, next_);
        }
    }
}

}  // namespace weilfield
