#include "weilfield/poisson.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "weilfield/errors.hpp"

namespace weilfield {

double Covector::norm() const {
    double s = 0.0;
    for (double v : phi.raw()) s += v * v;
    for (double v : pi.raw()) s += v * v;
    return std::sqrt(s);
}

WeilArray multiply_arrays(const WeilArray& a, const WeilArray& b) {
    require_compatible(a.algebra(), b.algebra(), "multiply_arrays");
    WeilArray out(a.algebra(), a.size());
    for (std::size_t i = 0; i < a.size(); ++i) a.algebra()->multiply(a.at(i), b.at(i), out.at(i));
    return out;
}

CauchyData scale_data(const WeilValue& w, const CauchyData& a) {
    require_compatible(w.algebra(), a.algebra(), "scale_data");
    CauchyData out = CauchyData::zeros(a.algebra(), a.size());
    out.slice = a.slice;
    const auto& alg = *a.algebra();
    for (std::size_t i = 0; i < a.size(); ++i) {
        alg.multiply(w.coeffs(), a.phi.at(i), out.phi.at(i));
        alg.multiply(w.coeffs(), a.pi.at(i), out.pi.at(i));
    }
    return out;
}

namespace {

std::optional<SupportWindow> hull_opt(const LatticeSpacetime* lat, const std::optional<SupportWindow>& a,
                                      const std::optional<SupportWindow>& b) {
    if (!a || !b || !lat) return std::nullopt;
    return window_hull(*lat, *a, *b);
}

// Observables remember the lattice only through their support window, so
// hull computations for composites use a circle/line-agnostic interval hull
// when no lattice is at hand.
std::optional<SupportWindow> interval_hull(const std::optional<SupportWindow>& a,
                                           const std::optional<SupportWindow>& b) {
    if (!a || !b) return std::nullopt;
    if (a->empty()) return b;
    if (b->empty()) return a;
    int lo = std::min(a->start, b->start);
    int hi = std::max(a->start + a->length, b->start + b->length);
    return SupportWindow{lo, hi - lo};
}

std::optional<SupportWindow> compact_support(const LatticeSpacetime& lat, std::span<const double> f) {
    SupportWindow w = support_of(lat, f);
    if (!window_interior(lat, w)) return std::nullopt;
    return w;
}

}  // namespace

// ---------------------------------------------------------------------------

Observable::Observable(Kind kind, std::string label, Evaluator eval, std::optional<SupportWindow> support)
    : kind_(kind), label_(std::move(label)), eval_(std::move(eval)), support_(support) {}

Observable Observable::slice_phi(const LatticeSpacetime& lat, std::vector<double> f) {
    if (static_cast<int>(f.size()) != lat.n_space()) throw ValidationError("smearing length mismatch");
    auto support = compact_support(lat, f);
    const double dx = lat.dx();
    return Observable(Kind::slice_phi, "int f phi",
                      [f = std::move(f), dx](const CauchyData& at) {
                          WeilValue s(at.algebra(), 0.0);
                          auto c = s.coeffs();
                          for (std::size_t i = 0; i < f.size(); ++i) {
                              auto v = at.phi.at(i);
                              for (std::size_t k = 0; k < c.size(); ++k) c[k] += f[i] * v[k];
                          }
                          for (double& x : c) x *= dx;
                          return s;
                      },
                      support);
}

Observable Observable::slice_pi(const LatticeSpacetime& lat, std::vector<double> g) {
    if (static_cast<int>(g.size()) != lat.n_space()) throw ValidationError("smearing length mismatch");
    auto support = compact_support(lat, g);
    const double dx = lat.dx();
    return Observable(Kind::slice_pi, "int g pi",
                      [g = std::move(g), dx](const CauchyData& at) {
                          WeilValue s(at.algebra(), 0.0);
                          auto c = s.coeffs();
                          for (std::size_t i = 0; i < g.size(); ++i) {
                              auto v = at.pi.at(i);
                              for (std::size_t k = 0; k < c.size(); ++k) c[k] += g[i] * v[k];
                          }
                          for (double& x : c) x *= dx;
                          return s;
                      },
                      support);
}

Observable Observable::spacetime(const LatticeSpacetime& lat, Interaction rho, std::vector<double> g) {
    const std::size_t rows = lat.n_rows(), cols = lat.n_space();
    if (g.size() != rows * cols) throw ValidationError("spacetime smearing must have (n_time+1) x n_space values");
    // data sites that can influence Phi where g is nonzero
    std::optional<SupportWindow> support = SupportWindow{};
    for (std::size_t n = 0; n < rows && support; ++n) {
        SupportWindow row = support_of(lat, std::span<const double>(g).subspan(n * cols, cols));
        SupportWindow back = causal_cone(lat, row, static_cast<int>(n));
        if (!window_interior(lat, back)) support.reset();
        else support = window_hull(lat, *support, back);
    }
    return Observable(Kind::spacetime, "int g Phi vol",
                      [lat, rho = std::move(rho), g = std::move(g)](const CauchyData& at) {
                          FieldHistory h = solve_cauchy(at, rho, lat);
                          WeilValue s(at.algebra(), 0.0);
                          auto c = s.coeffs();
                          const std::size_t rows = lat.n_rows(), cols = lat.n_space();
                          for (std::size_t n = 0; n < rows; ++n) {
                              const double w = (n == 0 || n + 1 == rows) ? 0.5 : 1.0;
                              for (std::size_t i = 0; i < cols; ++i) {
                                  const double gi = w * g[n * cols + i];
                                  if (gi == 0.0) continue;
                                  auto v = h.values.at(n, i);
                                  for (std::size_t k = 0; k < c.size(); ++k) c[k] += gi * v[k];
                              }
                          }
                          for (double& x : c) x *= lat.dx() * lat.dt();
                          return s;
                      },
                      support);
}

Observable Observable::constant(double value) {
    return Observable(Kind::constant, std::to_string(value),
                      [value](const CauchyData& at) { return WeilValue(at.algebra(), value); }, SupportWindow{});
}

Observable operator*(const Observable& a, const Observable& b) {
    return Observable(Observable::Kind::poly_composite, "(" + a.label() + ")*(" + b.label() + ")",
                      [a, b](const CauchyData& at) { return a(at) * b(at); }, interval_hull(a.support(), b.support()));
}

Observable operator+(const Observable& a, const Observable& b) {
    return Observable(Observable::Kind::poly_composite, "(" + a.label() + ")+(" + b.label() + ")",
                      [a, b](const CauchyData& at) { return a(at) + b(at); }, interval_hull(a.support(), b.support()));
}

Observable operator*(double s, const Observable& a) {
    return Observable(Observable::Kind::poly_composite, std::to_string(s) + "*(" + a.label() + ")",
                      [s, a](const CauchyData& at) { return a(at) * s; }, a.support());
}

Covector differential(const Observable& f, const CauchyData& at) {
    const AlgebraPtr& w = at.algebra();
    const std::size_t d = w->dim();
    AlgebraPtr ext = extend_dual(w);
    CauchyData point = at.embedded(ext);
    Covector out{WeilArray(w, at.size()), WeilArray(w, at.size())};
    auto component = [&](WeilArray& slot, WeilArray& target, std::size_t j) {
        slot.at(j)[d] = 1.0;  // eps * 1
        WeilValue val = f(point);
        slot.at(j)[d] = 0.0;
        auto c = val.coeffs();
        std::copy(c.begin() + d, c.end(), target.at(j).begin());
    };
    for (std::size_t j = 0; j < at.size(); ++j) component(point.phi, out.phi, j);
    for (std::size_t j = 0; j < at.size(); ++j) component(point.pi, out.pi, j);
    return out;
}

// ---------------------------------------------------------------------------

OmegaOperator OmegaOperator::canonical(const LatticeSpacetime& lat) {
    OmegaOperator op;
    op.canonical_ = true;
    op.n_ = lat.n_space();
    op.dx_ = lat.dx();
    return op;
}

OmegaOperator OmegaOperator::dense(Eigen::MatrixXd a, double rank_tol) {
    if (a.rows() != a.cols() || a.rows() % 2 != 0) throw ValidationError("omega matrix must be square of even size");
    const double asym = (a + a.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff())) throw ValidationError("omega matrix is not antisymmetric");
    OmegaOperator op;
    op.n_ = static_cast<std::size_t>(a.rows() / 2);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double cutoff = rank_tol * (s.size() ? s(0) : 0.0);
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
    for (Eigen::Index k = 0; k < s.size(); ++k)
        if (s(k) > cutoff) inv(k) = 1.0 / s(k);
    op.pinv_ = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
    op.a_ = std::move(a);
    return op;
}

OmegaOperator OmegaOperator::degenerate(const LatticeSpacetime& lat, const Eigen::VectorXd& null_dir) {
    const Eigen::Index m = 2 * lat.n_space();
    if (null_dir.size() != m) throw ValidationError("null direction has the wrong length");
    Eigen::VectorXd u = null_dir.normalized();
    Eigen::MatrixXd p = Eigen::MatrixXd::Identity(m, m) - u * u.transpose();
    Eigen::MatrixXd a = p.transpose() * canonical(lat).matrix() * p;
    a = (0.5 * (a - a.transpose())).eval();  // exact antisymmetry after rounding
    return dense(std::move(a));
}

OmegaOperator OmegaOperator::assembled(const CauchyData& base, const Interaction& rho, const LatticeSpacetime& lat,
                                       int slice) {
    const std::size_t n = lat.n_space();
    std::vector<FieldHistory> fibers;
    fibers.reserve(2 * n);
    std::vector<FieldHistory> bases;
    for (std::size_t a = 0; a < 2 * n; ++a) {
        CauchyData e = CauchyData::zeros(base.algebra(), n);
        (a < n ? e.phi.at(a) : e.pi.at(a - n))[0] = 1.0;
        FieldHistory h = tangent_lift(base, e, rho, lat);
        fibers.push_back(h.dual_part(base.algebra(), 1));
    }
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    std::vector<std::vector<double>> value(2 * n), rate(2 * n);
    for (std::size_t a = 0; a < 2 * n; ++a) {
        value[a] = fibers[a].values.row_array(slice).scalars();
        rate[a] = time_derivative(lat, fibers[a].values, slice).scalars();
    }
    for (std::size_t a = 0; a < 2 * n; ++a) {
        for (std::size_t b = a + 1; b < 2 * n; ++b) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += value[a][i] * rate[b][i] - value[b][i] * rate[a][i];
            m(a, b) = s * lat.dx();
            m(b, a) = -m(a, b);
        }
    }
    return dense(std::move(m));
}

Eigen::MatrixXd OmegaOperator::matrix() const {
    if (!canonical_) return a_;
    const Eigen::Index n = static_cast<Eigen::Index>(n_);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        a(i, n + i) = dx_;
        a(n + i, i) = -dx_;
    }
    return a;
}

namespace {

// value of component a (phi block first) of tangent data / covector arrays
std::span<const double> slot(const WeilArray& phi, const WeilArray& pi, std::size_t a, std::size_t n) {
    return a < n ? phi.at(a) : pi.at(a - n);
}

}  // namespace

WeilValue OmegaOperator::operator()(const CauchyData& x, const CauchyData& y) const {
    require_compatible(x.algebra(), y.algebra(), "omega");
    if (x.size() != n_ || y.size() != n_) throw ValidationError("omega: tangent data length mismatch");
    const auto& alg = *x.algebra();
    WeilValue out(x.algebra(), 0.0);
    if (canonical_) {
        // per-site terms are formed before summation so that swapping the
        // arguments negates every partial sum exactly
        const std::size_t d = alg.dim();
        std::vector<double> a(d), b(d);
        auto acc = out.coeffs();
        for (std::size_t i = 0; i < n_; ++i) {
            alg.multiply(x.phi.at(i), y.pi.at(i), a);
            alg.multiply(x.pi.at(i), y.phi.at(i), b);
            for (std::size_t k = 0; k < d; ++k) acc[k] += a[k] - b[k];
        }
        out *= dx_;
        return out;
    }
    Covector ay = contract(y);
    for (std::size_t a = 0; a < 2 * n_; ++a)
        alg.multiply_add(slot(x.phi, x.pi, a, n_), slot(ay.phi, ay.pi, a, n_), 1.0, out.coeffs());
    return out;
}

Covector OmegaOperator::contract(const CauchyData& v) const {
    if (v.size() != n_) throw ValidationError("omega: tangent data length mismatch");
    const std::size_t d = v.algebra()->dim();
    Covector out{WeilArray(v.algebra(), n_), WeilArray(v.algebra(), n_)};
    if (canonical_) {
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t k = 0; k < d; ++k) {
                out.phi.at(i)[k] = dx_ * v.pi.at(i)[k];
                out.pi.at(i)[k] = -dx_ * v.phi.at(i)[k];
            }
        return out;
    }
    Eigen::VectorXd x(2 * n_);
    for (std::size_t k = 0; k < d; ++k) {
        for (std::size_t a = 0; a < 2 * n_; ++a) x(a) = slot(v.phi, v.pi, a, n_)[k];
        Eigen::VectorXd y = a_ * x;
        for (std::size_t a = 0; a < n_; ++a) {
            out.phi.at(a)[k] = y(a);
            out.pi.at(a)[k] = y(n_ + a);
        }
    }
    return out;
}

OmegaOperator::Solution OmegaOperator::solve(const Covector& df) const {
    const AlgebraPtr& alg = df.phi.algebra();
    const std::size_t d = alg->dim();
    CauchyData v = CauchyData::zeros(alg, n_);
    if (canonical_) {
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t k = 0; k < d; ++k) {
                v.phi.at(i)[k] = -df.pi.at(i)[k] / dx_;
                v.pi.at(i)[k] = df.phi.at(i)[k] / dx_;
            }
    } else {
        Eigen::VectorXd rhs(2 * n_);
        for (std::size_t k = 0; k < d; ++k) {
            for (std::size_t a = 0; a < 2 * n_; ++a) rhs(a) = slot(df.phi, df.pi, a, n_)[k];
            Eigen::VectorXd x = pinv_ * rhs;
            for (std::size_t a = 0; a < n_; ++a) {
                v.phi.at(a)[k] = x(a);
                v.pi.at(a)[k] = x(n_ + a);
            }
        }
    }
    Covector back = contract(v);
    back.phi.axpy(-1.0, df.phi);
    back.pi.axpy(-1.0, df.pi);
    const double scale = df.norm();
    const double defect = back.norm();
    return {std::move(v), scale > 0.0 ? defect / scale : defect};
}

// ---------------------------------------------------------------------------

SolVectorField::SolVectorField(std::string label, Evaluator eval, std::optional<SupportWindow> window)
    : label_(std::move(label)), eval_(std::move(eval)), window_(window) {}

SolVectorField SolVectorField::zero(std::size_t n_space) {
    return SolVectorField("0", [n_space](const CauchyData& at) { return CauchyData::zeros(at.algebra(), n_space); },
                          SupportWindow{});
}

SolVectorField SolVectorField::constant(const LatticeSpacetime& lat, std::vector<double> phi, std::vector<double> pi) {
    if (static_cast<int>(phi.size()) != lat.n_space() || phi.size() != pi.size())
        throw ValidationError("constant vector field: length mismatch");
    std::optional<SupportWindow> window = window_hull(lat, support_of(lat, phi), support_of(lat, pi));
    if (!window_interior(lat, *window)) window.reset();
    return SolVectorField("const",
                          [phi = std::move(phi), pi = std::move(pi)](const CauchyData& at) {
                              return CauchyData::from_real(at.algebra(), phi, pi);
                          },
                          window);
}

SolVectorField SolVectorField::hamiltonian(const Observable& f, const OmegaOperator& omega) {
    return SolVectorField("X_" + f.label(),
                          [f, omega](const CauchyData& at) { return omega.solve(differential(f, at)).v; },
                          f.support());
}

SolVectorField SolVectorField::lie_bracket_of(const SolVectorField& v, const SolVectorField& w,
                                              const LatticeSpacetime& lat) {
    return SolVectorField("[" + v.label() + "," + w.label() + "]",
                          [v, w](const CauchyData& at) { return lie_bracket(v, w, at); },
                          hull_opt(&lat, v.window(), w.window()));
}

SolVectorField SolVectorField::scaled_by(const Observable& f, const SolVectorField& v) {
    return SolVectorField("(" + f.label() + ")." + v.label(),
                          [f, v](const CauchyData& at) { return scale_data(f(at), v(at)); }, v.window());
}

SolVectorField operator+(const SolVectorField& a, const SolVectorField& b) {
    return SolVectorField(a.label() + "+" + b.label(),
                          [a, b](const CauchyData& at) {
                              CauchyData out = a(at);
                              out += b(at);
                              return out;
                          },
                          interval_hull(a.window(), b.window()));
}

CauchyData PolynomialVectorField::operator()(const CauchyData& at) const {
    if (at.size() != n_space || components.size() != 2 * n_space)
        throw ValidationError("polynomial vector field: size mismatch");
    const AlgebraPtr& alg = at.algebra();
    CauchyData out = CauchyData::zeros(alg, n_space);
    auto var = [&](int idx) {
        return static_cast<std::size_t>(idx) < n_space ? at.phi.value(idx) : at.pi.value(idx - n_space);
    };
    for (std::size_t c = 0; c < components.size(); ++c) {
        WeilValue acc(alg, 0.0);
        for (const Monomial& m : components[c]) {
            WeilValue term(alg, m.coeff);
            for (auto [idx, e] : m.factors) {
                WeilValue x = var(idx);
                for (int p = 0; p < e; ++p) term = term * x;
            }
            acc += term;
        }
        if (c < n_space) out.phi.set(c, acc);
        else out.pi.set(c - n_space, acc);
    }
    return out;
}

SolVectorField PolynomialVectorField::field(const LatticeSpacetime& lat) const {
    (void)lat;
    return SolVectorField("polynomial", [self = *this](const CauchyData& at) { return self(at); }, std::nullopt);
}

// ---------------------------------------------------------------------------

HamiltonianSolve hamiltonian_vf(const Observable& f, const CauchyData& at, const OmegaOperator& omega,
                                const LatticeSpacetime& lat, bool sc_required, double admissibility_tol) {
    OmegaOperator::Solution s = omega.solve(differential(f, at));
    HamiltonianSolve out{std::move(s.v), s.residual, 0.0, false};
    if (sc_required && lat.topology() == Topology::line) {
        for (int i = 0; i < lat.n_space(); ++i) {
            if (i >= lat.interior_begin() && i <= lat.interior_end()) continue;
            for (double c : out.v.phi.at(i)) out.support_defect = std::max(out.support_defect, std::abs(c));
            for (double c : out.v.pi.at(i)) out.support_defect = std::max(out.support_defect, std::abs(c));
        }
    }
    out.admissible = out.residual <= admissibility_tol && out.support_defect == 0.0;
    return out;
}

CauchyData lie_bracket(const SolVectorField& v, const SolVectorField& w, const CauchyData& at) {
    const AlgebraPtr& base = at.algebra();
    AlgebraPtr ext = extend_dual(base);
    CauchyData v_of_w = w(add_epsilon(at, v(at), ext)).dual_part(base, 1);
    CauchyData w_of_v = v(add_epsilon(at, w(at), ext)).dual_part(base, 1);
    v_of_w.axpy(-1.0, w_of_v);
    return v_of_w;
}

CauchyData tau_map(const SolVectorField& v, const SolVectorField& w, const CauchyData& at) {
    const AlgebraPtr& base = at.algebra();
    AlgebraPtr e1 = extend_dual(base);
    AlgebraPtr e2 = extend_dual(e1);
    const std::size_t g = base->num_generators();
    const WeilValue d1 = WeilValue::generator(e2, g);
    const WeilValue d2 = WeilValue::generator(e2, g + 1);
    auto flow = [](const SolVectorField& field, const CauchyData& p, const WeilValue& delta) {
        CauchyData out = p;
        out += scale_data(delta, field(p));
        return out;
    };
    CauchyData p = at.embedded(e1).embedded(e2);
    p = flow(v, p, d1);
    p = flow(w, p, d2);
    p = flow(v, p, -d1);
    p = flow(w, p, -d2);
    return p;
}

CauchyData tau_bracket(const SolVectorField& v, const SolVectorField& w, const CauchyData& at) {
    const AlgebraPtr& base = at.algebra();
    AlgebraPtr e1 = extend_dual(base);
    return tau_map(v, w, at).dual_part(e1, 1).dual_part(base, 1);
}

// ---------------------------------------------------------------------------

double pair_residual(const Observable& f, const SolVectorField& v, const PoissonContext& ctx) {
    double worst = 0.0;
    for (const CauchyData& at : ctx.samples) {
        Covector df = differential(f, at);
        Covector iv = ctx.omega.contract(v(at));
        iv.phi.axpy(-1.0, df.phi);
        iv.pi.axpy(-1.0, df.pi);
        const double scale = df.norm();
        const double r = scale > 0.0 ? iv.norm() / scale : iv.norm();
        worst = std::max(worst, r);
    }
    return worst;
}

HamiltonianPair make_pair(const Observable& f, const PoissonContext& ctx) {
    SolVectorField v = SolVectorField::hamiltonian(f, ctx.omega);
    double r = 0.0;
    for (const CauchyData& at : ctx.samples) r = std::max(r, ctx.omega.solve(differential(f, at)).residual);
    return {f, std::move(v), r};
}

HamiltonianPair bracket(const HamiltonianPair& p, const HamiltonianPair& q, const PoissonContext& ctx) {
    if (ctx.lattice.topology() == Topology::line && !p.v.spacelike_compact() && !q.v.spacelike_compact())
        throw ValidationError("line topology: bracket needs at least one spacelike-compact Hamiltonian vector field");
    const SolVectorField v = p.v, w = q.v;
    const OmegaOperator omega = ctx.omega;
    std::optional<SupportWindow> support;
    if (p.f.support() && q.f.support()) support = window_hull(ctx.lattice, *p.f.support(), *q.f.support());
    Observable f(Observable::Kind::bracket, "{" + p.f.label() + "," + q.f.label() + "}",
                 [v, w, omega](const CauchyData& at) { return omega(v(at), w(at)); }, support);
    SolVectorField vw = SolVectorField::lie_bracket_of(v, w, ctx.lattice);
    const double r = ctx.revalidate ? pair_residual(f, vw, ctx) : std::max(p.residual, q.residual);
    return {std::move(f), std::move(vw), r};
}

HamiltonianPair product(const HamiltonianPair& p, const HamiltonianPair& q, const PoissonContext& ctx) {
    Observable f = p.f * q.f;
    SolVectorField v = SolVectorField::scaled_by(p.f, q.v) + SolVectorField::scaled_by(q.f, p.v);
    const double r = ctx.revalidate ? pair_residual(f, v, ctx) : std::max(p.residual, q.residual);
    return {std::move(f), std::move(v), r};
}

HamiltonianPair unit(const PoissonContext& ctx) {
    return {Observable::constant(1.0), SolVectorField::zero(ctx.lattice.n_space()), 0.0};
}

namespace {

double rel(double defect, double scale) { return scale > 0.0 ? defect / scale : defect; }

double max_abs_sum(std::initializer_list<const CauchyData*> terms, std::initializer_list<double> signs,
                   double* scale_out) {
    const CauchyData& first = **terms.begin();
    CauchyData sum = CauchyData::zeros(first.algebra(), first.size());
    double scale = 0.0;
    auto s = signs.begin();
    for (const CauchyData* t : terms) {
        sum.axpy(*s++, *t);
        scale = std::max(scale, t->max_abs());
    }
    *scale_out = scale;
    return sum.max_abs();
}

}  // namespace

AxiomReport verify_axioms(const HamiltonianPair& p, const HamiltonianPair& q, const HamiltonianPair& r,
                          const PoissonContext& ctx) {
    PoissonContext lazy = ctx;
    lazy.revalidate = false;
    AxiomReport rep;
    rep.input_residual = std::max({p.residual, q.residual, r.residual});

    HamiltonianPair pq = bracket(p, q, lazy);
    HamiltonianPair qp = bracket(q, p, lazy);
    HamiltonianPair j1 = bracket(p, bracket(q, r, lazy), lazy);
    HamiltonianPair j2 = bracket(q, bracket(r, p, lazy), lazy);
    HamiltonianPair j3 = bracket(r, pq, lazy);
    HamiltonianPair lhs = bracket(p, product(q, r, lazy), lazy);
    HamiltonianPair rhs1 = product(pq, r, lazy);
    HamiltonianPair rhs2 = product(q, bracket(p, r, lazy), lazy);

    for (const CauchyData& at : ctx.samples) {
        const double a = pq.f(at).scalar(), b = qp.f(at).scalar();
        rep.antisymmetry_f = std::max(rep.antisymmetry_f, rel(std::abs(a + b), std::max(std::abs(a), std::abs(b))));
        double scale = 0.0;
        CauchyData va = pq.v(at), vb = qp.v(at);
        double d = max_abs_sum({&va, &vb}, {1.0, 1.0}, &scale);
        rep.antisymmetry_v = std::max(rep.antisymmetry_v, rel(d, scale));

        const double f1 = j1.f(at).scalar(), f2 = j2.f(at).scalar(), f3 = j3.f(at).scalar();
        rep.jacobi_f = std::max(rep.jacobi_f,
                                rel(std::abs(f1 + f2 + f3), std::max({std::abs(f1), std::abs(f2), std::abs(f3)})));
        CauchyData u1 = j1.v(at), u2 = j2.v(at), u3 = j3.v(at);
        d = max_abs_sum({&u1, &u2, &u3}, {1.0, 1.0, 1.0}, &scale);
        rep.jacobi_v = std::max(rep.jacobi_v, rel(d, scale));

        const double l = lhs.f(at).scalar(), r1 = rhs1.f(at).scalar(), r2 = rhs2.f(at).scalar();
        rep.leibniz_f = std::max(rep.leibniz_f,
                                 rel(std::abs(l - r1 - r2), std::max({std::abs(l), std::abs(r1), std::abs(r2)})));
        CauchyData lv = lhs.v(at), rv1 = rhs1.v(at), rv2 = rhs2.v(at);
        d = max_abs_sum({&lv, &rv1, &rv2}, {1.0, -1.0, -1.0}, &scale);
        rep.leibniz_v = std::max(rep.leibniz_v, rel(d, scale));
    }
    rep.bracket_residual = pair_residual(pq.f, pq.v, ctx);
    return rep;
}

}  // namespace weilfield
