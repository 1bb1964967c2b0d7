#include "weilfield/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "weilfield/errors.hpp"

namespace weilfield {

Interaction Interaction::from_map(std::string name, SmoothMap rho) {
    SmoothMap rp = smooth::derivative(rho);
    return Interaction{std::move(name), std::move(rho), std::move(rp)};
}

Interaction Interaction::free() { return from_map("free", smooth::zero()); }

Interaction Interaction::mass(double m) { return from_map("mass", smooth::polynomial({0.0, m * m})); }

Interaction Interaction::phi4(double lambda) {
    return from_map("phi4", smooth::polynomial({0.0, 0.0, 0.0, lambda}));
}

Interaction Interaction::sine_gordon() { return from_map("sine_gordon", smooth::sin()); }

Interaction Interaction::custom(std::vector<double> coeffs) {
    return from_map("custom", smooth::polynomial(std::move(coeffs)));
}

// ---------------------------------------------------------------------------

CauchyData CauchyData::zeros(const AlgebraPtr& alg, std::size_t n) { return {WeilArray(alg, n), WeilArray(alg, n), 0}; }

CauchyData CauchyData::from_real(const AlgebraPtr& alg, std::span<const double> phi, std::span<const double> pi) {
    if (phi.size() != pi.size()) throw ValidationError("Cauchy data: phi and pi lengths differ");
    return {WeilArray::from_real(alg, phi), WeilArray::from_real(alg, pi), 0};
}

CauchyData& CauchyData::operator+=(const CauchyData& o) {
    phi += o.phi;
    pi += o.pi;
    return *this;
}

CauchyData& CauchyData::operator*=(double s) {
    phi *= s;
    pi *= s;
    return *this;
}

void CauchyData::axpy(double s, const CauchyData& o) {
    phi.axpy(s, o.phi);
    pi.axpy(s, o.pi);
}

double CauchyData::max_abs() const { return std::max(phi.max_abs(), pi.max_abs()); }

CauchyData CauchyData::embedded(const AlgebraPtr& extended) const {
    return {phi.embedded(extended), pi.embedded(extended), slice};
}

CauchyData CauchyData::dual_part(const AlgebraPtr& base, int part) const {
    return {phi.dual_part(base, part), pi.dual_part(base, part), slice};
}

CauchyData add_epsilon(const CauchyData& d, const CauchyData& v, const AlgebraPtr& extended) {
    require_compatible(d.algebra(), v.algebra(), "add_epsilon");
    if (d.size() != v.size()) throw ValidationError("add_epsilon: length mismatch");
    CauchyData out = d.embedded(extended);
    const std::size_t dim = d.algebra()->dim();
    for (std::size_t i = 0; i < d.size(); ++i) {
        std::copy(v.phi.at(i).begin(), v.phi.at(i).end(), out.phi.at(i).begin() + dim);
        std::copy(v.pi.at(i).begin(), v.pi.at(i).end(), out.pi.at(i).begin() + dim);
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

void apply_rho_row(const SmoothMap& f, SmoothWorkspace& ws, std::size_t d, std::span<const double> in,
                   std::span<double> out) {
    const std::size_t n = in.size() / d;
    for (std::size_t i = 0; i < n; ++i) ws.apply_unary(f, in.subspan(i * d, d), out.subspan(i * d, d));
}

void check_grid(const FieldHistory& phi) {
    if (static_cast<int>(phi.values.rows()) != phi.lattice.n_rows() ||
        static_cast<int>(phi.values.cols()) != phi.lattice.n_space())
        throw ValidationError("field history shape does not match its lattice");
}

}  // namespace

FieldHistory eom_residual(const FieldHistory& phi, const Interaction& rho) {
    check_grid(phi);
    const auto& lat = phi.lattice;
    const auto& alg = phi.algebra();
    const std::size_t d = alg->dim();
    FieldHistory out{lat, WeilGrid(alg, phi.values.rows(), phi.values.cols())};
    std::vector<double> lap(phi.values.row(0).size()), pot(lap.size());
    SmoothWorkspace ws(*alg);
    const double inv_dt2 = 1.0 / (lat.dt() * lat.dt());
    for (int n = 1; n < lat.n_time(); ++n) {
        auto prev = phi.values.row(n - 1), cur = phi.values.row(n), next = phi.values.row(n + 1);
        laplacian_row(lat, d, cur, lap);
        apply_rho_row(rho.rho, ws, d, cur, pot);
        auto dst = out.values.row(n);
        for (std::size_t k = 0; k < dst.size(); ++k)
            dst[k] = (next[k] - 2.0 * cur[k] + prev[k]) * inv_dt2 - lap[k] + pot[k];
    }
    return out;
}

FieldHistory linearize_residual(const FieldHistory& phi, const FieldHistory& psi, const Interaction& rho) {
    check_grid(phi);
    check_grid(psi);
    require_compatible(phi.algebra(), psi.algebra(), "linearize_residual");
    const auto& lat = psi.lattice;
    const auto& alg = psi.algebra();
    const std::size_t d = alg->dim();
    FieldHistory out{lat, WeilGrid(alg, psi.values.rows(), psi.values.cols())};
    std::vector<double> lap(psi.values.row(0).size()), rp(lap.size()), prod(d);
    SmoothWorkspace ws(*alg);
    const double inv_dt2 = 1.0 / (lat.dt() * lat.dt());
    for (int n = 1; n < lat.n_time(); ++n) {
        auto prev = psi.values.row(n - 1), cur = psi.values.row(n), next = psi.values.row(n + 1);
        laplacian_row(lat, d, cur, lap);
        apply_rho_row(rho.rho_prime, ws, d, phi.values.row(n), rp);
        auto dst = out.values.row(n);
        for (std::size_t i = 0; i < static_cast<std::size_t>(lat.n_space()); ++i) {
            alg->multiply(std::span<const double>(rp).subspan(i * d, d), cur.subspan(i * d, d), prod);
            for (std::size_t k = 0; k < d; ++k) {
                const std::size_t p = i * d + k;
                dst[p] = (next[p] - 2.0 * cur[p] + prev[p]) * inv_dt2 - lap[p] + prod[k];
            }
        }
    }
    return out;
}

FieldHistory solve_cauchy(const CauchyData& data, const Interaction& rho, const LatticeSpacetime& lat) {
    const int n = lat.n_space();
    if (static_cast<int>(data.phi.size()) != n || static_cast<int>(data.pi.size()) != n)
        throw ValidationError("Cauchy data length does not match lattice");
    require_compatible(data.phi.algebra(), data.pi.algebra(), "solve_cauchy");
    if (lat.topology() == Topology::line) {
        SupportWindow k = window_hull(lat, support_of(lat, data.phi, true), support_of(lat, data.pi, true));
        if (!window_interior(lat, k)) throw ConeEscape("nilpotent Cauchy data touches the guard band");
        if (!window_interior(lat, causal_cone(lat, k, lat.n_time())))
            throw ConeEscape("causal cone of the nilpotent data reaches the guard band within the run");
    }

    const auto& alg = data.algebra();
    const std::size_t d = alg->dim();
    FieldHistory out{lat, WeilGrid(alg, lat.n_rows(), n)};
    const double dt = lat.dt(), dt2 = dt * dt;
    std::vector<double> lap(static_cast<std::size_t>(n) * d), pot(lap.size());
    SmoothWorkspace ws(*alg);

    out.values.set_row(0, data.phi);
    {
        auto phi0 = data.phi.raw(), pi0 = data.pi.raw();
        laplacian_row(lat, d, phi0, lap);
        apply_rho_row(rho.rho, ws, d, phi0, pot);
        auto r1 = out.values.row(1);
        for (std::size_t k = 0; k < r1.size(); ++k) r1[k] = phi0[k] + dt * pi0[k] + 0.5 * dt2 * (lap[k] - pot[k]);
    }
    for (int t = 1; t < lat.n_time(); ++t) {
        auto prev = out.values.row(t - 1), cur = out.values.row(t), next = out.values.row(t + 1);
        laplacian_row(lat, d, cur, lap);
        apply_rho_row(rho.rho, ws, d, cur, pot);
        for (std::size_t k = 0; k < next.size(); ++k) next[k] = 2.0 * cur[k] - prev[k] + dt2 * (lap[k] - pot[k]);
    }
    return out;
}

CauchyData restrict_data(const FieldHistory& phi, int slice) {
    check_grid(phi);
    if (slice < 0 || slice >= phi.lattice.n_rows()) throw OutOfBasis("restrict_data: slice out of range");
    return {phi.values.row_array(slice), time_derivative(phi.lattice, phi.values, slice), slice};
}

FieldHistory tangent_lift(const CauchyData& d, const CauchyData& v, const Interaction& rho,
                          const LatticeSpacetime& lat) {
    AlgebraPtr ext = extend_dual(d.algebra());
    return solve_cauchy(add_epsilon(d, v, ext), rho, lat);
}

double eom_residual_norm(const FieldHistory& phi, const Interaction& rho) {
    FieldHistory r = eom_residual(phi, rho);
    return r.values.max_abs();
}

}  // namespace weilfield
