#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "support.hpp"
#include "weilfield/dynamics.hpp"
#include "weilfield/errors.hpp"

using namespace weilfield;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Plain leapfrog for the periodic equation Phi_tt = Phi_xx - rho(Phi), written
// without any library stencil so it can serve as an oracle.
std::vector<std::vector<double>> reference_leapfrog(const std::vector<double>& phi0, const std::vector<double>& pi0,
                                                    double dx, double dt, int steps, double (*rho)(double)) {
    const int n = static_cast<int>(phi0.size());
    std::vector<std::vector<double>> rows(steps + 1, std::vector<double>(n));
    auto accel = [&](const std::vector<double>& u, int i) {
        const double l = u[(i + n - 1) % n], r = u[(i + 1) % n];
        return (l - 2.0 * u[i] + r) / (dx * dx) - rho(u[i]);
    };
    rows[0] = phi0;
    for (int i = 0; i < n; ++i) rows[1][i] = phi0[i] + dt * pi0[i] + 0.5 * dt * dt * accel(phi0, i);
    for (int t = 1; t < steps; ++t)
        for (int i = 0; i < n; ++i) rows[t + 1][i] = 2.0 * rows[t][i] - rows[t - 1][i] + dt * dt * accel(rows[t], i);
    return rows;
}

std::vector<double> sampled(const LatticeSpacetime& lat, double (*f)(double)) {
    std::vector<double> v(lat.n_space());
    for (int i = 0; i < lat.n_space(); ++i) v[i] = f(lat.position(i));
    return v;
}

double max_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("free standing wave converges at second order") {
    double prev_sol = 0.0, prev_res = 0.0;
    for (int n : {32, 64, 128}) {
        auto lat = LatticeSpacetime::circle(n, kTwoPi, 0.5, n);
        std::vector<double> zero(n, 0.0);
        auto d = CauchyData::from_real(make_real(), sampled(lat, [](double x) { return std::cos(x); }), zero);
        auto h = solve_cauchy(d, Interaction::free(), lat);
        double err = 0.0;
        FieldHistory exact{lat, WeilGrid(make_real(), lat.n_rows(), n)};
        for (int t = 0; t < lat.n_rows(); ++t)
            for (int i = 0; i < n; ++i) {
                const double v = std::cos(lat.time(t)) * std::cos(lat.position(i));
                exact.values.at(t, i)[0] = v;
                err = std::max(err, std::abs(h.values.at(t, i)[0] - v));
            }
        const double res = eom_residual_norm(exact, Interaction::free());
        CHECK(eom_residual_norm(h, Interaction::free()) < 1e-10);
        if (n > 32) {
            CHECK(std::log2(prev_sol / err) == doctest::Approx(2.0).epsilon(0.1));
            CHECK(std::log2(prev_res / res) == doctest::Approx(2.0).epsilon(0.1));
        }
        prev_sol = err;
        prev_res = res;
    }
}

TEST_CASE("residual of a constant field is the potential") {
    auto lat = LatticeSpacetime::circle(16, kTwoPi, 0.5, 5);
    FieldHistory h{lat, WeilGrid(make_real(), lat.n_rows(), 16)};
    for (double& v : h.values.raw()) v = 0.7;
    auto r = eom_residual(h, Interaction::sine_gordon());
    for (int t = 0; t < lat.n_rows(); ++t)
        for (int i = 0; i < 16; ++i) {
            const double expect = (t == 0 || t == lat.n_time()) ? 0.0 : std::sin(0.7);
            CHECK(r.values.at(t, i)[0] == doctest::Approx(expect).epsilon(1e-12).scale(1.0));
        }
    auto m = eom_residual(h, Interaction::mass(2.0));
    CHECK(m.values.at(2, 3)[0] == doctest::Approx(4.0 * 0.7));
    auto c = eom_residual(h, Interaction::custom({1.0, 0.0, 2.0}));
    CHECK(c.values.at(2, 3)[0] == doctest::Approx(1.0 + 2.0 * 0.49));
    CHECK(eom_residual(h, Interaction::phi4(3.0)).values.at(1, 0)[0] == doctest::Approx(3.0 * 0.343));
}

TEST_CASE("Weil solve agrees with a plain leapfrog") {
    std::mt19937_64 rng(21);
    auto lat = LatticeSpacetime::circle(40, kTwoPi, 0.6, 50);
    auto phi = support::gaussian(lat, 2.0, 0.5, 0.8), pi = support::gaussian(lat, 4.0, 0.4, -0.5);
    auto ref = reference_leapfrog(phi, pi, lat.dx(), lat.dt(), lat.n_time(), [](double x) { return std::sin(x); });
    auto h = solve_cauchy(CauchyData::from_real(make_real(), phi, pi), Interaction::sine_gordon(), lat);
    double worst = 0.0;
    for (int t = 0; t < lat.n_rows(); ++t)
        for (int i = 0; i < 40; ++i) worst = std::max(worst, std::abs(h.values.at(t, i)[0] - ref[t][i]));
    CHECK(worst < 1e-12);

    // a linear equation decouples every Weil coefficient
    auto alg = WeilAlgebra::create({3, 2});
    CauchyData d = CauchyData::zeros(alg, 40);
    std::vector<std::vector<double>> cp(alg->dim()), cq(alg->dim());
    for (std::size_t k = 0; k < alg->dim(); ++k) {
        cp[k] = support::random_vector(rng, 40);
        cq[k] = support::random_vector(rng, 40);
        for (int i = 0; i < 40; ++i) {
            d.phi.at(i)[k] = cp[k][i];
            d.pi.at(i)[k] = cq[k][i];
        }
    }
    auto hw = solve_cauchy(d, Interaction::mass(1.3), lat);
    for (std::size_t k = 0; k < alg->dim(); ++k) {
        auto rk = reference_leapfrog(cp[k], cq[k], lat.dx(), lat.dt(), lat.n_time(),
                                     [](double x) { return 1.69 * x; });
        auto col = hw.values.coefficient(k);
        double e = 0.0;
        for (int t = 0; t < lat.n_rows(); ++t)
            for (int i = 0; i < 40; ++i) e = std::max(e, std::abs(col[t * 40 + i] - rk[t][i]));
        CHECK(e < 1e-11);
    }
}

TEST_CASE("tangent lift is the derivative of the solution map") {
    auto lat = LatticeSpacetime::circle(32, kTwoPi, 0.5, 40);
    auto rho = Interaction::sine_gordon();
    auto phi = support::gaussian(lat, 3.0, 0.6, 1.2), pi = support::gaussian(lat, 2.0, 0.5, 0.3);
    auto vphi = support::gaussian(lat, 1.0, 0.4), vpi = support::gaussian(lat, 5.0, 0.3, -1.0);
    auto r = make_real();
    auto d = CauchyData::from_real(r, phi, pi), v = CauchyData::from_real(r, vphi, vpi);
    auto lift = tangent_lift(d, v, rho, lat);
    auto fiber = lift.dual_part(r, 1).values.coefficient(0);

    const double h = 1e-5;
    CauchyData dp = d, dm = d;
    dp.axpy(h, v);
    dm.axpy(-h, v);
    auto sp = solve_cauchy(dp, rho, lat).values.coefficient(0), sm = solve_cauchy(dm, rho, lat).values.coefficient(0);
    double num = 0.0, scale = 0.0;
    for (std::size_t p = 0; p < fiber.size(); ++p) {
        num = std::max(num, std::abs((sp[p] - sm[p]) / (2 * h) - fiber[p]));
        scale = std::max(scale, std::abs(fiber[p]));
    }
    CHECK(num / scale < 1e-7);

    // eps part of the residual of the lifted history is the linearised residual
    auto res = eom_residual(lift, rho).dual_part(r, 1);
    auto lin = linearize_residual(lift.dual_part(r, 0), lift.dual_part(r, 1), rho);
    CHECK(max_diff(res.values.raw(), lin.values.raw()) < 1e-9);
    CHECK(linearize_residual(lift.dual_part(r, 0), lift.dual_part(r, 1), rho).values.max_abs() < 1e-9);

    // second order jets carry the second derivative
    auto j3 = make_jet(3);
    CauchyData d3 = CauchyData::zeros(j3, 32);
    for (int i = 0; i < 32; ++i) {
        d3.phi.at(i)[0] = phi[i];
        d3.phi.at(i)[1] = vphi[i];
        d3.pi.at(i)[0] = pi[i];
        d3.pi.at(i)[1] = vpi[i];
    }
    auto s3 = solve_cauchy(d3, rho, lat);
    auto c1 = s3.values.coefficient(1), c2 = s3.values.coefficient(2);
    auto s0 = solve_cauchy(d, rho, lat).values.coefficient(0);
    const double h2 = 1e-3;
    CauchyData dp2 = d, dm2 = d;
    dp2.axpy(h2, v);
    dm2.axpy(-h2, v);
    auto sp2 = solve_cauchy(dp2, rho, lat).values.coefficient(0), sm2 = solve_cauchy(dm2, rho, lat).values.coefficient(0);
    double e1 = 0.0, e2 = 0.0, s2 = 0.0;
    for (std::size_t p = 0; p < c1.size(); ++p) {
        e1 = std::max(e1, std::abs(c1[p] - fiber[p]));
        const double second = (sp2[p] - 2.0 * s0[p] + sm2[p]) / (h2 * h2);
        e2 = std::max(e2, std::abs(0.5 * second - c2[p]));
        s2 = std::max(s2, std::abs(c2[p]));
    }
    CHECK(e1 < 1e-12);
    CHECK(e2 / s2 < 1e-4);
}

TEST_CASE("tangent lift is linear in the fiber") {
    std::mt19937_64 rng(8);
    auto lat = LatticeSpacetime::circle(24, kTwoPi, 0.5, 30);
    auto rho = Interaction::phi4(0.5);
    auto r = make_real();
    auto d = support::random_point(24, rng);
    auto v = support::random_point(24, rng), w = support::random_point(24, rng);
    auto zero = tangent_lift(d, CauchyData::zeros(r, 24), rho, lat).dual_part(r, 1);
    CHECK(zero.values.max_abs() == 0.0);
    auto fv = tangent_lift(d, v, rho, lat).dual_part(r, 1).values;
    auto fw = tangent_lift(d, w, rho, lat).dual_part(r, 1).values;
    CauchyData comb = v;
    comb *= 2.5;
    comb.axpy(-1.5, w);
    auto fc = tangent_lift(d, comb, rho, lat).dual_part(r, 1).values;
    double e = 0.0, s = 0.0;
    for (std::size_t p = 0; p < fc.raw().size(); ++p) {
        e = std::max(e, std::abs(fc.raw()[p] - 2.5 * fv.raw()[p] + 1.5 * fw.raw()[p]));
        s = std::max(s, std::abs(fc.raw()[p]));
    }
    CHECK(e / s < 1e-12);
    // the base is untouched by the fiber
    auto base = tangent_lift(d, v, rho, lat).dual_part(r, 0);
    auto plain = solve_cauchy(d, rho, lat);
    CHECK(max_diff(base.values.raw(), plain.values.raw()) == 0.0);
}

TEST_CASE("restricting a history to a slice") {
    auto lat = LatticeSpacetime::circle(128, kTwoPi, 0.5, 64);
    FieldHistory h{lat, WeilGrid(make_real(), lat.n_rows(), 128)};
    for (int t = 0; t < lat.n_rows(); ++t)
        for (int i = 0; i < 128; ++i) h.values.at(t, i)[0] = std::cos(lat.time(t)) * std::cos(lat.position(i));
    for (int slice : {0, 17, 64}) {
        auto c = restrict_data(h, slice);
        CHECK(c.slice == slice);
        const double t = lat.time(slice);
        double ep = 0.0, eq = 0.0;
        for (int i = 0; i < 128; ++i) {
            ep = std::max(ep, std::abs(c.phi.at(i)[0] - std::cos(t) * std::cos(lat.position(i))));
            eq = std::max(eq, std::abs(c.pi.at(i)[0] + std::sin(t) * std::cos(lat.position(i))));
        }
        CHECK(ep == 0.0);
        CHECK(eq < 5.0 * lat.dt() * lat.dt());
    }
    CHECK_THROWS_AS(restrict_data(h, 65), OutOfBasis);

    // data survive a solve and restriction at the initial slice to second order
    auto phi = support::gaussian(lat, 3.0, 0.5), pi = support::gaussian(lat, 3.5, 0.5, 0.2);
    auto s = solve_cauchy(CauchyData::from_real(make_real(), phi, pi), Interaction::free(), lat);
    auto back = restrict_data(s, 0);
    CHECK(max_diff(back.phi.scalars(), phi) == 0.0);
    CHECK(max_diff(back.pi.scalars(), pi) < 10.0 * lat.dt() * lat.dt());
}

TEST_CASE("static kink on a line") {
    auto lat = LatticeSpacetime::line(201, 20.0, 0.5, 400);
    std::vector<double> kink(201), zero(201, 0.0);
    for (int i = 0; i < 201; ++i) kink[i] = 4.0 * std::atan(std::exp(lat.position(i)));
    auto h = solve_cauchy(CauchyData::from_real(make_real(), kink, zero), Interaction::sine_gordon(), lat);
    const auto last = h.values.coefficient(0);
    double drift = 0.0;
    for (int i = 0; i < 201; ++i) drift = std::max(drift, std::abs(last[400 * 201 + i] - kink[i]));
    CHECK(drift < 5.0 * lat.dx() * lat.dx());
}

TEST_CASE("nilpotent data respect the lattice causal cone") {
    auto circ = LatticeSpacetime::circle(64, 64.0, 0.5, 12);
    auto r = make_real();
    CauchyData d = CauchyData::zeros(r, 64);
    for (int i = 0; i < 64; ++i) d.phi.at(i)[0] = 0.3 * std::sin(0.2 * i);
    CauchyData v = CauchyData::zeros(r, 64);
    v.phi.at(30)[0] = 1.0;
    v.pi.at(32)[0] = -0.5;
    auto fiber = tangent_lift(d, v, Interaction::sine_gordon(), circ).dual_part(r, 1);
    for (int t = 0; t < circ.n_rows(); ++t) {
        auto cone = causal_cone(circ, {30, 3}, t);
        for (int i = 0; i < 64; ++i)
            if (!cone.contains(i, circ)) CHECK(fiber.values.at(t, i)[0] == 0.0);
        CHECK(fiber.values.at(t, cone.start)[0] != 0.0);
    }

    auto line = LatticeSpacetime::line(40, 39.0, 0.5, 10, 2);
    CauchyData dl = CauchyData::zeros(r, 40), vl = CauchyData::zeros(r, 40);
    vl.phi.at(20)[0] = 1.0;
    CHECK_NOTHROW(tangent_lift(dl, vl, Interaction::free(), line));
    vl.phi.at(20)[0] = 0.0;
    vl.phi.at(8)[0] = 1.0;
    CHECK_THROWS_AS(tangent_lift(dl, vl, Interaction::free(), line), ConeEscape);
    vl.phi.at(8)[0] = 0.0;
    vl.pi.at(1)[0] = 1.0;
    CHECK_THROWS_AS(tangent_lift(dl, vl, Interaction::free(), line), ConeEscape);
    // real data may touch the guard band
    dl.phi.at(0)[0] = 1.0;
    CHECK_NOTHROW(solve_cauchy(dl, Interaction::free(), line));
}

TEST_CASE("dynamics validation") {
    auto lat = LatticeSpacetime::circle(16, kTwoPi, 0.5, 4);
    auto r = make_real();
    CHECK_THROWS_AS(solve_cauchy(CauchyData::zeros(r, 15), Interaction::free(), lat), ValidationError);
    std::vector<double> a(3), b(4);
    CHECK_THROWS_AS(CauchyData::from_real(r, a, b), ValidationError);
    CHECK_THROWS_AS(add_epsilon(CauchyData::zeros(r, 4), CauchyData::zeros(r, 5), extend_dual(r)), ValidationError);
    FieldHistory bad{lat, WeilGrid(r, 3, 16)};
    CHECK_THROWS_AS(eom_residual(bad, Interaction::free()), ValidationError);
}
