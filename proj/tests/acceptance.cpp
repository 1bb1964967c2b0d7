// Acceptance suite: one line per criterion, exit status 0 only when all pass.

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>

#include "support.hpp"
#include "weilfield/errors.hpp"
#include "weilfield/harness.hpp"
#include "weilfield/pauli_jordan.hpp"
#include "weilfield/poisson.hpp"
#include "weilfield/zuckerman.hpp"

using namespace weilfield;
namespace wh = weilfield::harness;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::vector<double> sines(const LatticeSpacetime& lat, double a, int mode, double phase) {
    std::vector<double> v(lat.n_space());
    for (int i = 0; i < lat.n_space(); ++i) v[i] = a * std::sin(mode * lat.position(i) + phase);
    return v;
}

CauchyData smooth_base(const LatticeSpacetime& lat) {
    return CauchyData::from_real(make_real(), sines(lat, 0.5, 1, 0.0), sines(lat, 0.2, 1, 0.5 * kPi));
}

// 1. eps-part of a dual solve against central differences of real solves
Outcome tangent_equals_linearization() {
    LatticeSpacetime lat = LatticeSpacetime::circle(256, 2 * kPi, 0.5, 512);
    CauchyData d = smooth_base(lat);
    CauchyData a = CauchyData::from_real(make_real(), sines(lat, 0.3, 2, 0.1), sines(lat, 0.1, 1, 0.7));
    const double delta = 1e-4;
    Outcome o{true, ""};
    for (const Interaction& rho : {Interaction::phi4(1.0), Interaction::sine_gordon()}) {
        FieldHistory fiber = tangent_lift(d, a, rho, lat).dual_part(make_real(), 1);
        CauchyData plus = d, minus = d;
        plus.axpy(delta, a);
        minus.axpy(-delta, a);
        auto hp = solve_cauchy(plus, rho, lat).values.coefficient(0);
        auto hm = solve_cauchy(minus, rho, lat).values.coefficient(0);
        auto exact = fiber.values.coefficient(0);
        double err = 0.0, scale = 0.0;
        for (std::size_t k = 0; k < exact.size(); ++k) {
            err = std::max(err, std::abs((hp[k] - hm[k]) / (2 * delta) - exact[k]));
            scale = std::max(scale, std::abs(exact[k]));
        }
        const double rel = err / scale;
        o.pass = o.pass && rel <= 1e-6;
        o.detail += fmt("%s rel %.2e; ", rho.name.c_str(), rel);
    }
    o.detail += "tol 1e-6";
    return o;
}

struct LadderStudy {
    std::vector<double> dx, drift, closed, off_shell;
};

LadderStudy sine_gordon_ladder() {
    LadderStudy s;
    const Interaction rho = Interaction::sine_gordon();
    for (int n : {64, 128, 256, 512}) {
        const double dx = 2 * kPi / n;
        LatticeSpacetime lat = LatticeSpacetime::circle(n, 2 * kPi, 0.5, static_cast<int>(std::lround(4.0 / (0.5 * dx))));
        CauchyData d = smooth_base(lat);
        auto zero = std::vector<double>(n, 0.0);
        CauchyData a = CauchyData::from_real(make_real(), support::gaussian(lat, kPi - 0.3, 0.3), zero);
        CauchyData b = CauchyData::from_real(make_real(), zero, support::gaussian(lat, kPi + 0.3, 0.3));
        auto [v, w] = make_tangent_pair(d, a, b, rho, lat);
        wh::ConservationStudy c = wh::conservation_study(v, w);
        s.dx.push_back(dx);
        s.drift.push_back(c.max_drift);
        s.closed.push_back(c.closedness);
        s.off_shell.push_back(wh::conservation_study(v, wh::off_shell_tangent(w, b)).closedness);
    }
    return s;
}

// 2. slice independence of omega
Outcome slice_independence(const LadderStudy& s) {
    const double at256 = s.drift[2];
    const double slope = wh::loglog_slope(s.dx, s.drift);
    return {at256 <= 1e-3 && std::abs(slope - 2) <= 0.3,
            fmt("drift at n=256 %.2e (tol 1e-3); order %.3f (2 +- 0.3); drifts %.2e %.2e %.2e %.2e", at256, slope,
                s.drift[0], s.drift[1], s.drift[2], s.drift[3])};
}

// 3. on-shell closedness and the off-shell control
Outcome closedness(const LadderStudy& s) {
    const double slope = wh::loglog_slope(s.dx, s.closed);
    const double ratio = s.off_shell.back() / s.off_shell.front();
    const bool control = ratio >= 0.5 && s.off_shell.back() > 100 * s.closed.back();
    return {std::abs(slope - 2) <= 0.3 && control,
            fmt("order %.3f (2 +- 0.3); off-shell divergence %.2e -> %.2e (ratio %.2f >= 0.5), on-shell at n=512 %.2e",
                slope, s.off_shell.front(), s.off_shell.back(), ratio, s.closed.back())};
}

// 4. closed-form Lie bracket against the eps1 eps2 part of the flow commutator
Outcome lie_bracket_tau() {
    std::mt19937_64 rng(20240601);
    const std::size_t n = 6;
    LatticeSpacetime lat = LatticeSpacetime::circle(static_cast<int>(n), 1.0, 0.5, 1);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
        SolVectorField v = support::random_polynomial_field(n, rng).field(lat);
        SolVectorField w = support::random_polynomial_field(n, rng).field(lat);
        CauchyData at = support::random_point(n, rng);
        worst = std::max(worst, support::rel_diff(lie_bracket(v, w, at), tau_bracket(v, w, at)));
    }
    return {worst <= 1e-12, fmt("max relative difference %.2e over 20 random pairs (tol 1e-12)", worst)};
}

// 5. free-field bracket against the mode-sum commutator
Outcome pauli_jordan() {
    std::vector<double> dx, err;
    std::string detail;
    for (int n : {64, 128, 256}) {
        const double h = 2 * kPi / n;
        LatticeSpacetime lat = LatticeSpacetime::circle(n, 2 * kPi, 0.5, static_cast<int>(std::lround(4.0 / (0.5 * h))));
        auto bump = [&](double tc, double xc) {
            std::vector<double> g(static_cast<std::size_t>(lat.n_rows()) * n);
            auto space = support::gaussian(lat, xc, 0.4);
            for (int r = 0; r < lat.n_rows(); ++r) {
                const double s = (lat.time(r) - tc) / 0.4;
                for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(r) * n + i] = std::exp(-0.5 * s * s) * space[i];
            }
            return g;
        };
        wh::OracleComparison c = wh::pauli_jordan_comparison(lat, 1.0, bump(1.5, kPi - 0.4), bump(2.5, kPi + 0.4));
        dx.push_back(h);
        err.push_back(c.relative_error);
        detail += fmt("n=%d %.2e; ", n, c.relative_error);
    }
    const double slope = wh::loglog_slope(dx, err);
    return {err.back() <= 1e-3 && std::abs(slope - 2) <= 0.3,
            detail + fmt("order %.3f (tol 1e-3 at n=256, order 2 +- 0.3)", slope)};
}

// 6. Poisson axioms for ((int f phi)^2, int g pi, int h phi . int g pi)
Outcome poisson_axioms() {
    LatticeSpacetime lat = LatticeSpacetime::circle(64, 2 * kPi, 0.5, 64);
    std::mt19937_64 rng(7);
    std::vector<CauchyData> samples;
    for (int s = 0; s < 5; ++s) samples.push_back(wh::random_smooth_data(lat, rng, 0.5));
    PoissonContext ctx{lat, OmegaOperator::canonical(lat), samples, 1e-8, true};
    Observable f = Observable::slice_phi(lat, support::gaussian(lat, kPi - 0.5, 0.4));
    Observable g = Observable::slice_pi(lat, support::gaussian(lat, kPi, 0.4));
    Observable h = Observable::slice_phi(lat, support::gaussian(lat, kPi + 0.5, 0.4));
    HamiltonianPair p = make_pair(f * f, ctx), q = make_pair(g, ctx), r = make_pair(h * g, ctx);
    AxiomReport a = verify_axioms(p, q, r, ctx);
    const double anti = std::max(a.antisymmetry_f, a.antisymmetry_v);
    const double jac = std::max(a.jacobi_f, a.jacobi_v);
    const double leib = std::max(a.leibniz_f, a.leibniz_v);
    const double bound = a.input_residual + 10 * lat.dx() * lat.dx();
    return {anti <= 1e-14 && jac <= 1e-9 && leib <= 1e-9 && a.bracket_residual <= bound,
            fmt("antisymmetry %.1e; Jacobi %.2e; Leibniz %.2e (tol 1e-9); closure residual %.2e <= %.2e", anti, jac,
                leib, a.bracket_residual, bound)};
}

// 7. canonical pairs
Outcome canonical_pairs() {
    LatticeSpacetime lat = LatticeSpacetime::circle(64, 2 * kPi, 0.5, 64);
    auto f = support::gaussian(lat, kPi - 0.4, 0.5), g = support::gaussian(lat, kPi + 0.3, 0.6);
    std::mt19937_64 rng(3);
    CauchyData at = wh::random_smooth_data(lat, rng, 0.5);
    PoissonContext ctx{lat, OmegaOperator::canonical(lat), {at}, 1e-8, true};
    HamiltonianPair pf = make_pair(Observable::slice_phi(lat, f), ctx);
    HamiltonianPair pg = make_pair(Observable::slice_pi(lat, g), ctx);
    HamiltonianPair pg_phi = make_pair(Observable::slice_phi(lat, g), ctx);
    double expected = 0.0;
    for (int i = 0; i < lat.n_space(); ++i) expected += f[i] * g[i];
    expected *= lat.dx();
    const double got = bracket(pf, pg, ctx).f(at).scalar();
    const double rel = std::abs(got - expected) / std::abs(expected);
    const double zero = bracket(pf, pg_phi, ctx).f(at).scalar();
    return {rel <= 1e-12 && zero == 0.0,
            fmt("{f phi, g pi} rel error %.2e (tol 1e-12); {f phi, g phi} = %.1e (exact 0)", rel, zero)};
}

// 8. spacelike-compact bookkeeping on a line
Outcome spacelike_compact() {
    LatticeSpacetime lat = LatticeSpacetime::line(129, 16.0, 0.5, 40);
    const int n = lat.n_space();
    std::vector<double> kink(n), bump(n, 0.0), zero(n, 0.0), ones(n, 1.0);
    for (int i = 0; i < n; ++i) {
        const double x = lat.position(i);
        kink[i] = 4 * std::atan(std::exp(x));
        const double r = (x - 0.5) / 1.5;
        if (std::abs(r) < 1) bump[i] = std::exp(1 - 1 / (1 - r * r));
    }
    CauchyData d = CauchyData::from_real(make_real(), kink, zero);
    CauchyData a = CauchyData::from_real(make_real(), bump, zero);
    const Interaction rho = Interaction::sine_gordon();

    bool inside = true;
    double lin = 0.0;
    try {
        TangentSolution v = make_tangent_solution(d, a, rho, lat, true);
        lin = validate_tangent(v, rho);
    } catch (const ValidationError&) {
        inside = false;
    }

    // observables: f compact, g = 1 reaches the guard band
    PoissonContext ctx{lat, OmegaOperator::canonical(lat), {d}, 1e-8, true};
    HamiltonianPair sc = make_pair(Observable::slice_phi(lat, bump), ctx);
    HamiltonianPair wide = make_pair(Observable::slice_pi(lat, ones), ctx);
    HamiltonianPair wide2 = make_pair(Observable::slice_phi(lat, ones), ctx);
    bool mixed_ok = false, rejected = false;
    double mixed = 0.0, expected = 0.0;
    for (int i = 0; i < n; ++i) expected += bump[i] * lat.dx();
    try {
        mixed = bracket(sc, wide, ctx).f(d).scalar();
        mixed_ok = std::abs(mixed - expected) <= 1e-12 * std::abs(expected) && sc.v.spacelike_compact() &&
                   !wide.v.spacelike_compact();
    } catch (const ValidationError&) {
    }
    try {
        bracket(wide, wide2, ctx);
    } catch (const ValidationError&) {
        rejected = true;
    }
    return {inside && lin < 1e-9 && mixed_ok && rejected,
            fmt("fiber inside cone windows: %s (linearised residual %.1e); sc x non-sc bracket %.6f (expected %.6f); "
                "two non-sc rejected: %s",
                inside ? "yes" : "no", lin, mixed, expected, rejected ? "yes" : "no")};
}

// 9. admissibility under a synthetic degenerate form
Outcome degeneracy() {
    const int n = 8;
    LatticeSpacetime lat = LatticeSpacetime::circle(n, 2 * kPi, 0.5, 1);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> amp(0.5, 1.0);
    int correct = 0;
    double worst_adm = 0.0, best_non = 1e300;
    CauchyData at = CauchyData::zeros(make_real(), n);
    for (int k = 0; k < 50; ++k) {
        Eigen::VectorXd null = Eigen::Map<Eigen::VectorXd>(support::random_vector(rng, 2 * n).data(), 2 * n);
        OmegaOperator omega = OmegaOperator::degenerate(lat, null);
        // kernel of the degenerate form
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(omega.matrix(), Eigen::ComputeFullV);
        Eigen::MatrixXd ker = svd.matrixV().rightCols(2);
        Eigen::VectorXd c = Eigen::Map<Eigen::VectorXd>(support::random_vector(rng, 2 * n).data(), 2 * n);
        c -= ker * (ker.transpose() * c);
        const bool along = k % 2 == 1;
        if (along) c += amp(rng) * c.norm() * null.normalized();
        std::vector<double> fphi(n), fpi(n);
        for (int i = 0; i < n; ++i) {
            fphi[i] = c(i) / lat.dx();
            fpi[i] = c(n + i) / lat.dx();
        }
        Observable obs = Observable::slice_phi(lat, fphi) + Observable::slice_pi(lat, fpi);
        HamiltonianSolve s = hamiltonian_vf(obs, at, omega, lat, false, 1e-8);
        const bool ok = along ? (!s.admissible && s.residual > 1e-6) : (s.admissible && s.residual < 1e-10);
        correct += ok;
        if (along) best_non = std::min(best_non, s.residual);
        else worst_adm = std::max(worst_adm, s.residual);
    }
    return {correct == 50, fmt("%d/50 classified correctly; admissible residual max %.1e (< 1e-10), "
                               "non-admissible residual min %.2e (> 1e-6)",
                               correct, worst_adm, best_non)};
}

// 10. Cauchy round trip
Outcome round_trip() {
    std::vector<double> dts, pis;
    double phi_worst = 0.0;
    const Interaction rho = Interaction::phi4(1.0);
    for (int n : {64, 128, 256, 512}) {
        LatticeSpacetime lat = LatticeSpacetime::circle(n, 2 * kPi, 0.5, 2);
        std::mt19937_64 rng(11);
        double pi_worst = 0.0;
        for (int s = 0; s < 5; ++s) {
            auto [pe, qe] = wh::roundtrip_error(wh::random_smooth_data(lat, rng, 0.5), rho, lat);
            phi_worst = std::max(phi_worst, pe);
            pi_worst = std::max(pi_worst, qe);
        }
        dts.push_back(lat.dt());
        pis.push_back(pi_worst);
    }
    const double slope = wh::loglog_slope(dts, pis);
    return {phi_worst <= 1e-12 && std::abs(slope - 2) <= 0.3,
            fmt("phi error %.1e (tol 1e-12); pi error %.2e at n=512, order %.3f (2 +- 0.3)", phi_worst, pis.back(),
                slope)};
}

}  // namespace

int main() {
    int failures = 0;
    auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failures += !o.pass;
        std::printf("criterion %2d %s: %s [%s] (%.1fs)\n", id, o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs);
        std::fflush(stdout);
    };
    report(1, "tangent equals linearisation", tangent_equals_linearization);
    LadderStudy ladder;
    report(2, "slice independence of omega", [&] {
        ladder = sine_gordon_ladder();
        return slice_independence(ladder);
    });
    report(3, "on-shell closedness", [&] { return closedness(ladder); });
    report(4, "Lie bracket vs flow commutator", lie_bracket_tau);
    report(5, "free bracket vs mode sum", pauli_jordan);
    report(6, "Poisson axioms", poisson_axioms);
    report(7, "canonical pairs", canonical_pairs);
    report(8, "spacelike-compact bookkeeping", spacelike_compact);
    report(9, "degeneracy and admissibility", degeneracy);
    report(10, "Cauchy round trip", round_trip);
    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
