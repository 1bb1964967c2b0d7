#include "weilfield/pauli_jordan.hpp"

#include <cmath>
#include <numbers>

#include "weilfield/errors.hpp"

namespace weilfield {

namespace {

double wavenumber(int j, double length) { return 2.0 * std::numbers::pi * j / length; }

// sin(w tau) / w, continuous at w = 0
double sinc_time(double w, double tau) { return w == 0.0 ? tau : std::sin(w * tau) / w; }

}  // namespace

double pauli_jordan_function(double tau, double x, double length, int n_modes, double mass) {
    double s = 0.0;
    for (int j = -n_modes / 2; j < n_modes - n_modes / 2; ++j) {
        const double k = wavenumber(j, length);
        const double w = std::sqrt(k * k + mass * mass);
        s += sinc_time(w, tau) * std::cos(k * x);
    }
    return s / length;
}

double pauli_jordan_rate(double tau, double x, double length, int n_modes, double mass) {
    double s = 0.0;
    for (int j = -n_modes / 2; j < n_modes - n_modes / 2; ++j) {
        const double k = wavenumber(j, length);
        const double w = std::sqrt(k * k + mass * mass);
        s += std::cos(w * tau) * std::cos(k * x);
    }
    return s / length;
}

double pauli_jordan_bracket(const LatticeSpacetime& lat, double mass, std::span<const double> f,
                            std::span<const double> g) {
    if (lat.topology() != Topology::circle) throw ValidationError("mode-sum oracle needs a circle lattice");
    const int rows = lat.n_rows(), cols = lat.n_space();
    if (f.size() != static_cast<std::size_t>(rows * cols) || g.size() != f.size())
        throw ValidationError("smearing grids must be (n_time+1) x n_space");
    const double length = lat.length();

    // sin(w(s-t))/w = S(s) C(t) - C(s) S(t) with C = cos(w .), S = sin(w .)/w
    // and cos(k(x-y)) = cos kx cos ky + sin kx sin ky, so the double sum
    // factors into time/space moments of f and g.
    struct Moments {
        double cc = 0, cs = 0, sc = 0, ss = 0;  // (time fn, space fn)
    };
    auto moments = [&](std::span<const double> h, double k, double w) {
        Moments m;
        for (int n = 0; n < rows; ++n) {
            const double wt = (n == 0 || n == rows - 1) ? 0.5 : 1.0;
            const double t = lat.time(n);
            const double ct = std::cos(w * t), st = sinc_time(w, t);
            double hc = 0.0, hs = 0.0;
            for (int i = 0; i < cols; ++i) {
                const double v = h[static_cast<std::size_t>(n) * cols + i];
                if (v == 0.0) continue;
                const double x = lat.position(i);
                hc += v * std::cos(k * x);
                hs += v * std::sin(k * x);
            }
            m.cc += wt * ct * hc;
            m.cs += wt * ct * hs;
            m.sc += wt * st * hc;
            m.ss += wt * st * hs;
        }
        const double q = lat.dt() * lat.dx();
        m.cc *= q;
        m.cs *= q;
        m.sc *= q;
        m.ss *= q;
        return m;
    };

    double total = 0.0;
    for (int j = -cols / 2; j < cols - cols / 2; ++j) {
        const double k = wavenumber(j, length);
        const double w = std::sqrt(k * k + mass * mass);
        Moments a = moments(f, k, w), b = moments(g, k, w);
        total += (b.sc * a.cc - b.cc * a.sc) + (b.ss * a.cs - b.cs * a.ss);
    }
    return total / length;
}

}  // namespace weilfield
