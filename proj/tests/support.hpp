#pragma once

// Shared generators for the test programs.

#include <cmath>
#include <random>
#include <vector>

#include "weilfield/lattice.hpp"
#include "weilfield/poisson.hpp"

namespace support {

inline std::vector<double> gaussian(const weilfield::LatticeSpacetime& lat, double center, double width,
                                    double amplitude = 1.0) {
    std::vector<double> v(lat.n_space());
    for (int i = 0; i < lat.n_space(); ++i) {
        double d = lat.position(i) - center;
        if (lat.topology() == weilfield::Topology::circle) d -= lat.length() * std::floor(d / lat.length() + 0.5);
        v[i] = amplitude * std::exp(-0.5 * d * d / (width * width));
    }
    return v;
}

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    std::vector<double> v(n);
    for (double& x : v) x = g(rng);
    return v;
}

/// 2n components, each a sum of 1..3 monomials of total degree 1..3 in the
/// 2n Cauchy coordinates.
inline weilfield::PolynomialVectorField random_polynomial_field(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    std::uniform_int_distribution<int> var(0, static_cast<int>(2 * n) - 1), terms(1, 3), factors(1, 3);
    weilfield::PolynomialVectorField p;
    p.n_space = n;
    p.components.resize(2 * n);
    for (auto& comp : p.components) {
        const int t = terms(rng);
        for (int k = 0; k < t; ++k) {
            weilfield::PolynomialVectorField::Monomial m;
            m.coeff = coeff(rng);
            const int f = factors(rng);
            for (int j = 0; j < f; ++j) m.factors.push_back({var(rng), 1});
            comp.push_back(std::move(m));
        }
    }
    return p;
}

inline weilfield::CauchyData random_point(std::size_t n, std::mt19937_64& rng, double scale = 0.5) {
    auto phi = random_vector(rng, n, scale), pi = random_vector(rng, n, scale);
    return weilfield::CauchyData::from_real(weilfield::make_real(), phi, pi);
}

inline double rel_diff(const weilfield::CauchyData& a, const weilfield::CauchyData& b) {
    weilfield::CauchyData d = a;
    d.axpy(-1.0, b);
    const double s = std::max(a.max_abs(), b.max_abs());
    return s > 0 ? d.max_abs() / s : d.max_abs();
}

}  // namespace support
