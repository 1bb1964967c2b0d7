#pragma once

// 1+1D lattice spacetimes, Weil-valued grid arrays, discrete d / Hodge star,
// slice quadrature and lattice causal cones.
//
// Conventions: signature (+,-), volume form dt^dx.  For a scalar field Psi,
// *dPsi = (d_t Psi) dx + (d_x Psi) dt.  A Current stores the dx-coefficient
// in t_component (the density pulled back to constant-time slices) and the
// dt-coefficient in x_component, so d(*dPsi) = (box Psi) vol.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "weilfield/weil.hpp"

namespace weilfield {

enum class Topology { circle, line };

std::string to_string(Topology t);
Topology topology_from_string(const std::string& s);

struct LatticeDescriptor {
    Topology topology = Topology::circle;
    int n_space = 64;
    double dx = 0.0;
    double dt = 0.0;
    int n_time = 1;
    /// line topology only: sites at each end on which spacelike-compact data must vanish
    int guard = 2;
};

class LatticeSpacetime {
public:
    explicit LatticeSpacetime(const LatticeDescriptor& d);

    /// Circle of circumference `length` with n_space sites and dt = dt_ratio * dx.
    static LatticeSpacetime circle(int n_space, double length, double dt_ratio, int n_time);
    /// Line segment of `length` with n_space sites (spacing length/(n_space-1)).
    static LatticeSpacetime line(int n_space, double length, double dt_ratio, int n_time, int guard = 2);

    Topology topology() const { return d_.topology; }
    int n_space() const { return d_.n_space; }
    int n_time() const { return d_.n_time; }
    int n_rows() const { return d_.n_time + 1; }
    double dx() const { return d_.dx; }
    double dt() const { return d_.dt; }
    int guard() const { return d_.guard; }
    const LatticeDescriptor& descriptor() const { return d_; }

    /// circle: x_i = i dx; line: x_i centred on 0.
    double position(int i) const;
    double time(int n) const { return n * d_.dt; }
    double length() const;

    /// First and last site on which spacelike-compact data may be nonzero.
    int interior_begin() const;
    int interior_end() const;

    LatticeSpacetime with_n_time(int n_time) const;

private:
    LatticeDescriptor d_;
};

/// Weil-valued array over spatial sites (a slice density, Cauchy datum, ...).
class WeilArray {
public:
    WeilArray() = default;
    WeilArray(AlgebraPtr alg, std::size_t size);
    static WeilArray from_real(AlgebraPtr alg, std::span<const double> values);

    const AlgebraPtr& algebra() const { return alg_; }
    std::size_t size() const { return size_; }
    std::size_t dim() const { return alg_->dim(); }

    std::span<double> at(std::size_t i) { return {data_.data() + i * dim(), dim()}; }
    std::span<const double> at(std::size_t i) const { return {data_.data() + i * dim(), dim()}; }
    WeilValue value(std::size_t i) const;
    void set(std::size_t i, const WeilValue& w);

    /// Coefficient k of every site.
    std::vector<double> coefficient(std::size_t k) const;
    std::vector<double> scalars() const { return coefficient(0); }

    std::span<double> raw() { return data_; }
    std::span<const double> raw() const { return data_; }

    WeilArray& operator+=(const WeilArray& o);
    WeilArray& operator*=(double s);
    /// this += s * o
    void axpy(double s, const WeilArray& o);
    double max_abs() const;

    /// Re-express over extend_dual(algebra) with zero epsilon part.
    WeilArray embedded(const AlgebraPtr& extended) const;
    /// eps^0 / eps^1 parts of an array over extend_dual(base).
    WeilArray dual_part(const AlgebraPtr& base, int part) const;

private:
    AlgebraPtr alg_;
    std::size_t size_ = 0;
    std::vector<double> data_;
};

/// Weil-valued array over the (time x space) grid, time outer.
class WeilGrid {
public:
    WeilGrid() = default;
    WeilGrid(AlgebraPtr alg, std::size_t rows, std::size_t cols);

    const AlgebraPtr& algebra() const { return alg_; }
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t dim() const { return alg_->dim(); }

    std::span<double> at(std::size_t r, std::size_t c) { return {data_.data() + (r * cols_ + c) * dim(), dim()}; }
    std::span<const double> at(std::size_t r, std::size_t c) const {
        return {data_.data() + (r * cols_ + c) * dim(), dim()};
    }
    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_ * dim(), cols_ * dim()}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_ * dim(), cols_ * dim()}; }

    WeilValue value(std::size_t r, std::size_t c) const;
    WeilArray row_array(std::size_t r) const;
    void set_row(std::size_t r, const WeilArray& a);

    std::span<double> raw() { return data_; }
    std::span<const double> raw() const { return data_; }

    /// Real grid (rows x cols) of coefficient k.
    std::vector<double> coefficient(std::size_t k) const;
    WeilGrid dual_part(const AlgebraPtr& base, int part) const;

    double max_abs() const;
    double max_abs_rows(std::size_t r0, std::size_t r1) const;

private:
    AlgebraPtr alg_;
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

/// A 1-form on the 1+1D grid: t_component dx + x_component dt.
struct Current {
    WeilGrid t_component;
    WeilGrid x_component;
};

/// Contiguous run of sites [start, start+length) (mod n_space on a circle).
struct SupportWindow {
    int start = 0;
    int length = 0;

    bool empty() const { return length == 0; }
    bool contains(int site, const LatticeSpacetime& lat) const;
    bool contains(const SupportWindow& inner, const LatticeSpacetime& lat) const;
    bool operator==(const SupportWindow&) const = default;
};

SupportWindow full_window(const LatticeSpacetime& lat);
/// Smallest window containing every site where any coefficient (or, with
/// nilpotent_only, any non-scalar coefficient) is nonzero.
SupportWindow support_of(const LatticeSpacetime& lat, const WeilArray& a, bool nilpotent_only = false);
SupportWindow support_of(const LatticeSpacetime& lat, std::span<const double> real_values);
/// Smallest window containing both.
SupportWindow window_hull(const LatticeSpacetime& lat, const SupportWindow& a, const SupportWindow& b);
/// True when the window avoids the guard band (always true on a circle).
bool window_interior(const LatticeSpacetime& lat, const SupportWindow& w);

/// Lattice domain of influence of K after `steps` explicit steps: the
/// three-point stencil moves one site per step, so the window widens by
/// `steps` sites each side (wrapped on a circle, clamped on a line).
SupportWindow causal_cone(const LatticeSpacetime& lat, const SupportWindow& k, int steps);
/// Continuum light cone rounded outwards: widens by ceil(steps dt/dx).
SupportWindow physical_cone(const LatticeSpacetime& lat, const SupportWindow& k, int steps);

/// Midpoint-rule slice integral sum_i d_i dx.
WeilValue integrate_slice(const LatticeSpacetime& lat, const WeilArray& density);

/// Centred second-order time derivative of row n; one-sided second-order at
/// the first and last rows.
WeilArray time_derivative(const LatticeSpacetime& lat, const WeilGrid& g, int n);
/// Centred second-order spatial derivative (one-sided at line ends).
WeilArray space_derivative(const LatticeSpacetime& lat, std::span<const double> row, const AlgebraPtr& alg);
/// Compact three-point second difference; periodic on a circle, even
/// reflection at line ends.
void laplacian_row(const LatticeSpacetime& lat, std::size_t dim, std::span<const double> in, std::span<double> out);

Current hodge_d(const LatticeSpacetime& lat, const WeilGrid& psi);
/// Discrete d of the 1-form: d_t J^t - d_x J^x, with the stencils of hodge_d.
WeilGrid divergence(const LatticeSpacetime& lat, const Current& j);

}  // namespace weilfield
