#include "weilfield/lattice.hpp"

#include <algorithm>
#include <cmath>

#include "weilfield/errors.hpp"

namespace weilfield {

std::string to_string(Topology t) { return t == Topology::circle ? "circle" : "line"; }

Topology topology_from_string(const std::string& s) {
    if (s == "circle") return Topology::circle;
    if (s == "line") return Topology::line;
    throw ValidationError("unknown topology '" + s + "'");
}

LatticeSpacetime::LatticeSpacetime(const LatticeDescriptor& d) : d_(d) {
    if (d_.n_space < 3) throw ValidationError("lattice needs at least 3 spatial sites");
    if (d_.n_time < 1) throw ValidationError("lattice needs at least one time step");
    if (!(d_.dx > 0.0) || !(d_.dt > 0.0)) throw ValidationError("lattice spacings must be positive");
    if (d_.dt > d_.dx * (1.0 + 1e-12)) throw ValidationError("CFL violated: dt/dx must be <= 1");
    if (d_.topology == Topology::line) {
        if (d_.guard < 1) throw ValidationError("line lattice needs a guard band of at least one site");
        if (2 * d_.guard >= d_.n_space) throw ValidationError("guard band leaves no interior");
    }
}

LatticeSpacetime LatticeSpacetime::circle(int n_space, double length, double dt_ratio, int n_time) {
    LatticeDescriptor d;
    d.topology = Topology::circle;
    d.n_space = n_space;
    d.dx = length / n_space;
    d.dt = dt_ratio * d.dx;
    d.n_time = n_time;
    return LatticeSpacetime(d);
}

LatticeSpacetime LatticeSpacetime::line(int n_space, double length, double dt_ratio, int n_time, int guard) {
    LatticeDescriptor d;
    d.topology = Topology::line;
    d.n_space = n_space;
    d.dx = length / (n_space - 1);
    d.dt = dt_ratio * d.dx;
    d.n_time = n_time;
    d.guard = guard;
    return LatticeSpacetime(d);
}

double LatticeSpacetime::position(int i) const {
    if (d_.topology == Topology::circle) return i * d_.dx;
    return (i - 0.5 * (d_.n_space - 1)) * d_.dx;
}

double LatticeSpacetime::length() const {
    return d_.topology == Topology::circle ? d_.n_space * d_.dx : (d_.n_space - 1) * d_.dx;
}

int LatticeSpacetime::interior_begin() const { return d_.topology == Topology::circle ? 0 : d_.guard; }

int LatticeSpacetime::interior_end() const {
    return d_.topology == Topology::circle ? d_.n_space - 1 : d_.n_space - 1 - d_.guard;
}

LatticeSpacetime LatticeSpacetime::with_n_time(int n_time) const {
    LatticeDescriptor d = d_;
    d.n_time = n_time;
    return LatticeSpacetime(d);
}

// ---------------------------------------------------------------------------

WeilArray::WeilArray(AlgebraPtr alg, std::size_t size)
    : alg_(std::move(alg)), size_(size), data_(size * alg_->dim(), 0.0) {}

WeilArray WeilArray::from_real(AlgebraPtr alg, std::span<const double> values) {
    WeilArray a(std::move(alg), values.size());
    for (std::size_t i = 0; i < values.size(); ++i) a.at(i)[0] = values[i];
    return a;
}

WeilValue WeilArray::value(std::size_t i) const {
    auto s = at(i);
    return WeilValue(alg_, std::vector<double>(s.begin(), s.end()));
}

void WeilArray::set(std::size_t i, const WeilValue& w) {
    require_compatible(alg_, w.algebra(), "WeilArray::set");
    std::copy(w.coeffs().begin(), w.coeffs().end(), at(i).begin());
}

std::vector<double> WeilArray::coefficient(std::size_t k) const {
    if (k >= dim()) throw OutOfBasis("coefficient index out of range");
    std::vector<double> out(size_);
    for (std::size_t i = 0; i < size_; ++i) out[i] = data_[i * dim() + k];
    return out;
}

WeilArray& WeilArray::operator+=(const WeilArray& o) {
    axpy(1.0, o);
    return *this;
}

WeilArray& WeilArray::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

void WeilArray::axpy(double s, const WeilArray& o) {
    require_compatible(alg_, o.alg_, "WeilArray::axpy");
    if (o.size_ != size_) throw ValidationError("WeilArray size mismatch");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += s * o.data_[k];
}

double WeilArray::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

WeilArray WeilArray::embedded(const AlgebraPtr& extended) const {
    if (extended->dim() != 2 * dim()) throw AlgebraMismatch("embedded: not an extension");
    WeilArray out(extended, size_);
    for (std::size_t i = 0; i < size_; ++i) std::copy(at(i).begin(), at(i).end(), out.at(i).begin());
    return out;
}

WeilArray WeilArray::dual_part(const AlgebraPtr& base, int part) const {
    const std::size_t d = base->dim();
    if (dim() != 2 * d) throw AlgebraMismatch("dual_part: not an extension");
    WeilArray out(base, size_);
    for (std::size_t i = 0; i < size_; ++i) {
        auto src = at(i).subspan(part * d, d);
        std::copy(src.begin(), src.end(), out.at(i).begin());
    }
    return out;
}

WeilGrid::WeilGrid(AlgebraPtr alg, std::size_t rows, std::size_t cols)
    : alg_(std::move(alg)), rows_(rows), cols_(cols), data_(rows * cols * alg_->dim(), 0.0) {}

WeilValue WeilGrid::value(std::size_t r, std::size_t c) const {
    auto s = at(r, c);
    return WeilValue(alg_, std::vector<double>(s.begin(), s.end()));
}

WeilArray WeilGrid::row_array(std::size_t r) const {
    WeilArray a(alg_, cols_);
    auto src = row(r);
    std::copy(src.begin(), src.end(), a.raw().begin());
    return a;
}

void WeilGrid::set_row(std::size_t r, const WeilArray& a) {
    require_compatible(alg_, a.algebra(), "WeilGrid::set_row");
    if (a.size() != cols_) throw ValidationError("row length mismatch");
    std::copy(a.raw().begin(), a.raw().end(), row(r).begin());
}

std::vector<double> WeilGrid::coefficient(std::size_t k) const {
    if (k >= dim()) throw OutOfBasis("coefficient index out of range");
    std::vector<double> out(rows_ * cols_);
    for (std::size_t p = 0; p < out.size(); ++p) out[p] = data_[p * dim() + k];
    return out;
}

WeilGrid WeilGrid::dual_part(const AlgebraPtr& base, int part) const {
    const std::size_t d = base->dim();
    if (dim() != 2 * d) throw AlgebraMismatch("dual_part: not an extension");
    WeilGrid out(base, rows_, cols_);
    for (std::size_t p = 0; p < rows_ * cols_; ++p)
        std::copy_n(data_.begin() + p * 2 * d + part * d, d, out.data_.begin() + p * d);
    return out;
}

double WeilGrid::max_abs() const { return max_abs_rows(0, rows_); }

double WeilGrid::max_abs_rows(std::size_t r0, std::size_t r1) const {
    double m = 0.0;
    for (std::size_t k = r0 * cols_ * dim(); k < r1 * cols_ * dim(); ++k) m = std::max(m, std::abs(data_[k]));
    return m;
}

// ---------------------------------------------------------------------------

namespace {

int wrap(int i, int n) { return ((i % n) + n) % n; }

}  // namespace

bool SupportWindow::contains(int site, const LatticeSpacetime& lat) const {
    if (length == 0) return false;
    if (lat.topology() == Topology::circle) return wrap(site - start, lat.n_space()) < length;
    return site >= start && site < start + length;
}

bool SupportWindow::contains(const SupportWindow& inner, const LatticeSpacetime& lat) const {
    if (inner.length == 0) return true;
    if (inner.length > length) return false;
    if (lat.topology() == Topology::circle) {
        if (length >= lat.n_space()) return true;
        return wrap(inner.start - start, lat.n_space()) + inner.length <= length;
    }
    return inner.start >= start && inner.start + inner.length <= start + length;
}

SupportWindow full_window(const LatticeSpacetime& lat) { return {0, lat.n_space()}; }

SupportWindow support_of(const LatticeSpacetime& lat, std::span<const double> nonzero_mask) {
    const int n = lat.n_space();
    std::vector<char> nz(n);
    for (int i = 0; i < n; ++i) nz[i] = nonzero_mask[i] != 0.0;
    int count = static_cast<int>(std::count(nz.begin(), nz.end(), 1));
    if (count == 0) return {};
    if (lat.topology() == Topology::line) {
        int lo = 0, hi = n - 1;
        while (!nz[lo]) ++lo;
        while (!nz[hi]) --hi;
        return {lo, hi - lo + 1};
    }
    if (count == n) return full_window(lat);
    // complement of the longest cyclic run of zeros
    int best_len = 0, best_start = 0;
    int first_nz = 0;
    while (!nz[first_nz]) ++first_nz;
    int run = 0, run_start = 0;
    for (int k = 1; k <= n; ++k) {
        int i = wrap(first_nz + k, n);
        if (!nz[i]) {
            if (run == 0) run_start = i;
            ++run;
        } else {
            if (run > best_len) {
                best_len = run;
                best_start = run_start;
            }
            run = 0;
        }
    }
    return {wrap(best_start + best_len, n), n - best_len};
}

SupportWindow support_of(const LatticeSpacetime& lat, const WeilArray& a, bool nilpotent_only) {
    std::vector<double> mask(a.size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        auto c = a.at(i);
        for (std::size_t k = nilpotent_only ? 1 : 0; k < c.size(); ++k)
            if (c[k] != 0.0) mask[i] = 1.0;
    }
    return support_of(lat, std::span<const double>(mask));
}

SupportWindow window_hull(const LatticeSpacetime& lat, const SupportWindow& a, const SupportWindow& b) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    std::vector<double> mask(lat.n_space(), 0.0);
    for (int i = 0; i < lat.n_space(); ++i)
        if (a.contains(i, lat) || b.contains(i, lat)) mask[i] = 1.0;
    if (lat.topology() == Topology::line) return support_of(lat, std::span<const double>(mask));
    // on a circle the union of two arcs can have two gaps; close the smaller one
    return support_of(lat, std::span<const double>(mask));
}

bool window_interior(const LatticeSpacetime& lat, const SupportWindow& w) {
    if (lat.topology() == Topology::circle || w.empty()) return true;
    return w.start >= lat.interior_begin() && w.start + w.length - 1 <= lat.interior_end();
}

namespace {

SupportWindow widen(const LatticeSpacetime& lat, const SupportWindow& k, int sites) {
    if (k.empty() || sites <= 0) return k;
    const int n = lat.n_space();
    if (lat.topology() == Topology::circle) {
        if (k.length + 2 * sites >= n) return full_window(lat);
        return {wrap(k.start - sites, n), k.length + 2 * sites};
    }
    int lo = std::max(0, k.start - sites);
    int hi = std::min(n - 1, k.start + k.length - 1 + sites);
    return {lo, hi - lo + 1};
}

}  // namespace

SupportWindow causal_cone(const LatticeSpacetime& lat, const SupportWindow& k, int steps) {
    return widen(lat, k, steps);
}

SupportWindow physical_cone(const LatticeSpacetime& lat, const SupportWindow& k, int steps) {
    const int sites = static_cast<int>(std::ceil(steps * lat.dt() / lat.dx() - 1e-12));
    return widen(lat, k, sites);
}

// ---------------------------------------------------------------------------

WeilValue integrate_slice(const LatticeSpacetime& lat, const WeilArray& density) {
    if (static_cast<int>(density.size()) != lat.n_space()) throw ValidationError("slice density length mismatch");
    WeilValue out(density.algebra(), 0.0);
    auto c = out.coeffs();
    for (std::size_t i = 0; i < density.size(); ++i) {
        auto d = density.at(i);
        for (std::size_t k = 0; k < c.size(); ++k) c[k] += d[k];
    }
    for (double& v : c) v *= lat.dx();
    return out;
}

WeilArray time_derivative(const LatticeSpacetime& lat, const WeilGrid& g, int n) {
    const int rows = static_cast<int>(g.rows());
    if (rows < 3) throw ValidationError("time derivative needs at least three time rows");
    if (n < 0 || n >= rows) throw OutOfBasis("time slice out of range");
    WeilArray out(g.algebra(), g.cols());
    auto dst = out.raw();
    const double h = 1.0 / (2.0 * lat.dt());
    if (n == 0) {
        auto r0 = g.row(0), r1 = g.row(1), r2 = g.row(2);
        for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = (-3.0 * r0[k] + 4.0 * r1[k] - r2[k]) * h;
    } else if (n == rows - 1) {
        auto r0 = g.row(n), r1 = g.row(n - 1), r2 = g.row(n - 2);
        for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = (3.0 * r0[k] - 4.0 * r1[k] + r2[k]) * h;
    } else {
        auto rp = g.row(n + 1), rm = g.row(n - 1);
        for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = (rp[k] - rm[k]) * h;
    }
    return out;
}

WeilArray space_derivative(const LatticeSpacetime& lat, std::span<const double> row, const AlgebraPtr& alg) {
    const int n = lat.n_space();
    const std::size_t d = alg->dim();
    WeilArray out(alg, n);
    const double h = 1.0 / (2.0 * lat.dx());
    auto src = [&](int i, std::size_t k) { return row[static_cast<std::size_t>(i) * d + k]; };
    for (int i = 0; i < n; ++i) {
        auto dst = out.at(i);
        for (std::size_t k = 0; k < d; ++k) {
            if (lat.topology() == Topology::circle) {
                dst[k] = (src(wrap(i + 1, n), k) - src(wrap(i - 1, n), k)) * h;
            } else if (i == 0) {
                dst[k] = (-3.0 * src(0, k) + 4.0 * src(1, k) - src(2, k)) * h;
            } else if (i == n - 1) {
                dst[k] = (3.0 * src(n - 1, k) - 4.0 * src(n - 2, k) + src(n - 3, k)) * h;
            } else {
                dst[k] = (src(i + 1, k) - src(i - 1, k)) * h;
            }
        }
    }
    return out;
}

void laplacian_row(const LatticeSpacetime& lat, std::size_t d, std::span<const double> in, std::span<double> out) {
    const int n = lat.n_space();
    const double inv = 1.0 / (lat.dx() * lat.dx());
    const bool circle = lat.topology() == Topology::circle;
    for (int i = 0; i < n; ++i) {
        int l = i - 1, r = i + 1;
        if (circle) {
            l = wrap(l, n);
            r = wrap(r, n);
        } else {
            if (l < 0) l = 1;
            if (r >= n) r = n - 2;
        }
        const double* pl = in.data() + static_cast<std::size_t>(l) * d;
        const double* pc = in.data() + static_cast<std::size_t>(i) * d;
        const double* pr = in.data() + static_cast<std::size_t>(r) * d;
        double* po = out.data() + static_cast<std::size_t>(i) * d;
        for (std::size_t k = 0; k < d; ++k) po[k] = (pl[k] - 2.0 * pc[k] + pr[k]) * inv;
    }
}

Current hodge_d(const LatticeSpacetime& lat, const WeilGrid& psi) {
    Current j{WeilGrid(psi.algebra(), psi.rows(), psi.cols()), WeilGrid(psi.algebra(), psi.rows(), psi.cols())};
    for (std::size_t n = 0; n < psi.rows(); ++n) {
        j.t_component.set_row(n, time_derivative(lat, psi, static_cast<int>(n)));
        j.x_component.set_row(n, space_derivative(lat, psi.row(n), psi.algebra()));
    }
    return j;
}

WeilGrid divergence(const LatticeSpacetime& lat, const Current& j) {
    const WeilGrid& jt = j.t_component;
    const WeilGrid& jx = j.x_component;
    WeilGrid out(jt.algebra(), jt.rows(), jt.cols());
    for (std::size_t n = 0; n < jt.rows(); ++n) {
        WeilArray dt_jt = time_derivative(lat, jt, static_cast<int>(n));
        WeilArray dx_jx = space_derivative(lat, jx.row(n), jx.algebra());
        auto dst = out.row(n);
        for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = dt_jt.raw()[k] - dx_jx.raw()[k];
    }
    return out;
}

}  // namespace weilfield
