#include "weilfield/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "weilfield/errors.hpp"
#include "weilfield/io.hpp"
#include "weilfield/pauli_jordan.hpp"

#ifndef WEILFIELD_VERSION
#define WEILFIELD_VERSION "0.0.0"
#endif

namespace weilfield::harness {

using nlohmann::json;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) { return format_double(v); }
std::string num(int v) { return std::to_string(v); }

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("field '") + key + "': " + e.what());
    }
}

json gaussian(double center, double width, double amplitude = 1.0) {
    return {{"kind", "gaussian"}, {"center", center}, {"width", width}, {"amplitude", amplitude}};
}

json spacetime_gaussian(double t_center, double center, double width) {
    return {{"kind", "gaussian"}, {"t_center", t_center}, {"t_width", width}, {"center", center}, {"width", width}};
}

// signed distance from c, wrapped to [-L/2, L/2) on a circle
double offset(const LatticeSpacetime& lat, double x, double c) {
    double d = x - c;
    if (lat.topology() == Topology::circle) {
        const double l = lat.length();
        d -= l * std::floor(d / l + 0.5);
    }
    return d;
}

double spatial_profile(const json& p, const LatticeSpacetime& lat, double x) {
    const std::string kind = get_or<std::string>(p, "kind", "");
    const double amp = get_or(p, "amplitude", 1.0);
    if (kind == "zero") return 0.0;
    if (kind == "constant") return get_or(p, "value", amp);
    if (kind == "gaussian") {
        const double w = get_or(p, "width", 0.5);
        const double d = offset(lat, x, get_or(p, "center", 0.0));
        return amp * std::exp(-0.5 * d * d / (w * w));
    }
    if (kind == "bump") {
        const double r = offset(lat, x, get_or(p, "center", 0.0)) / get_or(p, "width", 1.0);
        return std::abs(r) < 1.0 ? amp * std::exp(1.0 - 1.0 / (1.0 - r * r)) : 0.0;
    }
    if (kind == "sin" || kind == "cos") {
        const double k = get_or(p, "wavenumber", kTwoPi * get_or(p, "mode", 1.0) / lat.length());
        const double arg = k * x + get_or(p, "phase", 0.0);
        return amp * (kind == "sin" ? std::sin(arg) : std::cos(arg));
    }
    if (kind == "kink" || kind == "kink_rate") {
        const double v = get_or(p, "velocity", 0.0);
        if (std::abs(v) >= 1.0) throw ValidationError("kink velocity must be below 1");
        const double gamma = 1.0 / std::sqrt(1.0 - v * v);
        const double u = gamma * offset(lat, x, get_or(p, "center", 0.0));
        if (kind == "kink") return 4.0 * std::atan(std::exp(u));
        return -gamma * v * 2.0 / std::cosh(u);
    }
    throw ValidationError("unknown profile kind '" + kind + "'");
}

void validate_axes(const json& p) {
    if (!p.is_object()) throw ValidationError("profile must be an object");
    for (const char* key : {"width", "t_width"})
        if (p.contains(key) && !(p.at(key).get<double>() > 0.0))
            throw ValidationError(std::string("profile ") + key + " must be positive");
}

}  // namespace

// ---------------------------------------------------------------------------

std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::solve: return "solve";
        case ExperimentKind::conserve: return "conserve";
        case ExperimentKind::bracket: return "bracket";
        case ExperimentKind::jacobi: return "jacobi";
        case ExperimentKind::convergence: return "convergence";
        case ExperimentKind::roundtrip: return "roundtrip";
        case ExperimentKind::oracle_pj: return "oracle-pj";
    }
    return "?";
}

ExperimentKind experiment_from_string(const std::string& s) {
    if (s == "solve") return ExperimentKind::solve;
    if (s == "conserve") return ExperimentKind::conserve;
    if (s == "bracket") return ExperimentKind::bracket;
    if (s == "jacobi") return ExperimentKind::jacobi;
    if (s == "convergence") return ExperimentKind::convergence;
    if (s == "roundtrip" || s == "cauchy_roundtrip") return ExperimentKind::roundtrip;
    if (s == "oracle-pj" || s == "oracle_pj") return ExperimentKind::oracle_pj;
    throw ValidationError("unknown experiment '" + s + "'");
}

LatticeSpacetime LatticeSpec::build(int n) const {
    if (n < 3) throw ValidationError("n_space must be at least 3");
    if (!(length > 0.0)) throw ValidationError("lattice length must be positive");
    const double dx = topology == Topology::circle ? length / n : length / (n - 1);
    const double dt = dt_ratio * dx;
    int steps = 0;
    if (t_final) {
        steps = static_cast<int>(std::lround(*t_final / dt));
    } else if (n_time) {
        steps = static_cast<int>(std::lround(static_cast<double>(*n_time) * n / n_space));
    } else {
        throw ValidationError("lattice needs n_time or t_final");
    }
    steps = std::max(steps, 1);
    return topology == Topology::circle ? LatticeSpacetime::circle(n, length, dt_ratio, steps)
                                        : LatticeSpacetime::line(n, length, dt_ratio, steps, guard);
}

json default_config(ExperimentKind kind) {
    const double pi = std::numbers::pi;
    json c = {
        {"experiment", to_string(kind)},
        {"lattice", {{"topology", "circle"}, {"n_space", 256}, {"length", kTwoPi}, {"dt_ratio", 0.5}, {"t_final", 4.0}}},
        {"interaction", {{"kind", "sine_gordon"}}},
        {"algebra", {{"orders", json::array()}}},
        {"data",
         {{"phi", {{"kind", "sin"}, {"amplitude", 0.5}, {"mode", 1}}},
          {"pi", {{"kind", "cos"}, {"amplitude", 0.2}, {"mode", 1}}}}},
        {"fibers",
         json::array({{{"phi", gaussian(pi - 0.3, 0.3)}, {"pi", {{"kind", "zero"}}}},
                      {{"phi", {{"kind", "zero"}}}, {"pi", gaussian(pi + 0.3, 0.3)}}})},
        {"observables", json::array()},
        {"ladder", json::array()},
        {"samples", 5},
        {"seed", 1},
        {"negative_control", true},
        {"tolerances", json::object()},
    };
    switch (kind) {
        case ExperimentKind::solve:
            c["lattice"].erase("t_final");
            c["lattice"]["n_time"] = 512;
            c["algebra"]["orders"] = {2};
            c["tolerances"] = {{"eom", 1e-12}};
            break;
        case ExperimentKind::conserve: c["tolerances"] = {{"drift", 1e-3}}; break;
        case ExperimentKind::convergence:
            c["ladder"] = {64, 128, 256, 512};
            c["tolerances"] = {{"order", 0.3}, {"drift", 1e-3}};
            break;
        case ExperimentKind::roundtrip:
            c["ladder"] = {64, 128, 256, 512};
            c["lattice"].erase("t_final");
            c["lattice"]["n_time"] = 2;
            c["lattice"]["n_space"] = 64;
            c["tolerances"] = {{"phi", 1e-12}, {"order", 0.3}};
            break;
        case ExperimentKind::bracket:
            c["lattice"]["n_space"] = 64;
            c["observables"] = json::array({{{"kind", "slice_phi"}, {"smearing", gaussian(pi - 0.5, 0.4)}},
                                            {{"kind", "slice_pi"}, {"smearing", gaussian(pi, 0.4)}},
                                            {{"kind", "slice_phi"}, {"smearing", gaussian(pi + 0.5, 0.4)}}});
            c["tolerances"] = {{"residual", 1e-8}, {"antisymmetry", 1e-14}};
            break;
        case ExperimentKind::jacobi: {
            c["lattice"]["n_space"] = 64;
            json f = {{"kind", "slice_phi"}, {"smearing", gaussian(pi - 0.5, 0.4)}};
            json g = {{"kind", "slice_pi"}, {"smearing", gaussian(pi, 0.4)}};
            json h = {{"kind", "slice_phi"}, {"smearing", gaussian(pi + 0.5, 0.4)}};
            c["observables"] = json::array({
                {{"kind", "poly_composite"}, {"terms", json::array({{{"coefficient", 1.0}, {"factors", {f, f}}}})}},
                g,
                {{"kind", "poly_composite"}, {"terms", json::array({{{"coefficient", 1.0}, {"factors", {h, g}}}})}},
            });
            c["tolerances"] = {{"axiom", 1e-9}, {"antisymmetry", 1e-14}, {"closure", 10.0}};
            break;
        }
        case ExperimentKind::oracle_pj:
            c["interaction"] = {{"kind", "mass"}, {"m", 1.0}};
            c["ladder"] = {64, 128, 256};
            c["observables"] = json::array({{{"kind", "spacetime"}, {"smearing", spacetime_gaussian(1.5, pi - 0.4, 0.4)}},
                                            {{"kind", "spacetime"}, {"smearing", spacetime_gaussian(2.5, pi + 0.4, 0.4)}}});
            c["tolerances"] = {{"relative", 1e-3}, {"order", 0.3}};
            break;
    }
    return c;
}

ExperimentConfig parse_config(const json& doc_in, std::optional<ExperimentKind> kind) {
    if (!doc_in.is_object()) throw ValidationError("configuration must be a JSON object");
    ExperimentKind k = kind ? *kind : experiment_from_string(get_or<std::string>(doc_in, "experiment", "solve"));
    json merged = default_config(k);
    json doc = doc_in;
    doc["experiment"] = to_string(k);
    // lattice sizes given as n_time replace a default t_final and vice versa
    if (doc.contains("lattice") && doc["lattice"].is_object()) {
        if (doc["lattice"].contains("n_time")) merged["lattice"].erase("t_final");
        if (doc["lattice"].contains("t_final")) merged["lattice"].erase("n_time");
    }
    if (doc.contains("tolerances")) {
        merged["tolerances"].update(doc["tolerances"]);
        doc.erase("tolerances");
    }
    if (doc.contains("lattice")) {
        merged["lattice"].update(doc["lattice"]);
        doc.erase("lattice");
    }
    merged.update(doc);

    ExperimentConfig c;
    c.kind = k;
    c.source = merged;
    try {
        const json& l = merged.at("lattice");
        c.lattice.topology = topology_from_string(l.at("topology").get<std::string>());
        c.lattice.n_space = l.at("n_space").get<int>();
        c.lattice.length = l.at("length").get<double>();
        c.lattice.dt_ratio = l.at("dt_ratio").get<double>();
        if (l.contains("n_time")) c.lattice.n_time = l.at("n_time").get<int>();
        if (l.contains("t_final")) c.lattice.t_final = l.at("t_final").get<double>();
        c.lattice.guard = get_or(l, "guard", 2);
        c.interaction = merged.at("interaction");
        c.algebra_orders = merged.at("algebra").at("orders").get<std::vector<int>>();
        c.data = merged.at("data");
        c.fibers = merged.at("fibers").get<std::vector<json>>();
        c.observables = merged.at("observables").get<std::vector<json>>();
        c.ladder = merged.at("ladder").get<std::vector<int>>();
        c.samples = merged.at("samples").get<int>();
        c.seed = merged.at("seed").get<std::uint64_t>();
        c.negative_control = merged.at("negative_control").get<bool>();
        c.tolerances = merged.at("tolerances").get<std::map<std::string, double>>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("configuration: ") + e.what());
    }

    // validation: everything that the run would build, built once here
    if (c.samples < 1) throw ValidationError("samples must be positive");
    for (const auto& [key, v] : c.tolerances)
        if (!std::isfinite(v) || v < 0.0) throw ValidationError("tolerance '" + key + "' must be finite and >= 0");
    if (c.lattice.dt_ratio > 1.0) throw ValidationError("CFL violated: dt_ratio must be <= 1");
    std::vector<int> sizes = c.ladder.empty() ? std::vector<int>{c.lattice.n_space} : c.ladder;
    for (int n : sizes) {
        LatticeSpacetime lat = c.lattice.build(n);
        Interaction rho = make_interaction(c.interaction);
        evaluate_profile(c.data.at("phi"), lat);
        evaluate_profile(c.data.at("pi"), lat);
        for (const json& f : c.fibers) {
            evaluate_profile(f.at("phi"), lat);
            evaluate_profile(f.at("pi"), lat);
        }
        for (const json& o : c.observables) make_observable(o, lat, rho);
    }
    if (!c.algebra_orders.empty()) WeilAlgebra::create(c.algebra_orders);
    const std::size_t need_fibers = (k == ExperimentKind::conserve || k == ExperimentKind::convergence) ? 2
                                    : k == ExperimentKind::solve ? c.algebra_orders.size()
                                                                 : 0;
    if (c.fibers.size() < need_fibers)
        throw ValidationError("experiment needs " + std::to_string(need_fibers) + " fibers");
    if ((k == ExperimentKind::convergence || k == ExperimentKind::roundtrip || k == ExperimentKind::oracle_pj) &&
        c.ladder.size() < 2)
        throw ValidationError("a convergence ladder needs at least two resolutions");
    if (k == ExperimentKind::bracket && c.observables.size() < 2)
        throw ValidationError("bracket needs at least two observables");
    if (k == ExperimentKind::jacobi && c.observables.size() != 3)
        throw ValidationError("jacobi needs exactly three observables");
    if (k == ExperimentKind::oracle_pj) {
        const std::string ik = get_or<std::string>(c.interaction, "kind", "");
        if (ik != "mass" && ik != "free") throw ValidationError("the mode-sum oracle needs a free or mass interaction");
        if (c.lattice.topology != Topology::circle) throw ValidationError("the mode-sum oracle needs a circle");
        if (c.observables.size() != 2) throw ValidationError("oracle-pj needs exactly two observables");
        for (const json& o : c.observables)
            if (get_or<std::string>(o, "kind", "") != "spacetime")
                throw ValidationError("oracle-pj observables must be spacetime-smeared");
    }
    return c;
}

Interaction make_interaction(const json& d) {
    const std::string kind = get_or<std::string>(d, "kind", "");
    if (kind == "free") return Interaction::free();
    if (kind == "mass") return Interaction::mass(get_or(d, "m", 1.0));
    if (kind == "phi4") return Interaction::phi4(get_or(d, "lambda", 1.0));
    if (kind == "sine_gordon") return Interaction::sine_gordon();
    if (kind == "custom") return Interaction::custom(get_or(d, "coefficients", std::vector<double>{}));
    throw ValidationError("unknown interaction kind '" + kind + "'");
}

std::vector<double> evaluate_profile(const json& p, const LatticeSpacetime& lat) {
    validate_axes(p);
    const int n = lat.n_space();
    if (p.contains("values")) {
        auto v = p.at("values").get<std::vector<double>>();
        if (static_cast<int>(v.size()) != n)
            throw ValidationError("profile values: expected " + std::to_string(n) + " entries");
        return v;
    }
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = spatial_profile(p, lat, lat.position(i));
    return out;
}

std::vector<double> evaluate_spacetime_profile(const json& p, const LatticeSpacetime& lat) {
    validate_axes(p);
    const int rows = lat.n_rows(), cols = lat.n_space();
    if (p.contains("values")) {
        auto v = p.at("values").get<std::vector<double>>();
        if (static_cast<int>(v.size()) != rows * cols) throw ValidationError("spacetime profile: wrong size");
        return v;
    }
    const double tc = get_or(p, "t_center", 0.5 * lat.time(lat.n_time()));
    const double tw = get_or(p, "t_width", 0.5);
    std::vector<double> space = evaluate_profile(p, lat);
    std::vector<double> out(static_cast<std::size_t>(rows) * cols);
    for (int r = 0; r < rows; ++r) {
        const double s = (lat.time(r) - tc) / tw;
        const double w = std::exp(-0.5 * s * s);
        for (int i = 0; i < cols; ++i) out[static_cast<std::size_t>(r) * cols + i] = w * space[i];
    }
    return out;
}

Observable make_observable(const json& d, const LatticeSpacetime& lat, const Interaction& rho) {
    const std::string kind = get_or<std::string>(d, "kind", "");
    if (kind == "slice_phi") return Observable::slice_phi(lat, evaluate_profile(d.at("smearing"), lat));
    if (kind == "slice_pi") return Observable::slice_pi(lat, evaluate_profile(d.at("smearing"), lat));
    if (kind == "spacetime") return Observable::spacetime(lat, rho, evaluate_spacetime_profile(d.at("smearing"), lat));
    if (kind == "constant") return Observable::constant(get_or(d, "value", 1.0));
    if (kind == "poly_composite") {
        if (!d.contains("terms") || !d.at("terms").is_array() || d.at("terms").empty())
            throw ValidationError("poly_composite needs a non-empty terms array");
        std::optional<Observable> sum;
        for (const json& t : d.at("terms")) {
            Observable term = get_or(t, "coefficient", 1.0) * Observable::constant(1.0);
            for (const json& f : t.at("factors")) term = term * make_observable(f, lat, rho);
            sum = sum ? *sum + term : term;
        }
        return *sum;
    }
    throw ValidationError("unknown observable kind '" + kind + "'");
}

CauchyData random_smooth_data(const LatticeSpacetime& lat, std::mt19937_64& rng, double amplitude) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int n = lat.n_space();
    std::vector<double> phi(n, 0.0), pi(n, 0.0);
    if (lat.topology() == Topology::circle) {
        const double k0 = kTwoPi / lat.length();
        for (int m = 1; m <= 3; ++m) {
            const double a = amplitude * u(rng) / m, b = amplitude * u(rng) / m;
            const double pa = std::numbers::pi * u(rng), pb = std::numbers::pi * u(rng);
            for (int i = 0; i < n; ++i) {
                phi[i] += a * std::sin(m * k0 * lat.position(i) + pa);
                pi[i] += b * std::cos(m * k0 * lat.position(i) + pb);
            }
        }
    } else {
        const double half = 0.25 * lat.length();
        for (int m = 0; m < 3; ++m) {
            const double c = half * u(rng), a = amplitude * u(rng), b = amplitude * u(rng);
            for (int i = 0; i < n; ++i) {
                const double x = lat.position(i) - c;
                phi[i] += a * std::exp(-2.0 * x * x);
                pi[i] += b * std::exp(-2.0 * x * x);
            }
        }
    }
    return CauchyData::from_real(make_real(), phi, pi);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ValidationError("slope fit needs two or more points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// ---------------------------------------------------------------------------

ConservationStudy conservation_study(const TangentSolution& v, const TangentSolution& w) {
    const auto& lat = v.lattice();
    ConservationStudy s;
    s.omega.resize(lat.n_rows());
    for (int n = 0; n < lat.n_rows(); ++n) s.omega[n] = presymplectic_form(v, w, n).scalar();
    const double ref = std::abs(s.omega[0]);
    for (double o : s.omega) s.max_drift = std::max(s.max_drift, ref > 0 ? std::abs(o - s.omega[0]) / ref : std::abs(o));

    WeilGrid div = divergence(lat, current_u(v, w));
    const bool line = lat.topology() == Topology::line;
    const std::size_t c0 = line ? 1 : 0, c1 = line ? div.cols() - 1 : div.cols();
    s.divergence.assign(lat.n_rows(), kNaN);
    for (std::size_t r = 2; r + 2 < div.rows(); ++r) {
        double m = 0.0;
        for (std::size_t c = c0; c < c1; ++c)
            for (double x : div.at(r, c)) m = std::max(m, std::abs(x));
        s.divergence[r] = m;
        s.closedness = std::max(s.closedness, m);
    }
    return s;
}

TangentSolution off_shell_tangent(const TangentSolution& on_shell, const CauchyData& fiber_data) {
    const auto& lat = on_shell.lattice();
    FieldHistory fiber = solve_cauchy(fiber_data, Interaction::free(), lat);
    return {on_shell.base, std::move(fiber), std::nullopt};
}

std::pair<double, double> roundtrip_error(const CauchyData& d, const Interaction& rho, const LatticeSpacetime& lat) {
    const LatticeSpacetime short_run = lat.n_time() >= 2 ? lat : lat.with_n_time(2);
    CauchyData back = restrict_data(solve_cauchy(d, rho, short_run), 0);
    back.phi.axpy(-1.0, d.phi);
    back.pi.axpy(-1.0, d.pi);
    return {back.phi.max_abs(), back.pi.max_abs()};
}

OracleComparison pauli_jordan_comparison(const LatticeSpacetime& lat, double mass, const std::vector<double>& f,
                                         const std::vector<double>& g) {
    Interaction rho = mass == 0.0 ? Interaction::free() : Interaction::mass(mass);
    CauchyData zero = CauchyData::zeros(make_real(), lat.n_space());
    PoissonContext ctx{lat, OmegaOperator::canonical(lat), {zero}, 1e-8, false};
    HamiltonianPair p = make_pair(Observable::spacetime(lat, rho, f), ctx);
    HamiltonianPair q = make_pair(Observable::spacetime(lat, rho, g), ctx);
    OracleComparison out;
    out.machinery = bracket(p, q, ctx).f(zero).scalar();
    out.oracle = pauli_jordan_bracket(lat, mass, f, g);
    out.relative_error = std::abs(out.machinery - out.oracle) / std::abs(out.oracle);
    return out;
}

// ---------------------------------------------------------------------------

std::string Table::csv() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out.push_back(',');
            out += cells[i];
        }
        out.push_back('\n');
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
}

bool Report::passed() const {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.passed; });
}

json Report::summary() const {
    json v = json::array();
    for (const Verdict& x : verdicts)
        v.push_back({{"name", x.name},
                     {"value", x.value},
                     {"tolerance", x.tolerance},
                     {"relation", x.relation},
                     {"passed", x.passed}});
    json files = json::array();
    for (const Table& t : tables) files.push_back(t.name + ".csv");
    return {{"passed", passed()},
            {"verdicts", v},
            {"tables", files},
            {"provenance",
             {{"experiment", provenance.experiment},
              {"config_hash", provenance.config_hash},
              {"version", provenance.version},
              {"seed", provenance.seed}}}};
}

std::string config_hash(const json& doc) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : doc.dump()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string version() { return WEILFIELD_VERSION; }

void write_report(const Report& r, const std::filesystem::path& dir) {
    for (const Table& t : r.tables) atomic_write(dir / (t.name + ".csv"), t.csv());
    for (const auto& [name, h] : r.snapshots) write_history(dir / (name + ".bin"), h);
    atomic_write(dir / "report.json", r.summary().dump(2) + "\n");
}

// ---------------------------------------------------------------------------

namespace {

double tol(const ExperimentConfig& c, const std::string& key) {
    auto it = c.tolerances.find(key);
    if (it == c.tolerances.end()) throw ValidationError("missing tolerance '" + key + "'");
    return it->second;
}

Verdict at_most(std::string name, double value, double tolerance) {
    return {std::move(name), value, tolerance, "<=", value <= tolerance};
}

Verdict at_least(std::string name, double value, double tolerance) {
    return {std::move(name), value, tolerance, ">=", value >= tolerance};
}

Verdict order_two(std::string name, double slope, double band) {
    return {std::move(name), slope, band, "|x-2|<=", std::abs(slope - 2.0) <= band};
}

CauchyData base_data(const ExperimentConfig& c, const LatticeSpacetime& lat) {
    return CauchyData::from_real(make_real(), evaluate_profile(c.data.at("phi"), lat),
                                 evaluate_profile(c.data.at("pi"), lat));
}

CauchyData fiber_data(const ExperimentConfig& c, std::size_t k, const LatticeSpacetime& lat) {
    return CauchyData::from_real(make_real(), evaluate_profile(c.fibers.at(k).at("phi"), lat),
                                 evaluate_profile(c.fibers.at(k).at("pi"), lat));
}

std::pair<TangentSolution, TangentSolution> fiber_pair(const ExperimentConfig& c, const LatticeSpacetime& lat,
                                                       const Interaction& rho) {
    const bool sc = lat.topology() == Topology::line;
    return make_tangent_pair(base_data(c, lat), fiber_data(c, 0, lat), fiber_data(c, 1, lat), rho, lat, sc, sc);
}

void run_solve(const ExperimentConfig& c, Report& r) {
    LatticeSpacetime lat = c.lattice.build();
    Interaction rho = make_interaction(c.interaction);
    AlgebraPtr alg = c.algebra_orders.empty() ? make_real() : WeilAlgebra::create(c.algebra_orders);
    CauchyData d = base_data(c, lat);
    CauchyData data = CauchyData::zeros(alg, lat.n_space());
    for (int i = 0; i < lat.n_space(); ++i) {
        data.phi.at(i)[0] = d.phi.at(i)[0];
        data.pi.at(i)[0] = d.pi.at(i)[0];
    }
    for (std::size_t g = 0; g < alg->num_generators(); ++g) {
        CauchyData f = fiber_data(c, g, lat);
        MultiIndex m(alg->num_generators(), 0);
        m[g] = 1;
        const std::size_t k = *alg->index_of(m);
        for (int i = 0; i < lat.n_space(); ++i) {
            data.phi.at(i)[k] = f.phi.at(i)[0];
            data.pi.at(i)[k] = f.pi.at(i)[0];
        }
    }
    FieldHistory h = solve_cauchy(data, rho, lat);
    FieldHistory res = eom_residual(h, rho);

    Table t{"solve", {"row", "t", "max_abs_scalar", "max_abs_nilpotent", "eom_residual"}, {}};
    double scaled = 0.0;
    for (int n = 0; n < lat.n_rows(); ++n) {
        double sc = 0.0, nil = 0.0, rr = 0.0, mag = 0.0;
        for (int i = 0; i < lat.n_space(); ++i) {
            auto v = h.values.at(n, i);
            sc = std::max(sc, std::abs(v[0]));
            for (std::size_t k = 1; k < v.size(); ++k) nil = std::max(nil, std::abs(v[k]));
            for (double x : v) mag = std::max(mag, std::abs(x));
            for (double x : res.values.at(n, i)) rr = std::max(rr, std::abs(x));
        }
        const bool interior = n > 0 && n < lat.n_time();
        t.add_row({num(n), num(lat.time(n)), num(sc), num(nil), interior ? num(rr) : num(kNaN)});
        if (interior) scaled = std::max(scaled, rr * lat.dt() * lat.dt() / std::max(1.0, mag));
    }
    r.tables.push_back(std::move(t));
    r.snapshots.emplace_back("solution", std::move(h));
    r.verdicts.push_back(at_most("scaled_eom_residual", scaled, tol(c, "eom")));
}

void run_conserve(const ExperimentConfig& c, Report& r) {
    LatticeSpacetime lat = c.lattice.build();
    Interaction rho = make_interaction(c.interaction);
    auto [v, w] = fiber_pair(c, lat, rho);
    ConservationStudy s = conservation_study(v, w);
    Table t{"conserve", {"row", "t", "omega", "relative_drift", "divergence_max"}, {}};
    for (int n = 0; n < lat.n_rows(); ++n) {
        const double drift = std::abs(s.omega[n] - s.omega[0]) / std::abs(s.omega[0]);
        t.add_row({num(n), num(lat.time(n)), num(s.omega[n]), num(drift), num(s.divergence[n])});
    }
    r.tables.push_back(std::move(t));
    r.verdicts.push_back(at_most("omega_relative_drift", s.max_drift, tol(c, "drift")));
}

void run_convergence(const ExperimentConfig& c, Report& r) {
    Interaction rho = make_interaction(c.interaction);
    std::vector<std::string> header = {"n_space", "dx", "omega_drift", "divergence_max"};
    if (c.negative_control) header.push_back("off_shell_divergence");
    Table t{"convergence", header, {}};
    std::vector<double> dx, drift, closed, off;
    for (int n : c.ladder) {
        LatticeSpacetime lat = c.lattice.build(n);
        auto [v, w] = fiber_pair(c, lat, rho);
        ConservationStudy s = conservation_study(v, w);
        dx.push_back(lat.dx());
        drift.push_back(s.max_drift);
        closed.push_back(s.closedness);
        std::vector<std::string> row = {num(n), num(lat.dx()), num(s.max_drift), num(s.closedness)};
        if (c.negative_control) {
            TangentSolution bad = off_shell_tangent(w, fiber_data(c, 1, lat));
            off.push_back(conservation_study(v, bad).closedness);
            row.push_back(num(off.back()));
        }
        t.add_row(std::move(row));
    }
    const double drift_slope = loglog_slope(dx, drift);
    const double closed_slope = loglog_slope(dx, closed);
    Table fit{"convergence_fit", {"quantity", "slope"}, {{"omega_drift", num(drift_slope)}, {"divergence_max", num(closed_slope)}}};
    r.tables.push_back(std::move(t));
    r.tables.push_back(std::move(fit));
    r.verdicts.push_back(order_two("omega_drift_order", drift_slope, tol(c, "order")));
    r.verdicts.push_back(order_two("divergence_order", closed_slope, tol(c, "order")));
    if (c.negative_control) {
        // the off-shell divergence must not go to zero with dx
        r.verdicts.push_back(at_least("off_shell_divergence_ratio", off.back() / off.front(), 0.5));
    }
}

void run_roundtrip(const ExperimentConfig& c, Report& r) {
    Interaction rho = make_interaction(c.interaction);
    Table t{"roundtrip", {"n_space", "dt", "sample", "phi_error", "pi_error"}, {}};
    std::vector<double> dts, pis;
    double phi_worst = 0.0;
    for (int n : c.ladder) {
        LatticeSpacetime lat = c.lattice.build(n);
        std::mt19937_64 rng(c.seed);  // same data family at every resolution
        double pi_worst = 0.0;
        for (int s = 0; s < c.samples; ++s) {
            CauchyData d = random_smooth_data(lat, rng, 0.5);
            auto [pe, qe] = roundtrip_error(d, rho, lat);
            t.add_row({num(n), num(lat.dt()), num(s), num(pe), num(qe)});
            phi_worst = std::max(phi_worst, pe);
            pi_worst = std::max(pi_worst, qe);
        }
        dts.push_back(lat.dt());
        pis.push_back(pi_worst);
    }
    const double slope = loglog_slope(dts, pis);
    r.tables.push_back(std::move(t));
    r.verdicts.push_back(at_most("phi_roundtrip_error", phi_worst, tol(c, "phi")));
    r.verdicts.push_back(order_two("pi_roundtrip_order", slope, tol(c, "order")));
}

std::vector<HamiltonianPair> pairs_for(const ExperimentConfig& c, const LatticeSpacetime& lat, const Interaction& rho,
                                       const PoissonContext& ctx) {
    std::vector<HamiltonianPair> out;
    for (const json& o : c.observables) out.push_back(make_pair(make_observable(o, lat, rho), ctx));
    return out;
}

void run_bracket(const ExperimentConfig& c, Report& r) {
    LatticeSpacetime lat = c.lattice.build();
    Interaction rho = make_interaction(c.interaction);
    CauchyData at = base_data(c, lat);
    PoissonContext ctx{lat, OmegaOperator::canonical(lat), {at}, tol(c, "residual"), true};
    std::vector<HamiltonianPair> ps = pairs_for(c, lat, rho, ctx);
    Table t{"bracket", {"i", "j", "label_i", "label_j", "value", "residual"}, {}};
    double worst = 0.0, antisym = 0.0;
    for (const auto& p : ps) worst = std::max(worst, p.residual);
    for (std::size_t i = 0; i < ps.size(); ++i) {
        for (std::size_t j = 0; j < ps.size(); ++j) {
            if (i == j) continue;
            HamiltonianPair b = bracket(ps[i], ps[j], ctx);
            const double val = b.f(at).scalar();
            if (j > i) {
                const double back = bracket(ps[j], ps[i], ctx).f(at).scalar();
                const double scale = std::max(std::abs(val), std::abs(back));
                antisym = std::max(antisym, scale > 0 ? std::abs(val + back) / scale : 0.0);
            }
            worst = std::max(worst, b.residual);
            t.add_row({num(static_cast<int>(i)), num(static_cast<int>(j)), "\"" + ps[i].f.label() + "\"",
                       "\"" + ps[j].f.label() + "\"", num(val), num(b.residual)});
        }
    }
    r.tables.push_back(std::move(t));
    r.verdicts.push_back(at_most("max_pair_residual", worst, tol(c, "residual")));
    r.verdicts.push_back(at_most("antisymmetry", antisym, tol(c, "antisymmetry")));
}

void run_jacobi(const ExperimentConfig& c, Report& r) {
    LatticeSpacetime lat = c.lattice.build();
    Interaction rho = make_interaction(c.interaction);
    std::mt19937_64 rng(c.seed);
    std::vector<CauchyData> samples;
    for (int s = 0; s < c.samples; ++s) samples.push_back(random_smooth_data(lat, rng, 0.5));
    PoissonContext all{lat, OmegaOperator::canonical(lat), samples, 1e-8, true};
    std::vector<HamiltonianPair> ps = pairs_for(c, lat, rho, all);

    Table t{"jacobi",
            {"sample", "antisymmetry_f", "antisymmetry_v", "jacobi_f", "jacobi_v", "leibniz_f", "leibniz_v",
             "bracket_residual", "input_residual"},
            {}};
    AxiomReport worst;
    for (int s = 0; s < c.samples; ++s) {
        PoissonContext one{lat, all.omega, {samples[s]}, 1e-8, true};
        AxiomReport a = verify_axioms(ps[0], ps[1], ps[2], one);
        t.add_row({num(s), num(a.antisymmetry_f), num(a.antisymmetry_v), num(a.jacobi_f), num(a.jacobi_v),
                   num(a.leibniz_f), num(a.leibniz_v), num(a.bracket_residual), num(a.input_residual)});
        worst.antisymmetry_f = std::max(worst.antisymmetry_f, a.antisymmetry_f);
        worst.antisymmetry_v = std::max(worst.antisymmetry_v, a.antisymmetry_v);
        worst.jacobi_f = std::max(worst.jacobi_f, a.jacobi_f);
        worst.jacobi_v = std::max(worst.jacobi_v, a.jacobi_v);
        worst.leibniz_f = std::max(worst.leibniz_f, a.leibniz_f);
        worst.leibniz_v = std::max(worst.leibniz_v, a.leibniz_v);
        worst.bracket_residual = std::max(worst.bracket_residual, a.bracket_residual);
        worst.input_residual = std::max(worst.input_residual, a.input_residual);
    }
    r.tables.push_back(std::move(t));
    const double axiom = tol(c, "axiom"), anti = tol(c, "antisymmetry");
    r.verdicts.push_back(at_most("antisymmetry_f", worst.antisymmetry_f, anti));
    r.verdicts.push_back(at_most("antisymmetry_v", worst.antisymmetry_v, anti));
    r.verdicts.push_back(at_most("jacobi_f", worst.jacobi_f, axiom));
    r.verdicts.push_back(at_most("jacobi_v", worst.jacobi_v, axiom));
    r.verdicts.push_back(at_most("leibniz_f", worst.leibniz_f, axiom));
    r.verdicts.push_back(at_most("leibniz_v", worst.leibniz_v, axiom));
    const double dx = lat.dx();
    r.verdicts.push_back(at_most("bracket_closure_residual", worst.bracket_residual,
                                 worst.input_residual + tol(c, "closure") * dx * dx));
}

void run_oracle_pj(const ExperimentConfig& c, Report& r) {
    const double mass = get_or<std::string>(c.interaction, "kind", "") == "mass" ? get_or(c.interaction, "m", 1.0) : 0.0;
    Table t{"oracle_pj", {"n_space", "dx", "machinery", "oracle", "relative_error"}, {}};
    std::vector<double> dx, err;
    double identity_t0 = 0.0, identity_rate = 0.0;
    for (int n : c.ladder) {
        LatticeSpacetime lat = c.lattice.build(n);
        auto f = evaluate_spacetime_profile(c.observables[0].at("smearing"), lat);
        auto g = evaluate_spacetime_profile(c.observables[1].at("smearing"), lat);
        OracleComparison o = pauli_jordan_comparison(lat, mass, f, g);
        t.add_row({num(n), num(lat.dx()), num(o.machinery), num(o.oracle), num(o.relative_error)});
        dx.push_back(lat.dx());
        err.push_back(o.relative_error);
        if (n == c.ladder.front()) {
            // G(0, .) = 0 and dx d_t G(0, x_i - x_j) = delta_ij on the lattice
            for (int i = 0; i < n; ++i) {
                const double x = lat.position(i) - lat.position(0);
                identity_t0 = std::max(identity_t0, std::abs(pauli_jordan_function(0.0, x, lat.length(), n, mass)));
                const double want = i == 0 ? 1.0 : 0.0;
                identity_rate = std::max(
                    identity_rate, std::abs(lat.dx() * pauli_jordan_rate(0.0, x, lat.length(), n, mass) - want));
            }
        }
    }
    const double slope = loglog_slope(dx, err);
    r.tables.push_back(std::move(t));
    r.verdicts.push_back(at_most("equal_time_commutator", identity_t0, 1e-12));
    r.verdicts.push_back(at_most("rate_delta_comb", identity_rate, 1e-12));
    r.verdicts.push_back(at_most("relative_error_finest", err.back(), tol(c, "relative")));
    r.verdicts.push_back(order_two("relative_error_order", slope, tol(c, "order")));
}

}  // namespace

Report run(const ExperimentConfig& c) {
    Report r;
    r.provenance = {to_string(c.kind), config_hash(c.source), version(), c.seed};
    switch (c.kind) {
        case ExperimentKind::solve: run_solve(c, r); break;
        case ExperimentKind::conserve: run_conserve(c, r); break;
        case ExperimentKind::convergence: run_convergence(c, r); break;
        case ExperimentKind::roundtrip: run_roundtrip(c, r); break;
        case ExperimentKind::bracket: run_bracket(c, r); break;
        case ExperimentKind::jacobi: run_jacobi(c, r); break;
        case ExperimentKind::oracle_pj: run_oracle_pj(c, r); break;
    }
    return r;
}

}  // namespace weilfield::harness
