#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "support.hpp"
#include "weilfield/errors.hpp"
#include "weilfield/harness.hpp"
#include "weilfield/io.hpp"
#include "weilfield/pauli_jordan.hpp"

using namespace weilfield;
using namespace weilfield::harness;
using nlohmann::json;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::filesystem::path scratch_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("weilfield-test-" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json small_solve() {
    return {{"experiment", "solve"}, {"lattice", {{"n_space", 32}, {"n_time", 16}}}};
}

}  // namespace

TEST_CASE("experiment names") {
    for (auto k : {ExperimentKind::solve, ExperimentKind::conserve, ExperimentKind::bracket, ExperimentKind::jacobi,
                   ExperimentKind::convergence, ExperimentKind::roundtrip, ExperimentKind::oracle_pj})
        CHECK(experiment_from_string(to_string(k)) == k);
    CHECK(experiment_from_string("cauchy_roundtrip") == ExperimentKind::roundtrip);
    CHECK(experiment_from_string("oracle_pj") == ExperimentKind::oracle_pj);
    CHECK_THROWS_AS(experiment_from_string("nope"), ValidationError);
}

TEST_CASE("lattice specs keep the final time") {
    LatticeSpec s;
    s.length = kTwoPi;
    s.t_final = 2.0;
    for (int n : {32, 64, 128}) {
        auto lat = s.build(n);
        CHECK(lat.n_time() * lat.dt() == doctest::Approx(2.0).epsilon(lat.dt()));
    }
    LatticeSpec steps;
    steps.length = 1.0;
    steps.n_space = 16;
    steps.n_time = 10;
    CHECK(steps.build(32).n_time() == 20);
    LatticeSpec none;
    none.length = 1.0;
    CHECK_THROWS_AS(none.build(), ValidationError);
    none.n_time = 2;
    none.length = -1.0;
    CHECK_THROWS_AS(none.build(), ValidationError);
    LatticeSpec line;
    line.topology = Topology::line;
    line.length = 10.0;
    line.n_time = 4;
    CHECK(line.build(11).dx() == doctest::Approx(1.0));
}

TEST_CASE("configuration defaults and merging") {
    auto c = parse_config(json::object(), ExperimentKind::conserve);
    CHECK(c.kind == ExperimentKind::conserve);
    CHECK(c.lattice.n_space == 256);
    CHECK(c.fibers.size() == 2);
    CHECK(c.tolerances.at("drift") == 1e-3);

    auto d = parse_config({{"experiment", "bracket"}, {"lattice", {{"n_space", 40}}}, {"tolerances", {{"residual", 1e-6}}}});
    CHECK(d.kind == ExperimentKind::bracket);
    CHECK(d.lattice.n_space == 40);
    CHECK(d.lattice.length == doctest::Approx(kTwoPi));
    CHECK(d.tolerances.at("residual") == 1e-6);
    CHECK(d.tolerances.at("antisymmetry") == 1e-14);

    auto e = parse_config({{"lattice", {{"n_time", 7}}}}, ExperimentKind::conserve);
    CHECK(e.lattice.n_time == 7);
    CHECK(!e.lattice.t_final.has_value());
    CHECK(e.source.at("experiment") == "conserve");
}

TEST_CASE("configuration validation") {
    auto bad = [](json doc) {
        INFO(doc.dump());
        CHECK_THROWS_AS(parse_config(doc), ValidationError);
    };
    bad(json::array());
    bad({{"experiment", "warp"}});
    bad({{"experiment", "solve"}, {"samples", 0}});
    bad({{"experiment", "solve"}, {"tolerances", {{"eom", -1.0}}}});
    bad({{"experiment", "solve"}, {"lattice", {{"dt_ratio", 1.5}}}});
    bad({{"experiment", "solve"}, {"lattice", {{"topology", "torus"}}}});
    bad({{"experiment", "solve"}, {"lattice", {{"n_space", "many"}}}});
    bad({{"experiment", "solve"}, {"interaction", {{"kind", "yukawa"}}}});
    bad({{"experiment", "solve"}, {"data", {{"phi", {{"kind", "square"}}}, {"pi", {{"kind", "zero"}}}}}});
    bad({{"experiment", "solve"}, {"data", {{"phi", {{"kind", "gaussian"}, {"width", -1.0}}}, {"pi", {{"kind", "zero"}}}}}});
    bad({{"experiment", "solve"}, {"data", {{"phi", {{"values", {1.0, 2.0}}}}, {"pi", {{"kind", "zero"}}}}}});
    bad({{"experiment", "solve"}, {"data", {{"phi", {{"kind", "kink"}, {"velocity", 1.2}}}, {"pi", {{"kind", "zero"}}}}}});
    bad({{"experiment", "conserve"}, {"fibers", json::array()}});
    bad({{"experiment", "convergence"}, {"ladder", {64}}});
    bad({{"experiment", "jacobi"}, {"observables", json::array({{{"kind", "slice_phi"}, {"smearing", {{"kind", "zero"}}}}})}});
    bad({{"experiment", "bracket"}, {"observables", json::array({{{"kind", "vertex"}}, {{"kind", "slice_phi"}}})}});
    bad({{"experiment", "oracle-pj"}, {"interaction", {{"kind", "sine_gordon"}}}});
    bad({{"experiment", "oracle-pj"}, {"lattice", {{"topology", "line"}, {"length", 10.0}}}});
    bad({{"experiment", "solve"}, {"algebra", {{"orders", {0}}}}});
}

TEST_CASE("profiles and interactions") {
    auto lat = LatticeSpacetime::circle(64, kTwoPi, 0.5, 4);
    auto g = evaluate_profile({{"kind", "gaussian"}, {"center", lat.position(10)}, {"width", 0.3}, {"amplitude", 2.0}},
                              lat);
    CHECK(g[10] == doctest::Approx(2.0));
    CHECK(g[11] == doctest::Approx(2.0 * std::exp(-0.5 * std::pow(lat.dx() / 0.3, 2))));
    auto s = evaluate_profile({{"kind", "sin"}, {"mode", 2}}, lat);
    CHECK(s[5] == doctest::Approx(std::sin(2.0 * lat.position(5))));
    auto c = evaluate_profile({{"kind", "constant"}, {"value", 0.25}}, lat);
    CHECK(c[63] == 0.25);
    auto b = evaluate_profile({{"kind", "bump"}, {"center", 1.0}, {"width", 0.5}}, lat);
    for (int i = 0; i < 64; ++i)
        if (std::abs(lat.position(i) - 1.0) >= 0.5) CHECK(b[i] == 0.0);
    auto k = evaluate_profile({{"kind", "kink"}, {"center", std::numbers::pi}}, lat);
    CHECK(k[32] == doctest::Approx(std::numbers::pi));
    std::vector<double> vals(64, 1.5);
    CHECK(evaluate_profile({{"values", vals}}, lat) == vals);

    auto st = evaluate_spacetime_profile({{"kind", "gaussian"}, {"t_center", lat.time(2)}, {"t_width", 0.5}}, lat);
    CHECK(st.size() == 5u * 64u);
    CHECK(st[2 * 64] == doctest::Approx(1.0));

    CHECK(make_interaction({{"kind", "free"}}).name == "free");
    CHECK(make_interaction({{"kind", "phi4"}, {"lambda", 2.0}}).name == "phi4");
    CHECK(make_interaction({{"kind", "sine_gordon"}}).name == "sine_gordon");

    auto rho = Interaction::free();
    auto o = make_observable({{"kind", "poly_composite"},
                              {"terms", json::array({{{"coefficient", 3.0},
                                                      {"factors", json::array({{{"kind", "slice_phi"},
                                                                                {"smearing", {{"kind", "constant"}}}}})}}})}},
                             lat, rho);
    auto at = CauchyData::from_real(make_real(), std::vector<double>(64, 1.0), std::vector<double>(64, 0.0));
    CHECK(o(at).scalar() == doctest::Approx(3.0 * kTwoPi));
    CHECK_THROWS_AS(make_observable({{"kind", "poly_composite"}, {"terms", json::array()}}, lat, rho), ValidationError);
}

TEST_CASE("slope fit and random data") {
    std::vector<double> x{1, 2, 4, 8}, y;
    for (double v : x) y.push_back(3.0 * std::pow(v, -2.0));
    CHECK(loglog_slope(x, y) == doctest::Approx(-2.0));
    CHECK_THROWS_AS(loglog_slope({1.0}, {1.0}), ValidationError);

    std::mt19937_64 a(5), b(5);
    auto lat = LatticeSpacetime::line(64, 20.0, 0.5, 4, 3);
    auto d1 = random_smooth_data(lat, a, 0.5), d2 = random_smooth_data(lat, b, 0.5);
    CHECK(support::rel_diff(d1, d2) == 0.0);
    CHECK(d1.max_abs() > 0.0);
}

TEST_CASE("mode sum commutator function") {
    const double l = kTwoPi;
    for (double m : {0.0, 1.0}) {
        for (double x : {0.0, 0.7, 2.0}) {
            CHECK(pauli_jordan_function(0.0, x, l, 16, m) == 0.0);
            CHECK(pauli_jordan_function(-0.4, x, l, 16, m) == doctest::Approx(-pauli_jordan_function(0.4, x, l, 16, m)));
            CHECK(pauli_jordan_function(0.4, -x, l, 16, m) == doctest::Approx(pauli_jordan_function(0.4, x, l, 16, m)));
            const double h = 1e-6;
            const double fd =
                (pauli_jordan_function(0.3 + h, x, l, 16, m) - pauli_jordan_function(0.3 - h, x, l, 16, m)) / (2 * h);
            CHECK(pauli_jordan_rate(0.3, x, l, 16, m) == doctest::Approx(fd).epsilon(1e-7));
        }
        // the rate at coincident times is a lattice delta comb
        auto lat = LatticeSpacetime::circle(16, l, 0.5, 2);
        for (int i = 0; i < 16; ++i)
            CHECK(lat.dx() * pauli_jordan_rate(0.0, lat.position(i), l, 16, m) ==
                  doctest::Approx(i == 0 ? 1.0 : 0.0).scale(1.0));
    }
    // single massless mode: k = 1 term only, checked by hand
    CHECK(pauli_jordan_function(0.5, 0.0, l, 2, 0.0) == doctest::Approx((0.5 + std::sin(-0.5) / -1.0) / l));
}

TEST_CASE("smeared commutator against a direct double sum") {
    auto lat = LatticeSpacetime::circle(8, kTwoPi, 0.5, 6);
    std::mt19937_64 rng(17);
    const std::size_t cells = lat.n_rows() * 8;
    auto f = support::random_vector(rng, cells), g = support::random_vector(rng, cells);
    const double m = 0.8;
    double direct = 0.0;
    auto w = [&](int n) { return (n == 0 || n == lat.n_time()) ? 0.5 : 1.0; };
    for (int t = 0; t < lat.n_rows(); ++t)
        for (int x = 0; x < 8; ++x)
            for (int s = 0; s < lat.n_rows(); ++s)
                for (int y = 0; y < 8; ++y)
                    direct += w(t) * w(s) * f[t * 8 + x] * g[s * 8 + y] *
                              pauli_jordan_function(lat.time(s) - lat.time(t), lat.position(x) - lat.position(y),
                                                    lat.length(), 8, m);
    direct *= std::pow(lat.dx() * lat.dt(), 2);
    CHECK(pauli_jordan_bracket(lat, m, f, g) == doctest::Approx(direct).epsilon(1e-12));
    CHECK(pauli_jordan_bracket(lat, m, g, f) == doctest::Approx(-direct).epsilon(1e-12));
    auto line = LatticeSpacetime::line(8, 7.0, 0.5, 6);
    CHECK_THROWS_AS(pauli_jordan_bracket(line, m, f, g), ValidationError);
}

TEST_CASE("history snapshots round trip exactly") {
    std::mt19937_64 rng(23);
    auto lat = LatticeSpacetime::line(9, 4.0, 0.5, 3, 2);
    FieldHistory h{lat, WeilGrid(WeilAlgebra::create({3, 2}), lat.n_rows(), 9)};
    for (double& v : h.values.raw()) v = std::normal_distribution<double>()(rng);
    h.values.raw()[0] = -0.0;
    h.values.raw()[1] = 1e-310;
    auto bytes = encode_history(h);
    auto back = decode_history(bytes);
    CHECK(back.lattice.topology() == Topology::line);
    CHECK(back.lattice.n_space() == 9);
    CHECK(back.lattice.guard() == 2);
    CHECK(back.lattice.dx() == lat.dx());
    CHECK(back.lattice.dt() == lat.dt());
    CHECK(back.algebra()->orders() == h.algebra()->orders());
    CHECK(std::memcmp(back.values.raw().data(), h.values.raw().data(), h.values.raw().size() * sizeof(double)) == 0);

    CHECK_THROWS(decode_history("not a snapshot"));
    CHECK_THROWS(decode_history(bytes.substr(0, bytes.size() - 3)));

    auto dir = scratch_dir("snapshot");
    write_history(dir / "h.bin", h);
    auto again = read_history(dir / "h.bin");
    CHECK(std::memcmp(again.values.raw().data(), h.values.raw().data(), h.values.raw().size() * sizeof(double)) == 0);
    std::filesystem::remove_all(dir);

    CHECK(std::stod(format_double(0.1)) == 0.1);
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("atomic writes replace files and leave no temporaries") {
    auto dir = scratch_dir("atomic");
    atomic_write(dir / "a.txt", "first");
    atomic_write(dir / "a.txt", "second");
    CHECK(slurp(dir / "a.txt") == "second");
    int count = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        (void)e;
        ++count;
    }
    CHECK(count == 1);
    atomic_write(dir / "nested" / "b.txt", "x");
    CHECK(slurp(dir / "nested" / "b.txt") == "x");
    std::filesystem::remove_all(dir);
}

TEST_CASE("config hashes") {
    json a = {{"x", 1}, {"y", {1, 2}}};
    json b = {{"y", {1, 2}}, {"x", 1}};
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);
    CHECK(config_hash(a) != config_hash({{"x", 2}, {"y", {1, 2}}}));
    CHECK(!version().empty());
}

TEST_CASE("tables and verdicts") {
    Table t{"demo", {"a", "b"}, {}};
    t.add_row({"1", "2"});
    t.add_row({"3", "4"});
    CHECK(t.csv() == "a,b\n1,2\n3,4\n");
    Report r;
    r.verdicts.push_back({"x", 1.0, 2.0, "<=", true});
    CHECK(r.passed());
    r.verdicts.push_back({"y", 1.0, 2.0, ">=", false});
    CHECK(!r.passed());
    auto s = r.summary();
    CHECK(s.at("passed") == false);
}

TEST_CASE("runs are deterministic and reports are complete") {
    auto cfg = parse_config(small_solve());
    auto r1 = run(cfg), r2 = run(cfg);
    REQUIRE(r1.tables.size() == r2.tables.size());
    for (std::size_t i = 0; i < r1.tables.size(); ++i) CHECK(r1.tables[i].csv() == r2.tables[i].csv());
    CHECK(r1.passed());
    CHECK(r1.provenance.experiment == "solve");
    CHECK(r1.provenance.config_hash == config_hash(cfg.source));

    auto dir = scratch_dir("report");
    write_report(r1, dir);
    auto summary = json::parse(slurp(dir / "report.json"));
    CHECK(summary.at("passed") == true);
    for (const auto& t : r1.tables) CHECK(std::filesystem::exists(dir / (t.name + ".csv")));
    for (const auto& [name, h] : r1.snapshots) {
        auto back = read_history(dir / (name + ".bin"));
        CHECK(back.values.raw().size() == h.values.raw().size());
    }
    for (const auto& e : std::filesystem::directory_iterator(dir))
        CHECK(e.path().string().find(".tmp") == std::string::npos);
    std::filesystem::remove_all(dir);

    auto j = parse_config({{"experiment", "jacobi"}, {"lattice", {{"n_space", 16}}}, {"seed", 3}, {"samples", 2}});
    auto a = run(j), b = run(j);
    for (std::size_t i = 0; i < a.tables.size(); ++i) CHECK(a.tables[i].csv() == b.tables[i].csv());
    CHECK(a.passed());
}
