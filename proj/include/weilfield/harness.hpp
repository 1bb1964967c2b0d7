#pragma once

// Experiment configuration, drivers and reports.
//
// A configuration is a JSON document:
//
//   {
//     "experiment": "conserve",
//     "lattice": {"topology": "circle", "n_space": 256, "length": 6.283185307179586,
//                 "dt_ratio": 0.5, "t_final": 4.0},
//     "interaction": {"kind": "sine_gordon"},
//     "algebra": {"orders": [2]},
//     "data": {"phi": <profile>, "pi": <profile>},
//     "fibers": [{"phi": <profile>, "pi": <profile>}, ...],
//     "observables": [<observable>, ...],
//     "ladder": [64, 128, 256, 512],
//     "samples": 5,
//     "seed": 1,
//     "tolerances": {"drift": 1e-3}
//   }
//
// Profiles: {"kind": "gaussian"|"bump"|"sin"|"cos"|"constant"|"kink"|"zero", ...}
// or {"values": [...]}.  Spacetime profiles add "t_center"/"t_width".
// Observables: {"kind": "slice_phi"|"slice_pi"|"spacetime", "smearing": <profile>}
// or {"kind": "poly_composite", "terms": [{"coefficient": c, "factors": [<observable>...]}]}.
// Every section has a default, so an empty document runs the built-in
// experiment for the chosen kind.

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "weilfield/dynamics.hpp"
#include "weilfield/lattice.hpp"
#include "weilfield/poisson.hpp"
#include "weilfield/zuckerman.hpp"

namespace weilfield::harness {

enum class ExperimentKind { solve, conserve, bracket, jacobi, convergence, roundtrip, oracle_pj };

std::string to_string(ExperimentKind k);
/// Accepts the CLI names and "cauchy_roundtrip" / "oracle_pj".
ExperimentKind experiment_from_string(const std::string& s);

/// Lattice family: fixed topology, length and Courant ratio, variable resolution.
struct LatticeSpec {
    Topology topology = Topology::circle;
    int n_space = 64;
    double length = 0.0;
    double dt_ratio = 0.5;
    std::optional<int> n_time;
    std::optional<double> t_final;
    int guard = 2;

    /// Resolution n; the final time stays fixed across resolutions.
    LatticeSpacetime build(int n) const;
    LatticeSpacetime build() const { return build(n_space); }
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::solve;
    LatticeSpec lattice;
    nlohmann::json interaction;
    std::vector<int> algebra_orders;
    nlohmann::json data;
    std::vector<nlohmann::json> fibers;
    std::vector<nlohmann::json> observables;
    std::vector<int> ladder;
    int samples = 5;
    std::uint64_t seed = 1;
    std::map<std::string, double> tolerances;
    bool negative_control = true;
    nlohmann::json source;  // the merged document, hashed into provenance
};

/// Built-in configuration for an experiment kind.
nlohmann::json default_config(ExperimentKind kind);
/// Merge `doc` over the defaults of its kind (or `kind` when given) and
/// validate; throws ValidationError.
ExperimentConfig parse_config(const nlohmann::json& doc, std::optional<ExperimentKind> kind = std::nullopt);

Interaction make_interaction(const nlohmann::json& d);
std::vector<double> evaluate_profile(const nlohmann::json& p, const LatticeSpacetime& lat);
/// Row-major (n_time+1) x n_space.
std::vector<double> evaluate_spacetime_profile(const nlohmann::json& p, const LatticeSpacetime& lat);
Observable make_observable(const nlohmann::json& d, const LatticeSpacetime& lat, const Interaction& rho);

/// Smooth random Cauchy data: a few low Fourier modes on a circle, a few
/// Gaussians kept off the guard band on a line.
CauchyData random_smooth_data(const LatticeSpacetime& lat, std::mt19937_64& rng, double amplitude);

/// Presymplectic form on every slice and the on-shell divergence of the
/// current, for one pair of tangent solutions.
struct ConservationStudy {
    std::vector<double> omega;       // per row
    std::vector<double> divergence;  // per row max-norm; NaN on the two rows at each end
    double max_drift = 0.0;          // max_n |omega_n - omega_0| / |omega_0|
    double closedness = 0.0;         // max over rows 2..n_time-2
};
ConservationStudy conservation_study(const TangentSolution& v, const TangentSolution& w);

/// Tangent solution whose fiber solves the free wave equation instead of the
/// linearisation around `base` (an off-shell fiber, for negative controls).
TangentSolution off_shell_tangent(const TangentSolution& on_shell, const CauchyData& fiber_data);

/// ||restrict_data(solve_cauchy(d), 0) - d|| split into phi and pi parts.
std::pair<double, double> roundtrip_error(const CauchyData& d, const Interaction& rho, const LatticeSpacetime& lat);

/// Machinery bracket of two spacetime-smeared observables at zero data, and
/// the mode-sum value for the same smearings.
struct OracleComparison {
    double machinery = 0.0;
    double oracle = 0.0;
    double relative_error = 0.0;
};
OracleComparison pauli_jordan_comparison(const LatticeSpacetime& lat, double mass, const std::vector<double>& f,
                                         const std::vector<double>& g);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct Table {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> r) { rows.push_back(std::move(r)); }
    std::string csv() const;
};

struct Verdict {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    std::string relation;  // "<=", ">=" or "|x-2|<="
    bool passed = false;
};

struct Provenance {
    std::string experiment;
    std::string config_hash;
    std::string version;
    std::uint64_t seed = 0;
};

struct Report {
    std::vector<Table> tables;
    std::vector<Verdict> verdicts;
    Provenance provenance;
    std::vector<std::pair<std::string, FieldHistory>> snapshots;

    bool passed() const;
    nlohmann::json summary() const;
};

Report run(const ExperimentConfig& config);

/// <dir>/<table>.csv, <dir>/<snapshot>.bin and <dir>/report.json, each
/// written atomically.
void write_report(const Report& r, const std::filesystem::path& dir);

/// 64-bit FNV-1a of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& doc);

std::string version();

}  // namespace weilfield::harness
