// weilfield command line: runs one experiment and reports its verdicts.
// Exit status 0 when every verdict passes, 1 when any fails, 2 on usage or
// validation errors.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "weilfield/errors.hpp"
#include "weilfield/harness.hpp"
#include "weilfield/io.hpp"

namespace wh = weilfield::harness;

namespace {

const char* primary_tolerance(wh::ExperimentKind k) {
    switch (k) {
        case wh::ExperimentKind::solve: return "eom";
        case wh::ExperimentKind::conserve: return "drift";
        case wh::ExperimentKind::convergence: return "order";
        case wh::ExperimentKind::roundtrip: return "phi";
        case wh::ExperimentKind::bracket: return "residual";
        case wh::ExperimentKind::jacobi: return "axiom";
        case wh::ExperimentKind::oracle_pj: return "relative";
    }
    return "";
}

struct Options {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
};

int execute(wh::ExperimentKind kind, const Options& o) {
    nlohmann::json doc = nlohmann::json::object();
    if (!o.config.empty()) {
        std::ifstream in(o.config);
        if (!in) throw weilfield::ValidationError("cannot read config " + o.config);
        try {
            doc = nlohmann::json::parse(in, nullptr, true, true);
        } catch (const nlohmann::json::exception& e) {
            throw weilfield::ValidationError(std::string("config is not valid JSON: ") + e.what());
        }
    }
    if (o.seed) doc["seed"] = *o.seed;
    if (o.tol) doc["tolerances"][primary_tolerance(kind)] = *o.tol;
    wh::ExperimentConfig cfg = wh::parse_config(doc, kind);
    wh::Report report = wh::run(cfg);

    std::FILE* verdict_stream = stdout;
    if (o.out.empty()) {
        for (const auto& t : report.tables) {
            if (report.tables.size() > 1) std::printf("# %s\n", t.name.c_str());
            std::fputs(t.csv().c_str(), stdout);
        }
        verdict_stream = stderr;
    } else {
        wh::write_report(report, o.out);
    }
    for (const auto& v : report.verdicts)
        std::fprintf(verdict_stream, "%s %s = %s (%s %s)\n", v.passed ? "PASS" : "FAIL", v.name.c_str(),
                     weilfield::format_double(v.value).c_str(), v.relation.c_str(),
                     weilfield::format_double(v.tolerance).c_str());
    std::fprintf(verdict_stream, "config %s, version %s\n", report.provenance.config_hash.c_str(),
                 report.provenance.version.c_str());
    return report.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weil-algebra field laboratory"};
    app.require_subcommand(1);
    Options opts;
    std::uint64_t seed = 0;
    double tol = 0.0;
    std::optional<wh::ExperimentKind> chosen;

    const std::pair<const char*, const char*> commands[] = {
        {"solve", "solve the field equation and check the discrete residual"},
        {"conserve", "presymplectic form on every slice and divergence of the current"},
        {"bracket", "Poisson brackets of configured observables"},
        {"jacobi", "antisymmetry, Jacobi and Leibniz defects at random base points"},
        {"convergence", "convergence orders of slice drift and closedness"},
        {"roundtrip", "Cauchy data round trip through the solver"},
        {"oracle-pj", "free-field bracket against the mode-sum commutator"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", opts.config, "JSON configuration file")->check(CLI::ExistingFile);
        sub->add_option("--out", opts.out, "output directory (tables go to stdout when absent)");
        sub->add_option("--seed", seed, "seed for randomized sweeps");
        sub->add_option("--tol", tol, "override the experiment's primary tolerance");
        sub->callback([&chosen, name = std::string(name)] { chosen = wh::experiment_from_string(name); });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    for (CLI::App* sub : app.get_subcommands()) {
        if (sub->count("--seed")) opts.seed = seed;
        if (sub->count("--tol")) opts.tol = tol;
    }
    try {
        return execute(*chosen, opts);
    } catch (const weilfield::ValidationError& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return 2;
    } catch (const weilfield::ConeEscape& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
