// qbattery: command-line runner for the battery figure-data jobs
//
//   qbattery scatter --experiment scatter-coherent --dim 3 --samples 100000 --seed 7 --out c.csv
//   qbattery dynamics --model Dicke --nb 2 --kappa 0.5 --out d.csv
//   qbattery verify c.csv
//   qbattery manifest c.csv.manifest.json --out replay.csv
//
// Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 invariant violation.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qbattery/experiments.hpp"

using nlohmann::json;
using namespace qbattery;

namespace {

constexpr int kExitIo = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInvariant = 3;

struct JobFlags {
    std::string experiment;
    std::string config;
    std::size_t dim{};
    std::size_t samples{};
    std::uint64_t seed{};
    std::string sampler;
    std::string weights;
    double fers_ratio{};
    std::string spectrum;
    std::size_t grid{};
    std::size_t threads{};
    std::string model;
    std::size_t nb{};
    double nc{};
    double g{};
    double omega{};
    double kappa{};
    std::string charger;
    std::size_t nmax{};
    double tmax{};
    std::size_t points{};
    double dt{};
    std::string out;

    std::vector<std::pair<std::string, CLI::Option*>> options;
};

std::array<double, 3> parse_weights(const std::string& text) {
    std::array<double, 3> w{};
    std::string s = text;
    for (char& ch : s)
        if (ch == ':' || ch == ',') ch = ' ';
    std::istringstream in(s);
    for (double& x : w)
        if (!(in >> x)) throw ValidationError("config field 'weights': expected three numbers like 0.2:0.5:0.3");
    std::string rest;
    if (in >> rest) throw ValidationError("config field 'weights': expected exactly three numbers");
    return w;
}

void add_job_options(CLI::App* app, JobFlags& f) {
    auto add = [&](const std::string& key, CLI::Option* opt) { f.options.emplace_back(key, opt); };
    add("experiment", app->add_option("--experiment", f.experiment, "surface, scatter-coherent, scatter-incoherent, scatter-purity, locked-vs-pr, bounds-band, dynamics"));
    app->add_option("--config", f.config, "JSON configuration file; flags override its values");
    add("dim", app->add_option("--dim", f.dim, "battery dimension d"));
    add("samples", app->add_option("--samples", f.samples, "number of random samples"));
    add("seed", app->add_option("--seed", f.seed, "master seed (required for scatter jobs)"));
    add("sampler", app->add_option("--sampler", f.sampler, "HSRS, FERS, FPRS or Haar"));
    add("weights", app->add_option("--weights", f.weights, "FPRS low:medium:high weights"));
    add("fers_ratio", app->add_option("--fers-ratio", f.fers_ratio, "FERS low-entropy : HSRS ratio"));
    add("spectrum", app->add_option("--spectrum", f.spectrum, "battery spectrum: equal or gue"));
    add("grid", app->add_option("--grid", f.grid, "grid points per axis (surface, bounds)"));
    add("threads", app->add_option("--threads", f.threads, "worker threads, 0 = all cores"));
    add("model", app->add_option("--model", f.model, "JC, TC or Dicke"));
    add("nb", app->add_option("--nb", f.nb, "number of atoms N_B"));
    add("nc", app->add_option("--nc", f.nc, "charger photon number N_c"));
    add("g", app->add_option("--g", f.g, "coupling strength"));
    add("omega", app->add_option("--omega", f.omega, "resonant frequency"));
    add("kappa", app->add_option("--kappa", f.kappa, "cavity damping rate"));
    add("charger", app->add_option("--charger", f.charger, "fock or coherent"));
    add("nmax", app->add_option("--nmax", f.nmax, "Fock truncation"));
    add("tmax", app->add_option("--tmax", f.tmax, "final time"));
    add("points", app->add_option("--points", f.points, "number of output times"));
    add("dt", app->add_option("--dt", f.dt, "integrator step"));
    add("out", app->add_option("--out", f.out, "output CSV path"));
}

json overrides(const JobFlags& f) {
    json j = json::object();
    for (const auto& [key, opt] : f.options) {
        if (opt->count() == 0) continue;
        if (key == "experiment") j[key] = f.experiment;
        else if (key == "dim") j[key] = f.dim;
        else if (key == "samples") j[key] = f.samples;
        else if (key == "seed") j[key] = f.seed;
        else if (key == "sampler") j[key] = f.sampler;
        else if (key == "weights") j[key] = parse_weights(f.weights);
        else if (key == "fers_ratio") j[key] = f.fers_ratio;
        else if (key == "spectrum") j[key] = f.spectrum;
        else if (key == "grid") j[key] = f.grid;
        else if (key == "threads") j[key] = f.threads;
        else if (key == "model") j[key] = f.model;
        else if (key == "nb") j[key] = f.nb;
        else if (key == "nc") j[key] = f.nc;
        else if (key == "g") j[key] = f.g;
        else if (key == "omega") j[key] = f.omega;
        else if (key == "kappa") j[key] = f.kappa;
        else if (key == "charger") j[key] = f.charger;
        else if (key == "nmax") j[key] = f.nmax;
        else if (key == "tmax") j[key] = f.tmax;
        else if (key == "points") j[key] = f.points;
        else if (key == "dt") j[key] = f.dt;
        else if (key == "out") j[key] = f.out;
    }
    return j;
}

ExperimentConfig resolve(const std::string& subcommand, const JobFlags& flags) {
    ExperimentConfig config;
    if (subcommand == "surface") config.experiment = Experiment::Surface;
    else if (subcommand == "bounds") config.experiment = Experiment::BoundsBand;
    else if (subcommand == "dynamics") config.experiment = Experiment::Dynamics;
    else config.experiment = Experiment::ScatterCoherent;
    const Experiment implied = config.experiment;

    if (!flags.config.empty()) {
        std::ifstream in(flags.config);
        if (!in) throw ValidationError("config field 'config': cannot open '" + flags.config + "'");
        json j;
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            throw ValidationError("config field 'config': " + std::string(e.what()));
        }
        config.merge_json(j);
    }
    config.merge_json(overrides(flags));

    const bool scatter_cmd = subcommand == "scatter";
    if (scatter_cmd ? !is_scatter(config.experiment) : config.experiment != implied)
        throw ValidationError("config field 'experiment': '" + to_string(config.experiment) +
                              "' does not belong to the '" + subcommand + "' subcommand");
    config.validate();
    return config;
}

int run_job(const std::string& subcommand, const JobFlags& flags) {
    ExperimentConfig config;
    try {
        config = resolve(subcommand, flags);
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    }
    RunRecord rec;
    try {
        rec = write_experiment(config);
    } catch (const std::invalid_argument& e) {
        // A state or operator failed validation mid-run.
        std::cerr << "invariant violation: " << e.what() << '\n';
        return kExitInvariant;
    }
    std::cout << "wrote " << rec.rows << " rows to " << rec.csv_path << " (manifest " << rec.manifest_path << ")\n";
    return 0;
}

int run_verify(const std::vector<std::string>& paths) {
    int code = 0;
    for (const auto& path : paths) {
        const VerifyReport rep = verify_csv(path);
        std::cout << path << ": " << rep.kind << ", " << rep.rows << " rows, " << rep.failures.size()
                  << " failures\n";
        for (std::size_t i = 0; i < rep.failures.size() && i < 20; ++i) std::cout << "  " << rep.failures[i] << '\n';
        if (!rep.ok()) code = kExitInvariant;
    }
    return code;
}

int run_manifest(const std::string& manifest, const std::string& out) {
    const std::string target = out.empty() ? manifest + ".replay.csv" : out;
    const ReplayReport rep = replay_manifest(manifest, target);
    std::cout << "replayed into " << rep.out_path << ": expected " << rep.expected_digest << ", got "
              << rep.actual_digest << (rep.identical ? " (identical)\n" : " (DIFFERENT)\n");
    return rep.identical ? 0 : kExitInvariant;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum battery ergotropy experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    JobFlags surface_flags, scatter_flags, bounds_flags, dynamics_flags;
    CLI::App* surface = app.add_subcommand("surface", "incoherent ergotropy and stored energy over the population simplex");
    CLI::App* scatter = app.add_subcommand("scatter", "random-state ensembles with every metric per sample");
    CLI::App* bounds = app.add_subcommand("bounds", "coherent-ergotropy envelopes over the coherence range");
    CLI::App* dynamics = app.add_subcommand("dynamics", "JC, TC and open Dicke charging trajectories");
    add_job_options(surface, surface_flags);
    add_job_options(scatter, scatter_flags);
    add_job_options(bounds, bounds_flags);
    add_job_options(dynamics, dynamics_flags);

    std::vector<std::string> verify_paths;
    CLI::App* verify = app.add_subcommand("verify", "re-validate every row of CSV outputs");
    verify->add_option("files", verify_paths, "CSV files")->required();

    std::string manifest_path, replay_out;
    CLI::App* manifest = app.add_subcommand("manifest", "re-run a job from its manifest and compare bytes");
    manifest->add_option("manifest", manifest_path, "<out>.manifest.json")->required();
    manifest->add_option("--out", replay_out, "where to write the replayed CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (surface->parsed()) return run_job("surface", surface_flags);
        if (scatter->parsed()) return run_job("scatter", scatter_flags);
        if (bounds->parsed()) return run_job("bounds", bounds_flags);
        if (dynamics->parsed()) return run_job("dynamics", dynamics_flags);
        if (verify->parsed()) return run_verify(verify_paths);
        if (manifest->parsed()) return run_manifest(manifest_path, replay_out);
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const InvariantError& e) {
        std::cerr << "invariant violation: " << e.what() << '\n';
        return kExitInvariant;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    }
    return 0;
}
