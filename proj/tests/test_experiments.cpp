#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qbattery/csv.hpp"
#include "qbattery/experiments.hpp"

using namespace qbattery;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
    const fs::path dir = fs::temp_directory_path() / "qbattery_test_experiments";
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(QBATTERY_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

ExperimentConfig scatter(std::uint64_t seed, std::size_t samples, std::size_t threads) {
    ExperimentConfig c;
    c.experiment = Experiment::ScatterCoherent;
    c.dim = 3;
    c.samples = samples;
    c.seed = seed;
    c.threads = threads;
    c.grid = 64;
    return c;
}

} // namespace

TEST_CASE("float formatting round-trips") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0, 1e-17}) {
        const std::string s = format_double(v);
        CHECK(std::stod(s) == v);
    }
    CHECK(format_optional(std::nullopt).empty());
    CHECK(split_fields("a,,b") == std::vector<std::string>{"a", "", "b"});
    CHECK(join_fields({"x", "y"}) == "x,y");
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("configuration JSON") {
    ExperimentConfig c = scatter(9, 10, 2);
    c.weights = {0.1, 0.1, 0.8};
    c.nmax = 30;
    const ExperimentConfig back = ExperimentConfig::from_json(c.to_json());
    CHECK(back.to_json() == c.to_json());
    CHECK(back.seed == std::optional<std::uint64_t>(9));

    CHECK_THROWS_AS(ExperimentConfig::from_json(nlohmann::json{{"colour", "red"}}), ValidationError);
    CHECK_THROWS_AS(ExperimentConfig::from_json(nlohmann::json{{"dim", "three"}}), ValidationError);
    CHECK_THROWS_AS(ExperimentConfig::from_json(nlohmann::json{{"experiment", "histogram"}}), ValidationError);

    ExperimentConfig no_seed = scatter(1, 10, 1);
    no_seed.seed.reset();
    CHECK_THROWS_AS(no_seed.validate(), ValidationError);
    ExperimentConfig small = scatter(1, 10, 1);
    small.dim = 1;
    CHECK_THROWS_AS(small.validate(), ValidationError);

    for (auto e : {Experiment::Surface, Experiment::ScatterCoherent, Experiment::ScatterIncoherent,
                   Experiment::ScatterPurity, Experiment::LockedVsPr, Experiment::BoundsBand, Experiment::Dynamics})
        CHECK(parse_experiment(to_string(e)) == e);
}

TEST_CASE("surface grid") {
    ExperimentConfig c;
    c.experiment = Experiment::Surface;
    c.dim = 2;
    c.grid = 11;
    const CsvOutput two = run_surface(c);
    REQUIRE(two.lines.size() == 11);
    CHECK(two.lines.front() == "0,1,2,2,2,2,III");
    CHECK(two.lines.back() == "1,0,0,0,0,0,I");

    c.dim = 3;
    c.grid = 4;
    const CsvOutput three = run_surface(c);
    CHECK(three.lines.size() == 10);
    bool uniform_seen = false;
    for (const auto& line : three.lines) {
        const auto f = split_fields(line);
        if (f[0] == f[1] && f[1] == f[2]) {
            uniform_seen = true;
            CHECK(std::stod(f[3]) == 0.0);
            CHECK(std::stod(f[4]) == doctest::Approx(1.0));
            CHECK(f[7] == "I");
        }
    }
    CHECK(uniform_seen);
}

TEST_CASE("scatter output is independent of the worker count") {
    const CsvOutput one = run_scatter(scatter(5, 300, 1));
    const CsvOutput eight = run_scatter(scatter(5, 300, 8));
    CHECK(one.render() == eight.render());
    CHECK(one.lines.size() == 300);
    CHECK(run_scatter(scatter(6, 300, 1)).render() != one.render());

    for (auto e : {Experiment::ScatterIncoherent, Experiment::ScatterPurity, Experiment::LockedVsPr}) {
        ExperimentConfig c = scatter(5, 50, 3);
        c.experiment = e;
        c.spectrum = SpectrumKind::Gue;
        const std::string parallel = run_scatter(c).render();
        c.threads = 1;
        CHECK(run_scatter(c).render() == parallel);
    }
}

TEST_CASE("written files verify and replay byte for byte") {
    const fs::path dir = scratch();
    for (auto e : {Experiment::ScatterCoherent, Experiment::ScatterIncoherent, Experiment::ScatterPurity,
                   Experiment::LockedVsPr}) {
        ExperimentConfig c = scatter(11, 200, 4);
        c.experiment = e;
        c.out = (dir / (to_string(e) + ".csv")).string();
        const RunRecord rec = write_experiment(c);
        CHECK(rec.rows == 200);
        CHECK(rec.manifest_path == c.out + ".manifest.json");
        const VerifyReport v = verify_csv(c.out);
        CHECK(v.kind == "scatter");
        CHECK(v.ok());

        const auto m = nlohmann::json::parse(slurp(rec.manifest_path));
        CHECK(m.at("schema_version") == kSchemaVersion);
        CHECK(m.at("version") == kToolVersion);
        CHECK(m.at("seed") == 11);
        CHECK(m.at("files").at(0).at("rows") == 200);
        CHECK(m.at("files").at(0).at("bytes") == slurp(c.out).size());

        const ReplayReport r = replay_manifest(rec.manifest_path, (dir / "replay.csv").string());
        CHECK(r.identical);
        CHECK(slurp(dir / "replay.csv") == slurp(c.out));
    }
}

TEST_CASE("tampered rows fail verification") {
    const fs::path dir = scratch();
    ExperimentConfig c = scatter(3, 20, 1);
    c.out = (dir / "tamper.csv").string();
    write_experiment(c);
    std::string text = slurp(c.out);
    const auto row = text.find('\n') + 1;
    const auto comma = text.find(',', row);
    text.insert(comma + 1, "9");  // corrupt e_1 of the first row
    std::ofstream(c.out, std::ios::binary | std::ios::trunc) << text;
    CHECK_FALSE(verify_csv(c.out).ok());
}

TEST_CASE("bounds and dynamics jobs") {
    ExperimentConfig b;
    b.experiment = Experiment::BoundsBand;
    b.dim = 2;
    b.grid = 21;
    const CsvOutput band = run_bounds(b);
    REQUIRE(band.lines.size() == 21);
    CHECK(band.lines.front() == "0,0,0");
    const auto last = split_fields(band.lines.back());
    CHECK(std::stod(last[1]) == doctest::Approx(1.0));
    CHECK(std::stod(last[2]) == doctest::Approx(1.0));

    ExperimentConfig d;
    d.experiment = Experiment::Dynamics;
    d.model = CavityModel::TC;
    d.nb = 2;
    d.tmax = 10.0;
    d.points = 11;
    const CsvOutput dyn = run_dynamics(d);
    CHECK(dyn.lines.size() == 11);
    int populations = 0;
    for (const auto& col : dyn.columns) populations += col.rfind("p_", 0) == 0 ? 1 : 0;
    CHECK(populations == 3);

    const fs::path dir = scratch();
    d.model = CavityModel::JC;
    d.nb = 1;
    d.out = (dir / "jc.csv").string();
    write_experiment(d);
    CHECK(verify_csv(d.out).ok());
    CHECK(read_csv(d.out).column("analytic_ergotropy").has_value());

    d.model = CavityModel::Dicke;
    d.nb = 2;
    d.kappa = 0.5;
    d.dt = 1e-2;
    d.out = (dir / "dicke.csv").string();
    write_experiment(d);
    CHECK(verify_csv(d.out).ok());
    const CsvTable dicke = read_csv(d.out);
    CHECK(dicke.rows.front()[*dicke.column("analytic_ergotropy")].empty());
}

TEST_CASE("command-line exit codes") {
    const fs::path dir = scratch();
    const std::string out = (dir / "cli.csv").string();
    CHECK(run_cli("scatter --experiment scatter-coherent --dim 3 --samples 10 --out " + out) == 2);
    CHECK(run_cli("scatter --experiment scatter-coherent --dim 3 --samples 10 --seed 1 --sampler GUE --out " + out) == 2);
    CHECK(run_cli("surface --dim 2 --grid 1 --out " + out) == 2);
    CHECK(run_cli("scatter --experiment dynamics --seed 1 --out " + out) == 2);
    CHECK(run_cli("bogus") == 2);
    CHECK(run_cli("verify " + (dir / "missing.csv").string()) == 1);

    CHECK(run_cli("scatter --experiment scatter-purity --dim 3 --samples 50 --seed 4 --threads 8 --out " + out) == 0);
    CHECK(run_cli("verify " + out) == 0);
    CHECK(run_cli("manifest " + out + ".manifest.json --out " + (dir / "cli_replay.csv").string()) == 0);
    CHECK(slurp(out) == slurp(dir / "cli_replay.csv"));

    const fs::path cfg = dir / "job.json";
    std::ofstream(cfg) << R"({"experiment": "bounds-band", "dim": 3, "grid": 5})";
    CHECK(run_cli("bounds --config " + cfg.string() + " --grid 7 --out " + out) == 0);
    CHECK(read_csv(out).rows.size() == 7);
    std::ofstream(cfg, std::ios::trunc) << R"({"dimension": 3})";
    CHECK(run_cli("bounds --config " + cfg.string() + " --out " + out) == 2);
}
