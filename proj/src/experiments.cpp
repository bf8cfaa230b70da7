#include "qbattery/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "qbattery/bounds.hpp"
#include "qbattery/csv.hpp"
#include "qbattery/metrics.hpp"

namespace qbattery {

using nlohmann::json;

namespace {

[[noreturn]] void field_error(const std::string& field, const std::string& message) {
    throw ValidationError("config field '" + field + "': " + message);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

template <class F>
void parallel_for(std::size_t count, std::size_t threads, F&& body) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::max<std::size_t>(1, std::min(threads, count));
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(count);
            }
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);
}

void indexed_columns(std::vector<std::string>& cols, const char* prefix, std::size_t count) {
    for (std::size_t n = 1; n <= count; ++n) cols.push_back(std::string(prefix) + std::to_string(n));
}

const std::vector<std::string>& report_columns() {
    static const std::vector<std::string> cols{"stored_energy", "ergotropy", "incoherent", "coherent",
                                               "locked_energy", "efficiency", "coherence", "diag_entropy",
                                               "vn_entropy", "participation_ratio", "purity", "above_ground",
                                               "stage"};
    return cols;
}

void append_vector(std::vector<std::string>& fields, const RealVector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) fields.push_back(format_double(v(i)));
}

void append_report(std::vector<std::string>& f, const ErgotropyReport& r) {
    f.push_back(format_double(r.stored_energy));
    f.push_back(format_double(r.ergotropy));
    f.push_back(format_double(r.incoherent));
    f.push_back(format_double(r.coherent));
    f.push_back(format_double(r.locked_energy));
    f.push_back(format_optional(r.efficiency));
    f.push_back(format_double(r.coherence));
    f.push_back(format_double(r.diag_entropy));
    f.push_back(format_double(r.vn_entropy));
    f.push_back(format_double(r.participation_ratio));
    f.push_back(format_double(r.purity));
    f.push_back(format_double(r.above_ground));
    f.push_back(r.stage.name());
}

QuantumState embed_populations(const RealVector& p, const BatteryHamiltonian& h) {
    const Matrix m = h.basis() * p.cast<Complex>().asDiagonal() * h.basis().adjoint();
    return QuantumState::renormalized(m);
}

std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace

std::string to_string(Experiment e) {
    switch (e) {
    case Experiment::Surface: return "surface";
    case Experiment::ScatterCoherent: return "scatter-coherent";
    case Experiment::ScatterIncoherent: return "scatter-incoherent";
    case Experiment::ScatterPurity: return "scatter-purity";
    case Experiment::LockedVsPr: return "locked-vs-pr";
    case Experiment::BoundsBand: return "bounds-band";
    case Experiment::Dynamics: return "dynamics";
    }
    return "?";
}

Experiment parse_experiment(const std::string& name) {
    const std::string n = lower(name);
    if (n == "surface") return Experiment::Surface;
    if (n == "scatter-coherent" || n == "coherent") return Experiment::ScatterCoherent;
    if (n == "scatter-incoherent" || n == "incoherent") return Experiment::ScatterIncoherent;
    if (n == "scatter-purity" || n == "purity") return Experiment::ScatterPurity;
    if (n == "locked-vs-pr" || n == "locked") return Experiment::LockedVsPr;
    if (n == "bounds-band" || n == "bounds") return Experiment::BoundsBand;
    if (n == "dynamics") return Experiment::Dynamics;
    field_error("experiment", "unknown experiment '" + name + "'");
}

bool is_scatter(Experiment e) {
    return e == Experiment::ScatterCoherent || e == Experiment::ScatterIncoherent ||
           e == Experiment::ScatterPurity || e == Experiment::LockedVsPr;
}

SamplerMethod ExperimentConfig::effective_sampler() const {
    if (sampler) return *sampler;
    switch (experiment) {
    case Experiment::ScatterIncoherent: return SamplerMethod::FERS;
    case Experiment::ScatterPurity:
    case Experiment::LockedVsPr: return SamplerMethod::FPRS;
    default: return SamplerMethod::HSRS;
    }
}

SamplerSpec ExperimentConfig::sampler_spec() const {
    SamplerSpec s;
    s.method = effective_sampler();
    s.dim = dim;
    s.seed = seed.value_or(0);
    s.fers_ratio = fers_ratio;
    s.fprs_weights = weights;
    return s;
}

CavityBatteryConfig ExperimentConfig::cavity() const {
    CavityBatteryConfig c;
    c.model = model;
    c.n_b = nb;
    c.omega = omega;
    c.g = g;
    c.charger = charger;
    c.n_c = nc;
    c.n_max = nmax;
    c.kappa = kappa;
    c.dt = dt;
    c.times = uniform_times(tmax, points);
    return c;
}

void ExperimentConfig::validate() const {
    if (experiment == Experiment::Dynamics) {
        if (points < 1) field_error("points", "at least one output time is required");
        cavity().validate();
        return;
    }
    if (dim < 2) field_error("dim", "must be at least 2");
    if (experiment == Experiment::Surface || experiment == Experiment::BoundsBand) {
        if (grid < 2) field_error("grid", "grid too coarse, need at least 2 points per axis");
    }
    if (experiment == Experiment::BoundsBand && spectrum == SpectrumKind::Gue && !seed)
        field_error("seed", "a GUE spectrum needs --seed");
    if (is_scatter(experiment)) {
        if (samples < 1) field_error("samples", "must be at least 1");
        if (!seed) field_error("seed", "scatter jobs require an explicit --seed");
        const SamplerMethod m = effective_sampler();
        if (m == SamplerMethod::GUE) field_error("sampler", "GUE draws Hamiltonians, not states");
        try {
            sampler_spec().validate();
        } catch (const ValidationError& e) {
            field_error(m == SamplerMethod::FERS ? "fers_ratio" : "weights", e.what());
        }
    }
}

json ExperimentConfig::to_json() const {
    json j;
    j["experiment"] = to_string(experiment);
    j["dim"] = dim;
    j["samples"] = samples;
    j["seed"] = seed ? json(*seed) : json(nullptr);
    j["sampler"] = sampler ? json(to_string(*sampler)) : json(nullptr);
    j["weights"] = weights;
    j["fers_ratio"] = fers_ratio;
    j["spectrum"] = spectrum == SpectrumKind::Gue ? "gue" : "equal";
    j["grid"] = grid;
    j["threads"] = threads;
    j["model"] = to_string(model);
    j["nb"] = nb;
    j["nc"] = nc;
    j["g"] = g;
    j["omega"] = omega;
    j["kappa"] = kappa;
    j["charger"] = to_string(charger);
    j["nmax"] = nmax ? json(*nmax) : json(nullptr);
    j["tmax"] = tmax;
    j["points"] = points;
    j["dt"] = dt;
    j["out"] = out;
    return j;
}

void ExperimentConfig::merge_json(const json& j) {
    if (!j.is_object()) throw ValidationError("config: expected a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        const json& v = it.value();
        try {
            if (key == "experiment") experiment = parse_experiment(v.get<std::string>());
            else if (key == "dim") dim = v.get<std::size_t>();
            else if (key == "samples") samples = v.get<std::size_t>();
            else if (key == "seed") seed = v.is_null() ? std::nullopt : std::optional<std::uint64_t>(v.get<std::uint64_t>());
            else if (key == "sampler") sampler = v.is_null() ? std::nullopt : std::optional<SamplerMethod>(parse_sampler_method(v.get<std::string>()));
            else if (key == "weights") weights = v.get<std::array<double, 3>>();
            else if (key == "fers_ratio") fers_ratio = v.get<double>();
            else if (key == "spectrum") {
                const std::string s = lower(v.get<std::string>());
                if (s == "equal") spectrum = SpectrumKind::EquallySpaced;
                else if (s == "gue") spectrum = SpectrumKind::Gue;
                else field_error("spectrum", "expected 'equal' or 'gue'");
            }
            else if (key == "grid") grid = v.get<std::size_t>();
            else if (key == "threads") threads = v.get<std::size_t>();
            else if (key == "model") model = parse_cavity_model(v.get<std::string>());
            else if (key == "nb") nb = v.get<std::size_t>();
            else if (key == "nc") nc = v.get<double>();
            else if (key == "g") g = v.get<double>();
            else if (key == "omega") omega = v.get<double>();
            else if (key == "kappa") kappa = v.get<double>();
            else if (key == "charger") charger = parse_charger_kind(v.get<std::string>());
            else if (key == "nmax") nmax = v.is_null() ? std::nullopt : std::optional<std::size_t>(v.get<std::size_t>());
            else if (key == "tmax") tmax = v.get<double>();
            else if (key == "points") points = v.get<std::size_t>();
            else if (key == "dt") dt = v.get<double>();
            else if (key == "out") out = v.get<std::string>();
            else field_error(key, "unknown key");
        } catch (const json::exception& e) {
            field_error(key, e.what());
        }
    }
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    ExperimentConfig c;
    c.merge_json(j);
    return c;
}

std::string CsvOutput::render() const {
    std::string text = join_fields(columns);
    text += '\n';
    for (const auto& line : lines) {
        text += line;
        text += '\n';
    }
    return text;
}

CsvOutput run_surface(const ExperimentConfig& config) {
    config.validate();
    const std::size_t d = config.dim;
    const std::size_t steps = config.grid - 1;
    const BatteryHamiltonian h = BatteryHamiltonian::equally_spaced(d);

    CsvOutput out;
    indexed_columns(out.columns, "p_", d);
    for (const char* c : {"incoherent", "stored_energy", "ergotropy_lower", "ergotropy_upper", "stage"})
        out.columns.emplace_back(c);

    std::vector<std::size_t> k(d, 0);
    // Enumerate compositions k_1 + ... + k_d = steps in lexicographic order.
    auto emit = [&] {
        RealVector p(static_cast<Eigen::Index>(d));
        for (std::size_t n = 0; n < d; ++n)
            p(static_cast<Eigen::Index>(n)) = static_cast<double>(k[n]) / static_cast<double>(steps);
        const PopulationVector pop = PopulationVector::from_values(p);
        const double ei = incoherent_ergotropy(pop, h);
        const double stored = p.dot(h.energies()) - h.ground_energy();
        std::vector<std::string> f;
        append_vector(f, p);
        f.push_back(format_double(ei));
        f.push_back(format_double(stored));
        f.push_back(format_double(ei));
        f.push_back(format_double(stored));
        f.push_back(classify_stage(pop).name());
        out.lines.push_back(join_fields(f));
    };
    auto recurse = [&](auto&& self, std::size_t pos, std::size_t left) -> void {
        if (pos + 1 == d) {
            k[pos] = left;
            emit();
            return;
        }
        for (std::size_t v = 0; v <= left; ++v) {
            k[pos] = v;
            self(self, pos + 1, left - v);
        }
    };
    recurse(recurse, 0, steps);
    return out;
}

CsvOutput run_scatter(const ExperimentConfig& config) {
    config.validate();
    const std::size_t d = config.dim;
    const SamplerSpec spec = config.sampler_spec();
    const bool with_bounds = config.experiment == Experiment::ScatterCoherent;

    CsvOutput out;
    out.columns.emplace_back("index");
    indexed_columns(out.columns, "e_", d);
    indexed_columns(out.columns, "p_", d);
    for (const auto& c : report_columns()) out.columns.push_back(c);
    if (with_bounds) {
        out.columns.emplace_back("bound_lower");
        out.columns.emplace_back("bound_upper");
    }
    for (const char* c : {"delta_r1", "purity_level", "fers_branch"}) out.columns.emplace_back(c);

    const BatteryHamiltonian fixed = BatteryHamiltonian::equally_spaced(d);
    out.lines.resize(config.samples);
    parallel_for(config.samples, config.threads, [&](std::size_t i) {
        RandomStream rng = spec.stream(i);
        std::optional<Matrix> raw;
        std::optional<FersDraw> fers;
        std::optional<FprsDraw> fprs;
        switch (spec.method) {
        case SamplerMethod::HSRS: raw = sample_hs_state(d, rng).matrix(); break;
        case SamplerMethod::FERS: fers = sample_fers(d, spec.fers_ratio, rng); break;
        case SamplerMethod::FPRS:
            fprs = sample_fprs_weighted(d, spec.fprs_weights, rng);
            raw = fprs->state.matrix();
            break;
        case SamplerMethod::Haar: {
            const Matrix u = sample_haar_unitary(d, rng);
            raw = QuantumState::pure(u.col(0)).matrix();
            break;
        }
        case SamplerMethod::GUE: throw ValidationError("config field 'sampler': GUE draws Hamiltonians, not states");
        }
        const BatteryHamiltonian h =
            config.spectrum == SpectrumKind::Gue ? sample_gue_hamiltonian(d, rng, true) : fixed;
        const QuantumState rho =
            fers ? embed_populations(fers->populations.values(), h) : QuantumState::renormalized(*raw);

        const ErgotropyReport r = evaluate(rho, h);
        std::vector<std::string> f;
        f.reserve(out.columns.size());
        f.push_back(std::to_string(i));
        append_vector(f, h.energies());
        append_vector(f, dephase(rho, h).values());
        append_report(f, r);
        if (with_bounds) {
            const double c = std::clamp(r.coherence, 0.0, std::log(static_cast<double>(d)));
            f.push_back(format_double(pure_state_bound(c, h)));
            f.push_back(format_double(deloc_state_bound(c, h)));
        }
        f.push_back(fprs ? format_double(fprs->delta_r1) : std::string());
        f.push_back(fprs ? to_string(fprs->level) : std::string());
        f.push_back(fers ? std::string(fers->low_entropy_branch ? "low" : "hs") : std::string());
        out.lines[i] = join_fields(f);
    });
    return out;
}

CsvOutput run_bounds(const ExperimentConfig& config) {
    config.validate();
    BatteryHamiltonian h = BatteryHamiltonian::equally_spaced(config.dim);
    if (config.spectrum == SpectrumKind::Gue) {
        SamplerSpec spec = config.sampler_spec();
        spec.method = SamplerMethod::GUE;
        RandomStream rng = spec.stream(0);
        h = sample_gue_hamiltonian(config.dim, rng, true);
    }
    const BoundBand band = bound_band(h, config.grid);
    CsvOutput out;
    out.columns = {"coherence", "lower", "upper"};
    for (std::size_t i = 0; i < band.coherence.size(); ++i)
        out.lines.push_back(join_fields(
            {format_double(band.coherence[i]), format_double(band.lower[i]), format_double(band.upper[i])}));
    return out;
}

CsvOutput run_dynamics(const ExperimentConfig& config) {
    config.validate();
    const CavityBatteryConfig cav = config.cavity();
    const TimeSeries ts = evolve(cav);
    const std::size_t d = cav.battery_dim();
    const bool analytic = cav.model == CavityModel::JC && cav.kappa == 0.0;
    const bool piecewise = analytic && cav.charger == ChargerKind::Fock && cav.n_c >= 1.0;

    CsvOutput out;
    out.columns.emplace_back("time");
    indexed_columns(out.columns, "e_", d);
    indexed_columns(out.columns, "p_", d);
    for (const auto& c : report_columns()) out.columns.push_back(c);
    for (const char* c : {"photon_number", "total_trace", "total_purity", "total_energy", "excitations",
                          "analytic_ergotropy", "piecewise_ergotropy"})
        out.columns.emplace_back(c);

    for (const TimeRecord& r : ts.records) {
        std::vector<std::string> f;
        f.push_back(format_double(r.time));
        append_vector(f, ts.battery_energies);
        append_vector(f, r.populations);
        append_report(f, r.report);
        f.push_back(format_double(r.photon_number));
        f.push_back(format_double(r.total_trace));
        f.push_back(format_double(r.total_purity));
        f.push_back(format_double(r.total_energy));
        f.push_back(format_double(r.excitations));
        f.push_back(analytic ? format_double(jc_analytic_ergotropy(cav, r.time)) : std::string());
        f.push_back(piecewise ? format_double(jc_fock_piecewise(cav, r.time)) : std::string());
        out.lines.push_back(join_fields(f));
    }
    return out;
}

CsvOutput run_experiment(const ExperimentConfig& config) {
    switch (config.experiment) {
    case Experiment::Surface: return run_surface(config);
    case Experiment::BoundsBand: return run_bounds(config);
    case Experiment::Dynamics: return run_dynamics(config);
    default: return run_scatter(config);
    }
}

std::string manifest_path_for(const std::string& csv_path) { return csv_path + ".manifest.json"; }

std::string hex_digest(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

RunRecord write_experiment(const ExperimentConfig& config) {
    const std::string started = utc_now();
    const auto t0 = std::chrono::steady_clock::now();
    const CsvOutput table = run_experiment(config);
    const std::string text = table.render();
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    {
        std::ofstream f(config.out, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write '" + config.out + "'");
        f << text;
        if (!f) throw std::runtime_error("write to '" + config.out + "' failed");
    }

    RunRecord rec;
    rec.csv_path = config.out;
    rec.manifest_path = manifest_path_for(config.out);
    rec.rows = table.lines.size();
    json& m = rec.manifest;
    m["schema_version"] = kSchemaVersion;
    m["tool"] = "qbattery";
    m["version"] = kToolVersion;
    m["experiment"] = to_string(config.experiment);
    m["seed"] = config.seed ? json(*config.seed) : json(nullptr);
    m["config"] = config.to_json();
    m["started_utc"] = started;
    m["wall_clock_seconds"] = seconds;
    m["files"] = json::array({json{{"path", config.out},
                                   {"rows", table.lines.size()},
                                   {"columns", table.columns},
                                   {"bytes", text.size()},
                                   {"fnv1a64", hex_digest(fnv1a64(text))}}});
    std::ofstream mf(rec.manifest_path, std::ios::binary | std::ios::trunc);
    if (!mf) throw std::runtime_error("cannot write '" + rec.manifest_path + "'");
    mf << m.dump(2) << '\n';
    return rec;
}

ReplayReport replay_manifest(const std::string& manifest_path, const std::string& out_path) {
    const json m = json::parse(read_file(manifest_path));
    ExperimentConfig config = ExperimentConfig::from_json(m.at("config"));
    config.out = out_path;
    write_experiment(config);
    ReplayReport rep;
    rep.out_path = out_path;
    rep.expected_digest = m.at("files").at(0).at("fnv1a64").get<std::string>();
    rep.actual_digest = hex_digest(fnv1a64(read_file(out_path)));
    rep.identical = rep.expected_digest == rep.actual_digest;
    return rep;
}

// ---------------------------------------------------------------------------
// verify

namespace {

std::optional<double> parse_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw std::runtime_error("bad number '" + s + "'");
    return v;
}

class RowChecker {
public:
    RowChecker(const CsvTable& t, VerifyReport& rep) : table_(t), report_(rep) {}

    void start(std::size_t row) {
        row_ = row;
        values_ = &table_.rows[row];
    }

    bool has(const std::string& name) const { return table_.column(name).has_value(); }

    std::optional<double> opt(const std::string& name) const {
        const auto c = table_.column(name);
        if (!c) return std::nullopt;
        return parse_number((*values_)[*c]);
    }

    double num(const std::string& name) const {
        const auto v = opt(name);
        if (!v) throw std::runtime_error("missing value in column '" + name + "'");
        return *v;
    }

    std::string text(const std::string& name) const { return (*values_)[*table_.column(name)]; }

    RealVector vector(const char* prefix) const {
        std::vector<double> v;
        for (std::size_t n = 1; has(prefix + std::to_string(n)); ++n) v.push_back(num(prefix + std::to_string(n)));
        return Eigen::Map<RealVector>(v.data(), static_cast<Eigen::Index>(v.size()));
    }

    void expect(bool ok, const std::string& what) {
        if (ok) return;
        std::ostringstream os;
        os << "row " << row_ + 1 << ": " << what;
        report_.failures.push_back(os.str());
    }

private:
    const CsvTable& table_;
    VerifyReport& report_;
    std::size_t row_{0};
    const std::vector<std::string>* values_{nullptr};
};

constexpr double kVerifyTol = 1e-10;

void check_populations(RowChecker& c, const RealVector& p) {
    c.expect(std::abs(p.sum() - 1.0) <= 1e-9, "populations do not sum to one");
    c.expect(p.minCoeff() >= -kPopulationTol, "negative population");
}

void check_report(RowChecker& c, const RealVector& p, const RealVector& e) {
    check_populations(c, p);
    const auto d = static_cast<double>(p.size());
    const double erg = c.num("ergotropy"), ei = c.num("incoherent"), ec = c.num("coherent");
    const double above = c.num("above_ground"), stored = c.num("stored_energy");
    c.expect(std::abs(erg - ei - ec) <= kVerifyTol, "ergotropy != incoherent + coherent");
    c.expect(ei >= -kVerifyTol && ei <= erg + kVerifyTol, "incoherent ergotropy outside [0, ergotropy]");
    c.expect(erg <= above + kVerifyTol, "ergotropy above the mean energy over the ground level");

    const PopulationVector pop = PopulationVector::from_values(p);
    const BatteryHamiltonian h = BatteryHamiltonian::from_energies(e);
    c.expect(std::abs(incoherent_ergotropy(pop, h) - ei) <= kVerifyTol, "incoherent ergotropy disagrees with populations");
    const StageLabel stage = classify_stage(pop);
    c.expect(stage.name() == c.text("stage"), "stage label " + c.text("stage") + " != recomputed " + stage.name());
    if (stage.stage == Stage::I) c.expect(std::abs(ei) <= 1e-12, "stage I row with nonzero incoherent ergotropy");

    const auto eff = c.opt("efficiency");
    if (std::abs(stored) <= kZeroEnergyTol)
        c.expect(!eff, "efficiency present although the stored energy vanishes");
    else
        c.expect(eff && std::abs(*eff - erg / stored) <= 1e-9 * std::max(1.0, std::abs(*eff)), "efficiency != ergotropy / stored energy");

    const double pur = c.num("purity"), pr = c.num("participation_ratio");
    c.expect(pur >= 1.0 / d - kVerifyTol && pur <= 1.0 + kVerifyTol, "purity outside [1/d, 1]");
    c.expect(pr >= 1.0 - kVerifyTol && pr <= d + kVerifyTol, "participation ratio outside [1, d]");
    const double sd = c.num("diag_entropy"), sv = c.num("vn_entropy"), coh = c.num("coherence");
    c.expect(coh >= -kVerifyTol && std::abs(coh - (sd - sv)) <= kVerifyTol, "coherence != S_diag - S");
    c.expect(sd <= std::log(d) + kVerifyTol, "diagonal entropy above log d");
}

} // namespace

VerifyReport verify_csv(const std::string& path) {
    const CsvTable table = read_csv(path);
    VerifyReport rep;
    rep.rows = table.rows.size();
    if (table.header.empty()) throw std::runtime_error("empty header");
    if (table.header[0] == "coherence") rep.kind = "bounds";
    else if (table.column("ergotropy_lower")) rep.kind = "surface";
    else if (table.header[0] == "time") rep.kind = "dynamics";
    else if (table.column("index") && table.column("e_1")) rep.kind = "scatter";
    else throw std::runtime_error("unrecognized CSV schema");

    RowChecker c(table, rep);
    double previous = -1.0;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        c.start(i);
        try {
            if (rep.kind == "bounds") {
                const double coh = c.num("coherence"), lo = c.num("lower"), hi = c.num("upper");
                c.expect(coh > previous, "coherence grid not ascending");
                c.expect(lo >= 0.0 && lo <= hi + 1e-12, "envelopes not ordered 0 <= lower <= upper");
                previous = coh;
            } else if (rep.kind == "surface") {
                const RealVector p = c.vector("p_");
                check_populations(c, p);
                const BatteryHamiltonian h = BatteryHamiltonian::equally_spaced(static_cast<std::size_t>(p.size()));
                const PopulationVector pop = PopulationVector::from_values(p);
                const double ei = c.num("incoherent"), stored = c.num("stored_energy");
                c.expect(std::abs(incoherent_ergotropy(pop, h) - ei) <= kVerifyTol, "incoherent ergotropy disagrees with populations");
                c.expect(std::abs(p.dot(h.energies()) - h.ground_energy() - stored) <= kVerifyTol, "stored energy disagrees with populations");
                c.expect(c.num("ergotropy_lower") == ei && c.num("ergotropy_upper") == stored, "ergotropy range columns inconsistent");
                c.expect(ei <= stored + kVerifyTol, "incoherent ergotropy above stored energy");
                c.expect(classify_stage(pop).name() == c.text("stage"), "stage label disagrees with populations");
            } else {
                check_report(c, c.vector("p_"), c.vector("e_"));
                if (rep.kind == "dynamics") {
                    c.expect(std::abs(c.num("total_trace") - 1.0) <= 1e-9, "total trace drift above 1e-9");
                    c.expect(c.num("total_purity") <= 1.0 + kVerifyTol, "total purity above one");
                }
            }
        } catch (const std::exception& e) {
            rep.failures.push_back("row " + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return rep;
}

} // namespace qbattery
