// experiments.hpp: reproducible figure-data jobs, each a CSV table plus a JSON run manifest

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qbattery/dynamics.hpp"
#include "qbattery/sampling.hpp"

namespace qbattery {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kSchemaVersion = 1;

enum class Experiment { Surface, ScatterCoherent, ScatterIncoherent, ScatterPurity, LockedVsPr, BoundsBand, Dynamics };

std::string to_string(Experiment e);
Experiment parse_experiment(const std::string& name);
bool is_scatter(Experiment e);

/// How the battery Hamiltonian of a sampling job is chosen.
enum class SpectrumKind { EquallySpaced, Gue };

struct ExperimentConfig {
    Experiment experiment{Experiment::ScatterCoherent};
    std::size_t dim{3};
    std::size_t samples{100000};
    std::optional<std::uint64_t> seed;
    std::optional<SamplerMethod> sampler;          // default depends on the scatter kind
    std::array<double, 3> weights{0.2, 0.5, 0.3};  // FPRS low : medium : high
    double fers_ratio{1.5};
    SpectrumKind spectrum{SpectrumKind::EquallySpaced};
    std::size_t grid{kDefaultGrid};
    std::size_t threads{0};                        // 0 = hardware concurrency; never affects output

    CavityModel model{CavityModel::JC};
    std::size_t nb{1};
    double nc{4.0};
    double g{0.1};
    double omega{1.0};
    double kappa{0.0};
    ChargerKind charger{ChargerKind::Fock};
    std::optional<std::size_t> nmax;
    double tmax{50.0};
    std::size_t points{1001};
    double dt{1e-3};

    std::string out{"out.csv"};

    static constexpr std::size_t kDefaultGrid = 101;

    /// Throws ValidationError naming the offending field.
    void validate() const;

    SamplerMethod effective_sampler() const;
    SamplerSpec sampler_spec() const;
    CavityBatteryConfig cavity() const;

    nlohmann::json to_json() const;
    /// Unknown keys are rejected; missing keys keep their defaults.
    static ExperimentConfig from_json(const nlohmann::json& j);
    /// Overwrites only the keys present in `j`.
    void merge_json(const nlohmann::json& j);
};

struct CsvOutput {
    std::vector<std::string> columns;
    std::vector<std::string> lines;  // data rows, no trailing newline

    std::string render() const;
};

CsvOutput run_surface(const ExperimentConfig& config);
CsvOutput run_scatter(const ExperimentConfig& config);
CsvOutput run_bounds(const ExperimentConfig& config);
CsvOutput run_dynamics(const ExperimentConfig& config);
CsvOutput run_experiment(const ExperimentConfig& config);

struct RunRecord {
    std::string csv_path;
    std::string manifest_path;
    std::size_t rows{0};
    nlohmann::json manifest;
};

std::string manifest_path_for(const std::string& csv_path);

/// Runs the job, writes the CSV and `<out>.manifest.json`.
RunRecord write_experiment(const ExperimentConfig& config);

/// Re-validates every row against the module invariants; each failure is one message.
struct VerifyReport {
    std::string kind;
    std::size_t rows{0};
    std::vector<std::string> failures;
    bool ok() const { return failures.empty(); }
};

VerifyReport verify_csv(const std::string& path);

/// Re-runs the job recorded in a manifest into `out_path` and compares digests.
struct ReplayReport {
    bool identical{false};
    std::string expected_digest;
    std::string actual_digest;
    std::string out_path;
};

ReplayReport replay_manifest(const std::string& manifest_path, const std::string& out_path);

std::string hex_digest(std::uint64_t v);

} // namespace qbattery
