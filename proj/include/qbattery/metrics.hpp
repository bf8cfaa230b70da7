// metrics.hpp: ergotropy decomposition and the population-based resource measures

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qbattery/state.hpp"

namespace qbattery {

/// Stored energies below this magnitude leave the charging efficiency undefined.
inline constexpr double kZeroEnergyTol = 1e-12;
/// Population comparisons treat differences within this tolerance as ties.
inline constexpr double kStageTol = 1e-12;

enum class Stage { I, II, III };

/// Population-inversion stage. `ordering` lists level indices (0-based) by
/// descending population; `subregion` is 1..4 for three-level stage II, else 0.
struct StageLabel {
    Stage stage{Stage::I};
    std::vector<std::size_t> ordering;
    int subregion{0};

    /// "I", "II", "II_1".."II_4" or "III".
    std::string name() const;
    bool operator==(const StageLabel&) const = default;
};

struct ErgotropyReport {
    double stored_energy{0.0};
    double ergotropy{0.0};
    double incoherent{0.0};
    double coherent{0.0};
    double locked_energy{0.0};
    std::optional<double> efficiency;  // empty when the stored energy vanishes
    double coherence{0.0};
    double diag_entropy{0.0};
    double vn_entropy{0.0};
    double participation_ratio{0.0};
    double purity{0.0};
    double above_ground{0.0};          // Tr[H rho] - e_1, the ergotropy upper bound
    StageLabel stage;
};

// Individual figures of merit. Entropies are in nats.

double stored_energy(const QuantumState& rho_t, const QuantumState& rho_0, const BatteryHamiltonian& h);
double ergotropy(const QuantumState& rho, const BatteryHamiltonian& h);
double incoherent_ergotropy(const QuantumState& rho, const BatteryHamiltonian& h);
double incoherent_ergotropy(const PopulationVector& p, const BatteryHamiltonian& h);
double coherent_ergotropy(const QuantumState& rho, const BatteryHamiltonian& h);
std::optional<double> charging_efficiency(const QuantumState& rho_t, const QuantumState& rho_0,
                                          const BatteryHamiltonian& h);
double coherence(const QuantumState& rho, const BatteryHamiltonian& h);

double diag_entropy(const PopulationVector& p);
double vn_entropy(const QuantumState& rho);
double participation_ratio(const PopulationVector& p);
double purity(const QuantumState& rho);

/// Shannon entropy of a probability vector with 0 log 0 = 0; entries are
/// clipped to [0, 1] and values below 1e-15 are dropped.
double shannon_entropy(const RealVector& probabilities);

/// Energy of the passive rearrangement of `p` above the ground level.
double dephased_locked_energy(const PopulationVector& p, const BatteryHamiltonian& h);

StageLabel classify_stage(const PopulationVector& p);

/// Full report against the reference state rho_0 (stored and locked energy
/// are measured from Tr[H rho_0]).
ErgotropyReport evaluate(const QuantumState& rho, const BatteryHamiltonian& h, const QuantumState& rho_0);
/// Same, with the ground state |e_1><e_1| as reference.
ErgotropyReport evaluate(const QuantumState& rho, const BatteryHamiltonian& h);

/// Ground-state projector |e_1><e_1| of h.
QuantumState ground_state(const BatteryHamiltonian& h);

} // namespace qbattery
