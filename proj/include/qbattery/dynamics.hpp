// dynamics.hpp: cavity-charged battery models (JC, TC, open Dicke)
//
// The battery is the symmetric collective-spin sector of N_B two-level atoms
// (N_B + 1 levels, level b has J_z = b - N_B/2); the charger is a single cavity
// mode truncated at n_max photons. Composite index: b * (n_max + 1) + n.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "qbattery/metrics.hpp"
#include "qbattery/state.hpp"

namespace qbattery {

using SparseMatrix = Eigen::SparseMatrix<Complex>;

/// Raised when a trajectory breaks a physical invariant (trace, positivity,
/// Hermiticity, truncation leakage).
class InvariantError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class CavityModel { JC, TC, Dicke };
enum class ChargerKind { Fock, Coherent };

std::string to_string(CavityModel m);
std::string to_string(ChargerKind c);
CavityModel parse_cavity_model(const std::string& name);
ChargerKind parse_charger_kind(const std::string& name);

struct CavityBatteryConfig {
    CavityModel model{CavityModel::JC};
    std::size_t n_b{1};
    double omega{1.0};
    double g{0.1};
    ChargerKind charger{ChargerKind::Fock};
    double n_c{4.0};                      // photon number (Fock) or mean photon number (coherent)
    std::optional<std::size_t> n_max;     // default n_c + n_b + 20
    double kappa{0.0};
    std::vector<double> times;            // output times, ascending, >= 0
    double dt{1e-3};

    /// Throws ValidationError naming the offending field.
    void validate() const;

    std::size_t truncation() const;
    std::size_t battery_dim() const { return n_b + 1; }
    std::size_t cavity_dim() const { return truncation() + 1; }
    std::size_t total_dim() const { return battery_dim() * cavity_dim(); }
};

/// `points` equally spaced times on [0, tmax].
std::vector<double> uniform_times(double tmax, std::size_t points);

struct CavityHamiltonian {
    SparseMatrix total;
    BatteryHamiltonian battery;  // omega J_z
};

CavityHamiltonian build_hamiltonian(const CavityBatteryConfig& config);

/// Cavity annihilation operator a and number operator a^dagger a on the composite space.
SparseMatrix annihilation(const CavityBatteryConfig& config);
SparseMatrix photon_number_operator(const CavityBatteryConfig& config);
/// a^dagger a + J_z + N_B/2, conserved by the JC and TC models.
SparseMatrix excitation_operator(const CavityBatteryConfig& config);

/// Charger amplitudes over 0..n_max; the coherent tail beyond n_max must stay below 1e-12.
ComplexVector charger_amplitudes(const CavityBatteryConfig& config);
/// Battery ground state times the charger state, as a pure vector.
ComplexVector initial_vector(const CavityBatteryConfig& config);
QuantumState initial_state(const CavityBatteryConfig& config);

struct TimeRecord {
    double time{0.0};
    RealVector populations;     // battery energy-level populations, ascending energy
    ErgotropyReport report;
    double photon_number{0.0};
    double total_trace{1.0};
    double total_purity{1.0};
    double total_energy{0.0};   // Tr[H rho]
    double excitations{0.0};    // Tr[(a^dagger a + J_z + N_B/2) rho]
};

struct TimeSeries {
    CavityBatteryConfig config;
    RealVector battery_energies;
    std::vector<TimeRecord> records;
};

/// Exact spectral propagation of the initial pure state. Requires kappa = 0.
TimeSeries evolve_closed(const CavityBatteryConfig& config);

/// Fixed-step RK4 integration of the damped-cavity master equation. Steps are
/// shrunk so that every output time lies on the integration grid.
TimeSeries evolve_open(const CavityBatteryConfig& config);

/// Dispatches to evolve_closed when kappa = 0, otherwise evolve_open.
TimeSeries evolve(const CavityBatteryConfig& config);

/// Density matrix of the open-system trajectory at each output time, without
/// scoring. Used to compare integrators directly.
std::vector<Matrix> integrate_master_equation(const CavityBatteryConfig& config);
std::vector<Matrix> propagate_closed(const CavityBatteryConfig& config);

/// Closed-form single-atom ergotropy for an arbitrary charger state.
double jc_analytic_ergotropy(const CavityBatteryConfig& config, double t);

/// Battery populations (ground, excited) of the closed-form solution.
RealVector jc_analytic_populations(const CavityBatteryConfig& config, double t);

/// Fock-charger period pi / (g sqrt(N_c)).
double jc_fock_period(const CavityBatteryConfig& config);

/// Fock-charger ergotropy: -omega cos(2 g sqrt(N_c) t) on the inverted half of
/// each period, zero elsewhere.
double jc_fock_piecewise(const CavityBatteryConfig& config, double t);

} // namespace qbattery
