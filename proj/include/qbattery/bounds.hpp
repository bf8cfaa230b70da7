// bounds.hpp: coherent-ergotropy envelopes and diagonal-entropy effect tables
//
// The envelopes reduce to minimizing the energy of a probability vector at
// fixed Shannon entropy. The minimizer lies in the thermal family
// p_n ∝ exp(-alpha e_n) on a prefix {e_1..e_k} of the spectrum; alpha is found
// by bisection.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qbattery/state.hpp"

namespace qbattery {

struct ThermalSolution {
    RealVector probabilities;  // over all d levels, zero outside the support
    double alpha{0.0};
    double entropy{0.0};
    double energy{0.0};        // sum p_n e_n (absolute energy)
    std::size_t support{0};
};

/// Lowest-energy distribution on ascending `energies` with entropy `target`
/// (nats), scanning the thermal families on every prefix support.
ThermalSolution min_energy_distribution(const RealVector& energies, double target);

/// Lower envelope: min of sum p_n e_n - e_1 over descending p with S(p) = C.
double pure_state_bound(double coherence, const BatteryHamiltonian& h);

/// Upper envelope: max of sum (1/d - r_n) e_n over descending r with S(r) = log d - C.
double deloc_state_bound(double coherence, const BatteryHamiltonian& h);

struct BoundBand {
    std::vector<double> coherence;
    std::vector<double> lower;
    std::vector<double> upper;

    /// Linear interpolation of both envelopes at coherence c.
    std::pair<double, double> at(double c) const;
};

inline constexpr std::size_t kDefaultBandGrid = 512;

BoundBand bound_band(const BatteryHamiltonian& h, std::size_t grid_size = kDefaultBandGrid);

// Three-level diagonal-entropy effect (equally spaced levels -1, 0, 1).

enum class Sign { Negative = -1, Zero = 0, Positive = 1 };
enum class Verdict { Enhance, Suppress, Maintain, Other, Unsupported };
enum class InversionCase { Global, LocalII1, Unsupported };

char to_char(Sign s);
std::string to_string(Verdict v);

/// First-order change of S_diag along dp:
/// dp_i log(p_k/p_i) + dp_j log(p_k/p_j) with p_i <= p_j <= p_k.
/// Throws ValidationError for zero populations, non-zero-sum dp, or a
/// perturbation that reorders the populations.
double entropy_gradient(const RealVector& p, const RealVector& dp);

/// First-order change of the incoherent ergotropy along dp, evaluated exactly
/// from the sorted-population definition (piecewise linear in p).
double incoherent_ergotropy_change(const RealVector& p, const RealVector& dp, const RealVector& energies);

/// Global inversion: p1 <= p2 <= p3 with p3 > p1. LocalII1: p1 >= p3 > p2.
InversionCase inversion_case(const RealVector& p);

struct EntropyEffect {
    Sign entropy_sign{Sign::Zero};
    Sign ergotropy_sign{Sign::Zero};
    Verdict verdict{Verdict::Unsupported};
    InversionCase inversion{InversionCase::Unsupported};
    int table_row{0};  // 1..8 as tabulated, 0 when dp sits on both thresholds
};

/// Table lookup for the two tabulated population orderings of a three-level
/// battery; other orderings yield Verdict::Unsupported.
EntropyEffect classify_entropy_effect(const RealVector& p, const RealVector& dp);

} // namespace qbattery
