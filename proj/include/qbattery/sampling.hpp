// sampling.hpp: random states and random Hamiltonians (HSRS, FERS, FPRS, Haar, GUE)

#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "qbattery/rng.hpp"
#include "qbattery/state.hpp"

namespace qbattery {

enum class SamplerMethod { HSRS, FERS, FPRS, GUE, Haar };

std::string to_string(SamplerMethod m);
SamplerMethod parse_sampler_method(const std::string& name);

/// Fully determines a reproducible stream of draws.
struct SamplerSpec {
    SamplerMethod method{SamplerMethod::HSRS};
    std::size_t dim{2};
    std::uint64_t seed{0};
    double fers_ratio{1.5};                          // N / N_HS
    std::array<double, 3> fprs_weights{0.2, 0.5, 0.3};  // N_l : N_m : N_h

    /// Throws ValidationError when the settings are unusable.
    void validate() const;

    /// Independent stream for draw number `index`.
    RandomStream stream(std::uint64_t index) const;
};

enum class PurityLevel { Low, Medium, High };

std::string to_string(PurityLevel level);

/// Interval of the largest-eigenvalue shift Delta r_1 targeting a purity band.
struct PurityRegion {
    PurityLevel level{PurityLevel::Low};
    double lower{0.0};
    double upper{0.0};

    static PurityRegion of(std::size_t dim, PurityLevel level);
};

struct PurityBounds {
    double min{0.0};
    double max{0.0};
};

/// d x d matrix with independent standard-normal real and imaginary parts.
Matrix ginibre(std::size_t dim, RandomStream& rng);

/// Hilbert–Schmidt random state G G^dagger / Tr[G G^dagger].
QuantumState sample_hs_state(std::size_t dim, RandomStream& rng);

/// Low-diagonal-entropy populations: k in {1..d-1} uniform values, zero padded,
/// Fisher–Yates shuffled and normalized.
PopulationVector sample_low_entropy_dephased(std::size_t dim, RandomStream& rng);

struct FersDraw {
    PopulationVector populations;
    bool low_entropy_branch{false};
};

/// One item of the full-entropy-range stream: the low-entropy branch is taken
/// with probability ratio / (1 + ratio), otherwise HSRS populations.
FersDraw sample_fers(std::size_t dim, double ratio, RandomStream& rng);

PurityBounds fprs_purity_bounds(std::size_t dim, double delta_r1);

struct FprsDraw {
    QuantumState state;
    RealVector spectrum;  // 1/d + dr1, 1/d - dr2, ..., 1/d - drd
    double delta_r1{0.0};
    PurityLevel level{PurityLevel::Low};
};

/// Spectrum with the given Delta r_1 (remaining shifts uniform on their
/// constraint polytope), rotated by a Haar unitary.
FprsDraw sample_fprs_with_shift(std::size_t dim, double delta_r1, RandomStream& rng);
FprsDraw sample_fprs(std::size_t dim, PurityLevel level, RandomStream& rng);
/// Region chosen per draw in proportion to the weights (low, medium, high).
FprsDraw sample_fprs_weighted(std::size_t dim, const std::array<double, 3>& weights, RandomStream& rng);

/// Haar unitary via QR of a Ginibre matrix with the R-diagonal phase fix.
Matrix sample_haar_unitary(std::size_t dim, RandomStream& rng);

/// GUE Hamiltonian (G + G^dagger) / 2, optionally normalized to span [-1, 1].
BatteryHamiltonian sample_gue_hamiltonian(std::size_t dim, RandomStream& rng, bool normalize);

} // namespace qbattery
