// state.hpp: validated states and battery Hamiltonians with their spectral primitives

#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qbattery {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// Tolerances shared by every validator.
inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kTraceTol = 1e-12;
inline constexpr double kPsdTol = 1e-10;
inline constexpr double kPopulationTol = 1e-12;

/// Raised when an input violates a state/operator invariant.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when operand dimensions do not agree.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

double hermiticity_residual(const Matrix& m);

/// Density matrix: Hermitian, unit trace, positive semidefinite.
class QuantumState {
public:
    /// Validates against the shared tolerances; throws ValidationError.
    static QuantumState from_matrix(Matrix m);

    /// Hermitizes and rescales to unit trace before validating. For states
    /// produced by integrators whose trace drift is checked by the caller.
    static QuantumState renormalized(const Matrix& m);

    static QuantumState pure(const ComplexVector& psi);
    static QuantumState maximally_mixed(std::size_t dim);
    static QuantumState diagonal(const RealVector& populations);

    std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }
    const Matrix& matrix() const { return matrix_; }

private:
    explicit QuantumState(Matrix m) : matrix_(std::move(m)) {}
    Matrix matrix_;
};

/// Ascending eigen-energies with the unitary whose columns are the eigenvectors.
class BatteryHamiltonian {
public:
    /// Diagonalizes a Hermitian matrix.
    static BatteryHamiltonian from_matrix(const Matrix& h);
    /// Diagonal Hamiltonian in the computational basis; energies must be ascending.
    static BatteryHamiltonian from_energies(const RealVector& energies);
    static BatteryHamiltonian from_eigendata(const RealVector& energies, const Matrix& basis);
    /// d equally spaced levels spanning [-1, 1].
    static BatteryHamiltonian equally_spaced(std::size_t dim);

    std::size_t dim() const { return static_cast<std::size_t>(energies_.size()); }
    const RealVector& energies() const { return energies_; }
    const Matrix& basis() const { return basis_; }
    double ground_energy() const { return energies_(0); }
    double top_energy() const { return energies_(energies_.size() - 1); }

    Matrix matrix() const;

    /// Maps H to [2H - (e_max + e_min) I] / (e_max - e_min), so the spectrum spans [-1, 1].
    BatteryHamiltonian normalized() const;

private:
    BatteryHamiltonian(RealVector e, Matrix u) : energies_(std::move(e)), basis_(std::move(u)) {}
    RealVector energies_;
    Matrix basis_;
};

/// Eigenvalues of a state sorted in descending order.
class Spectrum {
public:
    static Spectrum of(const QuantumState& rho);
    static Spectrum from_values(RealVector values);

    const RealVector& values() const { return values_; }
    std::size_t size() const { return static_cast<std::size_t>(values_.size()); }

private:
    explicit Spectrum(RealVector v) : values_(std::move(v)) {}
    RealVector values_;
};

/// Energy-level populations, p_n >= 0 and summing to one.
class PopulationVector {
public:
    static PopulationVector from_values(RealVector p);

    const RealVector& values() const { return values_; }
    std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
    double operator[](std::size_t n) const { return values_(static_cast<Eigen::Index>(n)); }

private:
    explicit PopulationVector(RealVector p) : values_(std::move(p)) {}
    RealVector values_;
};

struct EigenDecomposition {
    RealVector values;  // ascending
    Matrix vectors;     // columns are eigenvectors
};

/// Hermitian eigendecomposition; throws ValidationError on non-Hermitian input.
EigenDecomposition eig_hermitian(const Matrix& m);

/// Indices that sort `values` descending; ties keep their original order.
std::vector<std::size_t> descending_order(const RealVector& values);

/// rho expressed in the energy eigenbasis, U^dagger rho U.
Matrix in_energy_basis(const QuantumState& rho, const BatteryHamiltonian& h);

PopulationVector dephase(const QuantumState& rho, const BatteryHamiltonian& h);

/// sum_n r_n |e_n><e_n| with r descending placed on ascending energies.
QuantumState passive_state(const QuantumState& rho, const BatteryHamiltonian& h);

/// Tr[H rho].
double mean_energy(const QuantumState& rho, const BatteryHamiltonian& h);

enum class Subsystem { A, B };

/// Reduced state of a bipartite A (x) B operator. Works on raw matrices so that
/// integrator output can be reduced before its trace is checked.
Matrix partial_trace(const Matrix& rho, Subsystem keep, std::size_t dim_a, std::size_t dim_b);
QuantumState partial_trace(const QuantumState& rho, Subsystem keep, std::size_t dim_a, std::size_t dim_b);

/// exp(-iHt) rho exp(+iHt) via the spectral decomposition of H (hbar = 1).
QuantumState evolve_unitary(const QuantumState& rho, const Matrix& h, double t);

} // namespace qbattery
