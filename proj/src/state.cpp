#include "qbattery/state.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace qbattery {

namespace {

Matrix hermitize(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

void require_square(const Matrix& m, const char* what) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        std::ostringstream os;
        os << what << ": expected a non-empty square matrix, got " << m.rows() << "x" << m.cols();
        throw DimensionError(os.str());
    }
}

void require_finite(const Matrix& m, const char* what) {
    if (!m.allFinite()) throw ValidationError(std::string(what) + ": non-finite entries");
}

} // namespace

double hermiticity_residual(const Matrix& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

QuantumState QuantumState::from_matrix(Matrix m) {
    require_square(m, "QuantumState");
    require_finite(m, "QuantumState");
    const double herm = hermiticity_residual(m);
    if (herm > kHermitianTol) {
        std::ostringstream os;
        os << "QuantumState: not Hermitian (residual " << herm << ")";
        throw ValidationError(os.str());
    }
    m = hermitize(m);
    const double tr = m.trace().real();
    if (std::abs(tr - 1.0) > kTraceTol) {
        std::ostringstream os;
        os.precision(17);
        os << "QuantumState: trace " << tr << " differs from 1";
        throw ValidationError(os.str());
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    const double min_eig = es.eigenvalues()(0);
    if (min_eig < -kPsdTol) {
        std::ostringstream os;
        os << "QuantumState: negative eigenvalue " << min_eig;
        throw ValidationError(os.str());
    }
    return QuantumState(std::move(m));
}

QuantumState QuantumState::renormalized(const Matrix& m) {
    require_square(m, "QuantumState");
    require_finite(m, "QuantumState");
    Matrix h = hermitize(m);
    const double tr = h.trace().real();
    if (!(tr > 0.0)) throw ValidationError("QuantumState: non-positive trace");
    return from_matrix(h / tr);
}

QuantumState QuantumState::pure(const ComplexVector& psi) {
    const double norm2 = psi.squaredNorm();
    if (psi.size() == 0 || !(norm2 > 0.0)) throw ValidationError("QuantumState: zero vector");
    return from_matrix(psi * psi.adjoint() / norm2);
}

QuantumState QuantumState::maximally_mixed(std::size_t dim) {
    const auto d = static_cast<Eigen::Index>(dim);
    return from_matrix(Matrix::Identity(d, d) / static_cast<double>(dim));
}

QuantumState QuantumState::diagonal(const RealVector& populations) {
    const auto p = PopulationVector::from_values(populations);
    return from_matrix(p.values().cast<Complex>().asDiagonal());
}

BatteryHamiltonian BatteryHamiltonian::from_matrix(const Matrix& h) {
    auto eig = eig_hermitian(h);
    return BatteryHamiltonian(std::move(eig.values), std::move(eig.vectors));
}

BatteryHamiltonian BatteryHamiltonian::from_energies(const RealVector& energies) {
    const auto d = energies.size();
    return from_eigendata(energies, Matrix::Identity(d, d));
}

BatteryHamiltonian BatteryHamiltonian::from_eigendata(const RealVector& energies, const Matrix& basis) {
    if (energies.size() == 0) throw DimensionError("BatteryHamiltonian: empty spectrum");
    if (basis.rows() != energies.size() || basis.cols() != energies.size())
        throw DimensionError("BatteryHamiltonian: basis shape does not match spectrum");
    if (!energies.allFinite()) throw ValidationError("BatteryHamiltonian: non-finite energy");
    for (Eigen::Index n = 1; n < energies.size(); ++n) {
        if (energies(n) < energies(n - 1))
            throw ValidationError("BatteryHamiltonian: energies must be ascending");
    }
    const auto d = energies.size();
    const double unitarity = (basis.adjoint() * basis - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
    if (unitarity > kHermitianTol) {
        std::ostringstream os;
        os << "BatteryHamiltonian: basis not unitary (residual " << unitarity << ")";
        throw ValidationError(os.str());
    }
    return BatteryHamiltonian(energies, basis);
}

BatteryHamiltonian BatteryHamiltonian::equally_spaced(std::size_t dim) {
    if (dim < 2) throw DimensionError("equally_spaced: need at least two levels");
    return from_energies(RealVector::LinSpaced(static_cast<Eigen::Index>(dim), -1.0, 1.0));
}

Matrix BatteryHamiltonian::matrix() const {
    return basis_ * energies_.cast<Complex>().asDiagonal() * basis_.adjoint();
}

BatteryHamiltonian BatteryHamiltonian::normalized() const {
    const double lo = ground_energy();
    const double hi = top_energy();
    if (!(hi > lo)) throw ValidationError("normalize: spectrum has zero width");
    RealVector e = (2.0 * energies_.array() - (hi + lo)) / (hi - lo);
    e(0) = -1.0;
    e(e.size() - 1) = 1.0;
    for (Eigen::Index n = 0; n < e.size(); ++n) e(n) = std::clamp(e(n), -1.0, 1.0);
    return BatteryHamiltonian(std::move(e), basis_);
}

Spectrum Spectrum::of(const QuantumState& rho) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix(), Eigen::EigenvaluesOnly);
    return Spectrum(es.eigenvalues().reverse());
}

Spectrum Spectrum::from_values(RealVector values) {
    if (values.size() == 0) throw DimensionError("Spectrum: empty");
    for (Eigen::Index n = 0; n < values.size(); ++n) {
        if (values(n) < -kPsdTol) throw ValidationError("Spectrum: negative eigenvalue");
        if (n > 0 && values(n) > values(n - 1)) throw ValidationError("Spectrum: not descending");
    }
    if (std::abs(values.sum() - 1.0) > kTraceTol) throw ValidationError("Spectrum: does not sum to one");
    return Spectrum(std::move(values));
}

PopulationVector PopulationVector::from_values(RealVector p) {
    if (p.size() == 0) throw DimensionError("PopulationVector: empty");
    if (!p.allFinite()) throw ValidationError("PopulationVector: non-finite entry");
    if (p.minCoeff() < -kPopulationTol) throw ValidationError("PopulationVector: negative population");
    if (std::abs(p.sum() - 1.0) > kPopulationTol) {
        std::ostringstream os;
        os.precision(17);
        os << "PopulationVector: populations sum to " << p.sum();
        throw ValidationError(os.str());
    }
    return PopulationVector(std::move(p));
}

EigenDecomposition eig_hermitian(const Matrix& m) {
    require_square(m, "eig_hermitian");
    require_finite(m, "eig_hermitian");
    const double herm = hermiticity_residual(m);
    if (herm > kHermitianTol * std::max(1.0, m.cwiseAbs().maxCoeff())) {
        std::ostringstream os;
        os << "eig_hermitian: input not Hermitian (residual " << herm << ")";
        throw ValidationError(os.str());
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(m));
    if (es.info() != Eigen::Success) throw ValidationError("eig_hermitian: solver did not converge");
    return {es.eigenvalues(), es.eigenvectors()};
}

std::vector<std::size_t> descending_order(const RealVector& values) {
    std::vector<std::size_t> idx(static_cast<std::size_t>(values.size()));
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return values(static_cast<Eigen::Index>(a)) > values(static_cast<Eigen::Index>(b));
    });
    return idx;
}

static void require_same_dim(const QuantumState& rho, const BatteryHamiltonian& h, const char* what) {
    if (rho.dim() != h.dim()) {
        std::ostringstream os;
        os << what << ": state dimension " << rho.dim() << " does not match Hamiltonian dimension " << h.dim();
        throw DimensionError(os.str());
    }
}

Matrix in_energy_basis(const QuantumState& rho, const BatteryHamiltonian& h) {
    require_same_dim(rho, h, "in_energy_basis");
    return h.basis().adjoint() * rho.matrix() * h.basis();
}

PopulationVector dephase(const QuantumState& rho, const BatteryHamiltonian& h) {
    const Matrix r = in_energy_basis(rho, h);
    return PopulationVector::from_values(r.diagonal().real());
}

QuantumState passive_state(const QuantumState& rho, const BatteryHamiltonian& h) {
    require_same_dim(rho, h, "passive_state");
    const Spectrum r = Spectrum::of(rho);
    const Matrix& u = h.basis();
    return QuantumState::renormalized(u * r.values().cast<Complex>().asDiagonal() * u.adjoint());
}

double mean_energy(const QuantumState& rho, const BatteryHamiltonian& h) {
    const Matrix r = in_energy_basis(rho, h);
    return r.diagonal().real().dot(h.energies());
}

Matrix partial_trace(const Matrix& rho, Subsystem keep, std::size_t dim_a, std::size_t dim_b) {
    const auto da = static_cast<Eigen::Index>(dim_a);
    const auto db = static_cast<Eigen::Index>(dim_b);
    if (dim_a == 0 || dim_b == 0 || rho.rows() != da * db || rho.cols() != da * db) {
        std::ostringstream os;
        os << "partial_trace: matrix of size " << rho.rows() << "x" << rho.cols()
           << " is not (" << dim_a << "*" << dim_b << ") square";
        throw DimensionError(os.str());
    }
    if (keep == Subsystem::B) {
        Matrix out = Matrix::Zero(db, db);
        for (Eigen::Index i = 0; i < da; ++i) out += rho.block(i * db, i * db, db, db);
        return out;
    }
    Matrix out(da, da);
    for (Eigen::Index i = 0; i < da; ++i)
        for (Eigen::Index k = 0; k < da; ++k) out(i, k) = rho.block(i * db, k * db, db, db).trace();
    return out;
}

QuantumState partial_trace(const QuantumState& rho, Subsystem keep, std::size_t dim_a, std::size_t dim_b) {
    return QuantumState::renormalized(partial_trace(rho.matrix(), keep, dim_a, dim_b));
}

QuantumState evolve_unitary(const QuantumState& rho, const Matrix& h, double t) {
    if (static_cast<std::size_t>(h.rows()) != rho.dim())
        throw DimensionError("evolve_unitary: generator dimension does not match state");
    const auto eig = eig_hermitian(h);
    const Eigen::Index d = h.rows();
    Matrix r = eig.vectors.adjoint() * rho.matrix() * eig.vectors;
    ComplexVector phase(d);
    for (Eigen::Index k = 0; k < d; ++k) phase(k) = std::polar(1.0, -eig.values(k) * t);
    for (Eigen::Index k = 0; k < d; ++k)
        for (Eigen::Index l = 0; l < d; ++l) r(k, l) *= phase(k) * std::conj(phase(l));
    return QuantumState::renormalized(eig.vectors * r * eig.vectors.adjoint());
}

} // namespace qbattery
