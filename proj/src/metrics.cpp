#include "qbattery/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qbattery {

namespace {

constexpr double kEntropyFloor = 1e-15;

// Energy of the populations rearranged descending onto ascending levels.
double sorted_energy(const RealVector& values, const RealVector& energies) {
    const auto order = descending_order(values);
    double e = 0.0;
    for (std::size_t n = 0; n < order.size(); ++n)
        e += values(static_cast<Eigen::Index>(order[n])) * energies(static_cast<Eigen::Index>(n));
    return e;
}

double plain_energy(const RealVector& values, const RealVector& energies) {
    double e = 0.0;
    for (Eigen::Index n = 0; n < values.size(); ++n) e += values(n) * energies(n);
    return e;
}

void require_same_dim(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        std::ostringstream os;
        os << what << ": dimension mismatch (" << a << " vs " << b << ")";
        throw DimensionError(os.str());
    }
}

// Populations and descending spectrum of rho in the eigenbasis of h.
struct SpectralView {
    RealVector populations;
    RealVector spectrum;
};

SpectralView view_of(const QuantumState& rho, const BatteryHamiltonian& h) {
    const Matrix r = in_energy_basis(rho, h);
    Eigen::SelfAdjointEigenSolver<Matrix> es(r, Eigen::EigenvaluesOnly);
    return {r.diagonal().real(), es.eigenvalues().reverse()};
}

bool gt(double a, double b) { return a > b + kStageTol; }
bool ge(double a, double b) { return a >= b - kStageTol; }

} // namespace

std::string StageLabel::name() const {
    switch (stage) {
    case Stage::I: return "I";
    case Stage::III: return "III";
    case Stage::II: return subregion > 0 ? "II_" + std::to_string(subregion) : "II";
    }
    return "?";
}

QuantumState ground_state(const BatteryHamiltonian& h) {
    return QuantumState::pure(h.basis().col(0));
}

double stored_energy(const QuantumState& rho_t, const QuantumState& rho_0, const BatteryHamiltonian& h) {
    require_same_dim(rho_t.dim(), rho_0.dim(), "stored_energy");
    return mean_energy(rho_t, h) - mean_energy(rho_0, h);
}

double ergotropy(const QuantumState& rho, const BatteryHamiltonian& h) {
    const auto v = view_of(rho, h);
    return plain_energy(v.populations, h.energies()) - plain_energy(v.spectrum, h.energies());
}

double incoherent_ergotropy(const PopulationVector& p, const BatteryHamiltonian& h) {
    require_same_dim(p.size(), h.dim(), "incoherent_ergotropy");
    return plain_energy(p.values(), h.energies()) - sorted_energy(p.values(), h.energies());
}

double incoherent_ergotropy(const QuantumState& rho, const BatteryHamiltonian& h) {
    return incoherent_ergotropy(dephase(rho, h), h);
}

double coherent_ergotropy(const QuantumState& rho, const BatteryHamiltonian& h) {
    const auto v = view_of(rho, h);
    return sorted_energy(v.populations, h.energies()) - plain_energy(v.spectrum, h.energies());
}

std::optional<double> charging_efficiency(const QuantumState& rho_t, const QuantumState& rho_0,
                                          const BatteryHamiltonian& h) {
    const double e = stored_energy(rho_t, rho_0, h);
    if (std::abs(e) <= kZeroEnergyTol) return std::nullopt;
    return ergotropy(rho_t, h) / e;
}

double shannon_entropy(const RealVector& probabilities) {
    double s = 0.0;
    for (Eigen::Index n = 0; n < probabilities.size(); ++n) {
        const double x = std::clamp(probabilities(n), 0.0, 1.0);
        if (x >= kEntropyFloor) s -= x * std::log(x);
    }
    return s;
}

double diag_entropy(const PopulationVector& p) { return shannon_entropy(p.values()); }

double vn_entropy(const QuantumState& rho) { return shannon_entropy(Spectrum::of(rho).values()); }

double participation_ratio(const PopulationVector& p) { return 1.0 / p.values().squaredNorm(); }

double purity(const QuantumState& rho) {
    // Tr[rho^2] = sum |rho_ij|^2 for Hermitian rho.
    return rho.matrix().squaredNorm();
}

double coherence(const QuantumState& rho, const BatteryHamiltonian& h) {
    const auto v = view_of(rho, h);
    return shannon_entropy(v.populations) - shannon_entropy(v.spectrum);
}

double dephased_locked_energy(const PopulationVector& p, const BatteryHamiltonian& h) {
    require_same_dim(p.size(), h.dim(), "dephased_locked_energy");
    return sorted_energy(p.values(), h.energies()) - h.ground_energy();
}

StageLabel classify_stage(const PopulationVector& pv) {
    const RealVector& p = pv.values();
    const Eigen::Index d = p.size();
    StageLabel label;
    label.ordering = descending_order(p);

    bool inverted = false;
    bool ascending = true;
    for (Eigen::Index n = 0; n < d; ++n) {
        for (Eigen::Index m = n + 1; m < d; ++m) {
            if (p(n) < p(m) - kStageTol) inverted = true;
            if (p(n) > p(m) + kStageTol) ascending = false;
        }
    }
    if (!inverted) {
        label.stage = Stage::I;
        return label;
    }
    if (ascending && p(0) < p(d - 1) - kStageTol) {
        label.stage = Stage::III;
        return label;
    }
    label.stage = Stage::II;
    if (d == 3) {
        const double p1 = p(0), p2 = p(1), p3 = p(2);
        if (ge(p1, p3) && gt(p3, p2))
            label.subregion = 1;
        else if (gt(p2, p1) && ge(p1, p3))
            label.subregion = 2;
        else if ((gt(p2, p3) && ge(p3, p1)) || (ge(p2, p3) && gt(p3, p1)))
            label.subregion = 3;
        else if ((ge(p3, p1) && gt(p1, p2)) || (gt(p3, p1) && ge(p1, p2)))
            label.subregion = 4;
    }
    return label;
}

ErgotropyReport evaluate(const QuantumState& rho, const BatteryHamiltonian& h, const QuantumState& rho_0) {
    require_same_dim(rho.dim(), h.dim(), "evaluate");
    require_same_dim(rho_0.dim(), h.dim(), "evaluate");
    const RealVector& e = h.energies();
    const auto v = view_of(rho, h);

    const double energy = plain_energy(v.populations, e);
    const double passive = plain_energy(v.spectrum, e);
    const double dephased_passive = sorted_energy(v.populations, e);
    const double reference = mean_energy(rho_0, h);

    ErgotropyReport r;
    r.stored_energy = energy - reference;
    r.ergotropy = energy - passive;
    r.incoherent = energy - dephased_passive;
    r.coherent = dephased_passive - passive;
    r.locked_energy = passive - reference;
    if (std::abs(r.stored_energy) > kZeroEnergyTol) r.efficiency = r.ergotropy / r.stored_energy;
    r.diag_entropy = shannon_entropy(v.populations);
    r.vn_entropy = shannon_entropy(v.spectrum);
    r.coherence = r.diag_entropy - r.vn_entropy;
    r.participation_ratio = 1.0 / v.populations.squaredNorm();
    r.purity = rho.matrix().squaredNorm();
    r.above_ground = energy - h.ground_energy();
    r.stage = classify_stage(PopulationVector::from_values(v.populations));
    return r;
}

ErgotropyReport evaluate(const QuantumState& rho, const BatteryHamiltonian& h) {
    return evaluate(rho, h, ground_state(h));
}

} // namespace qbattery
