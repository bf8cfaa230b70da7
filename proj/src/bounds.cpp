#include "qbattery/bounds.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "qbattery/metrics.hpp"

namespace qbattery {

namespace {

constexpr double kAlphaMax = 1e6;   // in units of 1 / (e_max - e_min)
constexpr int kBisectionSteps = 200;
constexpr double kEntropySlack = 1e-12;
constexpr double kRelativeTie = 1e-9;

struct ThermalPoint {
    RealVector p;
    double entropy;
};

// Thermal weights on levels [0, k) of the shifted spectrum (ground at zero).
ThermalPoint thermal(const RealVector& shifted, std::size_t k, double alpha) {
    RealVector p = RealVector::Zero(shifted.size());
    double z = 0.0;
    for (std::size_t n = 0; n < k; ++n) {
        const auto i = static_cast<Eigen::Index>(n);
        p(i) = std::exp(-alpha * shifted(i));
        z += p(i);
    }
    p /= z;
    return {p, shannon_entropy(p)};
}

ThermalSolution solve_on_prefix(const RealVector& energies, std::size_t k, double target) {
    const RealVector shifted = energies.array() - energies(0);
    const double log_k = std::log(static_cast<double>(k));
    std::size_t ground_mult = 0;
    while (ground_mult < k && shifted(static_cast<Eigen::Index>(ground_mult)) == 0.0) ++ground_mult;

    ThermalSolution sol;
    sol.support = k;
    if (target >= log_k - 1e-15) {
        const ThermalPoint t = thermal(shifted, k, 0.0);
        sol.probabilities = t.p;
        sol.entropy = t.entropy;
        sol.alpha = 0.0;
    } else if (target <= std::log(static_cast<double>(ground_mult))) {
        // Entropy fits inside the (possibly degenerate) ground level: all mass on e_1.
        sol.probabilities = RealVector::Zero(energies.size());
        if (ground_mult == 1 || target <= 0.0) {
            sol.probabilities(0) = 1.0;
        } else {
            // Two-weight split across the ground multiplet reproducing the target entropy.
            const auto g = static_cast<Eigen::Index>(ground_mult);
            double lo = 1.0 / static_cast<double>(ground_mult), hi = 1.0;
            for (int it = 0; it < kBisectionSteps; ++it) {
                const double mid = 0.5 * (lo + hi);
                RealVector q = RealVector::Constant(g, (1.0 - mid) / static_cast<double>(g - 1));
                q(0) = mid;
                if (shannon_entropy(q) > target) lo = mid; else hi = mid;
            }
            const double top = 0.5 * (lo + hi);
            sol.probabilities.head(g).setConstant((1.0 - top) / static_cast<double>(g - 1));
            sol.probabilities(0) = top;
        }
        sol.entropy = shannon_entropy(sol.probabilities);
        sol.alpha = std::numeric_limits<double>::infinity();
    } else {
        const double width = shifted(shifted.size() - 1);
        double lo = 0.0;
        double hi = kAlphaMax / (width > 0.0 ? width : 1.0);
        for (int it = 0; it < kBisectionSteps; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid == lo || mid == hi) break;
            if (thermal(shifted, k, mid).entropy > target) lo = mid; else hi = mid;
        }
        const ThermalPoint a = thermal(shifted, k, lo);
        const ThermalPoint b = thermal(shifted, k, hi);
        const bool use_lo = std::abs(a.entropy - target) <= std::abs(b.entropy - target);
        sol.alpha = use_lo ? lo : hi;
        sol.probabilities = use_lo ? a.p : b.p;
        sol.entropy = use_lo ? a.entropy : b.entropy;
    }
    sol.energy = sol.probabilities.dot(energies);
    return sol;
}

void check_coherence(double c, std::size_t dim, const char* what) {
    const double top = std::log(static_cast<double>(dim));
    if (!(c >= -kEntropySlack) || c > top + kEntropySlack) {
        std::ostringstream os;
        os << what << ": coherence " << c << " outside [0, log " << dim << "]";
        throw ValidationError(os.str());
    }
}

Sign sign_with_band(double value, double band) {
    if (value > band) return Sign::Positive;
    if (value < -band) return Sign::Negative;
    return Sign::Zero;
}

} // namespace

ThermalSolution min_energy_distribution(const RealVector& energies, double target) {
    const auto d = static_cast<std::size_t>(energies.size());
    if (d == 0) throw DimensionError("min_energy_distribution: empty spectrum");
    const double log_d = std::log(static_cast<double>(d));
    if (!(target >= -kEntropySlack) || target > log_d + kEntropySlack)
        throw ValidationError("min_energy_distribution: entropy target outside [0, log d]");
    target = std::clamp(target, 0.0, log_d);

    std::optional<ThermalSolution> best;
    for (std::size_t k = 1; k <= d; ++k) {
        if (target > std::log(static_cast<double>(k)) + 1e-15) continue;
        ThermalSolution s = solve_on_prefix(energies, k, target);
        if (!best || s.energy < best->energy) best = std::move(s);
    }
    return *best;
}

double pure_state_bound(double coherence, const BatteryHamiltonian& h) {
    check_coherence(coherence, h.dim(), "pure_state_bound");
    const ThermalSolution s = min_energy_distribution(h.energies(), coherence);
    return std::max(s.energy - h.ground_energy(), 0.0);
}

double deloc_state_bound(double coherence, const BatteryHamiltonian& h) {
    check_coherence(coherence, h.dim(), "deloc_state_bound");
    const double log_d = std::log(static_cast<double>(h.dim()));
    const double target = std::clamp(log_d - coherence, 0.0, log_d);
    const ThermalSolution s = min_energy_distribution(h.energies(), target);
    const double inv_d = 1.0 / static_cast<double>(h.dim());
    double e = 0.0;
    for (Eigen::Index n = 0; n < s.probabilities.size(); ++n)
        e += (inv_d - s.probabilities(n)) * h.energies()(n);
    return std::max(e, 0.0);
}

std::pair<double, double> BoundBand::at(double c) const {
    if (coherence.empty()) throw std::logic_error("BoundBand: empty");
    if (c <= coherence.front()) return {lower.front(), upper.front()};
    if (c >= coherence.back()) return {lower.back(), upper.back()};
    const auto it = std::upper_bound(coherence.begin(), coherence.end(), c);
    const auto i = static_cast<std::size_t>(it - coherence.begin());
    const double t = (c - coherence[i - 1]) / (coherence[i] - coherence[i - 1]);
    return {lower[i - 1] + t * (lower[i] - lower[i - 1]), upper[i - 1] + t * (upper[i] - upper[i - 1])};
}

BoundBand bound_band(const BatteryHamiltonian& h, std::size_t grid_size) {
    if (grid_size < 2) throw ValidationError("bound_band: grid needs at least two points");
    const double log_d = std::log(static_cast<double>(h.dim()));
    BoundBand band;
    band.coherence.resize(grid_size);
    band.lower.resize(grid_size);
    band.upper.resize(grid_size);
    for (std::size_t i = 0; i < grid_size; ++i) {
        const double c = i + 1 == grid_size ? log_d
                                            : log_d * static_cast<double>(i) / static_cast<double>(grid_size - 1);
        band.coherence[i] = c;
        band.lower[i] = pure_state_bound(c, h);
        band.upper[i] = deloc_state_bound(c, h);
    }
    return band;
}

char to_char(Sign s) {
    switch (s) {
    case Sign::Negative: return '-';
    case Sign::Zero: return '0';
    case Sign::Positive: return '+';
    }
    return '?';
}

std::string to_string(Verdict v) {
    switch (v) {
    case Verdict::Enhance: return "enhance";
    case Verdict::Suppress: return "suppress";
    case Verdict::Maintain: return "maintain";
    case Verdict::Other: return "other";
    case Verdict::Unsupported: return "unsupported";
    }
    return "?";
}

double entropy_gradient(const RealVector& p, const RealVector& dp) {
    if (p.size() != 3 || dp.size() != 3) throw DimensionError("entropy_gradient: three levels required");
    if (p.minCoeff() <= 0.0) throw ValidationError("entropy_gradient: populations must be strictly positive");
    const double scale = std::max(dp.cwiseAbs().maxCoeff(), 1e-300);
    if (std::abs(dp.sum()) > 1e-12 * std::max(scale, 1.0) + 1e-15)
        throw ValidationError("entropy_gradient: perturbation must sum to zero");

    // Ascending order i, j, k; ties keep index order.
    std::array<Eigen::Index, 3> idx{0, 1, 2};
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return p(a) < p(b); });
    const RealVector q = p + dp;
    if (q(idx[0]) > q(idx[1]) || q(idx[1]) > q(idx[2]))
        throw ValidationError("entropy_gradient: perturbation changes the population ordering");
    const Eigen::Index i = idx[0], j = idx[1], k = idx[2];
    return dp(i) * std::log(p(k) / p(i)) + dp(j) * std::log(p(k) / p(j));
}

double incoherent_ergotropy_change(const RealVector& p, const RealVector& dp, const RealVector& energies) {
    if (p.size() != dp.size() || p.size() != energies.size())
        throw DimensionError("incoherent_ergotropy_change: dimension mismatch");
    std::vector<Eigen::Index> order(static_cast<std::size_t>(p.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    // Among tied populations the one growing faster ends up on the lower level.
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        if (p(a) != p(b)) return p(a) > p(b);
        return dp(a) > dp(b);
    });
    double change = dp.dot(energies);
    for (std::size_t n = 0; n < order.size(); ++n) change -= dp(order[n]) * energies(static_cast<Eigen::Index>(n));
    return change;
}

InversionCase inversion_case(const RealVector& p) {
    if (p.size() != 3) return InversionCase::Unsupported;
    constexpr double tol = 1e-12;
    const double p1 = p(0), p2 = p(1), p3 = p(2);
    if (p1 <= p2 + tol && p2 <= p3 + tol && p3 > p1 + tol) return InversionCase::Global;
    if (p1 >= p3 - tol && p3 > p2 + tol) return InversionCase::LocalII1;
    return InversionCase::Unsupported;
}

EntropyEffect classify_entropy_effect(const RealVector& p, const RealVector& dp) {
    EntropyEffect out;
    out.inversion = inversion_case(p);
    if (out.inversion == InversionCase::Unsupported || p.minCoeff() <= 0.0) {
        out.inversion = InversionCase::Unsupported;
        return out;
    }

    const double scale = dp.cwiseAbs().maxCoeff();
    const double gradient = entropy_gradient(p, dp);
    const RealVector levels = RealVector::LinSpaced(3, -1.0, 1.0);
    const double ei_change = incoherent_ergotropy_change(p, dp, levels);

    // Table variable x, ergotropy threshold a and entropy threshold b.
    double x = 0.0, a = 0.0, b = 0.0, entropy_coef = 1.0;
    if (out.inversion == InversionCase::Global) {
        x = dp(0);
        a = -0.5 * dp(1);
        entropy_coef = std::log(p(2) / p(0));
        b = -dp(1) * std::log(p(2) / p(1)) / entropy_coef;
    } else {
        x = dp(1);
        a = dp(2);
        entropy_coef = std::log(p(0) / p(1));
        b = -dp(2) * std::log(p(0) / p(2)) / entropy_coef;
    }
    const double band = kRelativeTie * scale;
    out.entropy_sign = sign_with_band(gradient, band * entropy_coef);
    out.ergotropy_sign = sign_with_band(ei_change, band);

    const bool on_a = std::abs(x - a) <= band;
    const bool on_b = std::abs(x - b) <= band;
    if (on_a && on_b) {
        out.table_row = 0;
        out.verdict = Verdict::Maintain;
    } else if (on_a) {
        out.table_row = a > b ? 5 : 6;
        out.verdict = Verdict::Maintain;
    } else if (on_b) {
        out.table_row = b < a ? 7 : 8;
        out.verdict = Verdict::Other;
    } else if (b < x && x < a) {
        out.table_row = 1;
        out.verdict = Verdict::Enhance;
    } else if (a < x && x < b) {
        out.table_row = 2;
        out.verdict = Verdict::Enhance;
    } else if (x > std::max(a, b)) {
        out.table_row = 3;
        out.verdict = Verdict::Suppress;
    } else {
        out.table_row = 4;
        out.verdict = Verdict::Suppress;
    }
    return out;
}

} // namespace qbattery
