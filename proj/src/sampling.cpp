#include "qbattery/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qbattery {

namespace {

void require_dim(std::size_t dim, std::size_t min_dim, const char* what) {
    if (dim < min_dim) {
        std::ostringstream os;
        os << what << ": dimension must be at least " << min_dim << ", got " << dim;
        throw DimensionError(os.str());
    }
}

// Uniform point on {x >= 0, sum x = total} in `count` coordinates.
void uniform_simplex(RandomStream& rng, double total, Eigen::Ref<RealVector> out) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        out(i) = -std::log(rng.uniform_open_low());
        sum += out(i);
    }
    out *= total / sum;
}

// Delta r_2..Delta r_d: uniform on {0 <= x_n <= 1/d, sum x_n = delta_r1}. The
// complement y = 1/d - x is uniform on the mirrored polytope, so we sample
// whichever side has the smaller total; it needs far fewer rejections.
RealVector constrained_shifts(std::size_t dim, double delta_r1, RandomStream& rng) {
    const auto count = static_cast<Eigen::Index>(dim - 1);
    const double cap = 1.0 / static_cast<double>(dim);
    const double complement = static_cast<double>(count) * cap - delta_r1;
    const bool mirrored = complement < delta_r1;
    const double total = std::max(mirrored ? complement : delta_r1, 0.0);

    RealVector x(count);
    for (int attempt = 0;; ++attempt) {
        if (attempt > 1000000) throw std::logic_error("constrained_shifts: rejection did not terminate");
        uniform_simplex(rng, total, x);
        if (x.maxCoeff() <= cap) break;
    }
    if (mirrored) x = (cap - x.array()).cwiseMax(0.0).matrix();
    return x;
}

} // namespace

std::string to_string(SamplerMethod m) {
    switch (m) {
    case SamplerMethod::HSRS: return "HSRS";
    case SamplerMethod::FERS: return "FERS";
    case SamplerMethod::FPRS: return "FPRS";
    case SamplerMethod::GUE: return "GUE";
    case SamplerMethod::Haar: return "Haar";
    }
    return "?";
}

SamplerMethod parse_sampler_method(const std::string& name) {
    std::string up = name;
    std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
    if (up == "HSRS" || up == "HS") return SamplerMethod::HSRS;
    if (up == "FERS") return SamplerMethod::FERS;
    if (up == "FPRS") return SamplerMethod::FPRS;
    if (up == "GUE") return SamplerMethod::GUE;
    if (up == "HAAR") return SamplerMethod::Haar;
    throw ValidationError("unknown sampler method '" + name + "'");
}

void SamplerSpec::validate() const {
    if (dim < 2) throw ValidationError("sampler: dim must be >= 2");
    if (!(fers_ratio >= 0.0) || !std::isfinite(fers_ratio))
        throw ValidationError("sampler: FERS ratio must be a finite non-negative number");
    double total = 0.0;
    for (double w : fprs_weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("sampler: FPRS weights must be non-negative");
        total += w;
    }
    if (!(total > 0.0)) throw ValidationError("sampler: FPRS weights are all zero");
}

RandomStream SamplerSpec::stream(std::uint64_t index) const {
    const std::uint64_t tag = (static_cast<std::uint64_t>(method) << 32) ^ static_cast<std::uint64_t>(dim);
    return RandomStream::substream(seed, tag, index);
}

std::string to_string(PurityLevel level) {
    switch (level) {
    case PurityLevel::Low: return "low";
    case PurityLevel::Medium: return "medium";
    case PurityLevel::High: return "high";
    }
    return "?";
}

PurityRegion PurityRegion::of(std::size_t dim, PurityLevel level) {
    require_dim(dim, 2, "PurityRegion");
    const double d = static_cast<double>(dim);
    const double a = (d - 1.0) / (std::sqrt(3.0) * d);
    const double b = std::sqrt(2.0) * (d - 1.0) / (std::sqrt(3.0) * d);
    switch (level) {
    case PurityLevel::Low: return {level, 0.0, a};
    case PurityLevel::Medium: return {level, a, b};
    case PurityLevel::High: return {level, b, (d - 1.0) / d};
    }
    return {};
}

Matrix ginibre(std::size_t dim, RandomStream& rng) {
    const auto d = static_cast<Eigen::Index>(dim);
    Matrix g(d, d);
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = 0; i < d; ++i) {
            const double re = rng.normal();
            const double im = rng.normal();
            g(i, j) = Complex(re, im);
        }
    return g;
}

QuantumState sample_hs_state(std::size_t dim, RandomStream& rng) {
    require_dim(dim, 1, "sample_hs_state");
    const Matrix g = ginibre(dim, rng);
    const Matrix w = g * g.adjoint();
    return QuantumState::renormalized(w);
}

PopulationVector sample_low_entropy_dephased(std::size_t dim, RandomStream& rng) {
    require_dim(dim, 2, "sample_low_entropy_dephased");
    const auto d = static_cast<Eigen::Index>(dim);
    RealVector x(d);
    for (;;) {
        const auto k = static_cast<Eigen::Index>(1 + rng.below(dim - 1));
        x.setZero();
        for (Eigen::Index i = 0; i < k; ++i) x(i) = rng.uniform();
        for (Eigen::Index i = d - 1; i > 0; --i) {
            const auto j = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(i) + 1));
            std::swap(x(i), x(j));
        }
        const double sum = x.sum();
        if (sum >= 1e-12) return PopulationVector::from_values(x / sum);
    }
}

FersDraw sample_fers(std::size_t dim, double ratio, RandomStream& rng) {
    require_dim(dim, 2, "sample_fers");
    const double p_low = ratio / (1.0 + ratio);
    if (rng.uniform() < p_low) return {sample_low_entropy_dephased(dim, rng), true};
    const QuantumState rho = sample_hs_state(dim, rng);
    return {PopulationVector::from_values(rho.matrix().diagonal().real()), false};
}

PurityBounds fprs_purity_bounds(std::size_t dim, double delta_r1) {
    require_dim(dim, 2, "fprs_purity_bounds");
    const double d = static_cast<double>(dim);
    const double top = (d - 1.0) / d;
    if (!(delta_r1 >= 0.0) || delta_r1 > top + 1e-15) {
        std::ostringstream os;
        os << "fprs_purity_bounds: delta_r1 = " << delta_r1 << " outside [0, " << top << "]";
        throw ValidationError(os.str());
    }
    const double m = std::min(std::floor(delta_r1 * d), d - 1.0);
    const double base = 1.0 / d + delta_r1 * delta_r1;
    const double rest = delta_r1 - m / d;
    return {base + delta_r1 * delta_r1 / (d - 1.0), base + m / (d * d) + rest * rest};
}

FprsDraw sample_fprs_with_shift(std::size_t dim, double delta_r1, RandomStream& rng) {
    require_dim(dim, 2, "sample_fprs");
    const double d = static_cast<double>(dim);
    if (!(delta_r1 >= 0.0) || delta_r1 > (d - 1.0) / d + 1e-15)
        throw ValidationError("sample_fprs: delta_r1 outside [0, (d-1)/d]");
    const RealVector shifts = constrained_shifts(dim, delta_r1, rng);

    RealVector r(static_cast<Eigen::Index>(dim));
    r(0) = 1.0 / d + delta_r1;
    for (Eigen::Index n = 0; n < shifts.size(); ++n) r(n + 1) = std::max(1.0 / d - shifts(n), 0.0);

    const Matrix u = sample_haar_unitary(dim, rng);
    const Matrix rho = u * r.cast<Complex>().asDiagonal() * u.adjoint();
    PurityLevel level = PurityLevel::Low;
    if (delta_r1 > PurityRegion::of(dim, PurityLevel::High).lower)
        level = PurityLevel::High;
    else if (delta_r1 > PurityRegion::of(dim, PurityLevel::Medium).lower)
        level = PurityLevel::Medium;
    return {QuantumState::renormalized(rho), r, delta_r1, level};
}

FprsDraw sample_fprs(std::size_t dim, PurityLevel level, RandomStream& rng) {
    const PurityRegion region = PurityRegion::of(dim, level);
    const double delta_r1 = region.lower + (region.upper - region.lower) * rng.uniform();
    FprsDraw draw = sample_fprs_with_shift(dim, delta_r1, rng);
    draw.level = level;
    return draw;
}

FprsDraw sample_fprs_weighted(std::size_t dim, const std::array<double, 3>& weights, RandomStream& rng) {
    const double total = weights[0] + weights[1] + weights[2];
    if (!(total > 0.0)) throw ValidationError("sample_fprs_weighted: weights are all zero");
    const double u = rng.uniform() * total;
    PurityLevel level = PurityLevel::High;
    if (u < weights[0])
        level = PurityLevel::Low;
    else if (u < weights[0] + weights[1])
        level = PurityLevel::Medium;
    return sample_fprs(dim, level, rng);
}

Matrix sample_haar_unitary(std::size_t dim, RandomStream& rng) {
    require_dim(dim, 1, "sample_haar_unitary");
    const Matrix g = ginibre(dim, rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    const Matrix& packed = qr.matrixQR();
    for (Eigen::Index k = 0; k < q.cols(); ++k) {
        const Complex rkk = packed(k, k);
        const double mag = std::abs(rkk);
        if (mag > 0.0) q.col(k) *= rkk / mag;
    }
    return q;
}

BatteryHamiltonian sample_gue_hamiltonian(std::size_t dim, RandomStream& rng, bool normalize) {
    require_dim(dim, normalize ? 2 : 1, "sample_gue_hamiltonian");
    for (;;) {
        const Matrix g = ginibre(dim, rng);
        const Matrix h = 0.5 * (g + g.adjoint());
        BatteryHamiltonian bh = BatteryHamiltonian::from_matrix(h);
        if (!normalize) return bh;
        if (bh.top_energy() - bh.ground_energy() > 1e-300) return bh.normalized();
    }
}

} // namespace qbattery
