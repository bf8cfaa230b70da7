// Reference computations for the test suites. Nothing here calls into the
// library's sorting, eigen-decomposition or entropy code paths.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXd;

/// Largest energy drop reachable by permuting the populations p over levels e.
inline double permutation_incoherent_ergotropy(const Vector& p, const Vector& e) {
    std::vector<int> perm(static_cast<std::size_t>(p.size()));
    std::iota(perm.begin(), perm.end(), 0);
    const double base = p.dot(e);
    double lowest = base;
    do {
        double energy = 0.0;
        for (std::size_t n = 0; n < perm.size(); ++n) energy += p(perm[n]) * e(static_cast<Eigen::Index>(n));
        lowest = std::min(lowest, energy);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return base - lowest;
}

/// Eigenvalues from the general (non-Hermitian) complex eigensolver, real parts.
inline Vector general_eigenvalues(const Matrix& m) {
    Eigen::ComplexEigenSolver<Matrix> es(m, false);
    return es.eigenvalues().real();
}

/// Ergotropy by brute force: least energy of any assignment of eigenvalues to levels.
inline double permutation_ergotropy(const Matrix& rho_energy_basis, const Vector& e) {
    const Vector lambda = general_eigenvalues(rho_energy_basis);
    const double mean = (rho_energy_basis.diagonal().real().array() * e.array()).sum();
    const double passive = lambda.dot(e) - permutation_incoherent_ergotropy(lambda, e);
    return mean - passive;
}

inline double shannon(const Vector& p) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i)
        if (p(i) > 0.0) s -= p(i) * std::log(p(i));
    return s;
}

inline double central_difference(const std::function<double(double)>& f, double h) {
    return (f(h) - f(-h)) / (2.0 * h);
}

/// One-sample Kolmogorov–Smirnov statistic against a continuous CDF.
inline double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    return d;
}

inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
    }
    return d;
}

/// Average ranks (ties share the mean rank).
inline std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double mean = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = mean;
        i = j + 1;
    }
    return r;
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    const auto rx = ranks(x), ry = ranks(y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

/// Mean of Tr rho^2 under the Hilbert–Schmidt measure on d x d states.
inline double hs_mean_purity(int d) { return 2.0 * d / (static_cast<double>(d) * d + 1.0); }

/// Random Hermitian matrix from an independent engine.
inline Matrix random_hermitian(int d, std::mt19937_64& gen) {
    std::normal_distribution<double> n;
    Matrix m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = Complex(n(gen), n(gen));
    return 0.5 * (m + m.adjoint());
}

/// Random density matrix (Ginibre construction) from an independent engine.
inline Matrix random_density(int d, std::mt19937_64& gen) {
    std::normal_distribution<double> n;
    Matrix g(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) g(i, j) = Complex(n(gen), n(gen));
    Matrix r = g * g.adjoint();
    return r / r.trace().real();
}

/// Uniform point on the probability simplex.
inline Vector random_simplex(int d, std::mt19937_64& gen) {
    std::exponential_distribution<double> ex;
    Vector p(d);
    for (int i = 0; i < d; ++i) p(i) = ex(gen);
    return p / p.sum();
}

/// Poisson-weighted photon number of a coherent state truncated at n_max.
inline double coherent_mean_photons(double mean, int n_max) {
    double num = 0.0, den = 0.0;
    for (int n = 0; n <= n_max; ++n) {
        const double w = std::exp(-mean + n * std::log(mean) - std::lgamma(n + 1.0));
        num += n * w;
        den += w;
    }
    return num / den;
}

} // namespace oracle
