#include "qbattery/dynamics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace qbattery {

namespace {

constexpr double kTailBound = 1e-12;
constexpr double kTraceDrift = 1e-9;
constexpr double kMinEigenvalue = -1e-8;
constexpr double kHermiticityDrift = 1e-10;
constexpr double kLeakage = 1e-9;

using Triplet = Eigen::Triplet<Complex>;

std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
    return s;
}

[[noreturn]] void field_error(const std::string& field, const std::string& message) {
    throw ValidationError("config field '" + field + "': " + message);
}

// <m+1| J_+ |m> for spin j = n_b / 2, level b (m = b - j).
double raising(std::size_t n_b, std::size_t b) {
    const double j = 0.5 * static_cast<double>(n_b);
    const double m = static_cast<double>(b) - j;
    return std::sqrt(j * (j + 1.0) - m * (m + 1.0));
}

struct Layout {
    std::size_t nb_dim;
    std::size_t nc_dim;
    Eigen::Index index(std::size_t b, std::size_t n) const { return static_cast<Eigen::Index>(b * nc_dim + n); }
    Eigen::Index size() const { return static_cast<Eigen::Index>(nb_dim * nc_dim); }
};

Layout layout_of(const CavityBatteryConfig& c) { return {c.battery_dim(), c.cavity_dim()}; }

SparseMatrix from_triplets(const Layout& l, const std::vector<Triplet>& t) {
    SparseMatrix m(l.size(), l.size());
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

struct Scorer {
    const CavityBatteryConfig& config;
    CavityHamiltonian ham;
    SparseMatrix number;
    SparseMatrix excitations;
    Layout layout;

    explicit Scorer(const CavityBatteryConfig& c)
        : config(c), ham(build_hamiltonian(c)), number(photon_number_operator(c)),
          excitations(excitation_operator(c)), layout(layout_of(c)) {}

    TimeRecord operator()(double t, const Matrix& rho) const {
        TimeRecord r;
        r.time = t;
        r.total_trace = rho.trace().real();
        r.total_purity = rho.squaredNorm();
        r.total_energy = (ham.total * rho).trace().real();
        r.photon_number = (number * rho).trace().real();
        r.excitations = (excitations * rho).trace().real();

        double edge = 0.0;
        for (std::size_t b = 0; b < layout.nb_dim; ++b) {
            const Eigen::Index i = layout.index(b, layout.nc_dim - 1);
            edge += rho(i, i).real();
        }
        if (edge > kLeakage) {
            std::ostringstream os;
            os << "truncation leakage at t = " << t << ": population " << edge << " in the top Fock level; raise n_max";
            throw InvariantError(os.str());
        }

        const Matrix reduced = partial_trace(rho, Subsystem::A, layout.nb_dim, layout.nc_dim);
        const QuantumState rho_b = QuantumState::renormalized(reduced);
        r.populations = dephase(rho_b, ham.battery).values();
        r.report = evaluate(rho_b, ham.battery);
        return r;
    }
};

void check_open_state(const Matrix& rho, double t) {
    auto fail = [t](const std::string& what, double value) {
        std::ostringstream os;
        os << "open evolution: " << what << " violated at t = " << t << " (value " << value
           << "); reduce dt";
        throw InvariantError(os.str());
    };
    const double trace = rho.trace().real();
    if (!(std::abs(trace - 1.0) <= kTraceDrift)) fail("trace", trace);
    const double herm = hermiticity_residual(rho);
    if (!(herm <= kHermiticityDrift)) fail("hermiticity", herm);
    const Matrix h = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    const double lowest = es.eigenvalues().minCoeff();
    if (!(lowest >= kMinEigenvalue)) fail("positivity", lowest);
}

} // namespace

std::string to_string(CavityModel m) {
    switch (m) {
    case CavityModel::JC: return "JC";
    case CavityModel::TC: return "TC";
    case CavityModel::Dicke: return "Dicke";
    }
    return "?";
}

std::string to_string(ChargerKind c) { return c == ChargerKind::Fock ? "fock" : "coherent"; }

CavityModel parse_cavity_model(const std::string& name) {
    const std::string up = upper(name);
    if (up == "JC") return CavityModel::JC;
    if (up == "TC") return CavityModel::TC;
    if (up == "DICKE") return CavityModel::Dicke;
    field_error("model", "unknown model '" + name + "' (expected JC, TC or Dicke)");
}

ChargerKind parse_charger_kind(const std::string& name) {
    const std::string up = upper(name);
    if (up == "FOCK") return ChargerKind::Fock;
    if (up == "COHERENT") return ChargerKind::Coherent;
    field_error("charger", "unknown charger '" + name + "' (expected fock or coherent)");
}

void CavityBatteryConfig::validate() const {
    if (n_b < 1) field_error("nb", "at least one atom is required");
    if (model == CavityModel::JC && n_b != 1) field_error("nb", "the JC model has exactly one atom");
    if (!(omega > 0.0) || !std::isfinite(omega)) field_error("omega", "must be positive");
    if (!(g > 0.0) || !std::isfinite(g)) field_error("g", "must be positive");
    if (!(kappa >= 0.0) || !std::isfinite(kappa)) field_error("kappa", "must be non-negative");
    if (kappa > 0.0 && model != CavityModel::Dicke) field_error("kappa", "damping is only modelled for Dicke");
    if (!(n_c >= 0.0) || !std::isfinite(n_c)) field_error("nc", "must be non-negative");
    if (charger == ChargerKind::Fock && n_c != std::floor(n_c)) field_error("nc", "a Fock charger needs an integer photon number");
    if (!(dt > 0.0) || !std::isfinite(dt)) field_error("dt", "must be positive");
    if (n_max && static_cast<double>(*n_max) < std::ceil(n_c) + static_cast<double>(n_b))
        field_error("nmax", "truncation too small, need n_max >= N_c + N_B");
    if (times.empty()) field_error("tmax", "no output times");
    double prev = 0.0;
    for (double t : times) {
        if (!(t >= prev) || !std::isfinite(t)) field_error("tmax", "output times must be finite, non-negative and ascending");
        prev = t;
    }
}

std::size_t CavityBatteryConfig::truncation() const {
    if (n_max) return *n_max;
    return static_cast<std::size_t>(std::ceil(n_c)) + n_b + 20;
}

std::vector<double> uniform_times(double tmax, std::size_t points) {
    if (points < 1) throw ValidationError("config field 'points': at least one output time is required");
    if (!(tmax >= 0.0) || !std::isfinite(tmax)) throw ValidationError("config field 'tmax': must be non-negative");
    std::vector<double> t(points);
    for (std::size_t k = 0; k < points; ++k)
        t[k] = points == 1 ? tmax : tmax * static_cast<double>(k) / static_cast<double>(points - 1);
    return t;
}

CavityHamiltonian build_hamiltonian(const CavityBatteryConfig& config) {
    config.validate();
    const Layout l = layout_of(config);
    const std::size_t nb = config.n_b;
    const double w = config.omega;
    std::vector<Triplet> t;

    RealVector battery(static_cast<Eigen::Index>(l.nb_dim));
    for (std::size_t b = 0; b < l.nb_dim; ++b)
        battery(static_cast<Eigen::Index>(b)) = w * (static_cast<double>(b) - 0.5 * static_cast<double>(nb));

    for (std::size_t b = 0; b < l.nb_dim; ++b)
        for (std::size_t n = 0; n < l.nc_dim; ++n) {
            const Eigen::Index i = l.index(b, n);
            t.emplace_back(i, i, w * static_cast<double>(n) + battery(static_cast<Eigen::Index>(b)));
        }

    auto couple = [&](Eigen::Index to, Eigen::Index from, double value) {
        t.emplace_back(to, from, value);
        t.emplace_back(from, to, value);
    };
    const double rotating = config.model == CavityModel::Dicke ? w * config.g : config.g;
    for (std::size_t b = 0; b + 1 < l.nb_dim; ++b) {
        const double jp = raising(nb, b);
        for (std::size_t n = 0; n < l.nc_dim; ++n) {
            // J_+ a: |b, n> -> |b+1, n-1>
            if (n > 0) couple(l.index(b + 1, n - 1), l.index(b, n), rotating * jp * std::sqrt(static_cast<double>(n)));
            // J_+ a^dagger (counter-rotating)
            if (config.model == CavityModel::Dicke && n + 1 < l.nc_dim)
                couple(l.index(b + 1, n + 1), l.index(b, n), rotating * jp * std::sqrt(static_cast<double>(n + 1)));
        }
    }
    return {from_triplets(l, t), BatteryHamiltonian::from_energies(battery)};
}

SparseMatrix annihilation(const CavityBatteryConfig& config) {
    const Layout l = layout_of(config);
    std::vector<Triplet> t;
    for (std::size_t b = 0; b < l.nb_dim; ++b)
        for (std::size_t n = 1; n < l.nc_dim; ++n)
            t.emplace_back(l.index(b, n - 1), l.index(b, n), std::sqrt(static_cast<double>(n)));
    return from_triplets(l, t);
}

SparseMatrix photon_number_operator(const CavityBatteryConfig& config) {
    const Layout l = layout_of(config);
    std::vector<Triplet> t;
    for (std::size_t b = 0; b < l.nb_dim; ++b)
        for (std::size_t n = 0; n < l.nc_dim; ++n) t.emplace_back(l.index(b, n), l.index(b, n), static_cast<double>(n));
    return from_triplets(l, t);
}

SparseMatrix excitation_operator(const CavityBatteryConfig& config) {
    const Layout l = layout_of(config);
    std::vector<Triplet> t;
    for (std::size_t b = 0; b < l.nb_dim; ++b)
        for (std::size_t n = 0; n < l.nc_dim; ++n)
            t.emplace_back(l.index(b, n), l.index(b, n), static_cast<double>(n + b));
    return from_triplets(l, t);
}

ComplexVector charger_amplitudes(const CavityBatteryConfig& config) {
    config.validate();
    const std::size_t top = config.truncation();
    ComplexVector a = ComplexVector::Zero(static_cast<Eigen::Index>(top + 1));
    if (config.charger == ChargerKind::Fock) {
        a(static_cast<Eigen::Index>(config.n_c)) = 1.0;
        return a;
    }
    if (config.n_c == 0.0) {
        a(0) = 1.0;
        return a;
    }
    auto amplitude = [&](std::size_t n) {
        const double x = static_cast<double>(n);
        return std::exp(0.5 * (-config.n_c + x * std::log(config.n_c) - std::lgamma(x + 1.0)));
    };
    for (std::size_t n = 0; n <= top; ++n) a(static_cast<Eigen::Index>(n)) = amplitude(n);

    double tail = 0.0;
    for (std::size_t n = top + 1;; ++n) {
        const double term = amplitude(n) * amplitude(n);
        tail += term;
        if (static_cast<double>(n) > config.n_c && term < 1e-18 * kTailBound) break;
    }
    if (!(tail < kTailBound)) {
        std::ostringstream os;
        os << "coherent charger tail " << tail << " beyond n_max = " << top << " exceeds " << kTailBound
           << "; larger n_max required";
        field_error("nmax", os.str());
    }
    a /= a.norm();
    return a;
}

ComplexVector initial_vector(const CavityBatteryConfig& config) {
    const ComplexVector cavity = charger_amplitudes(config);
    const Layout l = layout_of(config);
    ComplexVector psi = ComplexVector::Zero(l.size());
    psi.head(cavity.size()) = cavity;  // battery level b = 0
    return psi;
}

QuantumState initial_state(const CavityBatteryConfig& config) { return QuantumState::pure(initial_vector(config)); }

std::vector<Matrix> propagate_closed(const CavityBatteryConfig& config) {
    config.validate();
    if (config.kappa != 0.0) field_error("kappa", "closed evolution requires kappa = 0");
    const CavityHamiltonian ham = build_hamiltonian(config);
    const EigenDecomposition eig = eig_hermitian(Matrix(ham.total));
    const ComplexVector psi0 = initial_vector(config);
    const ComplexVector coeffs = eig.vectors.adjoint() * psi0;

    std::vector<Matrix> out;
    out.reserve(config.times.size());
    for (double t : config.times) {
        ComplexVector phased(coeffs.size());
        for (Eigen::Index k = 0; k < coeffs.size(); ++k)
            phased(k) = coeffs(k) * std::polar(1.0, -eig.values(k) * t);
        const ComplexVector psi = eig.vectors * phased;
        const double drift = std::abs(psi.squaredNorm() - 1.0);
        if (drift > kTraceDrift) {
            std::ostringstream os;
            os << "closed evolution: norm drift " << drift << " at t = " << t;
            throw InvariantError(os.str());
        }
        out.push_back(psi * psi.adjoint());
    }
    return out;
}

std::vector<Matrix> integrate_master_equation(const CavityBatteryConfig& config) {
    config.validate();
    if (config.model != CavityModel::Dicke) field_error("model", "open evolution is defined for the Dicke model");
    const CavityHamiltonian ham = build_hamiltonian(config);
    const SparseMatrix a = annihilation(config);
    const SparseMatrix n = photon_number_operator(config);
    const double kappa = config.kappa;
    const SparseMatrix k = Complex(0.0, -1.0) * ham.total - Complex(0.5 * kappa, 0.0) * n;

    // Column-stacked vec(rho): entry (i, j) sits at i + j * D.
    const Eigen::Index dim = k.rows();
    std::vector<Triplet> lt;
    lt.reserve(static_cast<std::size_t>(2 * dim * k.nonZeros() + a.nonZeros() * a.nonZeros()));
    for (Eigen::Index col = 0; col < k.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(k, col); it; ++it) {
            const Eigen::Index i = it.row(), m = it.col();
            for (Eigen::Index j = 0; j < dim; ++j) {
                lt.emplace_back(i + j * dim, m + j * dim, it.value());             // K rho
                lt.emplace_back(j + i * dim, j + m * dim, std::conj(it.value()));  // rho K^dagger
            }
        }
    if (kappa > 0.0)
        for (Eigen::Index c1 = 0; c1 < a.outerSize(); ++c1)
            for (SparseMatrix::InnerIterator x(a, c1); x; ++x)
                for (Eigen::Index c2 = 0; c2 < a.outerSize(); ++c2)
                    for (SparseMatrix::InnerIterator y(a, c2); y; ++y)
                        lt.emplace_back(x.row() + y.row() * dim, x.col() + y.col() * dim,
                                        kappa * x.value() * std::conj(y.value()));
    Eigen::SparseMatrix<Complex, Eigen::RowMajor> liouvillian(dim * dim, dim * dim);
    liouvillian.setFromTriplets(lt.begin(), lt.end());
    lt.clear();
    lt.shrink_to_fit();

    const ComplexVector psi0 = initial_vector(config);
    const Matrix rho0 = psi0 * psi0.adjoint();
    ComplexVector rho = Eigen::Map<const ComplexVector>(rho0.data(), dim * dim);
    ComplexVector k1(dim * dim), k2(dim * dim), k3(dim * dim), k4(dim * dim), stage(dim * dim);
    double now = 0.0;
    std::vector<Matrix> out;
    out.reserve(config.times.size());
    for (double target : config.times) {
        const double interval = target - now;
        if (interval > 0.0) {
            const long steps = std::max(1L, static_cast<long>(std::ceil(interval / config.dt - 1e-9)));
            const double h = interval / static_cast<double>(steps);
            for (long s = 0; s < steps; ++s) {
                k1.noalias() = liouvillian * rho;
                stage = rho + (0.5 * h) * k1;
                k2.noalias() = liouvillian * stage;
                stage = rho + (0.5 * h) * k2;
                k3.noalias() = liouvillian * stage;
                stage = rho + h * k3;
                k4.noalias() = liouvillian * stage;
                rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
            now = target;
        }
        const Matrix state = Eigen::Map<const Matrix>(rho.data(), dim, dim);
        check_open_state(state, target);
        out.push_back(state);
    }
    return out;
}

TimeSeries evolve_closed(const CavityBatteryConfig& config) {
    const std::vector<Matrix> states = propagate_closed(config);
    const Scorer score(config);
    TimeSeries ts{config, score.ham.battery.energies(), {}};
    ts.records.reserve(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) ts.records.push_back(score(config.times[i], states[i]));
    return ts;
}

TimeSeries evolve_open(const CavityBatteryConfig& config) {
    const std::vector<Matrix> states = integrate_master_equation(config);
    const Scorer score(config);
    TimeSeries ts{config, score.ham.battery.energies(), {}};
    ts.records.reserve(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
        TimeRecord r = score(config.times[i], states[i]);
        if (r.total_purity > 1.0 + 1e-10) {
            std::ostringstream os;
            os << "open evolution: purity " << r.total_purity << " above one at t = " << r.time;
            throw InvariantError(os.str());
        }
        ts.records.push_back(std::move(r));
    }
    return ts;
}

TimeSeries evolve(const CavityBatteryConfig& config) {
    return config.kappa > 0.0 ? evolve_open(config) : evolve_closed(config);
}

RealVector jc_analytic_populations(const CavityBatteryConfig& config, double t) {
    if (config.model != CavityModel::JC) field_error("model", "the closed form covers the JC model");
    const ComplexVector c = charger_amplitudes(config);
    double excited = 0.0;
    for (Eigen::Index m = 1; m < c.size(); ++m) {
        const double s = std::sin(config.g * std::sqrt(static_cast<double>(m)) * t);
        excited += std::norm(c(m)) * s * s;
    }
    RealVector p(2);
    p << 1.0 - excited, excited;
    return p;
}

double jc_analytic_ergotropy(const CavityBatteryConfig& config, double t) {
    if (config.model != CavityModel::JC) field_error("model", "the closed form covers the JC model");
    const ComplexVector c = charger_amplitudes(config);
    const double g = config.g;
    double mean_cos = 0.0;
    double excited = 0.0;
    Complex offdiag = 0.0;
    for (Eigen::Index m = 0; m < c.size(); ++m) {
        const double phase = g * std::sqrt(static_cast<double>(m)) * t;
        mean_cos += std::norm(c(m)) * std::cos(2.0 * phase);
        excited += std::norm(c(m)) * std::sin(phase) * std::sin(phase);
        if (m + 1 < c.size()) {
            const double next = g * std::sqrt(static_cast<double>(m + 1)) * t;
            const Complex up = Complex(0.0, -1.0) * c(m + 1) * std::sin(next);
            offdiag += up * std::conj(c(m) * std::cos(phase));
        }
    }
    const double det = excited * (1.0 - excited) - std::norm(offdiag);
    const double w = config.omega;
    return -0.5 * w * mean_cos + 0.5 * w * std::sqrt(std::max(0.0, 1.0 - 4.0 * det));
}

double jc_fock_period(const CavityBatteryConfig& config) {
    if (config.charger != ChargerKind::Fock || config.n_c < 1.0)
        field_error("charger", "the Fock period needs a Fock charger with at least one photon");
    return std::numbers::pi / (config.g * std::sqrt(config.n_c));
}

double jc_fock_piecewise(const CavityBatteryConfig& config, double t) {
    const double period = jc_fock_period(config);
    const double phase = std::fmod(t, period);
    if (phase < 0.25 * period || phase > 0.75 * period) return 0.0;
    return -config.omega * std::cos(2.0 * config.g * std::sqrt(config.n_c) * t);
}

} // namespace qbattery
