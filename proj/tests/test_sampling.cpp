#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <thread>

#include "oracles.hpp"
#include "qbattery/metrics.hpp"
#include "qbattery/sampling.hpp"

using namespace qbattery;

TEST_CASE("random streams are reproducible and distinct per index") {
    RandomStream a = RandomStream::substream(42, 7, 3);
    RandomStream b = RandomStream::substream(42, 7, 3);
    RandomStream c = RandomStream::substream(42, 7, 4);
    RandomStream d = RandomStream::substream(43, 7, 3);
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next();
        CHECK(x == b.next());
        CHECK(x != c.next());
        CHECK(x != d.next());
    }
    RandomStream r(1);
    for (int i = 0; i < 10000; ++i) {
        const double u = r.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        const double v = r.uniform_open_low();
        REQUIRE(v > 0.0);
        REQUIRE(v <= 1.0);
        REQUIRE(r.below(3) < 3);
    }
}

TEST_CASE("normal variates have unit variance") {
    RandomStream r(2024);
    double sum = 0.0, sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double x = r.normal();
        sum += x;
        sq += x * x;
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(std::abs(sq / n - 1.0) < 0.01);
}

TEST_CASE("sampler spec validation and method names") {
    SamplerSpec s;
    s.dim = 1;
    CHECK_THROWS_AS(s.validate(), ValidationError);
    s.dim = 3;
    CHECK_NOTHROW(s.validate());
    s.fprs_weights = {0.0, 0.0, 0.0};
    CHECK_THROWS_AS(s.validate(), ValidationError);
    s.fprs_weights = {0.2, -0.1, 0.3};
    CHECK_THROWS_AS(s.validate(), ValidationError);
    s.fprs_weights = {0.2, 0.5, 0.3};
    s.fers_ratio = -1.0;
    CHECK_THROWS_AS(s.validate(), ValidationError);

    for (auto m : {SamplerMethod::HSRS, SamplerMethod::FERS, SamplerMethod::FPRS, SamplerMethod::GUE, SamplerMethod::Haar})
        CHECK(parse_sampler_method(to_string(m)) == m);
    CHECK_THROWS_AS(parse_sampler_method("bures"), ValidationError);
}

TEST_CASE("Hilbert-Schmidt states are valid and deterministic") {
    SamplerSpec s;
    s.dim = 3;
    s.seed = 5;
    for (std::uint64_t i = 0; i < 200; ++i) {
        RandomStream r1 = s.stream(i), r2 = s.stream(i);
        const QuantumState a = sample_hs_state(3, r1);
        const QuantumState b = sample_hs_state(3, r2);
        REQUIRE((a.matrix() - b.matrix()).cwiseAbs().maxCoeff() == 0.0);
        REQUIRE_NOTHROW(QuantumState::from_matrix(a.matrix()));
    }
}

TEST_CASE("Hilbert-Schmidt mean purity at d = 3") {
    SamplerSpec s;
    s.dim = 3;
    s.seed = 77;
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        RandomStream r = s.stream(static_cast<std::uint64_t>(i));
        sum += purity(sample_hs_state(3, r));
    }
    CHECK(std::abs(sum / n - oracle::hs_mean_purity(3)) < 0.005);
}

TEST_CASE("low-entropy dephased populations") {
    RandomStream r(9);
    for (int i = 0; i < 1000; ++i) {
        const RealVector p2 = sample_low_entropy_dephased(2, r).values();
        REQUIRE(((p2(0) == 1.0 && p2(1) == 0.0) || (p2(0) == 0.0 && p2(1) == 1.0)));
        const RealVector p3 = sample_low_entropy_dephased(3, r).values();
        REQUIRE(p3.minCoeff() == 0.0);
        REQUIRE(std::abs(p3.sum() - 1.0) < 1e-12);
    }
    // zeros land in every slot
    std::set<int> zero_slots;
    for (int i = 0; i < 200; ++i) {
        const RealVector p = sample_low_entropy_dephased(4, r).values();
        for (int k = 0; k < 4; ++k)
            if (p(k) == 0.0) zero_slots.insert(k);
    }
    CHECK(zero_slots.size() == 4);
}

TEST_CASE("FERS mixing ratio") {
    RandomStream r(10);
    int low = 0;
    for (int i = 0; i < 20000; ++i) low += sample_fers(3, 0.0, r).low_entropy_branch ? 1 : 0;
    CHECK(low == 0);

    const int n = 100000;
    int low_entropy_fers = 0, low_entropy_hs = 0;
    low = 0;
    for (int i = 0; i < n; ++i) {
        const FersDraw f = sample_fers(3, 1.5, r);
        low += f.low_entropy_branch ? 1 : 0;
        if (diag_entropy(f.populations) < 0.2) ++low_entropy_fers;
        const QuantumState hs = sample_hs_state(3, r);
        if (diag_entropy(PopulationVector::from_values(hs.matrix().diagonal().real())) < 0.2) ++low_entropy_hs;
    }
    CHECK(std::abs(static_cast<double>(low) / n - 0.6) < 0.01);
    CHECK(low_entropy_fers > low_entropy_hs);

    RandomStream a = RandomStream::substream(1, 2, 3), b = RandomStream::substream(1, 2, 3);
    for (int i = 0; i < 100; ++i)
        REQUIRE((sample_fers(4, 1.5, a).populations.values() - sample_fers(4, 1.5, b).populations.values()).norm() == 0.0);
}

TEST_CASE("FPRS purity bounds") {
    auto b0 = fprs_purity_bounds(3, 0.0);
    CHECK(b0.min == doctest::Approx(1.0 / 3.0));
    CHECK(b0.max == doctest::Approx(1.0 / 3.0));
    auto b1 = fprs_purity_bounds(3, 2.0 / 3.0);
    CHECK(b1.min == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(b1.max == doctest::Approx(1.0).epsilon(1e-14));
    auto b2 = fprs_purity_bounds(3, 0.3);
    CHECK(b2.min == doctest::Approx(1.0 / 3.0 + 0.09 * 1.5).epsilon(1e-14));
    CHECK(b2.min <= b2.max);
    CHECK_THROWS_AS(fprs_purity_bounds(3, 0.7), ValidationError);
    CHECK_THROWS_AS(fprs_purity_bounds(3, -0.01), ValidationError);

    for (std::size_t d = 2; d <= 6; ++d)
        for (int k = 0; k <= 100; ++k) {
            const double dr = (static_cast<double>(d) - 1.0) / static_cast<double>(d) * k / 100.0;
            const PurityBounds b = fprs_purity_bounds(d, dr);
            REQUIRE(b.min <= b.max + 1e-15);
        }
}

TEST_CASE("purity regions tile the admissible shift range") {
    for (std::size_t d = 2; d <= 6; ++d) {
        const double dd = static_cast<double>(d);
        const auto lo = PurityRegion::of(d, PurityLevel::Low);
        const auto mid = PurityRegion::of(d, PurityLevel::Medium);
        const auto hi = PurityRegion::of(d, PurityLevel::High);
        CHECK(lo.lower == 0.0);
        CHECK(lo.upper == doctest::Approx((dd - 1) / (std::sqrt(3.0) * dd)));
        CHECK(mid.lower == lo.upper);
        CHECK(mid.upper == doctest::Approx(std::sqrt(2.0) * (dd - 1) / (std::sqrt(3.0) * dd)));
        CHECK(hi.lower == mid.upper);
        CHECK(hi.upper == doctest::Approx((dd - 1) / dd));
    }
}

TEST_CASE("FPRS draws respect the constraints and the purity window") {
    RandomStream r(12);
    for (std::size_t d : {2u, 3u, 5u}) {
        for (auto level : {PurityLevel::Low, PurityLevel::Medium, PurityLevel::High}) {
            const PurityRegion region = PurityRegion::of(d, level);
            for (int i = 0; i < 2000; ++i) {
                const FprsDraw f = sample_fprs(d, level, r);
                REQUIRE(f.delta_r1 >= region.lower);
                REQUIRE(f.delta_r1 <= region.upper);
                REQUIRE(f.spectrum.minCoeff() >= 0.0);
                REQUIRE(f.spectrum.maxCoeff() <= 1.0);
                REQUIRE(std::abs(f.spectrum.sum() - 1.0) <= 1e-12);
                const double dd = static_cast<double>(d);
                for (Eigen::Index n = 1; n < f.spectrum.size(); ++n) {
                    REQUIRE(f.spectrum(n) <= 1.0 / dd + 1e-15);
                }
                const PurityBounds b = fprs_purity_bounds(d, f.delta_r1);
                const double p = purity(f.state);
                REQUIRE(p >= b.min - 1e-12);
                REQUIRE(p <= b.max + 1e-12);
            }
        }
    }

    const FprsDraw flat = sample_fprs_with_shift(3, 0.0, r);
    CHECK((flat.state.matrix() - Matrix::Identity(3, 3) / 3.0).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(purity(flat.state) == doctest::Approx(1.0 / 3.0));

    const PurityRegion low = PurityRegion::of(3, PurityLevel::Low);
    for (int i = 0; i < 1000; ++i) {
        const double p = purity(sample_fprs(3, PurityLevel::Low, r).state);
        REQUIRE(p >= 1.0 / 3.0 - 1e-12);
        REQUIRE(p <= fprs_purity_bounds(3, low.upper).max + 1e-12);
    }
}

TEST_CASE("weighted FPRS stream spans the purity range") {
    RandomStream r(13);
    std::vector<int> bins(14, 0);
    for (int i = 0; i < 100000; ++i) {
        const double p = purity(sample_fprs_weighted(3, {0.2, 0.5, 0.3}, r).state);
        const int b = std::min(13, static_cast<int>((p - 1.0 / 3.0) / 0.05));
        ++bins[static_cast<std::size_t>(b)];
    }
    for (int count : bins) CHECK(count > 0);
}

TEST_CASE("Haar unitaries") {
    RandomStream r(14);
    const Matrix one = sample_haar_unitary(1, r);
    CHECK(std::abs(std::abs(one(0, 0)) - 1.0) < 1e-14);
    for (std::size_t d : {2u, 3u, 6u}) {
        const Matrix u = sample_haar_unitary(d, r);
        CHECK((u.adjoint() * u - Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)))
                  .cwiseAbs()
                  .maxCoeff() <= 1e-12);
    }

    std::vector<double> x, y;
    Matrix v(2, 2);
    v << 0.6, Complex(0.0, 0.8), Complex(0.0, 0.8), 0.6;
    for (int i = 0; i < 100000; ++i) {
        const Matrix u = sample_haar_unitary(2, r);
        x.push_back(std::norm(u(0, 0)));
        y.push_back(std::norm((v * sample_haar_unitary(2, r))(0, 0)));
    }
    CHECK(oracle::ks_statistic(x, [](double t) { return std::clamp(t, 0.0, 1.0); }) < 0.01);
    CHECK(oracle::ks_two_sample(x, y) < 0.02);
}

TEST_CASE("GUE Hamiltonians") {
    RandomStream r(15);
    for (int i = 0; i < 100; ++i) {
        const BatteryHamiltonian h = sample_gue_hamiltonian(4, r, true);
        REQUIRE(std::abs(h.ground_energy() + 1.0) <= 1e-12);
        REQUIRE(std::abs(h.top_energy() - 1.0) <= 1e-12);
        const Matrix u = h.basis();
        REQUIRE((u.adjoint() * u - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-12);
    }
    double smallest = 1e300;
    for (int i = 0; i < 10000; ++i) {
        const RealVector e = sample_gue_hamiltonian(4, r, false).energies();
        for (Eigen::Index k = 1; k < 4; ++k) smallest = std::min(smallest, e(k) - e(k - 1));
    }
    CHECK(smallest > 1e-6);
    CHECK_THROWS_AS(sample_gue_hamiltonian(1, r, true), DimensionError);
    CHECK_NOTHROW(sample_gue_hamiltonian(1, r, false));
}

TEST_CASE("substreams give identical draws regardless of worker partition") {
    SamplerSpec s;
    s.method = SamplerMethod::FPRS;
    s.dim = 3;
    s.seed = 2025;
    const std::size_t n = 400;
    std::vector<double> serial(n), parallel(n);
    for (std::size_t i = 0; i < n; ++i) {
        RandomStream r = s.stream(i);
        serial[i] = purity(sample_fprs_weighted(3, s.fprs_weights, r).state);
    }
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < 8; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += 8) {
                RandomStream r = s.stream(i);
                parallel[i] = purity(sample_fprs_weighted(3, s.fprs_weights, r).state);
            }
        });
    for (auto& t : pool) t.join();
    CHECK(serial == parallel);
}
