#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "sleepwake/analysis.hpp"
#include "sleepwake/errors.hpp"
#include "sleepwake/params.hpp"

using namespace sleepwake;

TEST_CASE("ad_nullcline") {
    const ModelParameters p = default_parameters();
    CHECK(ad_nullcline(0.0, p) == doctest::Approx(4.9).epsilon(1e-14));
    CHECK(ad_nullcline(2.0, p) == doctest::Approx(0.49 / 4.1).epsilon(1e-14));
    double prev = ad_nullcline(0.0, p);
    for (int i = 1; i <= 100; ++i) {
        const double value = ad_nullcline(0.05 * i, p);
        CHECK(value < prev);
        prev = value;
    }
}

TEST_CASE("gaba_nullcline") {
    const ModelParameters p = default_parameters();
    CHECK(gaba_nullcline(1.0, p, 0.3) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(gaba_nullcline(0.0, p, 0.3) == doctest::Approx(-2.0).epsilon(1e-14));
    CHECK(gaba_nullcline(2.0, p, 0.3) ==
          doctest::Approx(0.3 / 4.15).epsilon(1e-9));
}

TEST_CASE("find_fixed_point") {
    const ModelParameters p = default_parameters();

    SUBCASE("unique interior point at the default epsilon") {
        std::vector<FixedPoint> others;
        const FixedPoint fp = find_fixed_point(p, 0.3, 0.1, 2.0, &others);
        CHECK(others.empty());
        CHECK(fp.gaba_vlpo > 0.6);
        CHECK(fp.gaba_vlpo < 0.9);
        CHECK(fp.ad > 0.6);
        CHECK(fp.ad < 0.9);
        CHECK(fp.residual < 1e-10);
        // Independently bisected values.
        CHECK(fp.gaba_vlpo == doctest::Approx(0.755172077829924).epsilon(1e-9));
        CHECK(fp.ad == doctest::Approx(0.731032466979546).epsilon(1e-9));
        // The quoted approximate point differs in the second decimal.
        CHECK(std::abs(fp.gaba_vlpo - 0.703) > 0.01);
        CHECK(std::abs(fp.gaba_vlpo - 0.703) < 0.1);
    }
    SUBCASE("continuous in epsilon") {
        const FixedPoint a = find_fixed_point(p, 0.3, 0.1, 2.0);
        const FixedPoint b = find_fixed_point(p, 0.3 + 1e-6, 0.1, 2.0);
        CHECK(std::abs(a.gaba_vlpo - b.gaba_vlpo) < 1e-4);
        CHECK(std::abs(a.ad - b.ad) < 1e-4);
    }
    SUBCASE("no root in a sub-interval without a crossing") {
        CHECK_THROWS_AS(find_fixed_point(p, 0.3, 1.5, 2.0), NoRootInIntervalError);
    }
    SUBCASE("both nullcline conditions hold at the returned point") {
        const FixedPoint fp = find_fixed_point(p, 0.3, 0.1, 2.0);
        CHECK(std::abs(ad_nullcline(fp.gaba_vlpo, p) - fp.ad) < 1e-10);
        // d(gaba)/dt = 0 there as well: the intersection closes the loop.
        StateVector s;
        s.gaba_vlpo = fp.gaba_vlpo;
        s.ad = fp.ad;
        const SlowDerivatives d = slow_rhs(s, p, 0.3);
        CHECK(std::abs(d.d_gaba_vlpo) < 1e-10);
    }
}

TEST_CASE("jacobian_slow") {
    const ModelParameters p = default_parameters();

    SUBCASE("origin") {
        const Eigen::Matrix2d j = jacobian_slow({0.0, 0.0, 0.0}, p);
        CHECK(j(0, 0) == doctest::Approx(-0.1).epsilon(1e-14));
        CHECK(j(0, 1) == 0.0);
        CHECK(j(1, 0) == doctest::Approx(0.15).epsilon(1e-14));
        CHECK(j(1, 1) == doctest::Approx(-0.3).epsilon(1e-14));
    }
    SUBCASE("unit point") {
        const Eigen::Matrix2d j = jacobian_slow({1.0, 1.0, 0.0}, p);
        CHECK(j(0, 0) == doctest::Approx(-1.1).epsilon(1e-14));
        CHECK(j(0, 1) == doctest::Approx(-2.0).epsilon(1e-14));
        CHECK(j(1, 0) == doctest::Approx(1.15).epsilon(1e-14));
        CHECK(j(1, 1) == doctest::Approx(1.7).epsilon(1e-14));
    }
    SUBCASE("unstable spiral inside the limit cycle") {
        const FixedPoint fp = find_fixed_point(p, 0.3, 0.1, 2.0);
        const Eigen::Matrix2d j = jacobian_slow(fp, p);
        const double tr = j.trace();
        const double det = j.determinant();
        CHECK(tr > 0.0);
        CHECK(det > 0.0);
        CHECK(tr * tr - 4.0 * det < 0.0);
        CHECK(classify_2x2(tr, det) == StabilityClass::UnstableSpiral);
        // Characteristic-polynomial cross-check of the eigenvalues.
        const auto eigs = eigenvalues(j);
        for (const auto& z : eigs) {
            const std::complex<double> residual =
                z * z - tr * z + std::complex<double>(det, 0.0);
            CHECK(std::abs(residual) < 1e-12);
        }
    }
}

TEST_CASE("jacobian_full") {
    const ModelParameters p = default_parameters();
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> dist(-1.5, 1.5);

    SUBCASE("fast rows equal the coupling matrix") {
        StateVector s;
        for (int k = 0; k < 5; ++k) {
            std::array<double, kNumVars> a{};
            for (double& x : a) x = dist(rng);
            s = StateVector::from_array(a);
            const Eigen::MatrixXd j = jacobian_full(s, p);
            for (int i = 0; i < kNumFast; ++i) {
                for (int col = 0; col < kNumConcentrations; ++col) {
                    CHECK(j(i, col) ==
                          p.fast_matrix[static_cast<size_t>(i)][static_cast<size_t>(col)]);
                }
            }
        }
    }
    SUBCASE("slow diagonal entry at the quoted point") {
        StateVector s;
        s.gaba_vlpo = 0.703;
        s.ad = 0.823;
        const Eigen::MatrixXd j = jacobian_full(s, p);
        CHECK(j(kAd, kAd) == doctest::Approx(-0.594209).epsilon(1e-9));
    }
    SUBCASE("matches central finite differences of the vector field") {
        const double fd_step = 1e-5;
        for (int trial = 0; trial < 5; ++trial) {
            std::array<double, kNumVars> base{};
            for (double& x : base) x = dist(rng);
            const Eigen::MatrixXd j = jacobian_full(StateVector::from_array(base), p);
            double max_err = 0.0;
            for (int col = 0; col < kNumConcentrations; ++col) {
                auto plus = base;
                auto minus = base;
                plus[static_cast<size_t>(col)] += fd_step;
                minus[static_cast<size_t>(col)] -= fd_step;
                const auto dp = full_rhs(StateVector::from_array(plus), p);
                const auto dm = full_rhs(StateVector::from_array(minus), p);
                for (int row = 0; row < kNumConcentrations; ++row) {
                    const double fd =
                        (dp[static_cast<size_t>(row)] - dm[static_cast<size_t>(row)]) /
                        (2.0 * fd_step);
                    max_err = std::max(max_err, std::abs(fd - j(row, col)));
                }
            }
            CHECK(max_err < 1e-6);
        }
    }
    SUBCASE("slow rows reproduce the 2x2 Jacobian") {
        StateVector s;
        s.gaba_vlpo = 1.2;
        s.ad = 0.7;
        const Eigen::MatrixXd j = jacobian_full(s, p);
        const Eigen::Matrix2d j2 = jacobian_slow({1.2, 0.7, 0.0}, p);
        CHECK(j(kAd, kAd) == j2(0, 0));
        CHECK(j(kAd, kGabaVlpo) == j2(0, 1));
        CHECK(j(kGabaVlpo, kAd) == j2(1, 0));
        CHECK(j(kGabaVlpo, kGabaVlpo) == j2(1, 1));
    }
}

TEST_CASE("eigenvalues") {
    SUBCASE("diagonal matrix") {
        Eigen::MatrixXd m(2, 2);
        m << -1.0, 0.0, 0.0, -2.0;
        const auto eigs = eigenvalues(m);
        REQUIRE(eigs.size() == 2);
        CHECK(eigs[0].real() == doctest::Approx(-2.0).epsilon(1e-12));
        CHECK(eigs[1].real() == doctest::Approx(-1.0).epsilon(1e-12));
        CHECK(eigs[0].imag() == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("harmonic oscillator block") {
        Eigen::MatrixXd m(2, 2);
        m << 0.0, 1.0, -8.0, 0.0;
        const auto eigs = eigenvalues(m);
        REQUIRE(eigs.size() == 2);
        CHECK(eigs[0].imag() == doctest::Approx(-std::sqrt(8.0)).epsilon(1e-10));
        CHECK(eigs[1].imag() == doctest::Approx(std::sqrt(8.0)).epsilon(1e-10));
        CHECK(std::abs(eigs[0].real()) < 1e-10);
    }
    SUBCASE("trace and determinant identities on random matrices") {
        std::mt19937_64 rng(37);
        std::uniform_real_distribution<double> dist(-2.0, 2.0);
        for (int trial = 0; trial < 50; ++trial) {
            Eigen::MatrixXd m(3, 3);
            for (int i = 0; i < 9; ++i) m.data()[i] = dist(rng);
            const auto eigs = eigenvalues(m);
            std::complex<double> sum = 0.0, prod = 1.0;
            for (const auto& z : eigs) {
                sum += z;
                prod *= z;
            }
            const double scale = std::max(1.0, m.norm());
            CHECK(std::abs(sum - std::complex<double>(m.trace(), 0.0)) / scale < 1e-9);
            CHECK(std::abs(prod - std::complex<double>(m.determinant(), 0.0)) /
                      std::max(1.0, std::abs(m.determinant())) <
                  1e-9);
        }
    }
    SUBCASE("continuity under tiny perturbation") {
        std::mt19937_64 rng(41);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        Eigen::MatrixXd m(4, 4);
        for (int i = 0; i < 16; ++i) m.data()[i] = dist(rng);
        m = m + m.transpose().eval();  // well-conditioned spectrum
        Eigen::MatrixXd e(4, 4);
        for (int i = 0; i < 16; ++i) e.data()[i] = dist(rng);
        e /= e.norm();
        const auto a = eigenvalues(m);
        const auto b = eigenvalues(m + 1e-8 * e);
        double dist_sum = 0.0;
        for (size_t i = 0; i < a.size(); ++i) dist_sum += std::abs(a[i] - b[i]);
        CHECK(dist_sum < 1e-6);
    }
    SUBCASE("oversized matrices are rejected") {
        CHECK_THROWS_AS(eigenvalues(Eigen::MatrixXd::Zero(17, 17)), Error);
    }
    SUBCASE("fast block spectrum is stable for the defaults") {
        const double max_re = fast_block_max_real_part(default_parameters());
        CHECK(max_re < 0.0);
        CHECK(max_re == doctest::Approx(-0.050610524774).epsilon(1e-8));
    }
}

TEST_CASE("epsilon_stability_sweep") {
    const ModelParameters p = default_parameters();

    SUBCASE("default range localizes the oscillatory window") {
        SweepOptions opt;
        const SweepResult result = epsilon_stability_sweep(p, opt);
        REQUIRE(result.window_found);
        CHECK(result.lower.kind == BoundaryKind::TraceZero);
        CHECK(result.lower.epsilon == doctest::Approx(0.2803).epsilon(1e-3));
        CHECK(std::abs(result.lower.trace_at_boundary) < 1e-3);
        CHECK(result.upper.kind == BoundaryKind::BoundedEscape);
        CHECK(result.upper.epsilon == doctest::Approx(0.3362).epsilon(2e-3));
        // Both boundaries sit within 0.02 of the quoted (0.29, 0.32] window.
        CHECK(std::abs(result.lower.epsilon - 0.29) < 0.02);
        CHECK(std::abs(result.upper.epsilon - 0.32) < 0.02);
    }
    SUBCASE("point sweep classifies a single epsilon") {
        SweepOptions opt;
        opt.lo = opt.hi = 0.3;
        const SweepResult result = epsilon_stability_sweep(p, opt);
        REQUIRE(result.points.size() == 1);
        CHECK(result.points[0].slow_class == StabilityClass::UnstableSpiral);
        CHECK(result.points[0].det > 0.0);
        CHECK(result.points[0].bounded);
        CHECK(result.points[0].oscillatory);
    }
    SUBCASE("stable spiral below the window") {
        SweepOptions opt;
        opt.lo = opt.hi = 0.26;
        const SweepResult result = epsilon_stability_sweep(p, opt);
        CHECK(result.points[0].slow_class == StabilityClass::StableSpiral);
        CHECK_FALSE(result.points[0].oscillatory);
    }
}

TEST_CASE("subsystem_steady_state") {
    const ModelParameters p = default_parameters();

    SUBCASE("single active sleep-specific population") {
        std::map<std::string, double> frozen;
        for (const auto& name : variable_names()) frozen[name] = 0.1;
        frozen["AD"] = 2.0;
        frozen["GABA_VLPO"] = 0.01;
        const SubsystemResult result =
            subsystem_steady_state(p, {"GABA_BFs"}, frozen);
        // Hand evaluation of the single balance: inflow over net removal.
        const double inflow = -0.83153 * 0.1 - 0.03471 * 2.0 + 0.01 * 0.01;
        const double expected = inflow / (0.32431 + 1.0);
        CHECK(result.steady_values.at("GABA_BFs") ==
              doctest::Approx(expected).epsilon(1e-12));
        CHECK(result.stable);
    }
    SUBCASE("all nine active rows zero the fast field") {
        const FixedPoint fp = find_fixed_point(p, 0.3, 0.1, 2.0);
        std::map<std::string, double> frozen{{"AD", fp.ad},
                                             {"GABA_VLPO", fp.gaba_vlpo}};
        std::set<std::string> active;
        for (int i = 0; i < kNumFast; ++i) active.insert(variable_names()[static_cast<size_t>(i)]);
        const SubsystemResult result = subsystem_steady_state(p, active, frozen);

        StateVector s;
        std::array<double, kNumVars> a{};
        for (int i = 0; i < kNumFast; ++i) {
            a[static_cast<size_t>(i)] =
                result.steady_values.at(variable_names()[static_cast<size_t>(i)]);
        }
        a[kAd] = fp.ad;
        a[kGabaVlpo] = fp.gaba_vlpo;
        s = StateVector::from_array(a);
        for (double d : fast_rhs(s, p)) CHECK(std::abs(d) < 1e-10);
        CHECK(result.stable);  // fast block relaxes between slow transitions
    }
    SUBCASE("empty active set is rejected") {
        CHECK_THROWS_AS(subsystem_steady_state(p, {}, {}), Error);
    }
    SUBCASE("missing frozen value is rejected") {
        CHECK_THROWS_AS(subsystem_steady_state(p, {"OX"}, {}), Error);
    }
    SUBCASE("singular active block is reported") {
        ModelParameters q = p;
        for (int j = 0; j < kNumConcentrations; ++j) q.fast_matrix[kH][static_cast<size_t>(j)] = 0.0;
        std::map<std::string, double> frozen;
        for (const auto& name : variable_names()) frozen[name] = 0.1;
        CHECK_THROWS_AS(subsystem_steady_state(q, {"H"}, frozen), SingularSystemError);
    }
}
