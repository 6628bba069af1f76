#include <qpc/elements.hpp>
#include <qpc/kinetics.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace qpc;

namespace {

const ModelParams PM20{0.1, 0.2, 20}, AFM20{0.2, 0.1, 20};

RateTable random_table(int N, std::mt19937_64& rng, double scale) {
    std::uniform_real_distribution<double> u(0.0, scale);
    RateTable r = RateTable::zeros(N);
    for (int k = 0; k < N; ++k) {
        r.W_minus_k(k) = u(rng), r.W_plus_k(k) = u(rng);
        for (int q = 0; q < N; ++q) {
            if (q == k) continue;
            r.W_minus_kq(k, q) = u(rng), r.W_plus_kq(k, q) = u(rng);
            r.V_minus_kq(k, q) = u(rng), r.V_plus_kq(k, q) = u(rng);
        }
    }
    r.W_minus_kq = 0.5 * (r.W_minus_kq + r.W_minus_kq.transpose()).eval();
    r.W_plus_kq = 0.5 * (r.W_plus_kq + r.W_plus_kq.transpose()).eval();
    r.V_plus_kq = r.V_minus_kq.transpose();
    r.has_pair = r.has_scatter = true;
    return r;
}

}  // namespace

TEST(EdgeRates, ThetaSquaredScaling) {
    const auto s = diagonalize(PM20);
    const auto p = make_mcp(28, 28.0 / 3);
    const auto a = edge_rates(s, p, 0.02), b = edge_rates(s, p, 0.04);
    EXPECT_LT((b.W_minus_k - 4 * a.W_minus_k).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT((b.W_plus_k - 4 * a.W_plus_k).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_THROW(edge_rates(s, p, 0.0), std::invalid_argument);
}

TEST(EdgeRates, BoundaryWeightsTimesFilter) {
    const auto s = diagonalize(AFM20);
    const auto p = make_scp(4, 0.3);
    const auto r = edge_rates(s, p, 0.02);
    for (int k = 0; k < 20; ++k) {
        EXPECT_NEAR(r.W_minus_k(k), 2 * 4e-4 * std::norm(filter(p, s.eps(k))) * std::norm(s.u(0, k)), 1e-16);
        EXPECT_NEAR(r.W_plus_k(k), 2 * 4e-4 * std::norm(filter(p, -s.eps(k))) * std::norm(s.v(0, k)), 1e-16);
    }
    EXPECT_EQ(r.pinned, 0);
}

TEST(EdgeRates, McpHeatingEnvelope) {
    // long pulse so truncation ringing sits below the envelope
    const double beta = 28.0 / 3;
    const auto s = diagonalize(PM20);
    const auto r = edge_rates(s, make_mcp(280, beta), 0.02);
    for (int k = 0; k < 20; ++k) {
        const double env = std::exp(-2 * s.eps(k) * beta) * std::norm(s.v(0, k)) / std::norm(s.u(0, k));
        EXPECT_LE(r.W_plus_k(k) / r.W_minus_k(k), env * 1.01) << k;
    }
}

TEST(EdgeSteady, TrivialLimits) {
    RateTable r = RateTable::zeros(3);
    r.W_minus_k << 0.1, 0.2, 0.3;
    EXPECT_EQ(edge_steady_state(r).n, Eigen::VectorXd::Zero(3));
    r.W_plus_k = r.W_minus_k;
    EXPECT_LT((edge_steady_state(r).n - Eigen::VectorXd::Constant(3, 0.5)).norm(), 1e-15);
    EXPECT_THROW(edge_steady_state(RateTable::zeros(2)), DeadMode);
}

TEST(EdgeEvolve, ClosedFormMatchesIteration) {
    const auto s = diagonalize(PM20);
    const auto r = edge_rates(s, make_mcp(28, 28.0 / 3), 0.1);
    OccupationState n0{Eigen::VectorXd::Constant(20, 0.5), 0, -1};
    const auto traj = edge_evolve(n0, r, 2000);
    for (long long c : {0LL, 1LL, 10LL, 500LL, 2000LL})
        EXPECT_LT((traj[c].n - edge_occupations_at(r, n0.n, double(c))).cwiseAbs().maxCoeff(), 1e-12);
    // long times land on the closed-form fixed point
    const auto inf = edge_steady_state(r);
    EXPECT_LT((edge_occupations_at(r, n0.n, 1e9) - inf.n).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(EdgeEvolve, ThetaCollapse) {
    const auto s = diagonalize(PM20);
    const auto p = make_mcp(28, 28.0 / 3);
    const Eigen::VectorXd n0 = Eigen::VectorXd::Constant(20, 0.5);
    const auto r1 = edge_rates(s, p, 0.02), r2 = edge_rates(s, p, 0.01);
    for (double t : {10.0, 50.0, 150.0, 300.0}) {
        const double a = density(edge_occupations_at(r1, n0, t / 4e-4));
        const double b = density(edge_occupations_at(r2, n0, t / 1e-4));
        EXPECT_NEAR(a / b, 1.0, 0.02) << t;
    }
}

TEST(EdgeSteady, McpFidelityFloor) {
    // beta Delta_mb = 4 pi at T = 3 beta
    for (auto p : {PM20, AFM20}) {
        const double beta = 4 * pi / gap(p).delta_mb;
        const auto s = diagonalize(p);
        const auto r = edge_rates(s, make_mcp(int(std::lround(3 * beta)), beta), 0.001);
        auto st = edge_steady_state(r);
        EXPECT_LE(fidelity(st.n, r.pinned).log_fidelity_per_qubit, 1e-6) << to_string(p.phase());
    }
}

TEST(BulkRates, PmHasNoTwoParticleRates) {
    const auto s = diagonalize(PM20);
    const auto r = bulk_rates(s, make_mcp(12, 6.0), 0.05, build_elements(s));
    EXPECT_FALSE(r.has_pair);
    EXPECT_EQ(r.W_minus_kq.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(r.V_minus_kq.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_GE(r.W_minus_k.minCoeff(), 0.0);
}

TEST(BulkRates, AfmSingleParticleComesFromEdges) {
    const auto s = diagonalize(AFM20);
    const auto E = build_elements(s);
    for (int k = 1; k < 20; ++k) {
        double edge = 0.0;
        for (int j : {0, 1, 2, 3, 16, 17, 18, 19}) edge += E.single_plus(j, k);
        EXPECT_GT(edge / E.single_plus.col(k).sum(), 0.9) << k;
    }
}

TEST(BulkRates, PairRatesIntensiveInLength) {
    const auto p = make_mcp(12, 6.0);
    auto mid_rate = [&](int N) {
        const auto s = diagonalize({0.2, 0.1, N});
        const auto r = bulk_rates(s, p, 0.05, build_elements(s));
        // pair annihilation out of the mode nearest mid-band
        const double target = 0.5 * (0.1 + 0.3) * pi;
        int k = 1;
        for (int m = 1; m < N; ++m)
            if (std::abs(s.eps(m) - target) < std::abs(s.eps(k) - target)) k = m;
        return r.W_minus_kq.row(k).sum();
    };
    EXPECT_NEAR(mid_rate(40) / mid_rate(20), 1.0, 0.3);
}

TEST(BulkStep, VacuumIsStationaryWithoutHeating) {
    const auto s = diagonalize(AFM20);
    RateTable r = bulk_rates(s, make_mcp(12, 6.0), 0.05, build_elements(s));
    r.W_plus_k.setZero();
    r.W_plus_kq.setZero();
    r.V_plus_kq.setZero();
    r.pinned = -1;
    EXPECT_EQ(bulk_step(Eigen::VectorXd::Zero(20), r).cwiseAbs().maxCoeff(), 0.0);
}

TEST(BulkStep, ScatteringConservesNumber) {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        RateTable r = random_table(15, rng, 1e-3);
        r.W_minus_k.setZero(), r.W_plus_k.setZero(), r.W_minus_kq.setZero(), r.W_plus_kq.setZero();
        std::uniform_real_distribution<double> u;
        Eigen::VectorXd n(15);
        for (int k = 0; k < 15; ++k) n(k) = u(rng);
        EXPECT_LE(std::abs(bulk_step(n, r).sum()), 1e-12);
    }
}

TEST(NoisyRates, ZeroNoiseIsIdentity) {
    const auto s = diagonalize(AFM20);
    const auto E = build_elements(s);
    const auto r = bulk_rates(s, make_mcp(12, 6.0), 0.05, E);
    const auto q = noisy_rates(r, E, NoiseParams{});
    EXPECT_EQ(q.W_minus_k, r.W_minus_k);
    EXPECT_EQ(q.V_plus_kq, r.V_plus_kq);
}

TEST(NoisyRates, PmDephasingOpensPairChannel) {
    const auto s = diagonalize(PM20);
    const auto E = build_elements(s);
    const auto r = noisy_rates(bulk_rates(s, make_mcp(12, 6.0), 0.05, E), E, NoiseParams::from_rates(0.0, 1e-4, 12));
    EXPECT_TRUE(r.has_pair);
    EXPECT_GT(r.W_plus_kq.maxCoeff(), 0.0);
    EXPECT_THROW(NoiseParams::from_rates(-1.0, 0.0, 1), std::invalid_argument);
}

TEST(NoisyRates, MonotoneInNoise) {
    for (auto p : {ModelParams{0.1, 0.2, 10}, ModelParams{0.2, 0.1, 10}}) {
        const auto s = diagonalize(p);
        const auto E = build_elements(s);
        const auto pulse = make_mcp(30, 15.0);
        const auto base = bulk_rates(s, pulse, 0.1, E);
        double prev = -1.0;
        for (double ratio : {1e-6, 1e-5, 1e-4, 1e-3, 1e-2}) {
            const double g = ratio * 0.01;
            const auto st = steady_state(noisy_rates(base, E, NoiseParams::from_rates(g, g, 30)));
            const double n = density(st.n, st.pinned);
            EXPECT_GE(n, prev);
            prev = n;
        }
    }
}

TEST(SteadyState, SingleParticleTableMatchesClosedForm) {
    const auto s = diagonalize(PM20);
    const auto r = edge_rates(s, make_mcp(28, 28.0 / 3), 0.02);
    const auto a = steady_state(r), b = edge_steady_state(r);
    EXPECT_LE(((a.n - b.n).array() / b.n.array()).abs().maxCoeff(), 1e-12);
}

TEST(SteadyState, RandomTablesBalance) {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 10; ++rep) {
        const RateTable r = random_table(12, rng, 1e-3);
        SteadyReport rep_;
        const auto st = steady_state(r, {}, &rep_);
        EXPECT_LE(bulk_step(st.n, r).cwiseAbs().maxCoeff(), 1e-14);
        EXPECT_GE(st.n.minCoeff(), 0.0);
        EXPECT_LE(st.n.maxCoeff(), 1.0);
    }
}

TEST(SteadyState, DeadModeReported) {
    EXPECT_THROW(steady_state(RateTable::zeros(3)), DeadMode);
}

TEST(SteadyState, McpNoiselessBelowGapEnvelope) {
    const auto s = diagonalize(PM20);
    const double beta = 8.0;
    const auto r = bulk_rates(s, make_mcp(40, beta), 0.05, build_elements(s));
    const auto st = steady_state(r);
    EXPECT_LT(density(st.n), std::exp(-beta * gap(PM20).delta_mb));
}

TEST(Evolve, ClampViolationOnOversizedSteps) {
    RateTable r = RateTable::zeros(4);
    r.W_minus_k.setConstant(3.0);
    OccupationState st{Eigen::VectorXd::Constant(4, 0.5), 0, -1};
    EXPECT_THROW(evolve(st, r, 5000), ClampViolation);
}

TEST(Evolve, ObserverStride) {
    const auto s = diagonalize(PM20);
    const auto r = edge_rates(s, make_mcp(28, 28.0 / 3), 0.05);
    int calls = 0;
    OccupationState st{Eigen::VectorXd::Constant(20, 0.5), 0, -1};
    const auto out = evolve(st, r, 1000, [&](const OccupationState&) { ++calls; }, 100);
    EXPECT_EQ(calls, 10);
    EXPECT_EQ(out.cycle, 1000);
}

TEST(Fidelity, TrivialCases) {
    const auto f0 = fidelity(Eigen::VectorXd::Zero(5));
    EXPECT_EQ(f0.F, 1.0);
    EXPECT_EQ(f0.log_fidelity_per_qubit, 0.0);
    const auto fc = fidelity(Eigen::VectorXd::Constant(5, 0.2));
    EXPECT_NEAR(fc.log_fidelity_per_qubit, -std::log(0.8), 1e-14);
    // pinned mode is ignored but the average still runs over all N
    Eigen::VectorXd n = Eigen::VectorXd::Constant(4, 0.1);
    n(0) = 0.5;
    EXPECT_NEAR(density(n, 0), 0.3 / 4, 1e-15);
}

TEST(Fidelity, LowDensityExpansion) {
    for (double c : {1e-2, 1e-3, 1e-4}) {
        Eigen::VectorXd n = Eigen::VectorXd::LinSpaced(10, 0.0, 2 * c);
        const double d = fidelity(n).log_fidelity_per_qubit - density(n);
        EXPECT_LE(std::abs(d), 3 * c * c);
    }
}

TEST(Gibbs, TemperatureLimits) {
    const auto s = diagonalize(PM20);
    EXPECT_LT((gibbs_target(s, 1e6).n.array() - 0.5).abs().maxCoeff(), 1e-6);
    EXPECT_LT(gibbs_target(s, 1e-3).n.maxCoeff(), 1e-100);
    EXPECT_THROW(gibbs_target(s, 0.0), std::invalid_argument);
}

TEST(HermitianZ, DetailedBalanceRatio) {
    const auto s = diagonalize({0.1, 0.2, 30});
    const double beta = 4.0;
    const auto p = make_mcp(40, beta);
    const auto E = build_elements(s, false);
    const auto r = hermitian_z_rates(s, p, 0.05, E);
    for (int k = 0; k < 30; k += 7)
        for (int q = 0; q < 30; q += 5) {
            if (k == q) continue;
            const double e = s.eps(k) + s.eps(q);
            EXPECT_NEAR(r.W_plus_kq(k, q) / r.W_minus_kq(k, q), filter_abs2(p, -e) / filter_abs2(p, e), 1e-9);
            const double asym = mcp_filter_asymptotic(beta, -e, p.T) / mcp_filter_asymptotic(beta, e, p.T);
            EXPECT_NEAR(std::log(filter_abs2(p, -e) / filter_abs2(p, e)), 2 * std::log(asym), 1e-3);
            // within the band the ratio follows exp(-2 beta e) up to the lattice aliases
            if (e < 1.2) EXPECT_NEAR(std::log(filter_abs2(p, -e) / filter_abs2(p, e)), -2 * beta * e, 0.05 * 2 * beta * e);
        }
    EXPECT_THROW(hermitian_z_rates(s, make_scp(4, 0.3), 0.05, E), std::invalid_argument);
}

TEST(HermitianZ, SteadyStateIndependentOfTheta) {
    const auto s = diagonalize({0.1, 0.2, 16});
    const auto E = build_elements(s, false);
    const auto p = make_mcp(20, 4.0);
    const auto a = steady_state(hermitian_z_rates(s, p, 0.05, E));
    const auto b = steady_state(hermitian_z_rates(s, p, 0.2, E));
    EXPECT_LE(((a.n - b.n).array() / a.n.array()).abs().maxCoeff(), 1e-8);
}

TEST(Scaling, PredictionShapes) {
    const ScalingModel m;
    EXPECT_NEAR(scaling_prediction(m, Phase::PM, 2e-5, 30, 0.1, 20) / scaling_prediction(m, Phase::PM, 1e-5, 30, 0.1, 20), 2.0, 1e-12);
    // strong noise, large N: square-root law
    EXPECT_NEAR(scaling_prediction(m, Phase::AFM, 4e-3, 30, 0.1, 80) / scaling_prediction(m, Phase::AFM, 1e-3, 30, 0.1, 80), 2.0, 1e-12);
    // weak noise, small N: linear law
    EXPECT_NEAR(scaling_prediction(m, Phase::AFM, 2e-9, 30, 0.1, 10) / scaling_prediction(m, Phase::AFM, 1e-9, 30, 0.1, 10), 2.0, 1e-12);
}

TEST(Scaling, FitRecoversSyntheticConstants) {
    ScalingModel truth;
    truth.Cgamma = 0.3, truth.Cgamma_prime = 0.02, truth.Ce = 5.0;
    std::vector<ScalingPoint> pm, afm;
    for (double g : {1e-7, 1e-6, 1e-5}) {
        pm.push_back({g, 30, 0.1, 20, scaling_prediction(truth, Phase::PM, g, 30, 0.1, 20)});
        afm.push_back({g, 30, 0.1, 10, scaling_prediction(truth, Phase::AFM, g, 30, 0.1, 10)});
    }
    afm.push_back({1e-2, 30, 0.1, 80, scaling_prediction(truth, Phase::AFM, 1e-2, 30, 0.1, 80)});
    const auto fit = fit_scaling(pm, afm);
    EXPECT_NEAR(fit.Cgamma, truth.Cgamma, 1e-12);
    EXPECT_NEAR(fit.Cgamma_prime, truth.Cgamma_prime, 1e-12);
    EXPECT_NEAR(fit.Ce, truth.Ce, 1e-9);
}
