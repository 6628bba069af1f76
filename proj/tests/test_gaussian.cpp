#include <qpc/gaussian.hpp>
#include <qpc/verify.hpp>

#include <gtest/gtest.h>

using namespace qpc;

namespace {

// Eigenvalues of 2 i Gamma must lie in [-1, 1] for a physical Gaussian state.
double spectral_excess(const Eigen::MatrixXd& G) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(cplx(0, 2) * G.cast<cplx>());
    return std::max(0.0, es.eigenvalues().cwiseAbs().maxCoeff() - 1.0);
}

}  // namespace

TEST(Covariance, InitialStructure) {
    const EdgeLayout L{2, 1};
    const auto G = init_covariance(L);
    ASSERT_EQ(G.rows(), 6);
    EXPECT_EQ(G(0, 1), -0.5);
    EXPECT_EQ(G(1, 0), 0.5);
    EXPECT_EQ(G.block(2, 2, 4, 4).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(spectral_excess(G), 0.0);
    EXPECT_THROW(init_covariance(EdgeLayout{2, 3}), std::invalid_argument);
}

TEST(Generator, OrthogonalEveryLayer) {
    const ModelParams p{0.2, 0.1, 8};
    const auto pulse = make_mcp(28, 28.0 / 3);
    const EdgeLayout L{8, 2};
    for (int t = 1; t <= pulse.T; ++t) {
        const auto K = cycle_generator(p, pulse, 0.3, t, L);
        EXPECT_LE((K * K.transpose() - Eigen::MatrixXd::Identity(L.dim(), L.dim())).cwiseAbs().maxCoeff(), 1e-12);
    }
    EXPECT_THROW(cycle_generator(p, pulse, 0.3, 0, L), std::out_of_range);
}

TEST(Generator, ZeroCouplingIsBlockDiagonal) {
    const ModelParams p{0.1, 0.2, 5};
    const EdgeLayout L{5, 2};
    const auto K = cycle_generator(p, make_scp(3, 0.3), 0.0, 1, L);
    EXPECT_LE((K.block(2, 2, 10, 10) - build_k_matrix(p)).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(K.block(0, 2, 2, 10).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(K.block(12, 2, 2, 10).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_NEAR(K(0, 0), std::cos(0.3 * pi), 1e-15);
}

TEST(Step, GroupAction) {
    const ModelParams p{0.2, 0.1, 4};
    const auto pulse = make_mcp(6, 3.0);
    const EdgeLayout L{4, 2};
    const auto K1 = cycle_generator(p, pulse, 0.3, 2, L), K2 = cycle_generator(p, pulse, 0.3, 3, L);
    const auto G = init_covariance(L);
    EXPECT_LE((step(step(G, K1), K2) - step(G, K2 * K1)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Reset, IdempotentAndPhysical) {
    const ModelParams p{0.2, 0.1, 4};
    const auto pulse = make_mcp(6, 3.0);
    const EdgeLayout L{4, 2};
    auto G = init_covariance(L);
    for (int t = 1; t <= 6; ++t) G = step(G, cycle_generator(p, pulse, 0.5, t, L));
    const auto R = reset(G, L);
    EXPECT_EQ(reset(R, L), R);
    EXPECT_LE(spectral_excess(R), 1e-12);
    EXPECT_EQ(R(0, 1), -0.5);
    EXPECT_EQ(R(2 * 4 + 2, 2 * 4 + 3), -0.5);
}

TEST(Occupations, KnownStates) {
    const auto s = diagonalize({0.1, 0.2, 6});
    const Eigen::VectorXd mixed = occupations(Eigen::MatrixXd::Zero(12, 12), s);
    EXPECT_LE((mixed.array() - 0.5).abs().maxCoeff(), 1e-15);
    // quasiparticle vacuum and a one-particle state, built as dense vectors
    const auto F = oracle::fock_basis(s);
    const oracle::Mat vac = F.vacuum * F.vacuum.adjoint();
    EXPECT_LE(occupations(oracle::covariance(vac, F.maj), s).cwiseAbs().maxCoeff(), 1e-12);
    const oracle::Vec one = F.create({2}).normalized();
    Eigen::VectorXd expect = Eigen::VectorXd::Zero(6);
    expect(2) = 1.0;
    EXPECT_LE((occupations(oracle::covariance(one * one.adjoint(), F.maj), s) - expect).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_THROW(occupations(Eigen::MatrixXd::Zero(10, 10), s), BasisMismatch);
}

TEST(Oracle, ExactPerCycle) {
    EXPECT_LE(gaussian_vs_dense({0.1, 0.2, 4}, make_scp(4, 0.3), 0.3, 40, 2), 1e-10);
    EXPECT_LE(gaussian_vs_dense({0.2, 0.1, 3}, make_mcp(6, 3.0), 0.3, 40, 2), 1e-10);
    EXPECT_LE(gaussian_vs_dense({0.2, 0.1, 5}, make_scp(3, 0.4), 0.2, 20, 1), 1e-10);
}

TEST(Affine, MatchesLayerByLayer) {
    const ModelParams p{0.2, 0.1, 6};
    const auto pulse = make_mcp(8, 4.0);
    const EdgeLayout L{6, 2};
    const auto m = cycle_map(p, pulse, 0.2, L);
    const auto full = run_cycles_full(p, pulse, 0.2, 13, L, init_covariance(L));
    const auto viaPower = power(m, 13).apply(system_block(init_covariance(L), L));
    EXPECT_LE((system_block(full, L) - viaPower).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Affine, SteadyStateIsFixedPoint) {
    const ModelParams p{0.1, 0.2, 10};
    const auto pulse = make_mcp(28, 28.0 / 3);
    const EdgeLayout L{10, 2};
    const auto m = cycle_map(p, pulse, 0.1, L);
    const auto G = affine_steady_state(m);
    EXPECT_LE((m.apply(G) - G).cwiseAbs().maxCoeff(), 1e-13);
    const auto traj = run_protocol(p, pulse, 0.1, 200000, 200000, L);
    const auto s = diagonalize(p);
    EXPECT_LE((traj.back().n - occupations(G, s)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Protocol, ThetaCollapse) {
    const ModelParams p{0.1, 0.2, 10};
    const auto pulse = make_mcp(28, 28.0 / 3);
    const EdgeLayout L{10, 2};
    const auto a = run_protocol(p, pulse, 0.04, 62500, 6250, L);
    const auto b = run_protocol(p, pulse, 0.02, 250000, 25000, L);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 1; i < a.size(); ++i) EXPECT_NEAR(a[i].density / b[i].density, 1.0, 0.05) << i;
}

TEST(Protocol, DensityDecreasesAfterTransient) {
    const ModelParams p{0.2, 0.1, 12};
    const auto traj = run_protocol(p, make_mcp(28, 28.0 / 3), 0.05, 40000, 400, EdgeLayout{12, 2});
    for (std::size_t i = 2; i < traj.size(); ++i) EXPECT_LE(traj[i].density, traj[i - 1].density + 1e-12) << i;
    EXPECT_LT(traj.back().density, 0.05);
}

TEST(Protocol, KineticAgreementWeakCoupling) {
    EXPECT_LE(kinetic_vs_gaussian({0.1, 0.2, 10}, make_mcp(28, 28.0 / 3), 0.02, 100, 50), 0.1);
}
