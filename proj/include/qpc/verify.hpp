// verify.hpp: cross-engine consistency checks (Wick vs dense, Gaussian vs dense, kinetic vs Gaussian)
#pragma once

#include "elements.hpp"
#include "gaussian.hpp"
#include "kinetics.hpp"
#include "oracle.hpp"
#include "pulse.hpp"
#include "spectrum.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace qpc {

struct CheckResult {
    std::string name;
    double deviation;
    double tolerance;
    bool pass() const { return deviation <= tolerance; }
};

struct VerifyOptions {
    int jw_sign{1};  // test hook: -1 must make the element check fail
};

// Largest |Wick - dense| over single, pair and scatter sigma elements of an N-site chain.
inline double wick_vs_dense(const ModelParams& p, int jw_sign = 1) {
    const auto s = diagonalize(p);
    OpBasis B(s);
    B.jw_sign = jw_sign;
    const auto F = oracle::fock_basis(s);
    const int N = p.N;
    double worst = 0.0;
    for (int j = 0; j < N; ++j) {
        const oracle::Mat sp = oracle::sigma_plus(N, j), sm = oracle::sigma_minus(N, j);
        for (int k = 0; k < N; ++k) {
            const auto ket = F.create({k});
            worst = std::max(worst, std::abs(sigma_single(B, j, k, +1) - oracle::element(F.vacuum, sp, ket)));
            worst = std::max(worst, std::abs(sigma_single(B, j, k, -1) - oracle::element(F.vacuum, sm, ket)));
        }
        if (s.phase() != Phase::AFM) continue;
        for (int k = 1; k < N; ++k)
            for (int q = 1; q < N; ++q) {
                if (k != q) {
                    const auto ket = F.create({k, q, 0});
                    worst = std::max(worst, std::abs(sigma_pair(B, j, k, q, +1) - oracle::element(F.vacuum, sp, ket)));
                    worst = std::max(worst, std::abs(sigma_pair(B, j, k, q, -1) - oracle::element(F.vacuum, sm, ket)));
                }
                const auto ket = F.create({k, 0}), bra = F.create({q});
                worst = std::max(worst, std::abs(sigma_scatter(B, j, k, q, +1) - oracle::element(bra, sp, ket)));
                worst = std::max(worst, std::abs(sigma_scatter(B, j, k, q, -1) - oracle::element(bra, sm, ket)));
            }
    }
    return worst;
}

// Largest dense |<0| sigma_j |k q>|^2 in the PM phase (parity forbids it).
inline double pm_pair_dense(const ModelParams& p) {
    const auto s = diagonalize(p);
    const auto F = oracle::fock_basis(s);
    double worst = 0.0;
    for (int j = 0; j < p.N; ++j) {
        const oracle::Mat sp = oracle::sigma_plus(p.N, j), sm = oracle::sigma_minus(p.N, j);
        for (int k = 0; k < p.N; ++k)
            for (int q = k + 1; q < p.N; ++q) {
                const auto ket = F.create({k, q});
                worst = std::max({worst, oracle::element(F.vacuum, sp, ket), oracle::element(F.vacuum, sm, ket)});
            }
    }
    return worst;
}

// Same quantity through the Wick engine: the operator string has odd length, so the Pfaffian is empty.
inline double pm_pair_wick(const ModelParams& p) {
    const auto s = diagonalize(p);
    OpBasis B(s);
    double worst = 0.0;
    for (int j = 0; j < p.N; ++j)
        for (int k = 0; k < p.N; ++k)
            for (int q = k + 1; q < p.N; ++q)
                for (int sg : {+1, -1})
                    worst = std::max(worst, B.wick_abs2(stack({B.sigma(j, sg), row(B.eta_dag(k)), row(B.eta_dag(q))})));
    return worst;
}

// Covariance of the dense edge channel vs the Gaussian channel after `cycles` cycles.
inline double gaussian_vs_dense(const ModelParams& p, const Pulse& pulse, double theta, int cycles, int edges) {
    const EdgeLayout L{p.N, edges};
    const auto setup = oracle::Setup::edge(p.N, edges);
    const auto cyc = oracle::make_cycle(p, pulse, theta, setup);
    const auto maj = oracle::majoranas(setup.n, setup.chain());
    oracle::Mat rho = oracle::initial_state(setup);
    Eigen::MatrixXd G = init_covariance(L);
    std::vector<Eigen::MatrixXd> K;
    for (int t = 1; t <= pulse.T; ++t) K.push_back(cycle_generator(p, pulse, theta, t, L));
    double worst = (oracle::covariance(rho, maj) - G).cwiseAbs().maxCoeff();
    for (int c = 0; c < cycles; ++c) {
        rho = oracle::apply_cooling_cycle(rho, cyc);
        for (const auto& k : K) G = step(G, k);
        G = reset(G, L);
        worst = std::max(worst, (oracle::covariance(rho, maj) - G).cwiseAbs().maxCoeff());
    }
    return worst;
}

// Worst relative density mismatch between the edge rate equation and the Gaussian channel,
// over samples where the density has fallen below 0.4.
inline double kinetic_vs_gaussian(const ModelParams& p, const Pulse& pulse, double theta, double t_max, int samples) {
    const auto s = diagonalize(p);
    const auto r = edge_rates(s, pulse, theta);
    const int pin = edge_pin(s);
    const long long cycles = std::llround(t_max / (theta * theta));
    const long long stride = std::max<long long>(1, cycles / samples);
    const auto traj = run_protocol(p, pulse, theta, cycles, stride, EdgeLayout{p.N, 2});
    const Eigen::VectorXd n0 = Eigen::VectorXd::Constant(p.N, 0.5);
    double worst = 0.0;
    for (const auto& pt : traj) {
        const double dk = density(edge_occupations_at(r, n0, static_cast<double>(pt.cycle)), pin);
        if (pt.density < 0.4) worst = std::max(worst, std::abs(dk - pt.density) / pt.density);
    }
    return worst;
}

inline std::vector<CheckResult> verify(const VerifyOptions& opt = {}) {
    std::vector<CheckResult> out;
    const ModelParams pm4{0.1, 0.2, 4}, afm4{0.2, 0.1, 4}, pm6{0.15, 0.3, 6}, afm6{0.3, 0.15, 6};
    double w = 0.0;
    for (const auto& p : {pm4, afm4, pm6, afm6}) w = std::max(w, wick_vs_dense(p, opt.jw_sign));
    out.push_back({"wick_vs_oracle_elements", w, 1e-8});
    out.push_back({"pm_pair_selection_rule_dense", std::max(pm_pair_dense(pm4), pm_pair_dense(pm6)), 1e-12});
    out.push_back({"pm_pair_selection_rule_wick", std::max(pm_pair_wick(pm4), pm_pair_wick(pm6)), 1e-12});
    out.push_back({"gaussian_vs_oracle_covariance",
                   std::max(gaussian_vs_dense(ModelParams{0.1, 0.2, 4}, make_scp(4, 0.3), 0.3, 100, 2),
                            gaussian_vs_dense(ModelParams{0.2, 0.1, 3}, make_mcp(6, 3.0), 0.3, 100, 2)),
                   1e-10});
    out.push_back({"kinetic_vs_gaussian_density",
                   kinetic_vs_gaussian(ModelParams{0.1, 0.2, 10}, make_mcp(28, 28.0 / 3.0), 0.02, 100.0, 100), 0.10});
    return out;
}

}  // namespace qpc
