// gaussian.hpp: exact edge-cooling channel on the Majorana covariance matrix
//
// Chain order for the Jordan-Wigner map is [A_L, Q_1 .. Q_N, A_R]; the right auxiliary
// is optional. Gamma_mn = (i/4) <[a_m, a_n]> is real antisymmetric.
#pragma once

#include "kinetics.hpp"
#include "pulse.hpp"
#include "spectrum.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace qpc {

struct BasisMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct EdgeLayout {
    int N{1};
    int edges{2};  // 1: left auxiliary only, 2: both ends

    Eigen::Index dim() const { return 2 * (N + edges); }
    Eigen::Index sys0() const { return 2; }  // first system Majorana
    std::vector<Eigen::Index> bath() const {
        std::vector<Eigen::Index> b{0, 1};
        if (edges == 2) b.insert(b.end(), {2 * N + 2, 2 * N + 3});
        return b;
    }
};

inline void set_bath_block(Eigen::MatrixXd& G, Eigen::Index a) {
    G(a, a + 1) = -0.5;
    G(a + 1, a) = 0.5;
}

// Maximally mixed system, auxiliaries in |0>.
inline Eigen::MatrixXd init_covariance(const EdgeLayout& L) {
    if (L.edges != 1 && L.edges != 2) throw std::invalid_argument("init_covariance: edges must be 1 or 2");
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(L.dim(), L.dim());
    const auto b = L.bath();
    for (std::size_t i = 0; i < b.size(); i += 2) set_bath_block(G, b[i]);
    return G;
}

// One layer K = K_theta K_B K_S, with the coupling angle theta f_tau.
inline Eigen::MatrixXd cycle_generator(const ModelParams& p, const Pulse& pulse, double theta, int tau,
                                       const EdgeLayout& L) {
    if (tau < 1 || tau > pulse.T) throw std::out_of_range("cycle_generator: layer index out of range");
    const Eigen::Index D = L.dim();
    Eigen::MatrixXd KS = Eigen::MatrixXd::Identity(D, D);
    KS.block(L.sys0(), L.sys0(), 2 * p.N, 2 * p.N) = build_k_matrix(p);
    Eigen::MatrixXd KB = Eigen::MatrixXd::Identity(D, D);
    const auto b = L.bath();
    for (std::size_t i = 0; i < b.size(); i += 2) rotate_pair(KB, b[i], b[i + 1], pi * pulse.h);

    // Partial iSWAP on neighbours (s, s+1): rotation by phi on (a1, a4) and by -phi on (a2, a3).
    const double phi = pi * theta * pulse.f[tau - 1];
    Eigen::MatrixXd Kt = Eigen::MatrixXd::Identity(D, D);
    auto couple = [&](Eigen::Index site) {
        const Eigen::Index a1 = 2 * site, a2 = a1 + 1, a3 = a1 + 2, a4 = a1 + 3;
        rotate_pair(Kt, a1, a4, phi);
        rotate_pair(Kt, a2, a3, -phi);
    };
    couple(0);
    if (L.edges == 2) couple(p.N);
    return Kt * KB * KS;
}

inline Eigen::MatrixXd step(const Eigen::MatrixXd& G, const Eigen::MatrixXd& K) { return K * G * K.transpose(); }

inline Eigen::MatrixXd reset(Eigen::MatrixXd G, const EdgeLayout& L) {
    for (Eigen::Index b : L.bath()) {
        G.row(b).setZero();
        G.col(b).setZero();
    }
    const auto b = L.bath();
    for (std::size_t i = 0; i < b.size(); i += 2) set_bath_block(G, b[i]);
    return G;
}

inline Eigen::MatrixXd system_block(const Eigen::MatrixXd& G, const EdgeLayout& L) {
    return G.block(L.sys0(), L.sys0(), 2 * L.N, 2 * L.N);
}

// n_k = <eta_k^dag eta_k> from a system covariance block.
inline Eigen::VectorXd occupations(const Eigen::MatrixXd& Gss, const FloquetSpectrum& s) {
    if (Gss.rows() != 2 * s.size()) throw BasisMismatch("occupations: covariance does not match the spectrum");
    Eigen::VectorXd n(s.size());
    const Eigen::MatrixXcd Gc = Gss.cast<cplx>();
    for (int k = 0; k < s.size(); ++k) {
        const cplx x = s.psi.col(k).transpose() * Gc * s.psi.col(k).conjugate();
        n(k) = std::clamp(0.5 - (cplx(0, 1) * x).real(), 0.0, 1.0);
    }
    return n;
}

// Whole cycle reduced to the system: Gss' = A Gss A^T + C.
struct AffineCycle {
    Eigen::MatrixXd A, C;

    AffineCycle compose(const AffineCycle& first) const {  // this after first
        return {A * first.A, A * first.C * A.transpose() + C};
    }
    Eigen::MatrixXd apply(const Eigen::MatrixXd& G) const { return A * G * A.transpose() + C; }
};

inline AffineCycle cycle_map(const ModelParams& p, const Pulse& pulse, double theta, const EdgeLayout& L) {
    const Eigen::Index D = L.dim();
    Eigen::MatrixXd K = Eigen::MatrixXd::Identity(D, D);
    for (int t = 1; t <= pulse.T; ++t) K = cycle_generator(p, pulse, theta, t, L) * K;
    const auto b = L.bath();
    const Eigen::Index nb = static_cast<Eigen::Index>(b.size());
    Eigen::MatrixXd KSB(2 * p.N, nb), GBB = Eigen::MatrixXd::Zero(nb, nb);
    for (Eigen::Index i = 0; i < nb; ++i) KSB.col(i) = K.block(L.sys0(), b[i], 2 * p.N, 1);
    for (Eigen::Index i = 0; i < nb; i += 2) GBB(i, i + 1) = -0.5, GBB(i + 1, i) = 0.5;
    AffineCycle m{K.block(L.sys0(), L.sys0(), 2 * p.N, 2 * p.N), KSB * GBB * KSB.transpose()};
    return m;
}

// m-fold power by binary doubling.
inline AffineCycle power(const AffineCycle& m, long long times) {
    const Eigen::Index n = m.A.rows();
    AffineCycle acc{Eigen::MatrixXd::Identity(n, n), Eigen::MatrixXd::Zero(n, n)};
    AffineCycle sq = m;
    while (times > 0) {
        if (times & 1) acc = sq.compose(acc);
        sq = sq.compose(sq);
        times >>= 1;
    }
    return acc;
}

// Fixed point of Gss = A Gss A^T + C by squaring the map until it stops changing.
inline Eigen::MatrixXd affine_steady_state(const AffineCycle& m, int max_doublings = 80) {
    AffineCycle sq = m;
    for (int i = 0; i < max_doublings; ++i) {
        const AffineCycle next = sq.compose(sq);
        const double change = (next.C - sq.C).cwiseAbs().maxCoeff();
        sq = next;
        if (change < 1e-15 && sq.A.cwiseAbs().maxCoeff() < 1e-13) return sq.C;
    }
    throw NoConvergence("affine_steady_state: map is not contracting");
}

struct TrajectoryPoint {
    long long cycle;
    Eigen::VectorXd n;
    double density;
    double log_fidelity_per_qubit;
};

// Samples after every `stride` cycles up to `cycles`.
inline std::vector<TrajectoryPoint> run_protocol(const ModelParams& p, const Pulse& pulse, double theta,
                                                 long long cycles, long long stride, const EdgeLayout& L) {
    const auto spec = diagonalize(p);
    const int pin = edge_pin(spec);
    const AffineCycle one = cycle_map(p, pulse, theta, L);
    const AffineCycle jump = power(one, stride);
    Eigen::MatrixXd G = system_block(init_covariance(L), L);
    std::vector<TrajectoryPoint> out;
    auto record = [&](long long c) {
        const Eigen::VectorXd n = occupations(G, spec);
        out.push_back({c, n, density(n, pin), fidelity(n, pin).log_fidelity_per_qubit});
    };
    record(0);
    for (long long c = stride; c <= cycles; c += stride) {
        G = jump.apply(G);
        record(c);
    }
    return out;
}

// Layer-by-layer reference loop on the full covariance (small chains, oracle checks).
inline Eigen::MatrixXd run_cycles_full(const ModelParams& p, const Pulse& pulse, double theta, int cycles,
                                       const EdgeLayout& L, Eigen::MatrixXd G) {
    std::vector<Eigen::MatrixXd> K;
    for (int t = 1; t <= pulse.T; ++t) K.push_back(cycle_generator(p, pulse, theta, t, L));
    for (int c = 0; c < cycles; ++c) {
        for (const auto& k : K) G = step(G, k);
        G = reset(G, L);
    }
    return G;
}

inline Eigen::VectorXd gaussian_steady_occupations(const ModelParams& p, const Pulse& pulse, double theta,
                                                   const EdgeLayout& L) {
    const auto spec = diagonalize(p);
    return occupations(affine_steady_state(cycle_map(p, pulse, theta, L)), spec);
}

}  // namespace qpc
