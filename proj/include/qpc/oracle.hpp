// oracle.hpp: brute-force qubit simulator used as ground truth for the free-fermion engines
//
// Qubit 0 is the most significant bit of a basis index. |0> is spin up (Z = +1);
// sigma^+ = |0><1| lowers the qubit into |0>.
#pragma once

#include "kinetics.hpp"
#include "pulse.hpp"
#include "spectrum.hpp"

#include <Eigen/Dense>

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace qpc::oracle {

struct TooLarge : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct NonPositive : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct LabelAmbiguity : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

// coef * X^xmask Z^zmask
struct Pauli {
    int n{0};
    std::uint32_t x{0}, z{0};
    cplx coef{1.0};

    std::uint32_t bit(int q) const { return 1u << (n - 1 - q); }

    static Pauli X(int n, int q) { Pauli p{n}; p.x = p.bit(q); return p; }
    static Pauli Z(int n, int q) { Pauli p{n}; p.z = p.bit(q); return p; }
    static Pauli Y(int n, int q) { Pauli p{n}; p.x = p.z = p.bit(q); p.coef = cplx(0, 1); return p; }

    Pauli operator*(const Pauli& o) const {
        Pauli r{n, x ^ o.x, z ^ o.z, coef * o.coef};
        if (std::popcount(z & o.x) % 2) r.coef = -r.coef;
        return r;
    }
    // P|b> = sign(b) coef |b ^ x>
    double sign(std::uint32_t b) const { return std::popcount(b & z) % 2 ? -1.0 : 1.0; }

    Mat dense() const {
        const Eigen::Index d = Eigen::Index(1) << n;
        Mat M = Mat::Zero(d, d);
        for (std::uint32_t b = 0; b < d; ++b) M(b ^ x, b) = coef * sign(b);
        return M;
    }
    // P rho and rho P without forming P.
    Mat left(const Mat& rho) const {
        Mat out(rho.rows(), rho.cols());
        for (std::uint32_t b = 0; b < rho.rows(); ++b) out.row(b ^ x) = coef * sign(b) * rho.row(b);
        return out;
    }
    Mat right(const Mat& rho) const {
        Mat out(rho.rows(), rho.cols());
        for (std::uint32_t b = 0; b < rho.cols(); ++b) out.col(b) = coef * sign(b) * rho.col(b ^ x);
        return out;
    }
    cplx expect(const Mat& rho) const {  // tr(rho P)
        cplx acc = 0.0;
        for (std::uint32_t b = 0; b < rho.rows(); ++b) acc += rho(b, b ^ x) * sign(b);
        return coef * acc;
    }
};

// exp(-i phi P) for a Hermitian Pauli string P.
struct Rotation {
    Pauli P;
    double phi;

    Mat conjugate(const Mat& rho) const {  // R rho R^dag
        const double c = std::cos(phi), s = std::sin(phi);
        const cplx I(0, 1);
        const Mat a = c * rho - I * s * P.left(rho);
        return c * a + I * s * P.right(a);
    }
    Mat apply(const Mat& v) const { return std::cos(phi) * v - cplx(0, 1) * std::sin(phi) * P.left(v); }
};

using Circuit = std::vector<Rotation>;

inline Mat dense_unitary(const Circuit& c, int n) {
    Mat U = Mat::Identity(Eigen::Index(1) << n, Eigen::Index(1) << n);
    for (const auto& r : c) U = r.apply(U);
    return U;
}

// Jordan-Wigner Majoranas on the listed qubits, in list order.
inline std::vector<Pauli> majoranas(int n, const std::vector<int>& chain) {
    std::vector<Pauli> out;
    Pauli str{n};
    for (int q : chain) {
        out.push_back(str * Pauli::X(n, q));
        out.push_back(str * Pauli::Y(n, q));
        str = str * Pauli::Z(n, q);
    }
    return out;
}

// U_S on the system qubits `sys` (exp(i pi g/2 Z) per site, then exp(-i pi J/2 XX) per bond).
inline Circuit system_layer(const ModelParams& p, int n, const std::vector<int>& sys) {
    Circuit c;
    for (int q : sys) c.push_back({Pauli::Z(n, q), -0.5 * pi * p.g});
    for (std::size_t i = 0; i + 1 < sys.size(); ++i)
        c.push_back({Pauli::X(n, sys[i]) * Pauli::X(n, sys[i + 1]), 0.5 * pi * p.J});
    return c;
}

inline Mat build_floquet_unitary(const ModelParams& p) {
    if (p.N > 10) throw TooLarge("build_floquet_unitary: N_S > 10");
    std::vector<int> sys(p.N);
    for (int j = 0; j < p.N; ++j) sys[j] = j;
    return dense_unitary(system_layer(p, p.N, sys), p.N);
}

// Qubit layout of a cooling setup: system chain plus auxiliaries coupled to system sites.
struct Setup {
    int n{0};
    std::vector<int> sys, aux, partner;  // aux[i] couples to system qubit partner[i]

    // [A_L, Q_1 .. Q_N, (A_R)]: the Jordan-Wigner order of the Gaussian engine.
    static Setup edge(int N, int edges) {
        Setup s;
        s.n = N + edges;
        for (int j = 0; j < N; ++j) s.sys.push_back(j + 1);
        s.aux.push_back(0), s.partner.push_back(1);
        if (edges == 2) s.aux.push_back(N + 1), s.partner.push_back(N);
        return s;
    }
    // [Q_1 .. Q_N, A_1 .. A_N], one auxiliary per site.
    static Setup bulk(int N) {
        Setup s;
        s.n = 2 * N;
        for (int j = 0; j < N; ++j) s.sys.push_back(j), s.aux.push_back(N + j), s.partner.push_back(j);
        return s;
    }
    std::vector<int> chain() const {  // edge setups: all qubits in order
        std::vector<int> c(n);
        for (int q = 0; q < n; ++q) c[q] = q;
        return c;
    }
};

// One layer U_theta U_B U_S; the coupling is exp(-i (pi theta f/2)(XX + YY)).
inline Circuit cooling_layer(const ModelParams& p, const Pulse& pulse, double theta, int tau, const Setup& s) {
    Circuit c = system_layer(p, s.n, s.sys);
    for (int a : s.aux) c.push_back({Pauli::Z(s.n, a), -0.5 * pi * pulse.h});
    const double phi = 0.5 * pi * theta * pulse.f[tau - 1];
    for (std::size_t i = 0; i < s.aux.size(); ++i) {
        const int a = s.aux[i], q = s.partner[i];
        c.push_back({Pauli::X(s.n, a) * Pauli::X(s.n, q), phi});
        c.push_back({Pauli::Y(s.n, a) * Pauli::Y(s.n, q), phi});
    }
    return c;
}

// Trace out qubit q and put it back in |0>.
inline Mat reset_qubit(const Mat& rho, int n, int q) {
    const std::uint32_t b = 1u << (n - 1 - q);
    Mat out = Mat::Zero(rho.rows(), rho.cols());
    for (std::uint32_t i = 0; i < rho.rows(); ++i) {
        if (i & b) continue;
        for (std::uint32_t j = 0; j < rho.cols(); ++j) {
            if (j & b) continue;
            out(i, j) = rho(i, j) + rho(i | b, j | b);
        }
    }
    return out;
}

// First-order dissipator: decay sigma^+ at gamma_d, dephasing Z at gamma_phi (already halved).
inline Mat apply_noise_channel(const Mat& rho, const NoiseParams& nz, int n, const std::vector<int>& sys) {
    if (nz.gamma_d == 0.0 && nz.gamma_phi == 0.0) return rho;
    Mat out = rho;
    for (int q : sys) {
        const std::uint32_t b = 1u << (n - 1 - q);
        if (nz.gamma_d != 0.0) {
            // sigma^+ rho sigma^- - (1/2){P1, rho}, P1 = |1><1|
            for (std::uint32_t i = 0; i < rho.rows(); ++i)
                for (std::uint32_t j = 0; j < rho.cols(); ++j) {
                    cplx d = 0.0;
                    if (!(i & b) && !(j & b)) d += rho(i | b, j | b);
                    d -= 0.5 * ((i & b ? 1.0 : 0.0) + (j & b ? 1.0 : 0.0)) * rho(i, j);
                    out(i, j) += nz.gamma_d * d;
                }
        }
        if (nz.gamma_phi != 0.0) {
            for (std::uint32_t i = 0; i < rho.rows(); ++i)
                for (std::uint32_t j = 0; j < rho.cols(); ++j)
                    if (((i ^ j) & b) != 0) out(i, j) -= 2.0 * nz.gamma_phi * rho(i, j);
        }
    }
    return out;
}

struct DenseCycle {
    Setup setup;
    std::vector<Circuit> layers;
    NoiseParams noise{};
};

inline DenseCycle make_cycle(const ModelParams& p, const Pulse& pulse, double theta, const Setup& s,
                             NoiseParams nz = {}) {
    if (s.n > 12) throw TooLarge("oracle: more than 12 qubits");
    DenseCycle c{s, {}, nz};
    for (int t = 1; t <= pulse.T; ++t) c.layers.push_back(cooling_layer(p, pulse, theta, t, s));
    return c;
}

inline Mat apply_cooling_cycle(Mat rho, const DenseCycle& c) {
    for (const auto& layer : c.layers) {
        for (const auto& r : layer) rho = r.conjugate(rho);
        rho = apply_noise_channel(rho, c.noise, c.setup.n, c.setup.sys);
    }
    for (int a : c.setup.aux) rho = reset_qubit(rho, c.setup.n, a);
    return rho;
}

// Product state: system maximally mixed, auxiliaries in |0>.
inline Mat initial_state(const Setup& s) {
    const Eigen::Index d = Eigen::Index(1) << s.n;
    Mat rho = Mat::Identity(d, d);
    for (int a : s.aux) rho = reset_qubit(rho, s.n, a);
    return rho / rho.trace();
}

inline Eigen::MatrixXd covariance(const Mat& rho, const std::vector<Pauli>& maj) {
    const Eigen::Index m = static_cast<Eigen::Index>(maj.size());
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index b = a + 1; b < m; ++b) {
            // (i/4)<[a_a, a_b]> = (i/2)<a_a a_b> for distinct Majoranas
            const cplx v = cplx(0, 0.5) * (maj[a] * maj[b]).expect(rho);
            G(a, b) = v.real();
            G(b, a) = -v.real();
        }
    return G;
}

inline void check_physical(const Mat& rho, double tol) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol) throw NonPositive("oracle: state lost positivity");
}

// Fixed point of the system-only cycle map, by building it as a d^2 x d^2 superoperator.
inline Mat steady_system_state(const DenseCycle& c) {
    const Setup& s = c.setup;
    const int ns = static_cast<int>(s.sys.size());
    const Eigen::Index ds = Eigen::Index(1) << ns;
    const Eigen::Index d = Eigen::Index(1) << s.n;
    // system index <-> full index with auxiliaries in |0>
    std::vector<std::uint32_t> embed(ds);
    for (std::uint32_t i = 0; i < ds; ++i) {
        std::uint32_t full = 0;
        for (int k = 0; k < ns; ++k)
            if (i & (1u << (ns - 1 - k))) full |= 1u << (s.n - 1 - s.sys[k]);
        embed[i] = full;
    }
    Mat S(ds * ds, ds * ds);
    for (Eigen::Index a = 0; a < ds; ++a)
        for (Eigen::Index b = 0; b < ds; ++b) {
            Mat rho = Mat::Zero(d, d);
            rho(embed[a], embed[b]) = 1.0;
            const Mat out = apply_cooling_cycle(rho, c);
            for (Eigen::Index i = 0; i < ds; ++i)
                for (Eigen::Index j = 0; j < ds; ++j) S(i * ds + j, a * ds + b) = out(embed[i], embed[j]);
        }
    S -= Mat::Identity(ds * ds, ds * ds);
    // replace one equation by the trace condition
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(ds * ds);
    S.row(0).setZero();
    for (Eigen::Index i = 0; i < ds; ++i) S(0, i * ds + i) = 1.0;
    rhs(0) = 1.0;
    const Eigen::VectorXcd x = S.fullPivLu().solve(rhs);
    Mat rho_s(ds, ds);
    for (Eigen::Index i = 0; i < ds; ++i)
        for (Eigen::Index j = 0; j < ds; ++j) rho_s(i, j) = x(i * ds + j);
    return rho_s;
}

// Fock states of the free-fermion modes on an N-qubit chain, built from the
// spectrum's mode vectors and checked to be eigenstates of the dense U_S.
struct FockBasis {
    int N;
    std::vector<Mat> eta_dag;
    Vec vacuum;
    std::vector<Pauli> maj;

    Vec create(std::initializer_list<int> modes) const {
        Vec v = vacuum;
        for (auto it = std::rbegin(modes); it != std::rend(modes); ++it) v = eta_dag[*it] * v;
        return v;
    }
};

inline FockBasis fock_basis(const FloquetSpectrum& s) {
    const int N = s.size();
    if (N > 10) throw TooLarge("fock_basis: N_S > 10");
    FockBasis F{N, {}, {}, {}};
    std::vector<int> chain(N);
    for (int j = 0; j < N; ++j) chain[j] = j;
    F.maj = majoranas(N, chain);
    std::vector<Mat> a;
    for (const auto& m : F.maj) a.push_back(m.dense());
    const Eigen::Index d = Eigen::Index(1) << N;
    Mat number = Mat::Zero(d, d);
    for (int k = 0; k < N; ++k) {
        Mat ed = Mat::Zero(d, d);
        for (int m = 0; m < 2 * N; ++m) ed += s.psi(m, k) * a[m];
        ed /= std::sqrt(2.0);
        number += ed.adjoint() * ed;
        F.eta_dag.push_back(ed);
    }
    // eta eta^dag has eigenvalue 1 only on the vacuum of mode k; the sum is N there
    Eigen::SelfAdjointEigenSolver<Mat> es(number);
    const auto& ev = es.eigenvalues();
    if (std::abs(ev(d - 1) - N) > 1e-8 || ev(d - 2) > N - 0.5)
        throw LabelAmbiguity("fock_basis: vacuum is not unique");
    F.vacuum = es.eigenvectors().col(d - 1);
    return F;
}

// |<a| O |b>|^2 with O a dense operator.
inline double element(const Vec& a, const Mat& O, const Vec& b) { return std::norm(a.dot(O * b)); }

inline Mat sigma_plus(int n, int q) {
    return 0.5 * (Pauli::X(n, q).dense() + cplx(0, 1) * Pauli::Y(n, q).dense());
}
inline Mat sigma_minus(int n, int q) { return sigma_plus(n, q).adjoint(); }

}  // namespace qpc::oracle
