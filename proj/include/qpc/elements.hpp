// elements.hpp: spin-operator matrix elements between quasiparticle Fock states
//
// Operators are linear forms in the Majoranas, x = sum_m c_m a_m, stored as rows.
// A product x_1 ... x_n taken in the vacuum is a Pfaffian of the contraction matrix
// Sigma_pq = <x_p x_q> (p < q), and only |Pf|^2 = |det Sigma| is needed.
#pragma once

#include "parallel.hpp"
#include "pfaffian.hpp"
#include "spectrum.hpp"

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

namespace qpc {

struct WrongPhase : std::logic_error {
    using std::logic_error::logic_error;
};

using OpRows = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Rows for the single Majoranas, c_j, c_j^dag (no string) and eta_k, eta_k^dag.
struct OpBasis {
    const FloquetSpectrum* s;
    Eigen::MatrixXcd C;  // vacuum contractions <a_m a_n>
    int jw_sign{1};      // -1 flips the site-operator convention; negative control for the oracle checks

    explicit OpBasis(const FloquetSpectrum& spec) : s(&spec), C(spec.contractions()) {}

    Eigen::Index dim() const { return 2 * s->size(); }

    Eigen::RowVectorXcd majorana(Eigen::Index m) const {
        Eigen::RowVectorXcd r = Eigen::RowVectorXcd::Zero(dim());
        r(m) = 1.0;
        return r;
    }
    // sign +1: c_j (lowers the qubit, sigma^+), sign -1: c_j^dag (sigma^-)
    Eigen::RowVectorXcd site_op(int j, int sign) const {
        Eigen::RowVectorXcd r = Eigen::RowVectorXcd::Zero(dim());
        r(2 * j) = 0.5;
        r(2 * j + 1) = cplx(0, 0.5 * sign * jw_sign);
        return r;
    }
    Eigen::RowVectorXcd eta(int k) const { return s->psi.col(k).conjugate().transpose() / std::sqrt(2.0); }
    Eigen::RowVectorXcd eta_dag(int k) const { return s->psi.col(k).transpose() / std::sqrt(2.0); }

    // Jordan-Wigner string of site j followed by the site operator: sigma^{+/-}_j up to a phase.
    OpRows sigma(int j, int sign) const {
        OpRows X = OpRows::Zero(2 * j + 1, dim());
        for (int m = 0; m < 2 * j; ++m) X(m, m) = 1.0;
        X.row(2 * j) = site_op(j, sign);
        return X;
    }

    Eigen::MatrixXcd wick_matrix(const OpRows& X) const {
        Eigen::MatrixXcd M = X * C * X.transpose();
        Eigen::MatrixXcd S = M.triangularView<Eigen::StrictlyUpper>();
        return S - S.transpose();
    }

    double wick_abs2(const OpRows& X) const {
        if (X.rows() % 2) return 0.0;
        return wick_modulus_squared(wick_matrix(X), false);
    }
};

inline OpRows stack(std::initializer_list<OpRows> parts) {
    Eigen::Index rows = 0, cols = 0;
    for (const auto& p : parts) rows += p.rows(), cols = std::max(cols, p.cols());
    OpRows X(rows, cols);
    Eigen::Index r = 0;
    for (const auto& p : parts) X.middleRows(r, p.rows()) = p, r += p.rows();
    return X;
}

inline OpRows row(const Eigen::RowVectorXcd& v) { return OpRows(v); }

// Per-site tables. Index convention (j = site, k, q = modes):
//   single_plus(j, k)     = |<0| s+_j |k>|^2      single_minus(j, k) = |<0| s-_j |k>|^2
//   pair_plus[j](k, q)    = |<0| s+_j |k q>|^2    pair_minus[j](k, q) = |<0| s-_j |k q>|^2
//   scatter_plus[j](k, q) = |<q| s+_j |k>|^2      scatter_minus[j](k, q) = |<q| s-_j |k>|^2
//   z_pair[j](k, q)       = |<0| Z_j |k q>|^2     z_scatter[j](k, q) = |<q| Z_j |k>|^2
// In the AFM phase the two-particle sigma elements connect the two vacua: the right
// state carries the edge mode as well, |k q> -> |k q 0>. Entries involving mode 0 vanish.
struct ElementTable {
    Phase phase{Phase::PM};
    int N{0};
    Eigen::MatrixXd single_plus, single_minus;
    std::vector<Eigen::MatrixXd> pair_plus, pair_minus, scatter_plus, scatter_minus;
    std::vector<Eigen::MatrixXd> z_pair, z_scatter;

    static Eigen::MatrixXd site_sum(const std::vector<Eigen::MatrixXd>& v, int N) {
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(N, N);
        for (const auto& m : v) acc += m;
        return acc;
    }
};

inline constexpr double element_floor = 1e-16;

inline double clamp_floor(double x) { return x < element_floor ? 0.0 : x; }

// Quadratic operator Z_j = -i a_{2j-1} a_{2j}: closed forms in u, v, antisymmetrized over (k, q).
inline double z_pair(const FloquetSpectrum& s, int j, int k, int q) {
    const cplx a = std::conj(s.v(j, k)) * s.u(j, q) - std::conj(s.v(j, q)) * s.u(j, k);
    return clamp_floor(4.0 * std::norm(a));
}
inline double z_scatter(const FloquetSpectrum& s, int j, int k, int q) {
    const cplx a = std::conj(s.u(j, k)) * s.u(j, q) - s.v(j, k) * std::conj(s.v(j, q));
    return clamp_floor(4.0 * std::norm(a));
}

inline double sigma_single(const OpBasis& B, int j, int k, int sign) {
    return clamp_floor(B.wick_abs2(stack({B.sigma(j, sign), row(B.eta_dag(k))})));
}

inline void require_afm(const FloquetSpectrum& s) {
    if (s.phase() != Phase::AFM) throw WrongPhase("two-particle sigma elements vanish by parity in the PM phase");
}

// Direct evaluation, one determinant per element. Used by tests and small chains.
inline double sigma_pair(const OpBasis& B, int j, int k, int q, int sign) {
    require_afm(*B.s);
    if (k == q || k == 0 || q == 0) return 0.0;
    return clamp_floor(B.wick_abs2(stack({B.sigma(j, sign), row(B.eta_dag(k)), row(B.eta_dag(q)), row(B.eta_dag(0))})));
}
// |<q| s_j |k>|^2 with the edge mode toggled on the right. k == q is allowed here
// (persistence amplitude); tables drop it since it cannot change occupations.
inline double sigma_scatter(const OpBasis& B, int j, int k, int q, int sign) {
    require_afm(*B.s);
    if (k == 0 || q == 0) return 0.0;
    return clamp_floor(B.wick_abs2(stack({row(B.eta(q)), B.sigma(j, sign), row(B.eta_dag(k)), row(B.eta_dag(0))})));
}

namespace detail {

// All AFM pair/scatter elements of one site and sign at once. The fixed operators
// (string, site operator, eta_0^dag) form a well-conditioned even block F; the two
// mode operators enter through the Schur complement S = D + B^T F^{-1} B, and
// Pf = Pf(F) S_xy. Contractions keep the original operator order: a fixed operator
// placed after the mode operator contributes -<x f>.
inline void two_particle_site(const OpBasis& B, int j, int sign, Eigen::MatrixXd& pair, Eigen::MatrixXd& scatter) {
    const int N = B.s->size();
    OpRows F = stack({B.sigma(j, sign), row(B.eta_dag(0))});
    const Eigen::Index nf = F.rows();
    const Eigen::MatrixXcd SF = B.wick_matrix(F);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(SF);
    const double detF = std::abs(lu.determinant());

    OpRows Ed(N, B.dim()), En(N, B.dim());
    for (int k = 0; k < N; ++k) Ed.row(k) = B.eta_dag(k), En.row(k) = B.eta(k);

    Eigen::MatrixXcd Bd = F * B.C * Ed.transpose();                   // <f eta_k^dag>
    Bd.row(nf - 1) = -(Ed * B.C * F.row(nf - 1).transpose()).transpose();  // eta_0^dag comes last
    const Eigen::MatrixXcd Bn = -(En * B.C * F.transpose()).transpose();    // eta_k comes first

    const Eigen::MatrixXcd FiBd = lu.solve(Bd);
    const Eigen::MatrixXcd Sp = Ed * B.C * Ed.transpose() + Bd.transpose() * FiBd;
    const Eigen::MatrixXcd Ss = En * B.C * Ed.transpose() + Bn.transpose() * FiBd;

    pair.setZero(N, N);
    scatter.setZero(N, N);
    for (int k = 1; k < N; ++k)
        for (int q = 1; q < N; ++q) {
            if (k == q) continue;
            pair(k, q) = clamp_floor(detF * std::norm(Sp(k, q)));
            // Ss(a, b) is the amplitude <a| s |b>; store as initial -> final
            scatter(q, k) = clamp_floor(detF * std::norm(Ss(k, q)));
        }
}

}  // namespace detail

inline ElementTable build_elements(const FloquetSpectrum& s, bool with_sigma_two = true) {
    const int N = s.size();
    OpBasis B(s);
    ElementTable E;
    E.phase = s.phase();
    E.N = N;
    E.single_plus.setZero(N, N);
    E.single_minus.setZero(N, N);
    E.z_pair.assign(N, Eigen::MatrixXd::Zero(N, N));
    E.z_scatter.assign(N, Eigen::MatrixXd::Zero(N, N));
    const bool two = with_sigma_two && s.phase() == Phase::AFM;
    if (two) {
        E.pair_plus.assign(N, Eigen::MatrixXd::Zero(N, N));
        E.pair_minus = E.scatter_plus = E.scatter_minus = E.pair_plus;
    }
    parallel_for(N, [&](int j) {
        for (int k = 0; k < N; ++k) {
            E.single_plus(j, k) = sigma_single(B, j, k, +1);
            E.single_minus(j, k) = sigma_single(B, j, k, -1);
            for (int q = 0; q < N; ++q) {
                if (q == k) continue;
                E.z_pair[j](k, q) = z_pair(s, j, k, q);
                E.z_scatter[j](k, q) = z_scatter(s, j, k, q);
            }
        }
        if (two) {
            detail::two_particle_site(B, j, +1, E.pair_plus[j], E.scatter_plus[j]);
            detail::two_particle_site(B, j, -1, E.pair_minus[j], E.scatter_minus[j]);
        }
    });
    return E;
}

}  // namespace qpc
