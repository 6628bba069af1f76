// spectrum.hpp: Floquet transverse-field Ising chain, Majorana K-matrix and its eigenmodes
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace qpc {

using cplx = std::complex<double>;
inline constexpr double pi = std::numbers::pi;

struct CriticalPoint : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct DegenerateSpectrum : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Phase { PM, AFM };

inline const char* to_string(Phase p) { return p == Phase::PM ? "PM" : "AFM"; }

struct ModelParams {
    double J{0.1};
    double g{0.2};
    int N{20};

    Phase phase() const { return g > J ? Phase::PM : Phase::AFM; }

    void validate() const {
        if (!(J > 0.0 && J < 0.5) || !(g > 0.0 && g < 0.5))
            throw std::invalid_argument("model: need 0 < J, g < 1/2");
        if (N < 1) throw std::invalid_argument("model: N_S must be positive");
        if (std::abs(J - g) < 1e-12) throw CriticalPoint("model: J == g is the critical point");
    }
};

// Principal branch of the bulk dispersion.
inline double quasienergy(double k, const ModelParams& p) {
    const double c = std::cos(pi * p.J) * std::cos(pi * p.g) -
                     std::sin(pi * p.J) * std::sin(pi * p.g) * std::cos(k);
    return std::acos(std::clamp(c, -1.0, 1.0));
}

// Inverse of the dispersion; clamped so band-edge round-off still lands on [0, pi].
inline double quasimomentum(double eps, const ModelParams& p) {
    const double s = std::sin(pi * p.J) * std::sin(pi * p.g);
    const double c = (std::cos(pi * p.J) * std::cos(pi * p.g) - std::cos(eps)) / s;
    return std::acos(std::clamp(c, -1.0, 1.0));
}

struct Gap {
    double eps_min;
    double delta_mb;  // many-body gap 2 pi |J - g|, the convention used in every beta*Delta product
};

// Single-particle rotation by angle phi on the Majorana pair (a, b): a -> c a + s b.
inline void rotate_pair(Eigen::MatrixXd& K, Eigen::Index a, Eigen::Index b, double phi) {
    const double c = std::cos(phi), s = std::sin(phi);
    K(a, a) = c;
    K(a, b) = s;
    K(b, a) = -s;
    K(b, b) = c;
}

// K_S = K_J K_g acting on (a_1 .. a_2N). Majoranas are zero-based here.
inline Eigen::MatrixXd build_k_matrix(const ModelParams& p) {
    const Eigen::Index n2 = 2 * p.N;
    Eigen::MatrixXd Kg = Eigen::MatrixXd::Identity(n2, n2);
    Eigen::MatrixXd KJ = Eigen::MatrixXd::Identity(n2, n2);
    for (int j = 0; j < p.N; ++j) rotate_pair(Kg, 2 * j, 2 * j + 1, pi * p.g);
    for (int j = 0; j + 1 < p.N; ++j) rotate_pair(KJ, 2 * j + 1, 2 * j + 2, -pi * p.J);
    return KJ * Kg;
}

struct FloquetSpectrum {
    ModelParams params;
    Eigen::VectorXd eps;       // ascending, in [0, pi)
    Eigen::VectorXd k;         // quasimomenta from inverting the dispersion
    Eigen::MatrixXcd psi;      // 2N x N, column k is psi_k with K psi = e^{-i eps} psi
    Eigen::MatrixXcd u, v;     // N x N Bogoliubov coefficients u_{jk}, v_{jk}
    bool majorana_tagged{false};

    int size() const { return params.N; }
    Phase phase() const { return params.phase(); }
    // AFM: the lowest mode plays the edge (Majorana) role whether or not it is below
    // the tagging threshold; small chains have a visible splitting.
    bool has_edge_mode() const { return phase() == Phase::AFM; }

    // <a_m a_n> in the quasiparticle vacuum.
    Eigen::MatrixXcd contractions() const { return 2.0 * psi * psi.adjoint(); }

    // Real antisymmetric covariance of the vacuum, Gamma = (i/4)<[a_m, a_n]>.
    Eigen::MatrixXd vacuum_covariance() const { return -(psi * psi.adjoint()).imag(); }
};

namespace detail {

inline void fix_gauge(Eigen::Ref<Eigen::VectorXcd> x) {
    Eigen::Index m = 0;
    x.cwiseAbs().maxCoeff(&m);
    x *= std::polar(1.0, -std::arg(x(m)));
}

}  // namespace detail

inline FloquetSpectrum diagonalize(const ModelParams& p) {
    p.validate();
    const int N = p.N;
    const Eigen::MatrixXd K = build_k_matrix(p);
    Eigen::RealSchur<Eigen::MatrixXd> schur(K);
    const Eigen::MatrixXd& T = schur.matrixT();
    const Eigen::MatrixXd& Q = schur.matrixU();

    struct Mode {
        double eps;
        Eigen::VectorXcd psi;
    };
    std::vector<Mode> modes;
    std::vector<Eigen::VectorXd> unit;  // real eigenvalue +1 directions (exact zero modes)
    const Eigen::Index n2 = 2 * N;
    for (Eigen::Index i = 0; i < n2;) {
        if (i + 1 < n2 && std::abs(T(i + 1, i)) > 1e-14) {
            // K is orthogonal, so each block is a rotation by phi and its eigenvectors are
            // (1, -/+ i)/sqrt 2 exactly; reading them off the entries would lose accuracy
            // as phi -> 0.
            const double phi = std::atan2(0.5 * (T(i, i + 1) - T(i + 1, i)), 0.5 * (T(i, i) + T(i + 1, i + 1)));
            const Eigen::Vector2cd w(1.0 / std::sqrt(2.0), cplx(0, phi >= 0 ? -1.0 : 1.0) / std::sqrt(2.0));
            Eigen::VectorXcd x = Q.middleCols(i, 2).cast<cplx>() * w;
            x.normalize();
            const cplx lam = std::polar(1.0, -std::abs(phi));
            modes.push_back({-std::arg(lam), x});
            i += 2;
        } else {
            if (T(i, i) > 0) unit.push_back(Q.col(i));
            else throw DegenerateSpectrum("diagonalize: eigenvalue -1 (pi mode) outside the supported region");
            i += 1;
        }
    }
    if (unit.size() % 2 != 0) throw DegenerateSpectrum("diagonalize: unpaired real eigenvector");
    for (std::size_t a = 0; a < unit.size(); a += 2) {
        Eigen::VectorXcd x = (unit[a].cast<cplx>() + cplx(0, 1) * unit[a + 1].cast<cplx>()) / std::sqrt(2.0);
        modes.push_back({0.0, x});
    }
    if (static_cast<int>(modes.size()) != N) throw DegenerateSpectrum("diagonalize: wrong mode count");
    std::sort(modes.begin(), modes.end(), [](const Mode& x, const Mode& y) { return x.eps < y.eps; });

    FloquetSpectrum s;
    s.params = p;
    s.eps.resize(N);
    s.k.resize(N);
    s.psi.resize(n2, N);
    for (int m = 0; m < N; ++m) {
        s.eps(m) = std::max(modes[m].eps, 0.0);
        s.psi.col(m) = modes[m].psi;
        detail::fix_gauge(s.psi.col(m));
        s.k(m) = quasimomentum(s.eps(m), p);
    }
    for (int m = 1; m < N; ++m) {
        const double lo = s.eps(m - 1), hi = s.eps(m);
        if (hi - lo <= 1e-9 * std::max(hi, 1e-3) && !(p.phase() == Phase::AFM && m == 1))
            throw DegenerateSpectrum("diagonalize: coincident quasienergies at mode " + std::to_string(m));
    }
    s.majorana_tagged = p.phase() == Phase::AFM && s.eps(0) < 1e-6 * pi;

    s.u.resize(N, N);
    s.v.resize(N, N);
    const double r = 1.0 / std::sqrt(2.0);
    const cplx I(0, 1);
    for (int m = 0; m < N; ++m)
        for (int j = 0; j < N; ++j) {
            const cplx x = s.psi(2 * j, m), y = s.psi(2 * j + 1, m);
            s.u(j, m) = r * (x + I * y);
            s.v(j, m) = r * (std::conj(x) + I * std::conj(y));
        }
    return s;
}

inline Gap gap(const ModelParams& p) {
    if (std::abs(p.J - p.g) < 1e-12) throw CriticalPoint("gap: J == g");
    const auto s = diagonalize(p);
    const int first = s.has_edge_mode() ? 1 : 0;
    return {s.eps(std::min(first, p.N - 1)), 2.0 * pi * std::abs(p.J - p.g)};
}

struct EdgeWeight {
    double eps, u1, v1;
};

inline std::vector<EdgeWeight> edge_overlap_profile(const FloquetSpectrum& s) {
    std::vector<EdgeWeight> out;
    for (int m = 0; m < s.size(); ++m)
        out.push_back({s.eps(m), std::norm(s.u(0, m)), std::norm(s.v(0, m))});
    return out;
}

}  // namespace qpc
