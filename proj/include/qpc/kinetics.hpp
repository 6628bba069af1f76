// kinetics.hpp: quasiparticle rate equations, steady states, fidelity and the scaling models
#pragma once

#include "elements.hpp"
#include "pulse.hpp"
#include "spectrum.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace qpc {

struct DeadMode : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NoConvergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ClampViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OccupationState {
    Eigen::VectorXd n;
    long long cycle{0};
    int pinned{-1};  // AFM edge mode: held at 1/2, left out of density and fidelity
};

// Single-particle (W_k), pair (W_kq) and scattering (V_kq) rates per cooling cycle.
// W_minus_* remove quasiparticles, W_plus_* add them; V_minus(k, q) moves k -> q and
// V_plus(k, q) moves q -> k.
struct RateTable {
    Eigen::VectorXd W_minus_k, W_plus_k;
    Eigen::MatrixXd W_minus_kq, W_plus_kq, V_minus_kq, V_plus_kq;
    bool has_pair{false}, has_scatter{false};
    int pinned{-1};

    int size() const { return static_cast<int>(W_minus_k.size()); }

    static RateTable zeros(int N) {
        RateTable r;
        r.W_minus_k = r.W_plus_k = Eigen::VectorXd::Zero(N);
        r.W_minus_kq = r.W_plus_kq = r.V_minus_kq = r.V_plus_kq = Eigen::MatrixXd::Zero(N, N);
        return r;
    }
};

// gamma_phi is stored already halved, so the dephasing dissipator is gamma_phi (Z rho Z - rho).
struct NoiseParams {
    double gamma_d{0.0};
    double gamma_phi{0.0};
    int T{1};

    static NoiseParams from_rates(double gd, double gphi, int T) {
        if (gd < 0 || gphi < 0) throw std::invalid_argument("noise: rates must be non-negative");
        return {gd, 0.5 * gphi, T};
    }
};

inline int edge_pin(const FloquetSpectrum& s) { return s.has_edge_mode() ? 0 : -1; }

// Two edge auxiliaries, each contributing theta^2 |F|^2 times the boundary weight.
inline RateTable edge_rates(const FloquetSpectrum& s, const Pulse& p, double theta) {
    if (!(theta > 0)) throw std::invalid_argument("edge_rates: theta must be positive");
    const int N = s.size();
    RateTable r = RateTable::zeros(N);
    r.pinned = edge_pin(s);
    for (int k = 0; k < N; ++k) {
        r.W_minus_k(k) = 2.0 * theta * theta * filter_abs2(p, s.eps(k)) * std::norm(s.u(0, k));
        r.W_plus_k(k) = 2.0 * theta * theta * filter_abs2(p, -s.eps(k)) * std::norm(s.v(0, k));
    }
    return r;
}

inline OccupationState edge_steady_state(const RateTable& r) {
    OccupationState st;
    st.n.resize(r.size());
    for (int k = 0; k < r.size(); ++k) {
        const double tot = r.W_plus_k(k) + r.W_minus_k(k);
        if (!(tot > 0)) throw DeadMode("edge_steady_state: mode " + std::to_string(k) + " has no rates");
        st.n(k) = r.W_plus_k(k) / tot;
    }
    return st;
}

// Closed form of the per-cycle linear recurrence.
inline Eigen::VectorXd edge_occupations_at(const RateTable& r, const Eigen::VectorXd& n0, double cycles) {
    Eigen::VectorXd n(r.size());
    for (int k = 0; k < r.size(); ++k) {
        const double tot = r.W_plus_k(k) + r.W_minus_k(k);
        const double ninf = tot > 0 ? r.W_plus_k(k) / tot : n0(k);
        n(k) = ninf + (n0(k) - ninf) * std::pow(1.0 - tot, cycles);
    }
    return n;
}

inline std::vector<OccupationState> edge_evolve(const OccupationState& n0, const RateTable& r, long long cycles) {
    std::vector<OccupationState> traj{n0};
    Eigen::VectorXd n = n0.n;
    for (long long c = 1; c <= cycles; ++c) {
        n = n - n.cwiseProduct(r.W_minus_k) + (Eigen::VectorXd::Ones(n.size()) - n).cwiseProduct(r.W_plus_k);
        traj.push_back({n, n0.cycle + c, n0.pinned});
    }
    return traj;
}

inline double density(const Eigen::VectorXd& n, int pinned = -1) {
    double acc = 0.0;
    for (int k = 0; k < n.size(); ++k)
        if (k != pinned) acc += n(k);
    return acc / static_cast<double>(n.size());
}

struct Fidelity {
    double F;
    double log_fidelity_per_qubit;  // -log(F)/N_S
};

inline Fidelity fidelity(const Eigen::VectorXd& n, int pinned = -1) {
    double logF = 0.0;
    for (int k = 0; k < n.size(); ++k)
        if (k != pinned) logF += std::log1p(-std::min(n(k), 1.0));
    return {std::exp(logF), -logF / static_cast<double>(n.size())};
}

inline OccupationState gibbs_target(const FloquetSpectrum& s, double T_eff) {
    if (!(T_eff > 0)) throw std::invalid_argument("gibbs_target: temperature must be positive");
    OccupationState st;
    st.n.resize(s.size());
    for (int k = 0; k < s.size(); ++k) st.n(k) = 1.0 / (std::exp(s.eps(k) / T_eff) + 1.0);
    return st;
}

namespace detail {

// |F(+/- x)|^2 on the (k, q) grid of sums or differences.
inline Eigen::MatrixXd filter_grid(const Pulse& p, const Eigen::VectorXd& eps, double sk, double sq) {
    const int N = static_cast<int>(eps.size());
    Eigen::MatrixXd out(N, N);
    for (int k = 0; k < N; ++k)
        for (int q = 0; q < N; ++q) out(k, q) = filter_abs2(p, sk * eps(k) + sq * eps(q));
    return out;
}

}  // namespace detail

// Coupling-induced rates for one auxiliary per system site.
inline RateTable bulk_rates(const FloquetSpectrum& s, const Pulse& p, double theta, const ElementTable& E) {
    const int N = s.size();
    const double t2 = theta * theta;
    RateTable r = RateTable::zeros(N);
    r.pinned = edge_pin(s);
    const Eigen::VectorXd sp = E.single_plus.colwise().sum().transpose();
    const Eigen::VectorXd sm = E.single_minus.colwise().sum().transpose();
    for (int k = 0; k < N; ++k) {
        r.W_minus_k(k) = t2 * filter_abs2(p, s.eps(k)) * sp(k);
        r.W_plus_k(k) = t2 * filter_abs2(p, -s.eps(k)) * sm(k);
    }
    if (s.phase() == Phase::AFM && !E.pair_plus.empty()) {
        const Eigen::MatrixXd Fs = detail::filter_grid(p, s.eps, 1, 1);
        const Eigen::MatrixXd Fs_neg = detail::filter_grid(p, s.eps, -1, -1);
        const Eigen::MatrixXd Fd = detail::filter_grid(p, s.eps, 1, -1);
        const Eigen::MatrixXd Fd_neg = detail::filter_grid(p, s.eps, -1, 1);
        const Eigen::MatrixXd Pp = ElementTable::site_sum(E.pair_plus, N);
        const Eigen::MatrixXd Pm = ElementTable::site_sum(E.pair_minus, N);
        const Eigen::MatrixXd Sp = ElementTable::site_sum(E.scatter_plus, N);
        r.W_minus_kq = t2 * Fs.cwiseProduct(Pp);
        r.W_plus_kq = t2 * Fs_neg.cwiseProduct(Pm);
        r.V_minus_kq = t2 * Fd.cwiseProduct(Sp);
        r.V_plus_kq = t2 * Fd_neg.cwiseProduct(Eigen::MatrixXd(Sp.transpose()));
        r.has_pair = r.has_scatter = true;
    }
    return r;
}

// Adds decay (sigma^+ jumps) and dephasing (Z jumps); neither carries a filter.
inline RateTable noisy_rates(RateTable r, const ElementTable& E, const NoiseParams& nz) {
    if (nz.gamma_d == 0.0 && nz.gamma_phi == 0.0) return r;
    const int N = r.size();
    const double gd = nz.gamma_d * nz.T, gp = nz.gamma_phi * nz.T;
    r.W_minus_k += gd * E.single_plus.colwise().sum().transpose();
    r.W_plus_k += gd * E.single_minus.colwise().sum().transpose();
    const Eigen::MatrixXd Zp = ElementTable::site_sum(E.z_pair, N);
    const Eigen::MatrixXd Zs = ElementTable::site_sum(E.z_scatter, N);
    r.W_minus_kq += gp * Zp;
    r.W_plus_kq += gp * Zp;
    r.V_minus_kq += gp * Zs;
    r.V_plus_kq += gp * Eigen::MatrixXd(Zs.transpose());
    if (!E.pair_plus.empty()) {
        const Eigen::MatrixXd Sp = ElementTable::site_sum(E.scatter_plus, N);
        r.W_minus_kq += gd * ElementTable::site_sum(E.pair_plus, N);
        r.W_plus_kq += gd * ElementTable::site_sum(E.pair_minus, N);
        r.V_minus_kq += gd * Sp;
        r.V_plus_kq += gd * Eigen::MatrixXd(Sp.transpose());
    }
    r.has_pair = r.has_scatter = true;
    return r;
}

// Z_j couplings: pair and scattering transitions only, filtered at their Bohr frequencies.
inline RateTable hermitian_z_rates(const FloquetSpectrum& s, const Pulse& p, double theta, const ElementTable& E) {
    if (p.kind != PulseKind::MCP) throw std::invalid_argument("hermitian_z_rates: needs an MCP pulse");
    const int N = s.size();
    const double t2 = theta * theta;
    RateTable r = RateTable::zeros(N);
    r.pinned = edge_pin(s);
    const Eigen::MatrixXd Zp = ElementTable::site_sum(E.z_pair, N);
    const Eigen::MatrixXd Zs = ElementTable::site_sum(E.z_scatter, N);
    r.W_minus_kq = t2 * detail::filter_grid(p, s.eps, 1, 1).cwiseProduct(Zp);
    r.W_plus_kq = t2 * detail::filter_grid(p, s.eps, -1, -1).cwiseProduct(Zp);
    r.V_minus_kq = t2 * detail::filter_grid(p, s.eps, 1, -1).cwiseProduct(Zs);
    r.V_plus_kq = t2 * detail::filter_grid(p, s.eps, -1, 1).cwiseProduct(Eigen::MatrixXd(Zs.transpose()));
    r.has_pair = r.has_scatter = true;
    return r;
}

struct LossGain {
    Eigen::VectorXd L, G;
};

inline LossGain loss_gain(const RateTable& r, const Eigen::VectorXd& n) {
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(n.size());
    LossGain lg{r.W_minus_k, r.W_plus_k};
    if (r.has_pair) {
        lg.L += r.W_minus_kq * n;
        lg.G += r.W_plus_kq * (one - n);
    }
    if (r.has_scatter) {
        lg.L += r.V_minus_kq * (one - n);
        lg.G += r.V_plus_kq * n;
    }
    return lg;
}

// One cycle of the kinetic equation: delta n_k = -n_k L_k(n) + (1 - n_k) G_k(n).
inline Eigen::VectorXd bulk_step(const Eigen::VectorXd& n, const RateTable& r) {
    const auto lg = loss_gain(r, n);
    Eigen::VectorXd dn = -n.cwiseProduct(lg.L) + (Eigen::VectorXd::Ones(n.size()) - n).cwiseProduct(lg.G);
    if (r.pinned >= 0) dn(r.pinned) = 0.0;
    return dn;
}

struct ClampStats {
    long long steps{0}, violations{0};
    double worst{0.0};
};

// Explicit per-cycle integration; `observe` sees the state after every recorded cycle.
inline OccupationState evolve(OccupationState st, const RateTable& r, long long cycles,
                              const std::function<void(const OccupationState&)>& observe = {},
                              long long every = 1, ClampStats* stats = nullptr) {
    ClampStats local;
    ClampStats& cs = stats ? *stats : local;
    for (long long c = 1; c <= cycles; ++c) {
        st.n += bulk_step(st.n, r);
        for (int k = 0; k < st.n.size(); ++k) {
            const double x = st.n(k);
            const double over = std::max(-x, x - 1.0);
            if (over > 0) {
                cs.worst = std::max(cs.worst, over);
                if (over > 1e-9) ++cs.violations;
                st.n(k) = std::clamp(x, 0.0, 1.0);
            }
        }
        ++cs.steps;
        ++st.cycle;
        if (cs.violations > 1e-6 * cs.steps * st.n.size() && cs.steps > 1000)
            throw ClampViolation("evolve: occupations left [0, 1]; step too large");
        if (observe && (c % every == 0 || c == cycles)) observe(st);
    }
    return st;
}

struct SteadyOptions {
    double damping{0.5};
    double tol{1e-12};
    int fixed_point_iters{5000};
    long long evolve_cap{10'000'000};
};

struct SteadyReport {
    int fixed_point_iters{0};
    int newton_iters{0};
    long long evolve_cycles{0};
    double residual{0.0};
};

namespace detail {

// Largest deviation of n from the instantaneous balance point G/(G+L), in units of n.
inline double balance_residual(const RateTable& r, const Eigen::VectorXd& n) {
    const auto lg = loss_gain(r, n);
    double worst = 0.0;
    for (int k = 0; k < n.size(); ++k) {
        if (k == r.pinned) continue;
        const double tot = lg.L(k) + lg.G(k);
        if (!(tot > 0)) throw DeadMode("steady_state: mode " + std::to_string(k) + " has no rates");
        worst = std::max(worst, std::abs(n(k) - lg.G(k) / tot) / std::max(n(k), 1e-300));
    }
    return worst;
}

inline bool newton(const RateTable& r, Eigen::VectorXd& n, int& iters, double tol) {
    const int N = static_cast<int>(n.size());
    std::vector<int> free;
    for (int k = 0; k < N; ++k)
        if (k != r.pinned) free.push_back(k);
    const int m = static_cast<int>(free.size());
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(N);
    for (iters = 0; iters < 200; ++iters) {
        const auto lg = loss_gain(r, n);
        const Eigen::VectorXd res = -n.cwiseProduct(lg.L) + (one - n).cwiseProduct(lg.G);
        Eigen::MatrixXd Jm = Eigen::MatrixXd::Zero(N, N);
        if (r.has_pair) {
            Jm -= n.asDiagonal() * r.W_minus_kq;
            Jm -= (one - n).asDiagonal() * r.W_plus_kq;
        }
        if (r.has_scatter) {
            Jm += n.asDiagonal() * r.V_minus_kq;
            Jm += (one - n).asDiagonal() * r.V_plus_kq;
        }
        Jm.diagonal() -= lg.L + lg.G;
        Eigen::MatrixXd Jf(m, m);
        Eigen::VectorXd rf(m);
        for (int a = 0; a < m; ++a) {
            rf(a) = res(free[a]);
            for (int b = 0; b < m; ++b) Jf(a, b) = Jm(free[a], free[b]);
        }
        const Eigen::VectorXd dn = Jf.partialPivLu().solve(-rf);
        if (!dn.allFinite()) return false;
        double step = 1.0;
        for (int a = 0; a < m; ++a) {
            const double x = n(free[a]), d = dn(a);
            if (x + step * d <= 0) step = std::min(step, 0.5 * x / -d);
            if (x + step * d >= 1) step = std::min(step, 0.5 * (1 - x) / d);
        }
        bool small = true;
        for (int a = 0; a < m; ++a) {
            n(free[a]) += step * dn(a);
            if (std::abs(step * dn(a)) > tol * n(free[a])) small = false;
        }
        if (small) return true;
    }
    return false;
}

}  // namespace detail

// Damped fixed point n <- (1-d) n + d G/(G+L), polished by Newton; plain time evolution
// is the last resort.
inline OccupationState steady_state(const RateTable& r, const SteadyOptions& opt = {}, SteadyReport* rep = nullptr,
                                    const Eigen::VectorXd* start = nullptr) {
    const int N = r.size();
    OccupationState st;
    st.pinned = r.pinned;
    st.n = start ? *start : Eigen::VectorXd::Constant(N, 0.5);
    if (r.pinned >= 0) st.n(r.pinned) = 0.5;
    SteadyReport local;
    SteadyReport& R = rep ? *rep : local;

    for (R.fixed_point_iters = 0; R.fixed_point_iters < opt.fixed_point_iters; ++R.fixed_point_iters) {
        const auto lg = loss_gain(r, st.n);
        double worst = 0.0;
        for (int k = 0; k < N; ++k) {
            if (k == r.pinned) continue;
            const double tot = lg.L(k) + lg.G(k);
            if (!(tot > 0)) throw DeadMode("steady_state: mode " + std::to_string(k) + " has no rates");
            const double target = lg.G(k) / tot;
            worst = std::max(worst, std::abs(target - st.n(k)) / std::max(st.n(k), 1e-300));
            st.n(k) += opt.damping * (target - st.n(k));
        }
        if (worst < 1e-6) break;
    }
    Eigen::VectorXd trial = st.n;
    if (detail::newton(r, trial, R.newton_iters, opt.tol) && detail::balance_residual(r, trial) < 1e-8) {
        st.n = trial;
    } else {
        long long used = 0;
        const long long chunk = 1000;
        while (detail::balance_residual(r, st.n) > 1e-8) {
            if (used >= opt.evolve_cap) throw NoConvergence("steady_state: no convergence within the cycle cap");
            st = evolve(st, r, chunk);
            used += chunk;
        }
        R.evolve_cycles = used;
    }
    R.residual = detail::balance_residual(r, st.n);
    return st;
}

// Order-one constants of the simplified noisy equations. Only ratios are identifiable
// from steady states, so C1 and C2 are held at 1 and the rest are fitted against them.
struct ScalingModel {
    double C1{1.0}, C2{1.0}, Ce{1.0}, Cgamma{1.0}, Cgamma_prime{1.0};
};

struct ScalingPoint {
    double gamma, T, theta;
    int N;
    double n_inf;
};

inline double scaling_prediction(const ScalingModel& m, Phase phase, double gamma, double T, double theta, int N) {
    const double x = gamma * T / (theta * theta);
    if (phase == Phase::PM) return m.Cgamma * x / m.C1;
    const double weak = pi * pi * m.Cgamma_prime / (6.0 * m.Ce) * x * N * N;
    if (weak * N < 1.0) return weak;
    return std::sqrt(m.Cgamma_prime * x / m.C2);
}

// Least squares in log space, one constant per regime; regimes split by n N vs 1.
inline ScalingModel fit_scaling(const std::vector<ScalingPoint>& pm, const std::vector<ScalingPoint>& afm) {
    ScalingModel m;
    auto mean_log = [](const std::vector<double>& v) {
        if (v.empty()) return 0.0;
        double s = 0.0;
        for (double x : v) s += std::log(x);
        return s / v.size();
    };
    std::vector<double> cg, cgp, cc;
    for (const auto& p : pm) cg.push_back(p.n_inf / (p.gamma * p.T / (p.theta * p.theta)));
    for (const auto& p : afm) {
        const double x = p.gamma * p.T / (p.theta * p.theta);
        if (p.n_inf * p.N > 1.0) cgp.push_back(p.n_inf * p.n_inf / x);
        else cc.push_back(p.n_inf / (x * p.N * p.N));
    }
    if (!cg.empty()) m.Cgamma = std::exp(mean_log(cg));
    if (!cgp.empty()) m.Cgamma_prime = std::exp(mean_log(cgp));
    if (!cc.empty()) m.Ce = pi * pi * m.Cgamma_prime / (6.0 * std::exp(mean_log(cc)));
    return m;
}

}  // namespace qpc
