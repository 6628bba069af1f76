// pulse.hpp: coupling pulses f_tau and their filter functions F_{h,T}(eps)
#pragma once

#include "spectrum.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

namespace qpc {

enum class PulseKind { SCP, MCP };

inline const char* to_string(PulseKind k) { return k == PulseKind::SCP ? "SCP" : "MCP"; }

struct Pulse {
    PulseKind kind{PulseKind::MCP};
    int T{1};
    double beta{0.0};
    double h{0.5};
    double A{1.0};  // MCP normalization; 1 for SCP
    std::vector<double> f;
};

inline Pulse make_scp(int T, double h) {
    if (T < 1) throw std::invalid_argument("make_scp: T must be >= 1");
    return {PulseKind::SCP, T, 0.0, h, 1.0, std::vector<double>(T, 1.0 / T)};
}

// Raw MCP shape sin(pi x/2)/sinh(pi x/beta), x = tau - T/2, with its x -> 0 limit beta/2.
inline double mcp_shape(double x, double beta) {
    if (std::abs(x) < 1e-9) return beta / 2.0;
    return std::sin(pi * x / 2.0) / std::sinh(pi * x / beta);
}

inline Pulse make_mcp(int T, double beta) {
    if (T < 2) throw std::invalid_argument("make_mcp: T must be >= 2");
    if (!(beta > 0)) throw std::invalid_argument("make_mcp: beta must be positive");
    Pulse p{PulseKind::MCP, T, beta, 0.5, 0.0, std::vector<double>(T)};
    double sum = 0.0;
    for (int t = 1; t <= T; ++t) sum += p.f[t - 1] = mcp_shape(t - 0.5 * T, beta);
    p.A = sum / beta;
    for (auto& x : p.f) x /= p.A * beta;
    return p;
}

// Exact finite sum F = pi sum_tau f_tau e^{i tau (eps - pi h)}.
inline cplx filter(const Pulse& p, double eps) {
    cplx acc = 0.0;
    const double w = eps - pi * p.h;
    for (int t = 1; t <= p.T; ++t) acc += p.f[t - 1] * std::polar(1.0, w * t);
    return pi * acc;
}

inline double filter_abs2(const Pulse& p, double eps) { return std::norm(filter(p, eps)); }

inline double scp_filter_closed_form(int T, double h, double eps) {
    const double x = eps - pi * h;
    const double s = std::sin(x / 2.0);
    if (std::abs(s) < 1e-15) return pi;
    return std::abs(pi / T * std::sin(x * T / 2.0) / s);
}

namespace detail {

// Residue sum of the infinite MCP series, periodized over the lattice aliases:
// P(eps) = sum_m s^m [tanh(beta (eps + 2 pi m)/2) - tanh(beta (eps + 2 pi m - pi)/2)],
// with s = -1 when the pulse has odd length and its samples sit on half-integers.
inline double mcp_residue_sum(double beta, double eps, bool odd) {
    const double e = std::remainder(eps, 2.0 * pi);
    auto term = [&](int m) {
        return std::tanh(0.5 * beta * (e + 2.0 * pi * m)) - std::tanh(0.5 * beta * (e + 2.0 * pi * m - pi));
    };
    double acc = term(0);
    for (int m = 1; m < 10000; ++m) {
        const double t = (odd && m % 2 ? -1.0 : 1.0) * (term(m) + term(-m));
        acc += t;
        if (std::abs(t) < 1e-18) break;
    }
    return acc;
}

}  // namespace detail

// Large-T limit of the normalized MCP filter (sum f = 1, so F(pi/2) = pi), for pulses of
// the parity of T. It is a smoothed step from 0 to pi across eps = 0 and back across
// eps = pi. For even T it obeys F(eps) + F(-eps) = 2 pi / P(pi/2), which is pi up to
// terms of order e^{-pi beta/2}.
inline double mcp_filter_asymptotic(double beta, double eps, int T = 0) {
    const bool odd = T % 2 != 0;
    return std::abs(pi * detail::mcp_residue_sum(beta, eps, odd) / detail::mcp_residue_sum(beta, 0.5 * pi, odd));
}

inline double mcp_reflection_constant(double beta) { return 2.0 * pi / detail::mcp_residue_sum(beta, 0.5 * pi, false); }

// The single-residue form as it is usually quoted, with prefactor pi, evaluated as written.
// It peaks at 2 pi, twice the normalized filter, and leaves out the lattice aliases.
inline double mcp_filter_asymptotic_quoted(double beta, double eps) {
    return pi * (std::tanh(eps * beta / 2.0) - std::tanh((eps - pi) * beta / 2.0)) / std::tanh(pi * beta / 4.0);
}

// Quoted truncation bound e^{-pi T/beta}/A and the one that matches the sum:
// the pulse is cut at |x| = T/2, so the tail is e^{-pi T/(2 beta)}.
inline double ringing_bound_quoted(const Pulse& p) { return std::exp(-pi * p.T / p.beta) / p.A; }
inline double ringing_bound(const Pulse& p) { return 2.5 * std::exp(-pi * p.T / (2.0 * p.beta)) / p.A; }

inline double suppression_ratio(const Pulse& p, double eps) {
    const double den = std::abs(filter(p, -eps));
    if (den == 0.0) return std::numeric_limits<double>::infinity();
    return std::abs(filter(p, eps)) / den;
}

struct FilterSample {
    double eps;
    cplx F;
};

// Uniform grid on (-pi, pi), endpoints excluded.
inline std::vector<FilterSample> filter_profile(const Pulse& p, int samples = 2048) {
    std::vector<FilterSample> out;
    out.reserve(samples);
    for (int i = 0; i < samples; ++i) {
        const double e = -pi + 2.0 * pi * (i + 0.5) / samples;
        out.push_back({e, filter(p, e)});
    }
    return out;
}

}  // namespace qpc
