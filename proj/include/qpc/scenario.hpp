// scenario.hpp: flat key = value run configuration and deterministic CSV output
//
// Grammar: one `key = value...` per line; `#` starts a comment; list keys take
// whitespace-separated values. Keys not listed in Scenario are rejected.
#pragma once

#include "pulse.hpp"
#include "spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qpc {

struct ParseError : std::runtime_error {
    int line;
    std::string key;
    ParseError(int l, std::string k, const std::string& what)
        : std::runtime_error("line " + std::to_string(l) + ", key '" + k + "': " + what), line(l), key(std::move(k)) {}
};

struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

inline constexpr int csv_schema_version = 1;

struct Scenario {
    std::string name{"fig2a"};
    std::string setup{"edge"};   // edge | bulk
    int edges{2};
    std::string engine{"both"};  // kinetic | gaussian | both | oracle | scaling
    std::string coupling{"sigma"};  // sigma | z (Hermitian Z coupling, thermal runs)

    // models are (J[i], g[i]) pairs
    std::vector<double> J{0.1}, g{0.2};
    std::vector<int> N{20};
    double theta{0.02};

    std::string pulse{"mcp"};
    std::vector<int> T{28};
    std::vector<double> beta{28.0 / 3.0};
    double h{0.5};              // SCP auxiliary field; MCP always uses 1/2
    double T_over_beta{0.0};    // > 0: T = round(T_over_beta beta) for each beta
    double beta_gap{0.0};       // > 0: beta = beta_gap pi / Delta_mb per model

    double gamma_d{0.0}, gamma_phi{0.0};
    std::vector<double> gamma_over_theta2{};  // noise sweep axis; gamma_d = gamma_phi = ratio theta^2

    double t_max{300.0};        // trajectory length in t = cycles theta^2
    int samples{300};
    long long seed{0};

    std::vector<std::string> keys_set;  // what the config file actually provided

    ModelParams model(std::size_t i, int n) const { return {J.at(i), g.at(i), n}; }
    std::size_t models() const { return J.size(); }
};

namespace detail {

inline std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    for (std::string w; is >> w;) out.push_back(w);
    return out;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

template <class T>
T parse_one(const std::string& w, int line, const std::string& key) {
    std::istringstream is(w);
    T v;
    if (!(is >> v) || !is.eof()) throw ParseError(line, key, "cannot read '" + w + "'");
    return v;
}

}  // namespace detail

inline void validate(const Scenario& s) {
    if (s.setup != "edge" && s.setup != "bulk") throw ValidationError("setup must be edge or bulk");
    const std::vector<std::string> engines{"kinetic", "gaussian", "both", "oracle", "scaling"};
    if (std::find(engines.begin(), engines.end(), s.engine) == engines.end())
        throw ValidationError("unknown engine '" + s.engine + "'");
    if ((s.engine == "gaussian" || s.engine == "both") && s.setup != "edge")
        throw ValidationError("the gaussian engine is exact only for edge coupling (setup = edge)");
    if (s.engine == "oracle")
        for (int n : s.N) {
            const int qubits = s.setup == "edge" ? n + s.edges : 2 * n;
            if (qubits > 10) throw ValidationError("oracle engine is capped at 10 qubits");
        }
    if (s.edges != 1 && s.edges != 2) throw ValidationError("edges must be 1 or 2");
    if (s.pulse != "mcp" && s.pulse != "scp") throw ValidationError("pulse must be mcp or scp");
    if (s.coupling != "sigma" && s.coupling != "z") throw ValidationError("coupling must be sigma or z");
    if (s.coupling == "z" && s.pulse != "mcp") throw ValidationError("z coupling needs the mcp pulse");
    if (s.J.empty() || s.N.empty() || s.T.empty() || s.beta.empty()) throw ValidationError("sweep axes must be non-empty");
    if (s.J.size() != s.g.size()) throw ValidationError("J and g lists must have equal length");
    for (std::size_t i = 0; i < s.J.size(); ++i) s.model(i, 1).validate();
    for (int n : s.N)
        if (n < 2) throw ValidationError("N must be at least 2");
    if (!(s.theta > 0 && s.theta < 1)) throw ValidationError("theta must be in (0, 1)");
    if (s.gamma_d < 0 || s.gamma_phi < 0) throw ValidationError("noise rates must be non-negative");
    for (double r : s.gamma_over_theta2)
        if (!(r > 0)) throw ValidationError("gamma_over_theta2 entries must be positive");
    if (!(s.t_max > 0) || s.samples < 1) throw ValidationError("t_max and samples must be positive");
}

inline Scenario parse_config(const std::string& text) {
    Scenario s;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (auto c = raw.find('#'); c != std::string::npos) raw.erase(c);
        raw = detail::trim(raw);
        if (raw.empty()) continue;
        const auto eq = raw.find('=');
        if (eq == std::string::npos) throw ParseError(line, raw, "expected key = value");
        const std::string key = detail::trim(raw.substr(0, eq));
        const auto words = detail::split_ws(raw.substr(eq + 1));
        if (words.empty()) throw ParseError(line, key, "missing value");

        auto one = [&] {
            if (words.size() != 1) throw ParseError(line, key, "expected a single value");
            return words[0];
        };
        auto dbl = [&] { return detail::parse_one<double>(one(), line, key); };
        auto integer = [&] { return detail::parse_one<long long>(one(), line, key); };
        auto dlist = [&] {
            std::vector<double> v;
            for (const auto& w : words) v.push_back(detail::parse_one<double>(w, line, key));
            return v;
        };
        auto ilist = [&] {
            std::vector<int> v;
            for (const auto& w : words) v.push_back(detail::parse_one<int>(w, line, key));
            return v;
        };

        if (key == "name") s.name = one();
        else if (key == "setup") s.setup = one();
        else if (key == "edges") s.edges = static_cast<int>(integer());
        else if (key == "engine") s.engine = one();
        else if (key == "coupling") s.coupling = one();
        else if (key == "J") s.J = dlist();
        else if (key == "g") s.g = dlist();
        else if (key == "N") s.N = ilist();
        else if (key == "theta") s.theta = dbl();
        else if (key == "pulse") s.pulse = one();
        else if (key == "T") s.T = ilist();
        else if (key == "beta") s.beta = dlist();
        else if (key == "h") s.h = dbl();
        else if (key == "T_over_beta") s.T_over_beta = dbl();
        else if (key == "beta_gap") s.beta_gap = dbl();
        else if (key == "gamma_d") s.gamma_d = dbl();
        else if (key == "gamma_phi") s.gamma_phi = dbl();
        else if (key == "gamma_over_theta2") s.gamma_over_theta2 = dlist();
        else if (key == "t_max") s.t_max = dbl();
        else if (key == "samples") s.samples = static_cast<int>(integer());
        else if (key == "seed") s.seed = integer();
        else throw ParseError(line, key, "unknown key");
        s.keys_set.push_back(key);
    }
    if (s.pulse == "mcp") s.h = 0.5;
    validate(s);
    return s;
}

inline Scenario load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot open config " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

// Pulses for model i: one per beta (MCP) or per T (SCP).
inline std::vector<Pulse> resolve_pulses(const Scenario& s, const ModelParams& m) {
    std::vector<Pulse> out;
    if (s.pulse == "scp") {
        for (int T : s.T) out.push_back(make_scp(T, s.h));
        return out;
    }
    std::vector<double> betas = s.beta;
    if (s.beta_gap > 0) betas = {s.beta_gap * pi / gap(m).delta_mb};
    for (std::size_t i = 0; i < betas.size(); ++i) {
        int T = s.T.at(std::min(i, s.T.size() - 1));
        if (s.T_over_beta > 0) T = static_cast<int>(std::lround(s.T_over_beta * betas[i]));
        out.push_back(make_mcp(T, betas[i]));
    }
    return out;
}

// Shortest round-trip text for a double, so reruns are byte-identical.
inline std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::string& schema, const std::vector<std::string>& columns)
        : out_(path), path_(path) {
        if (!out_) throw std::runtime_error("cannot write " + path);
        out_ << "# schema_version=" << csv_schema_version << " schema=" << schema << "\n";
        for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
        out_ << "\n";
        width_ = columns.size();
    }

    template <class... Ts>
    void row(const Ts&... v) {
        static_assert(sizeof...(Ts) > 0);
        if (sizeof...(Ts) != width_) throw std::logic_error("CsvWriter: row width mismatch in " + path_);
        std::size_t i = 0;
        ((out_ << (i++ ? "," : "") << cell(v)), ...);
        out_ << "\n";
    }

    const std::string& path() const { return path_; }

private:
    static std::string cell(double x) { return fmt(x); }
    static std::string cell(int x) { return std::to_string(x); }
    static std::string cell(long x) { return std::to_string(x); }
    static std::string cell(long long x) { return std::to_string(x); }
    static std::string cell(const std::string& x) { return x; }
    static std::string cell(const char* x) { return x; }

    std::ofstream out_;
    std::string path_;
    std::size_t width_{0};
};

}  // namespace qpc
