// qpc-cli: runs cooling scenarios from flat config files and writes CSV + manifest JSON.
//
// exit codes: 0 ok, 1 verify found a failing check, 2 bad config/arguments, 3 engine error

#include <qpc/qpc.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace qpc;

namespace {

struct Options {
    std::string config;
    std::string engine;
    std::string out{"out"};
    int jobs{1};
    std::optional<long long> seed;
    std::vector<double> betas;  // thermal override
    bool perturb_jw{false};
};


std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", x);
    return buf;
}

std::string model_tag(const Scenario& s, std::size_t i, int N) {
    const auto m = s.model(i, N);
    return std::string(to_string(m.phase())) + "_J" + num(m.J) + "_g" + num(m.g) + "_N" + std::to_string(N);
}

std::string pulse_tag(const Pulse& p) {
    if (p.kind == PulseKind::SCP) return "SCP_T" + std::to_string(p.T) + "_h" + num(p.h);
    return "MCP_T" + std::to_string(p.T) + "_beta" + num(p.beta);
}

json pulse_json(const Pulse& p) {
    json j{{"kind", to_string(p.kind)}, {"T", p.T}, {"h", p.h}};
    if (p.kind == PulseKind::MCP) j["beta"] = p.beta, j["A"] = p.A;
    return j;
}

json scenario_json(const Scenario& s) {
    return json{{"name", s.name},
                {"setup", s.setup},
                {"edges", s.edges},
                {"engine", s.engine},
                {"coupling", s.coupling},
                {"J", s.J},
                {"g", s.g},
                {"N", s.N},
                {"theta", s.theta},
                {"pulse", s.pulse},
                {"T", s.T},
                {"beta", s.beta},
                {"h", s.h},
                {"T_over_beta", s.T_over_beta},
                {"beta_gap", s.beta_gap},
                {"gamma_d", s.gamma_d},
                {"gamma_phi", s.gamma_phi},
                {"gamma_over_theta2", s.gamma_over_theta2},
                {"t_max", s.t_max},
                {"samples", s.samples},
                {"seed", s.seed}};
}

class Run {
public:
    Run(std::string cmd, Scenario s, Options o) : cmd_(std::move(cmd)), s_(std::move(s)), o_(std::move(o)) {
        fs::create_directories(o_.out);
        manifest_ = json{{"tool", "qpc-cli"},
                         {"version", QPC_VERSION},
                         {"csv_schema_version", csv_schema_version},
                         {"command", cmd_},
                         {"config", o_.config},
                         {"scenario", scenario_json(s_)},
                         {"runs", json::array()},
                         {"outputs", json::array()},
                         {"errors", json::array()}};
    }

    const Scenario& sc() const { return s_; }
    const Options& opt() const { return o_; }

    CsvWriter csv(const std::string& stem, const std::string& schema, const std::vector<std::string>& cols) {
        const std::string path = (fs::path(o_.out) / (s_.name + "_" + stem + ".csv")).string();
        manifest_["outputs"].push_back(fs::path(path).filename().string());
        return CsvWriter(path, schema, cols);
    }
    void record(json j) { manifest_["runs"].push_back(std::move(j)); }
    void error(const std::string& what) { manifest_["errors"].push_back(what); }
    json& manifest() { return manifest_; }

    void finish() {
        std::ofstream f(fs::path(o_.out) / (s_.name + "_" + cmd_ + "_manifest.json"));
        f << manifest_.dump(2) << "\n";
    }

private:
    std::string cmd_;
    Scenario s_;
    Options o_;
    json manifest_;
};

json model_json(const ModelParams& m) {
    return json{{"J", m.J}, {"g", m.g}, {"N_S", m.N}, {"phase", to_string(m.phase())},
                {"delta_mb", 2.0 * pi * std::abs(m.J - m.g)}};
}

// ---- subcommands ---------------------------------------------------------------------

void cmd_dispersion(Run& run) {
    const auto& s = run.sc();
    for (std::size_t i = 0; i < s.models(); ++i)
        for (int N : s.N) {
            const auto m = s.model(i, N);
            const auto spec = diagonalize(m);
            auto w = run.csv("spectrum_" + model_tag(s, i, N), "spectrum", {"mode_index", "k_m", "eps_k", "u1_abs2", "v1_abs2"});
            const auto prof = edge_overlap_profile(spec);
            for (int k = 0; k < N; ++k) w.row(k, spec.k(k), spec.eps(k), prof[k].u1, prof[k].v1);
            const auto gp = gap(m);
            run.record({{"model", model_json(m)}, {"eps_min", gp.eps_min}, {"edge_mode", spec.has_edge_mode()},
                        {"majorana_tagged", spec.majorana_tagged}});
        }
}

void cmd_filter(Run& run) {
    const auto& s = run.sc();
    for (const auto& p : resolve_pulses(s, s.model(0, s.N[0]))) {
        auto w = run.csv("filter_" + pulse_tag(p), "filter", {"eps", "re_F", "im_F", "abs_F"});
        for (const auto& x : filter_profile(p)) w.row(x.eps, x.F.real(), x.F.imag(), std::abs(x.F));
        json j{{"pulse", pulse_json(p)}};
        if (p.kind == PulseKind::MCP) {
            auto a = run.csv("filter_asymptotic_beta" + num(p.beta), "filter", {"eps", "re_F", "im_F", "abs_F"});
            double worst = 0.0;
            for (const auto& x : filter_profile(p)) {
                const double fa = mcp_filter_asymptotic(p.beta, x.eps, p.T);
                a.row(x.eps, fa, 0.0, std::abs(fa));
                worst = std::max(worst, std::abs(std::abs(x.F) - std::abs(fa)));
            }
            j["max_abs_deviation_from_asymptotic"] = worst;
            j["ringing_bound"] = ringing_bound(p);
            j["ringing_bound_quoted"] = ringing_bound_quoted(p);
        }
        run.record(j);
    }
}

void cmd_elements(Run& run) {
    const auto& s = run.sc();
    for (std::size_t i = 0; i < s.models(); ++i)
        for (int N : s.N) {
            const auto spec = diagonalize(s.model(i, N));
            const auto E = build_elements(spec);
            auto w = run.csv("elements_" + model_tag(s, i, N), "elements", {"j", "k_index", "q_index", "family", "value"});
            for (int j = 0; j < N; ++j)
                for (int k = 0; k < N; ++k) {
                    w.row(j, k, -1, std::string("sigma_plus_single"), E.single_plus(j, k));
                    w.row(j, k, -1, std::string("sigma_minus_single"), E.single_minus(j, k));
                }
            auto two = [&](const std::vector<Eigen::MatrixXd>& t, const char* fam) {
                for (std::size_t j = 0; j < t.size(); ++j)
                    for (int k = 0; k < N; ++k)
                        for (int q = 0; q < N; ++q)
                            if (k != q) w.row(static_cast<int>(j), k, q, std::string(fam), t[j](k, q));
            };
            two(E.pair_plus, "sigma_plus_pair");
            two(E.pair_minus, "sigma_minus_pair");
            two(E.scatter_plus, "sigma_plus_scatter");
            two(E.scatter_minus, "sigma_minus_scatter");
            two(E.z_pair, "z_pair");
            two(E.z_scatter, "z_scatter");
            run.record({{"model", model_json(s.model(i, N))}});
        }
}

std::vector<std::string> traj_cols() { return {"cycle", "t_rescaled", "density", "log_fidelity_per_qubit", "source"}; }
std::vector<std::string> steady_cols() { return {"mode_index", "eps_k", "n_inf"}; }

void cmd_cool_edge(Run& run) {
    const auto& s = run.sc();
    if (s.setup != "edge") throw ValidationError("cool-edge needs setup = edge");
    if (s.gamma_d > 0 || s.gamma_phi > 0) throw ValidationError("noise is only modelled for bulk coupling");
    if (s.engine == "oracle" || s.engine == "scaling") throw ValidationError("cool-edge runs the kinetic and/or gaussian engines");
    const bool kin = s.engine == "kinetic" || s.engine == "both";
    const bool gau = s.engine == "gaussian" || s.engine == "both";
    if (s.edges != 2 && kin) throw ValidationError("the edge rate equation assumes two auxiliaries (edges = 2)");
    const double t2 = s.theta * s.theta;
    const long long cycles = std::llround(s.t_max / t2);
    const long long stride = std::max<long long>(1, cycles / s.samples);

    for (std::size_t i = 0; i < s.models(); ++i)
        for (int N : s.N) {
            const auto m = s.model(i, N);
            const auto spec = diagonalize(m);
            const int pin = edge_pin(spec);
            for (const auto& p : resolve_pulses(s, m)) {
                const std::string tag = model_tag(s, i, N) + "_" + pulse_tag(p);
                json rec{{"model", model_json(m)}, {"pulse", pulse_json(p)}, {"theta", s.theta},
                         {"cycles", cycles}, {"stride", stride}, {"edges", s.edges}};
                std::vector<std::array<double, 4>> kt, gt;
                if (kin) {
                    const auto r = edge_rates(spec, p, s.theta);
                    const Eigen::VectorXd n0 = Eigen::VectorXd::Constant(N, 0.5);
                    auto w = run.csv("trajectory_kinetic_" + tag, "trajectory", traj_cols());
                    for (long long c = 0; c <= cycles; c += stride) {
                        const Eigen::VectorXd n = edge_occupations_at(r, n0, static_cast<double>(c));
                        kt.push_back({double(c), c * t2, density(n, pin), fidelity(n, pin).log_fidelity_per_qubit});
                        w.row(c, c * t2, kt.back()[2], kt.back()[3], std::string("kinetic"));
                    }
                    auto st = edge_steady_state(r);
                    if (pin >= 0) st.n(pin) = 0.5;
                    auto ws = run.csv("steady_kinetic_" + tag, "steady_state", steady_cols());
                    for (int k = 0; k < N; ++k) ws.row(k, spec.eps(k), st.n(k));
                    rec["kinetic_steady_log_fidelity_per_qubit"] = fidelity(st.n, pin).log_fidelity_per_qubit;
                    rec["kinetic_steady_density"] = density(st.n, pin);
                }
                if (gau) {
                    const EdgeLayout L{N, s.edges};
                    auto w = run.csv("trajectory_gaussian_" + tag, "trajectory", traj_cols());
                    for (const auto& pt : run_protocol(m, p, s.theta, cycles, stride, L)) {
                        gt.push_back({double(pt.cycle), pt.cycle * t2, pt.density, pt.log_fidelity_per_qubit});
                        w.row(pt.cycle, pt.cycle * t2, pt.density, pt.log_fidelity_per_qubit, std::string("gaussian"));
                    }
                    const Eigen::VectorXd n = gaussian_steady_occupations(m, p, s.theta, L);
                    auto ws = run.csv("steady_gaussian_" + tag, "steady_state", steady_cols());
                    for (int k = 0; k < N; ++k) ws.row(k, spec.eps(k), n(k));
                    rec["gaussian_steady_log_fidelity_per_qubit"] = fidelity(n, pin).log_fidelity_per_qubit;
                    rec["gaussian_steady_density"] = density(n, pin);
                }
                if (kin && gau) {
                    auto w = run.csv("trajectory_merged_" + tag, "trajectory", traj_cols());
                    double worst = 0.0;
                    for (std::size_t a = 0; a < kt.size() && a < gt.size(); ++a) {
                        w.row(static_cast<long long>(kt[a][0]), kt[a][1], kt[a][2], kt[a][3], std::string("kinetic"));
                        w.row(static_cast<long long>(gt[a][0]), gt[a][1], gt[a][2], gt[a][3], std::string("gaussian"));
                        if (gt[a][2] < 0.4) worst = std::max(worst, std::abs(kt[a][2] - gt[a][2]) / gt[a][2]);
                    }
                    rec["max_rel_density_deviation_below_0.4"] = worst;
                }
                run.record(rec);
            }
        }
}

NoiseParams scenario_noise(double gd, double gphi, int T) { return NoiseParams::from_rates(gd, gphi, T); }

void cmd_cool_bulk(Run& run) {
    const auto& s = run.sc();
    if (s.setup != "bulk") throw ValidationError("cool-bulk needs setup = bulk");
    if (s.engine != "kinetic" && s.engine != "oracle") throw ValidationError("cool-bulk runs the kinetic or oracle engine");
    const double t2 = s.theta * s.theta;
    const long long cycles = std::llround(s.t_max / t2);
    const long long stride = std::max<long long>(1, cycles / s.samples);
    for (std::size_t i = 0; i < s.models(); ++i)
        for (int N : s.N) {
            const auto m = s.model(i, N);
            const auto spec = diagonalize(m);
            const auto E = build_elements(spec);
            for (const auto& p : resolve_pulses(s, m)) {
                const std::string tag = model_tag(s, i, N) + "_" + pulse_tag(p);
                const NoiseParams nz = scenario_noise(s.gamma_d, s.gamma_phi, p.T);
                json rec{{"model", model_json(m)}, {"pulse", pulse_json(p)}, {"theta", s.theta},
                         {"gamma_d", s.gamma_d}, {"gamma_phi", s.gamma_phi}};
                if (s.engine == "oracle") {
                    const auto cyc = oracle::make_cycle(m, p, s.theta, oracle::Setup::bulk(N), nz);
                    const oracle::Mat rho = oracle::steady_system_state(cyc);
                    std::vector<int> chain(N);
                    for (int j = 0; j < N; ++j) chain[j] = j;
                    const auto G = oracle::covariance(rho, oracle::majoranas(N, chain));
                    const Eigen::VectorXd n = occupations(G, spec);
                    auto ws = run.csv("steady_oracle_" + tag, "steady_state", steady_cols());
                    for (int k = 0; k < N; ++k) ws.row(k, spec.eps(k), n(k));
                    run.record(rec);
                    continue;
                }
                const RateTable r = noisy_rates(bulk_rates(spec, p, s.theta, E), E, nz);
                SteadyReport rep;
                const auto st = steady_state(r, {}, &rep);
                auto ws = run.csv("steady_kinetic_" + tag, "steady_state", steady_cols());
                for (int k = 0; k < N; ++k) ws.row(k, spec.eps(k), st.n(k));
                int kmax = -1;
                for (int k = 0; k < N; ++k)
                    if (k != r.pinned && (kmax < 0 || st.n(k) > st.n(kmax))) kmax = k;
                rec["steady_density"] = density(st.n, r.pinned);
                rec["steady_max_n"] = st.n(kmax);
                rec["steady_argmax_mode"] = kmax;
                rec["solver"] = {{"fixed_point_iters", rep.fixed_point_iters}, {"newton_iters", rep.newton_iters},
                                 {"evolve_cycles", rep.evolve_cycles}, {"residual", rep.residual}};

                auto w = run.csv("trajectory_kinetic_" + tag, "trajectory", traj_cols());
                OccupationState st0{Eigen::VectorXd::Constant(N, 0.5), 0, r.pinned};
                auto emit = [&](const OccupationState& x) {
                    w.row(x.cycle, x.cycle * t2, density(x.n, r.pinned), fidelity(x.n, r.pinned).log_fidelity_per_qubit,
                          std::string("kinetic"));
                };
                emit(st0);
                ClampStats cs;
                evolve(st0, r, cycles, emit, stride, &cs);
                rec["clamp_violations"] = cs.violations;
                run.record(rec);
            }
        }
}

// With several pulses per model (a beta or T list) each point keeps the pulse with the
// lowest log-infidelity, which is how the optimized-beta curves are produced.
void cmd_noise_sweep(Run& run) {
    const auto& s = run.sc();
    if (s.gamma_over_theta2.empty()) throw ValidationError("noise-sweep needs gamma_over_theta2");
    if (s.setup != "bulk") throw ValidationError("noise-sweep needs setup = bulk");
    struct Block {
        std::size_t model;
        int N;
        std::vector<double> n_inf, logf;
        std::vector<Pulse> best;
    };
    std::vector<Block> blocks;
    for (std::size_t i = 0; i < s.models(); ++i)
        for (int N : s.N) blocks.push_back({i, N, {}, {}, {}});
    const std::size_t R = s.gamma_over_theta2.size();

    parallel_for(static_cast<int>(blocks.size()), [&](int b) {
        Block& B = blocks[b];
        const auto m = s.model(B.model, B.N);
        const auto spec = diagonalize(m);
        const auto E = build_elements(spec);
        B.n_inf.assign(R, 0.0);
        B.logf.assign(R, std::numeric_limits<double>::infinity());
        B.best.assign(R, Pulse{});
        for (const auto& p : resolve_pulses(s, m)) {
            const RateTable base = bulk_rates(spec, p, s.theta, E);
            Eigen::VectorXd warm = Eigen::VectorXd::Constant(B.N, 0.5);
            for (std::size_t a = 0; a < R; ++a) {
                const double gamma = s.gamma_over_theta2[a] * s.theta * s.theta;
                const RateTable r = noisy_rates(base, E, NoiseParams::from_rates(gamma, gamma, p.T));
                const auto st = steady_state(r, {}, nullptr, &warm);
                warm = st.n;
                const double lf = fidelity(st.n, r.pinned).log_fidelity_per_qubit;
                if (lf < B.logf[a]) B.logf[a] = lf, B.n_inf[a] = density(st.n, r.pinned), B.best[a] = p;
            }
        }
    }, run.opt().jobs);

    auto w = run.csv("sweep", "sweep", {"gamma_over_theta2", "N_S", "phase", "n_inf", "log_fidelity_per_qubit"});
    std::vector<ScalingPoint> pm, afm;
    for (const auto& B : blocks) {
        const auto m = s.model(B.model, B.N);
        json rec{{"model", model_json(m)}, {"theta", s.theta}, {"points", json::array()}};
        for (std::size_t a = 0; a < R; ++a) {
            const double ratio = s.gamma_over_theta2[a];
            w.row(ratio, B.N, std::string(to_string(m.phase())), B.n_inf[a], B.logf[a]);
            rec["points"].push_back({{"gamma_over_theta2", ratio}, {"pulse", pulse_json(B.best[a])}});
            ScalingPoint sp{ratio * s.theta * s.theta, double(B.best[a].T), s.theta, B.N, B.n_inf[a]};
            (m.phase() == Phase::PM ? pm : afm).push_back(sp);
        }
        run.record(rec);
    }
    const auto fit = fit_scaling(pm, afm);
    run.manifest()["scaling_fit"] = {{"C1", fit.C1}, {"C2", fit.C2}, {"Ce", fit.Ce}, {"Cgamma", fit.Cgamma},
                                     {"Cgamma_prime", fit.Cgamma_prime}};
}

void cmd_thermal(Run& run) {
    Scenario s = run.sc();
    if (!run.opt().betas.empty()) s.beta = run.opt().betas;
    if (s.coupling != "z") throw ValidationError("thermal needs coupling = z");
    auto w = run.csv("thermal", "thermal", {"beta", "mode_index", "eps_k", "n_inf", "n_fermi", "rel_dev"});
    for (std::size_t i = 0; i < s.models(); ++i)
        for (int N : s.N) {
            const auto m = s.model(i, N);
            const auto spec = diagonalize(m);
            const auto E = build_elements(spec, false);
            for (const auto& p : resolve_pulses(s, m)) {
                const RateTable r = hermitian_z_rates(spec, p, s.theta, E);
                SteadyReport rep;
                const auto st = steady_state(r, {}, &rep);
                const auto fermi = gibbs_target(spec, 1.0 / (2.0 * p.beta));
                double worst = 0.0;
                for (int k = 0; k < N; ++k) {
                    if (k == r.pinned) continue;
                    const double dev = std::abs(st.n(k) / fermi.n(k) - 1.0);
                    w.row(p.beta, k, spec.eps(k), st.n(k), fermi.n(k), dev);
                    if (st.n(k) > 1e-8) worst = std::max(worst, dev);
                }
                run.record({{"model", model_json(m)}, {"pulse", pulse_json(p)}, {"theta", s.theta},
                            {"T_eff", 1.0 / (2.0 * p.beta)}, {"max_rel_dev_where_n_gt_1e-8", worst},
                            {"newton_iters", rep.newton_iters}});
            }
        }
}

int cmd_verify(const Options& o) {
    VerifyOptions vo;
    if (o.perturb_jw) vo.jw_sign = -1;
    bool ok = true;
    for (const auto& c : verify(vo)) {
        std::cout << (c.pass() ? "PASS " : "FAIL ") << c.name << " max_dev=" << fmt(c.deviation)
                  << " tol=" << fmt(c.tolerance) << "\n";
        ok = ok && c.pass();
    }
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quasiparticle cooling of kicked Ising chains"};
    app.require_subcommand(1);
    Options o;

    const std::map<std::string, void (*)(Run&)> handlers{
        {"dispersion", cmd_dispersion}, {"filter", cmd_filter},           {"elements", cmd_elements},
        {"cool-edge", cmd_cool_edge},   {"cool-bulk", cmd_cool_bulk},     {"noise-sweep", cmd_noise_sweep},
        {"thermal", cmd_thermal}};
    const std::map<std::string, std::string> help{
        {"dispersion", "quasienergy spectrum and boundary Bogoliubov weights"},
        {"filter", "filter function of the cooling pulse"},
        {"elements", "spin-operator matrix elements between quasiparticle states"},
        {"cool-edge", "edge cooling trajectories and steady states"},
        {"cool-bulk", "bulk cooling via the rate equation"},
        {"noise-sweep", "noisy steady states over gamma/theta^2 and N_S"},
        {"thermal", "Z-coupled steady states against the Fermi distribution"}};

    for (const auto& [name, fn] : handlers) {
        auto* sub = app.add_subcommand(name, help.at(name));
        sub->add_option("--config", o.config, "scenario file");
        sub->add_option("--engine", o.engine, "kinetic | gaussian | both | oracle | scaling");
        sub->add_option("--out", o.out, "output directory");
        sub->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--seed", o.seed, "tie-breaking seed (recorded in the manifest)");
        if (name == "thermal") sub->add_option("--beta", o.betas, "inverse temperatures to run");
    }
    auto* ver = app.add_subcommand("verify", "cross-engine oracle checks");
    ver->add_flag("--perturb-jw", o.perturb_jw, "flip the Jordan-Wigner site convention (should fail)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    default_jobs() = o.jobs;
    if (ver->parsed()) return cmd_verify(o);

    for (const auto& [name, fn] : handlers) {
        if (!app.got_subcommand(name)) continue;
        Scenario s;
        try {
            s = o.config.empty() ? parse_config("") : load_config(o.config);
            if (!o.engine.empty()) s.engine = o.engine;
            if (o.seed) s.seed = *o.seed;
            validate(s);
        } catch (const std::exception& e) {
            std::cerr << "qpc-cli: " << e.what() << "\n";
            return 2;
        }
        Run run(name, s, o);
        try {
            fn(run);
        } catch (const ValidationError& e) {
            std::cerr << "qpc-cli: " << e.what() << "\n";
            run.error(e.what());
            run.finish();
            return 2;
        } catch (const std::exception& e) {
            std::cerr << "qpc-cli: engine error: " << e.what() << "\n";
            run.error(e.what());
            run.finish();
            return 3;
        }
        run.finish();
        std::cout << "wrote " << run.manifest()["outputs"].size() << " files to " << o.out << "\n";
    }
    return 0;
}
