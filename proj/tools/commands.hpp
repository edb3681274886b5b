#pragma once

// Subcommands of the gridreduce tool. Each returns a process exit code and
// writes to the given streams, so tests can drive them in-process.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gridreduce/gridreduce.hpp"

namespace gridreduce::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kSecurity = 3, kMismatch = 4 };

inline constexpr const char* kExitCodeHelp =
    "Exit codes:\n"
    "  0  success\n"
    "  2  usage, input file or I/O error, or a violated precondition\n"
    "  3  security constraint or regularity lost (time of violation is printed)\n"
    "  4  model mismatch: failed property, discrepancy too large, incompatible start\n";

inline std::string sci(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
}

inline std::string fixed(double x, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

/// Maps a library error to an exit code and prints the diagnostic.
inline int report(const std::exception& e, std::ostream& err) {
    if (dynamic_cast<const RegularityLoss*>(&e) || dynamic_cast<const NonFiniteState*>(&e) ||
        dynamic_cast<const NewtonDivergence*>(&e)) {
        err << "error: " << e.what() << "\n";
        return kSecurity;
    }
    if (const auto* c = dynamic_cast<const IncompatibleInitialCondition*>(&e)) {
        err << "error: incompatible initial condition, compatibility residual " << sci(c->residual()) << "\n";
        return kMismatch;
    }
    err << "error: " << e.what() << "\n";
    return kUsage;
}

struct Overrides {
    std::optional<double> step;
    std::optional<double> horizon;
    std::optional<std::string> out;
};

inline void apply(Scenario& s, const Overrides& o) {
    if (o.step) s.integrator.step = *o.step;
    if (o.horizon) s.integrator.horizon = *o.horizon;
    if (o.step || o.horizon) validate_scenario(s);
}

inline std::string output_path(const std::string& configured, const std::string& fallback, const Overrides& o) {
    if (!o.out) return configured;
    const std::string name = configured.empty() ? fallback : std::filesystem::path(configured).filename().string();
    return (std::filesystem::path(*o.out) / name).string();
}

template <class V>
void print_row(std::ostream& out, const char* label, const V& v) {
    out << label;
    for (Eigen::Index i = 0; i < v.size(); ++i) out << (i ? ", " : " ") << fixed(v[i]);
    out << "\n";
}

inline int simulate(Scenario s, const Overrides& o, std::ostream& out) {
    apply(s, o);
    if (o.out) {
        std::error_code ec;
        std::filesystem::create_directories(*o.out, ec);
        if (ec) throw IoError("cannot create output directory '" + *o.out + "': " + ec.message());
    }
    const auto run = run_scenario(s);
    const auto& traj = run.trajectory;
    const auto& net = run.prepared.network;
    const double nominal = s.network.nominal_frequency;

    out << "scenario " << (s.name.empty() ? "(unnamed)" : s.name) << ": " << net.node_count() << " buses, "
        << net.gen_count() << " generators, " << net.load_count() << " loads, controller "
        << (s.controller.enabled ? "on" : "off") << "\n";
    out << "simulated " << traj.times.back() << " s at step " << s.integrator.step << " s, " << traj.size()
        << " samples, " << s.events.size() << " load events\n";

    const Vector& w = traj.states.back().omega;
    Vector dev(w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) dev[i] = to_hertz(w[i], nominal) - nominal;
    print_row(out, "final frequency deviation [Hz]:", dev);
    out << "max final |f - " << nominal << " Hz|: " << sci(dev.cwiseAbs().maxCoeff()) << " Hz\n";
    const Vector& u = traj.inputs.back();
    print_row(out, "final u [pu]:", u);
    if (s.controller.cost.size()) print_row(out, "marginal costs q_i u_i:", Vector(s.controller.cost.cwiseProduct(u)));
    const auto& margin = traj.channels.at("security_margin");
    const auto& drift = traj.channels.at("conserved_drift");
    out << "min security margin: " << fixed(*std::min_element(margin.begin(), margin.end())) << " rad\n";
    out << "max conserved-vector drift: " << sci(*std::max_element(drift.begin(), drift.end())) << "\n";

    const std::string csv = output_path(s.output.csv, (s.name.empty() ? "trajectory" : s.name) + ".csv", o);
    if (!csv.empty()) {
        write_csv(traj, csv);
        out << "wrote " << csv << "\n";
    }
    if (!s.output.plots.empty()) {
        const std::string svg = output_path(s.output.svg, (s.name.empty() ? "trajectory" : s.name) + ".svg", o);
        if (!svg.empty()) {
            write_svg(traj, s.output.plots, svg, nominal);
            out << "wrote " << svg << "\n";
        }
    }
    return kOk;
}

inline int run_command(const std::string& path, const Overrides& o, std::ostream& out, std::ostream& err) {
    try {
        return simulate(load_scenario(path), o, out);
    } catch (const std::exception& e) {
        return report(e, err);
    }
}

inline int case6_command(bool emit, const Overrides& o, std::ostream& out, std::ostream& err) {
    try {
        if (emit) {
            out << serialize_scenario(builtin_case6());
            return kOk;
        }
        return simulate(builtin_case6(), o, out);
    } catch (const std::exception& e) {
        return report(e, err);
    }
}

struct VerifyOptions {
    std::uint64_t seed = 1;
    std::size_t count = 500;
    std::optional<double> inject_weight;
    double tolerance = 1e-10;
};

struct PropertyResult {
    std::string name;
    double worst = 0.0;
};

inline double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

/// Worst residuals of the structural properties over random connected graphs.
/// Throws InvalidArgument (via EdgeWeights) when an injected weight is not positive.
inline std::vector<PropertyResult> verify_properties(const VerifyOptions& opt) {
    std::vector<PropertyResult> res{{"B_S^T 1 = 0"},
                                    {"B_S Gamma B_2^T = 0"},
                                    {"B_S Gamma B_1^T = L_S"},
                                    {"B_S Gamma B_S^T = L_S"},
                                    {"Pi Pi = Pi"},
                                    {"Gamma Pi^T Gamma^-1 = Pi"},
                                    {"ker B within ker B_S"},
                                    {"L_S is a Laplacian"},
                                    {"reduced eta rate = B^T omega"},
                                    {"total active power = 0"}};
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> angle(-1.0, 1.0);
    for (std::size_t it = 0; it < opt.count; ++it) {
        auto wg = random_connected_graph(rng, {});
        Vector wv = wg.weights.values();
        if (it == 0 && opt.inject_weight) wv[0] = *opt.inject_weight;
        const EdgeWeights w(wv);
        const Matrix B = incidence_matrix(wg.graph);
        const Matrix B1 = select_rows(B, wg.partition.set_one());
        const Matrix B2 = select_rows(B, wg.partition.set_two());
        const auto ps = projected_incidence(B1, B2, w);
        const Matrix& BS = ps.matrix;
        const Matrix G = w.as_diagonal();
        const Matrix LS = schur_complement(weighted_laplacian(B, w), wg.partition);
        const auto n1 = BS.rows();

        auto bump = [&](std::size_t k, double r) { res[k].worst = std::max(res[k].worst, std::isfinite(r) ? r : INFINITY); };
        bump(0, max_abs(BS.transpose() * Vector::Ones(n1)));
        bump(1, max_abs(BS * G * B2.transpose()));
        bump(2, max_abs(BS * G * B1.transpose() - LS));
        bump(3, max_abs(BS * G * BS.transpose() - LS));
        bump(4, max_abs(ps.pi * ps.pi - ps.pi));
        bump(5, max_abs(G * ps.pi.transpose() * G.inverse() - ps.pi));
        const Matrix kernel = Eigen::FullPivLU<Matrix>(B).kernel();
        if (B.cols() > B.rows() - 1) bump(6, max_abs(BS * kernel));
        double lap = max_abs(LS - LS.transpose());
        lap = std::max(lap, max_abs(LS * Vector::Ones(n1)));
        for (Eigen::Index i = 0; i < n1; ++i)
            for (Eigen::Index j = 0; j < n1; ++j)
                if (i != j) lap = std::max(lap, LS(i, j));
        bump(7, lap);

        NetworkParameters p;
        p.graph = wg.graph;
        p.generators = wg.partition.set_one();
        p.loads = wg.partition.set_two();
        p.inertia = Vector::Ones(static_cast<Eigen::Index>(p.generators.size()));
        p.damping = p.inertia;
        p.reactance = wv.cwiseInverse();
        p.load_power = Vector::Zero(static_cast<Eigen::Index>(p.loads.size()));
        const PowerNetwork net(p);
        Vector eta(B.cols()), omega(n1);
        for (auto& x : eta) x = angle(rng);
        for (auto& x : omega) x = angle(rng);
        const auto rates = nonlinear_reduced_rhs({eta, omega}, Vector::Zero(n1), net);
        const Vector wl = omega_L_reconstruct(eta, omega, net);
        bump(8, max_abs(rates.d_eta - net.gen_incidence().transpose() * omega - net.load_incidence().transpose() * wl));
        Vector theta(B.rows());
        for (auto& x : theta) x = 3.0 * angle(rng);
        bump(9, std::abs(active_power(theta, net).sum()));
    }
    return res;
}

inline int verify_command(const VerifyOptions& opt, std::ostream& out, std::ostream& err) {
    if (opt.count == 0) {
        err << "warning: --count 0, no instances checked; properties hold vacuously\n";
        return kOk;
    }
    std::vector<PropertyResult> res;
    try {
        res = verify_properties(opt);
    } catch (const std::exception& e) {
        err << "precondition failure: " << e.what() << "\n";
        return kUsage;
    }
    out << "verify: seed " << opt.seed << ", " << opt.count << " random connected graphs, tolerance " << sci(opt.tolerance)
        << "\n";
    bool ok = true;
    for (const auto& r : res) {
        const bool pass = r.worst < opt.tolerance;
        ok = ok && pass;
        out << (pass ? "PASS  " : "FAIL  ") << r.name << std::string(r.name.size() < 30 ? 30 - r.name.size() : 1, ' ')
            << "worst " << sci(r.worst) << "\n";
    }
    out << (ok ? "all properties hold\n" : "some properties failed\n");
    return ok ? kOk : kMismatch;
}

inline void print_block(std::ostream& out, const std::string& name, const Matrix& m) {
    out << "# " << name << " " << m.rows() << "x" << m.cols() << "\n";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_double(m(i, j));
        out << "\n";
    }
    out << "\n";
}

inline int reduce_command(const std::string& path, std::ostream& out, std::ostream& err) {
    try {
        const Scenario s = load_scenario(path);
        const PowerNetwork net(s.network);
        const Matrix L = weighted_laplacian(net.incidence(), net.weights());
        const Matrix LS = schur_complement(L, net.partition());
        const auto& ps = net.constant_projection();
        const auto kron = kron_edge_recovery(LS);
        print_block(out, "B", net.incidence());
        print_block(out, "Gamma", net.weights().as_diagonal());
        print_block(out, "L", L);
        print_block(out, "L_S", LS);
        print_block(out, "B_S", ps.matrix);
        print_block(out, "Pi", ps.pi);
        print_block(out, "B_hat", kron.incidence);
        print_block(out, "Gamma_hat", kron.weights.as_diagonal());
        print_block(out, "p_hat", p_hat(net));
        return kOk;
    } catch (const std::exception& e) {
        return report(e, err);
    }
}

struct Discrepancy {
    double eta = 0.0;
    double omega = 0.0;
};

/// Reduced ODE and DAE from the scenario's (compatible) start, compared sample by sample.
inline Discrepancy compare_models(const Scenario& s) {
    const auto prep = prepare_scenario(s, true);
    const auto reduced = integrate_reduced(prep.initial, prep.drive, prep.network, s.integrator, s.events);
    const auto dae = integrate_dae({prep.theta0, prep.initial.omega}, prep.drive, prep.network, s.integrator, s.events);
    Discrepancy d;
    const Matrix Bt = prep.network.incidence().transpose();
    for (std::size_t k = 0; k < reduced.size(); ++k) {
        d.eta = std::max(d.eta, (Bt * dae.full[k].theta - reduced.states[k].eta).cwiseAbs().maxCoeff());
        d.omega = std::max(d.omega, (dae.states[k].omega - reduced.states[k].omega).cwiseAbs().maxCoeff());
    }
    return d;
}

inline int compare_command(const std::string& path, const Overrides& o, std::ostream& out, std::ostream& err) {
    try {
        Scenario s = load_scenario(path);
        apply(s, o);
        const auto d = compare_models(s);
        const bool ok = d.eta < 1e-6 && d.omega < 1e-6;
        out << "max |B^T theta - eta|: " << sci(d.eta) << "\n";
        out << "max |omega_G(DAE) - omega_G(reduced)|: " << sci(d.omega) << "\n";
        out << (ok ? "models agree within 1e-6\n" : "models disagree (threshold 1e-6)\n");
        return ok ? kOk : kMismatch;
    } catch (const std::exception& e) {
        return report(e, err);
    }
}

/// Parses arguments and dispatches to a subcommand.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Reduced power-network models: Kron reduction via the projected incidence matrix, simulation and control."};
    app.footer(kExitCodeHelp);
    app.require_subcommand(1);

    Overrides ov;
    std::string path;
    auto add_overrides = [&](CLI::App* sub, bool with_out) {
        sub->add_option("--step", ov.step, "Integrator step [s]")->check(CLI::PositiveNumber);
        sub->add_option("--horizon", ov.horizon, "Simulated time [s]")->check(CLI::PositiveNumber);
        if (with_out) sub->add_option("--out", ov.out, "Directory for the CSV and SVG outputs");
    };

    auto* run = app.add_subcommand("run", "Simulate a scenario and write its outputs");
    run->add_option("scenario", path, "Scenario file (YAML)")->required();
    add_overrides(run, true);

    VerifyOptions vo;
    auto* verify = app.add_subcommand("verify", "Check the projected-incidence identities on random graphs");
    verify->add_option("--seed", vo.seed, "Random seed");
    verify->add_option("--count", vo.count, "Number of random graphs");
    verify->add_option("--inject-weight", vo.inject_weight, "Replace the first edge weight of the first graph");

    auto* reduce = app.add_subcommand("reduce", "Print the reduction matrices of a scenario network as CSV blocks");
    reduce->add_option("scenario", path, "Scenario file (YAML)")->required();

    auto* compare = app.add_subcommand("compare", "Cross-check the reduced ODE against the DAE model");
    compare->add_option("scenario", path, "Scenario file (YAML)")->required();
    add_overrides(compare, false);

    bool emit = false;
    auto* case6 = app.add_subcommand("case6", "Run the bundled six-bus case study");
    case6->add_flag("--emit", emit, "Print the case study as a scenario file instead of running it");
    add_overrides(case6, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }
    if (*run) return run_command(path, ov, out, err);
    if (*verify) return verify_command(vo, out, err);
    if (*reduce) return reduce_command(path, out, err);
    if (*compare) return compare_command(path, ov, out, err);
    return case6_command(emit, ov, out, err);
}

}  // namespace gridreduce::cli
