#pragma once

// Fixed-step RK4 integration of the reduced ODE and of the network-preserved
// DAE, compatibility projection, angle reconstruction and trajectory monitors.

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridreduce/control.hpp"

namespace gridreduce {

struct IntegratorConfig {
    double step = 1e-3;
    double horizon = 10.0;
    /// Record every `cadence` steps.
    std::size_t cadence = 1;
    /// Only classical RK4 is implemented.
    std::string method = "rk4";

    std::size_t step_count() const {
        if (!(step > 0.0)) throw InvalidArgument("integrator step must be positive");
        if (!(horizon >= step)) throw InvalidArgument("integrator horizon must be at least one step");
        if (cadence == 0) throw InvalidArgument("integrator cadence must be positive");
        if (method != "rk4") throw InvalidArgument("unknown integrator method '" + method + "'");
        return static_cast<std::size_t>(std::llround(horizon / step));
    }
};

/// Step change of one constant-power load, applied at a grid time.
struct LoadEvent {
    enum class Kind { scale, absolute };
    double time = 0.0;
    std::size_t load = 0;  ///< position in the load list
    Kind kind = Kind::scale;
    double value = 1.0;

    friend bool operator==(const LoadEvent&, const LoadEvent&) = default;
};

using InputFunction = std::function<Vector(double)>;

inline InputFunction constant_input(Vector u) {
    return [u = std::move(u)](double) { return u; };
}

struct ControllerSetup {
    CostModel cost;
    CommunicationGraph comm;
    Vector xi0;
};

/// What drives the generator inputs: an open-loop signal or the averaging controller.
struct Drive {
    InputFunction input;
    std::optional<ControllerSetup> controller;

    static Drive open_loop(InputFunction f) { return {std::move(f), std::nullopt}; }
    static Drive closed_loop(ControllerSetup c) { return {nullptr, std::move(c)}; }
};

/// Samples on a uniform grid. `states` always holds (eta, omega_G); `xi` and
/// `full` are filled for closed-loop and DAE runs respectively.
struct Trajectory {
    std::vector<double> times;
    std::vector<ReducedState> states;
    std::vector<Vector> inputs;
    std::vector<Vector> xi;
    std::vector<FullState> full;
    /// Sample index where each event-free segment starts, and its load vector.
    std::vector<std::size_t> segment_start;
    std::vector<Vector> segment_load_power;
    std::map<std::string, std::vector<double>> channels;

    std::size_t size() const noexcept { return times.size(); }
    std::size_t segment_of(std::size_t sample) const {
        std::size_t s = 0;
        while (s + 1 < segment_start.size() && segment_start[s + 1] <= sample) ++s;
        return s;
    }
    std::size_t segment_end(std::size_t s) const {
        return s + 1 < segment_start.size() ? segment_start[s + 1] : size();
    }
};

/// One classical fourth-order Runge-Kutta step.
template <class F>
Vector rk4_step(F&& f, double t, const Vector& y, double h) {
    const Vector k1 = f(t, y);
    const Vector k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
    const Vector k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
    const Vector k4 = f(t + h, y + h * k3);
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Newton solve of B_L Gamma sin(B_G^T theta_G + B_L^T theta_L) = p* for theta_L,
/// step halving on residual increase, iterates kept inside the security region.
inline Vector solve_load_angles(const Vector& theta_g, Vector theta_l, const PowerNetwork& net, int max_iterations,
                                double tolerance) {
    if (net.load_count() == 0) return theta_l;
    const Matrix& bl = net.load_incidence();
    const Vector base = net.gen_incidence().transpose() * theta_g;
    const auto& tol = net.tolerances();
    auto eta_of = [&](const Vector& tl) { return Vector(base + bl.transpose() * tl); };
    auto residual = [&](const Vector& eta) { return Vector(conserved_load_vector(eta, net) - net.load_power()); };

    Vector eta = eta_of(theta_l);
    check_security(eta, net);
    Vector g = residual(eta);
    double r = g.cwiseAbs().maxCoeff();
    for (int it = 0; r > tolerance; ++it) {
        if (it >= max_iterations) throw NewtonDivergence("load-angle Newton did not converge, residual " + std::to_string(r));
        const Vector gp = gamma_prime(eta, net);
        Eigen::LLT<Matrix> llt(bl * gp.asDiagonal() * bl.transpose());
        if (llt.info() != Eigen::Success) throw RegularityLoss("load Jacobian is singular");
        const Vector step = llt.solve(-g);
        double t = 1.0;
        bool accepted = false;
        for (int h = 0; h < 40 && !accepted; ++h, t *= 0.5) {
            const Vector tl = theta_l + t * step;
            const Vector et = eta_of(tl);
            if (security_margin(et) <= tol.security_margin) continue;
            const Vector gt = residual(et);
            const double rt = gt.cwiseAbs().maxCoeff();
            if (rt < r) {
                theta_l = tl;
                eta = et;
                g = gt;
                r = rt;
                accepted = true;
            }
        }
        if (!accepted) throw RegularityLoss("no compatible load angles inside the security region (residual " + std::to_string(r) + ")");
    }
    return theta_l;
}

/// Node angles theta with theta[first generator] = 0 minimizing |B^T theta - eta|.
inline Vector least_squares_angles(const Vector& eta, const PowerNetwork& net) {
    const Matrix& b = net.incidence();
    const auto n = b.rows();
    const auto pinned = static_cast<Eigen::Index>(net.params().generators.front());
    const Matrix l = b * b.transpose();
    const Vector rhs = b * eta;
    Matrix lf(n - 1, n - 1);
    Vector rf(n - 1);
    for (Eigen::Index i = 0, ii = 0; i < n; ++i) {
        if (i == pinned) continue;
        rf[ii] = rhs[i];
        for (Eigen::Index j = 0, jj = 0; j < n; ++j) {
            if (j == pinned) continue;
            lf(ii, jj++) = l(i, j);
        }
        ++ii;
    }
    Vector theta = Vector::Zero(n);
    if (n > 1) {
        const Vector x = lf.llt().solve(rf);
        for (Eigen::Index i = 0, ii = 0; i < n; ++i)
            if (i != pinned) theta[i] = x[ii++];
    }
    return theta;
}

/// Maps eta onto {v in im B^T : B_L Gamma sin(v) = p*} keeping the generator
/// angles of the least-squares fit and re-solving the load angles.
inline Vector project_compatible(const Vector& eta_guess, const PowerNetwork& net) {
    if (static_cast<std::size_t>(eta_guess.size()) != net.edge_count()) throw InvalidArgument("eta has wrong length");
    check_security(eta_guess, net);
    const Vector theta = least_squares_angles(eta_guess, net);
    const auto& tol = net.tolerances();
    const Vector tg = net.gen_part(theta);
    const Vector tl = solve_load_angles(tg, net.load_part(theta), net, tol.newton_max_iterations, tol.newton_tolerance);
    return net.incidence().transpose() * net.assemble_nodes(tg, tl);
}

/// |B_L Gamma sin(B^T theta) - p*|_inf.
inline double compatibility_residual(const Vector& theta, const PowerNetwork& net) {
    if (net.load_count() == 0) return 0.0;
    return (conserved_load_vector(net.incidence().transpose() * theta, net) - net.load_power()).cwiseAbs().maxCoeff();
}

namespace detail {

inline Vector apply_event(const Vector& p_star, const LoadEvent& e) {
    Vector p = p_star;
    if (e.load >= static_cast<std::size_t>(p.size())) throw InvalidArgument("event load index out of range");
    auto& x = p[static_cast<Eigen::Index>(e.load)];
    x = e.kind == LoadEvent::Kind::scale ? x * e.value : e.value;
    return p;
}

/// Maps each event to its grid step; events must fall on recorded samples.
inline std::vector<std::pair<std::size_t, const LoadEvent*>> schedule(std::span<const LoadEvent> events,
                                                                      const IntegratorConfig& cfg, std::size_t steps) {
    std::vector<std::pair<std::size_t, const LoadEvent*>> out;
    for (const auto& e : events) {
        const double k = e.time / cfg.step;
        const auto ki = static_cast<std::size_t>(std::llround(k));
        if (e.time < 0.0 || std::abs(k - static_cast<double>(ki)) > 1e-6 || ki > steps)
            throw InvalidArgument("event time " + std::to_string(e.time) + " is not on the integration grid");
        if (ki % cfg.cadence != 0) throw InvalidArgument("event time is not on the recorded grid");
        out.emplace_back(ki, &e);
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
}

inline void check_finite(const Vector& y, double t) {
    if (!y.allFinite()) throw NonFiniteState("state became non-finite at t=" + std::to_string(t));
}

/// Layout [x (state part) ; omega ; xi?] shared by the reduced and DAE drivers.
struct Layout {
    Eigen::Index nx, ng, nxi;
    auto x(const Vector& y) const { return y.head(nx); }
    auto omega(const Vector& y) const { return y.segment(nx, ng); }
    auto xi(const Vector& y) const { return y.tail(nxi); }
};

inline Vector input_at(const Drive& d, double t, const Vector& xi) {
    if (d.controller) return d.controller->cost.q_inverse().cwiseProduct(xi);
    return d.input(t);
}

}  // namespace detail

/// Conserved drift, security margin, Hamiltonian and disagreement channels, plus
/// W (and V for closed-loop runs) when per-segment equilibria are given.
inline void monitors(Trajectory& traj, const PowerNetwork& net, std::span<const EquilibriumPoint> equilibria = {},
                     const CostModel* cost = nullptr) {
    const std::size_t n = traj.size();
    auto& drift = traj.channels["conserved_drift"];
    auto& margin = traj.channels["security_margin"];
    auto& ham = traj.channels["hamiltonian"];
    auto& dis = traj.channels["disagreement"];
    drift.assign(n, 0.0);
    margin.assign(n, 0.0);
    ham.assign(n, 0.0);
    dis.assign(n, 0.0);
    Vector ref;
    for (std::size_t k = 0; k < n; ++k) {
        const auto& s = traj.states[k];
        const std::size_t seg = traj.segment_of(k);
        const Vector c = conserved_load_vector(s.eta, net);
        if (k == traj.segment_start[seg]) ref = c;
        drift[k] = c.size() ? (c - ref).cwiseAbs().maxCoeff() : 0.0;
        margin[k] = security_margin(s.eta);
        ham[k] = hamiltonian(s.eta, s.omega, net);
        if (margin[k] > net.tolerances().security_margin) {
            const Vector wl = omega_L_reconstruct(s.eta, s.omega, net);
            const Vector v = frequency_disagreement(net.assemble_nodes(s.omega, wl), net);
            dis[k] = v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
        }
    }
    if (equilibria.empty()) return;
    if (equilibria.size() != traj.segment_start.size())
        throw InvalidArgument("need one equilibrium per trajectory segment");
    auto& w = traj.channels["W"];
    w.assign(n, 0.0);
    const bool with_v = cost && !traj.xi.empty();
    if (with_v) traj.channels["V"].assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const auto& eq = equilibria[traj.segment_of(k)];
        w[k] = storage_W(traj.states[k], eq, net);
        if (with_v) traj.channels["V"][k] = lyapunov_V(traj.states[k], traj.xi[k], eq, net, *cost);
    }
}

/// RK4 on the nonlinear reduced model (open or closed loop). Load events
/// re-project eta onto the new constraint manifold.
inline Trajectory integrate_reduced(const ReducedState& initial, const Drive& drive, const PowerNetwork& network,
                                    const IntegratorConfig& cfg, std::span<const LoadEvent> events = {}) {
    const std::size_t steps = cfg.step_count();
    const auto sched = detail::schedule(events, cfg, steps);
    const bool closed = drive.controller.has_value();
    const detail::Layout lay{static_cast<Eigen::Index>(network.edge_count()), static_cast<Eigen::Index>(network.gen_count()),
                             closed ? static_cast<Eigen::Index>(network.gen_count()) : 0};
    if (initial.eta.size() != lay.nx || initial.omega.size() != lay.ng) throw InvalidArgument("initial state has wrong size");
    check_security(initial.eta, network);

    PowerNetwork net = network;
    Vector y(lay.nx + lay.ng + lay.nxi);
    y << initial.eta, initial.omega, (closed ? drive.controller->xi0 : Vector(0));
    if (closed && drive.controller->xi0.size() != lay.ng) throw InvalidArgument("controller xi0 has wrong size");

    auto rhs = [&](double t, const Vector& v) {
        const ReducedState x{lay.x(v), lay.omega(v)};
        const Vector xi = lay.xi(v);
        const Vector u = detail::input_at(drive, t, xi);
        const auto r = nonlinear_reduced_rhs(x, u, net);
        Vector d(v.size());
        d << r.d_eta, r.d_omega, (closed ? Vector(-drive.controller->comm.laplacian() * xi -
                                                  drive.controller->cost.q_inverse().cwiseProduct(x.omega))
                                         : Vector(0));
        return d;
    };

    Trajectory traj;
    traj.segment_start.push_back(0);
    traj.segment_load_power.push_back(net.load_power());
    auto record = [&](double t, bool replace) {
        if (replace) {
            traj.times.pop_back();
            traj.states.pop_back();
            traj.inputs.pop_back();
            if (closed) traj.xi.pop_back();
        }
        traj.times.push_back(t);
        traj.states.push_back({lay.x(y), lay.omega(y)});
        traj.inputs.push_back(detail::input_at(drive, t, lay.xi(y)));
        if (closed) traj.xi.push_back(lay.xi(y));
    };

    std::size_t next_event = 0;
    auto handle_events = [&](std::size_t k, double t) {
        bool fired = false;
        while (next_event < sched.size() && sched[next_event].first == k) {
            net = net.with_load_power(detail::apply_event(net.load_power(), *sched[next_event].second));
            ++next_event;
            fired = true;
        }
        if (!fired) return;
        try {
            y.head(lay.nx) = project_compatible(lay.x(y), net);
        } catch (const Error& e) {
            throw RegularityLoss(std::string(e.what()) + " after load event", t);
        }
        record(t, true);
        if (traj.segment_start.back() == traj.size() - 1) {
            traj.segment_load_power.back() = net.load_power();
        } else {
            traj.segment_start.push_back(traj.size() - 1);
            traj.segment_load_power.push_back(net.load_power());
        }
    };

    record(0.0, false);
    handle_events(0, 0.0);
    for (std::size_t k = 1; k <= steps; ++k) {
        const double t0 = static_cast<double>(k - 1) * cfg.step;
        const double t1 = static_cast<double>(k) * cfg.step;
        try {
            y = rk4_step(rhs, t0, y, cfg.step);
        } catch (const RegularityLoss& e) {
            throw RegularityLoss(std::string(e.what()) + " at t=" + std::to_string(t0), t0);
        }
        detail::check_finite(y, t1);
        if (security_margin(lay.x(y)) <= net.tolerances().security_margin)
            throw RegularityLoss("security constraint violated at t=" + std::to_string(t1), t1);
        if (k % cfg.cadence == 0) record(t1, false);
        handle_events(k, t1);
    }
    monitors(traj, net);
    return traj;
}

/// RK4 on (theta_G, omega_G[, xi]) with the load constraint re-solved for
/// theta_L by Newton at every stage.
inline Trajectory integrate_dae(const FullState& initial, const Drive& drive, const PowerNetwork& network,
                                const IntegratorConfig& cfg, std::span<const LoadEvent> events = {},
                                double compatibility_tolerance = 1e-10) {
    const std::size_t steps = cfg.step_count();
    const auto sched = detail::schedule(events, cfg, steps);
    const bool closed = drive.controller.has_value();
    const auto ng = static_cast<Eigen::Index>(network.gen_count());
    const detail::Layout lay{ng, ng, closed ? ng : 0};
    if (static_cast<std::size_t>(initial.theta.size()) != network.node_count() || initial.omega.size() != ng)
        throw InvalidArgument("initial state has wrong size");
    const double res0 = compatibility_residual(initial.theta, network);
    if (!(res0 <= compatibility_tolerance))
        throw IncompatibleInitialCondition("initial angles violate the load constraint, residual " + std::to_string(res0), res0);

    PowerNetwork net = network;
    constexpr int kStageIterations = 25;
    const double newton_tol = net.tolerances().newton_tolerance;
    Vector theta_l = net.load_part(initial.theta);
    Vector y(lay.nx + lay.ng + lay.nxi);
    y << net.gen_part(initial.theta), initial.omega, (closed ? drive.controller->xi0 : Vector(0));

    auto rhs = [&](double t, const Vector& v) {
        const Vector tg = lay.x(v);
        const Vector omega = lay.omega(v);
        const Vector xi = lay.xi(v);
        try {
            theta_l = solve_load_angles(tg, theta_l, net, kStageIterations, newton_tol);
        } catch (const NewtonDivergence& e) {
            throw RegularityLoss(e.what());
        }
        const Vector eta = net.incidence().transpose() * net.assemble_nodes(tg, theta_l);
        const Vector u = detail::input_at(drive, t, xi);
        const Vector d_omega = (-net.damping().cwiseProduct(omega) -
                                net.gen_incidence() * net.weights().values().cwiseProduct(eta.array().sin().matrix()) + u)
                                   .cwiseQuotient(net.inertia());
        Vector d(v.size());
        d << omega, d_omega, (closed ? Vector(-drive.controller->comm.laplacian() * xi -
                                              drive.controller->cost.q_inverse().cwiseProduct(omega))
                                     : Vector(0));
        return d;
    };
    auto settle = [&](double t) {
        try {
            theta_l = solve_load_angles(lay.x(y), theta_l, net, kStageIterations, newton_tol);
        } catch (const Error& e) {
            throw RegularityLoss(std::string(e.what()) + " at t=" + std::to_string(t), t);
        }
    };

    Trajectory traj;
    traj.segment_start.push_back(0);
    traj.segment_load_power.push_back(net.load_power());
    auto record = [&](double t, bool replace) {
        if (replace) {
            traj.times.pop_back();
            traj.states.pop_back();
            traj.full.pop_back();
            traj.inputs.pop_back();
            if (closed) traj.xi.pop_back();
        }
        const Vector theta = net.assemble_nodes(lay.x(y), theta_l);
        traj.times.push_back(t);
        traj.full.push_back({theta, lay.omega(y)});
        traj.states.push_back({net.incidence().transpose() * theta, lay.omega(y)});
        traj.inputs.push_back(detail::input_at(drive, t, lay.xi(y)));
        if (closed) traj.xi.push_back(lay.xi(y));
    };

    std::size_t next_event = 0;
    auto handle_events = [&](std::size_t k, double t) {
        bool fired = false;
        while (next_event < sched.size() && sched[next_event].first == k) {
            net = net.with_load_power(detail::apply_event(net.load_power(), *sched[next_event].second));
            ++next_event;
            fired = true;
        }
        if (!fired) return;
        // theta_G is held, theta_L re-solved: the same rule as project_compatible.
        settle(t);
        record(t, true);
        if (traj.segment_start.back() == traj.size() - 1) {
            traj.segment_load_power.back() = net.load_power();
        } else {
            traj.segment_start.push_back(traj.size() - 1);
            traj.segment_load_power.push_back(net.load_power());
        }
    };

    record(0.0, false);
    handle_events(0, 0.0);
    for (std::size_t k = 1; k <= steps; ++k) {
        const double t0 = static_cast<double>(k - 1) * cfg.step;
        const double t1 = static_cast<double>(k) * cfg.step;
        try {
            y = rk4_step(rhs, t0, y, cfg.step);
        } catch (const RegularityLoss& e) {
            throw RegularityLoss(std::string(e.what()) + " at t=" + std::to_string(t0), t0);
        }
        detail::check_finite(y, t1);
        settle(t1);
        if (k % cfg.cadence == 0) record(t1, false);
        handle_events(k, t1);
    }
    monitors(traj, net);
    return traj;
}

/// Angles recovered from a reduced trajectory, with load frequencies.
struct ThetaReconstruction {
    std::vector<FullState> states;
    std::vector<Vector> omega_load;
};

/// theta(t) = delta(t) - 1 alpha(t), B^T delta = eta, alpha = (1^T delta - 1^T int omega) / n.
inline ThetaReconstruction reconstruct_theta(const Trajectory& traj, const PowerNetwork& net, double tolerance = 1e-8) {
    ThetaReconstruction out;
    const auto n = static_cast<double>(net.node_count());
    double integral = 0.0;
    double prev_sum = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const auto& s = traj.states[k];
        const Vector delta = least_squares_angles(s.eta, net);
        const double miss = (net.incidence().transpose() * delta - s.eta).cwiseAbs().maxCoeff();
        if (miss > tolerance)
            throw InvalidArgument("eta is not in the image of B^T at sample " + std::to_string(k) + " (residual " +
                                  std::to_string(miss) + ")");
        const Vector wl = omega_L_reconstruct(s.eta, s.omega, net);
        const double sum = s.omega.sum() + wl.sum();
        if (k > 0) integral += 0.5 * (traj.times[k] - traj.times[k - 1]) * (sum + prev_sum);
        prev_sum = sum;
        const double alpha = (delta.sum() - integral) / n;
        out.states.push_back({delta.array() - alpha, s.omega});
        out.omega_load.push_back(wl);
    }
    return out;
}

/// Trajectories of a generic (eta, omega) ODE on a uniform grid, no events.
template <class Rhs>
Trajectory integrate_ode(const ReducedState& initial, const InputFunction& input, const IntegratorConfig& cfg, Rhs&& rhs) {
    const std::size_t steps = cfg.step_count();
    const auto ne = initial.eta.size();
    const auto ng = initial.omega.size();
    Vector y(ne + ng);
    y << initial.eta, initial.omega;
    auto f = [&](double t, const Vector& v) {
        const auto r = rhs(ReducedState{v.head(ne), v.tail(ng)}, input(t));
        Vector d(v.size());
        d << r.d_eta, r.d_omega;
        return d;
    };
    Trajectory traj;
    traj.segment_start.push_back(0);
    auto record = [&](double t) {
        traj.times.push_back(t);
        traj.states.push_back({y.head(ne), y.tail(ng)});
        traj.inputs.push_back(input(t));
    };
    record(0.0);
    for (std::size_t k = 1; k <= steps; ++k) {
        y = rk4_step(f, static_cast<double>(k - 1) * cfg.step, y, cfg.step);
        detail::check_finite(y, static_cast<double>(k) * cfg.step);
        if (k % cfg.cadence == 0) record(static_cast<double>(k) * cfg.step);
    }
    return traj;
}

/// Approximate reduced model (constant B_S, sin eta ~ eta).
inline Trajectory integrate_approximate(const ReducedState& initial, const InputFunction& input, const PowerNetwork& net,
                                        const IntegratorConfig& cfg) {
    return integrate_ode(initial, input, cfg,
                         [&](const ReducedState& x, const Vector& u) { return approximate_reduced_rhs(x, u, net); });
}

/// Linear reduced model on B_S with a given p_hat.
inline Trajectory integrate_linear_reduced(const ReducedState& initial, const InputFunction& input, const PowerNetwork& net,
                                           const Vector& phat, const IntegratorConfig& cfg) {
    return integrate_ode(initial, input, cfg, [&](const ReducedState& x, const Vector& u) {
        return linear_reduced_rhs(x.eta, x.omega, u, net, phat);
    });
}

struct LinearPair {
    Trajectory kron;       ///< states hold (eta_hat, omega_G)
    Trajectory projected;  ///< states hold (eta_S, omega_G)
    KronModel model;
};

/// Simulates the Kron model and the projected-incidence model of the linear
/// network from the same generator angles and frequencies.
inline LinearPair run_linear_pair(const Vector& theta_g, const Vector& omega, const InputFunction& input,
                                  const PowerNetwork& net, const IntegratorConfig& cfg) {
    LinearPair out;
    out.model = kron_model(net);
    const ReducedState kron0{out.model.graph.incidence.transpose() * theta_g, omega};
    const ReducedState proj0{net.constant_projection().matrix.transpose() * theta_g, omega};
    const auto& model = out.model;
    out.kron = integrate_ode(kron0, input, cfg, [&](const ReducedState& x, const Vector& u) {
        return kron_linear_rhs(x.eta, x.omega, u, net, model);
    });
    out.projected = integrate_linear_reduced(proj0, input, net, model.p_hat, cfg);
    return out;
}

}  // namespace gridreduce
