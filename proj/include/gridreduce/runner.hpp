#pragma once

// Turns a Scenario into initial states, inputs and trajectories.

#include <optional>
#include <vector>

#include "gridreduce/output.hpp"
#include "gridreduce/scenario.hpp"

namespace gridreduce {

struct PreparedScenario {
    PowerNetwork network;
    ReducedState initial;
    /// Angles matching `initial.eta`, first generator pinned.
    Vector theta0;
    Drive drive;
    std::optional<CostModel> cost;
    /// Open-loop input (constant) or the controller's initial command.
    Vector u0;
};

/// Constant input used when the controller is off and none is given:
/// optimal dispatch for the initial loads (equal shares without a cost model).
inline Vector default_open_loop_input(const Scenario& s) {
    const double total = s.network.load_power.sum();
    if (s.controller.cost.size()) return solve_ofr(CostModel(s.controller.cost), total).u_star;
    const auto ng = static_cast<Eigen::Index>(s.network.generators.size());
    return Vector::Constant(ng, -total / static_cast<double>(ng));
}

inline CommunicationGraph communication_graph(const Scenario& s) {
    std::vector<Edge> edges;
    for (auto [a, b] : s.controller.communication) edges.push_back({a, b});
    return CommunicationGraph(UndirectedGraph(s.network.generators.size(), std::move(edges)));
}

/// Builds the initial state. Explicit angles are projected onto the load
/// constraint unless `require_compatible` is set, in which case an
/// incompatible start raises IncompatibleInitialCondition.
inline PreparedScenario prepare_scenario(const Scenario& s, bool require_compatible = false) {
    validate_scenario(s);
    PowerNetwork net(s.network);
    const auto ng = static_cast<Eigen::Index>(net.gen_count());
    std::optional<CostModel> cost;
    if (s.controller.cost.size()) cost = CostModel(s.controller.cost);

    const Vector u_open = s.input.size() ? s.input : default_open_loop_input(s);
    const Vector omega_offset = s.initial.omega.size() ? s.initial.omega : Vector::Zero(ng);
    ReducedState x;
    Vector xi_eq = Vector::Zero(ng);
    if (s.initial.mode == InitialCondition::Mode::equilibrium) {
        const auto eq = s.controller.enabled ? closed_loop_equilibrium(net, *cost) : find_equilibrium(u_open, net.load_power(), net);
        x.eta = eq.eta;
        x.omega = Vector::Constant(ng, eq.omega) + omega_offset;
        if (s.controller.enabled) xi_eq = cost->q().cwiseProduct(eq.u);
    } else {
        const Vector eta = s.initial.theta.size() ? Vector(net.incidence().transpose() * s.initial.theta) : s.initial.eta;
        if (require_compatible) {
            const double r = compatibility_residual(least_squares_angles(eta, net), net);
            if (!(r <= 1e-10))
                throw IncompatibleInitialCondition("initial eta violates the load constraint, residual " + std::to_string(r), r);
            x.eta = eta;
        } else {
            x.eta = project_compatible(eta, net);
        }
        x.omega = omega_offset;
    }

    PreparedScenario out{net, x, least_squares_angles(x.eta, net), {}, cost, {}};
    if (s.controller.enabled) {
        const Vector xi0 = s.initial.xi.size() ? s.initial.xi : xi_eq;
        out.drive = Drive::closed_loop({*cost, communication_graph(s), xi0});
        out.u0 = cost->q_inverse().cwiseProduct(xi0);
    } else {
        out.drive = Drive::open_loop(constant_input(u_open));
        out.u0 = u_open;
    }
    return out;
}

struct ScenarioRun {
    PreparedScenario prepared;
    Trajectory trajectory;
    /// One per segment when every segment has a feasible equilibrium, else empty.
    std::vector<EquilibriumPoint> equilibria;
};

/// Equilibrium the run should settle to in each event-free segment.
inline std::vector<EquilibriumPoint> segment_equilibria(const Trajectory& traj, const PreparedScenario& p) {
    std::vector<EquilibriumPoint> eqs;
    try {
        for (const auto& pl : traj.segment_load_power) {
            const PowerNetwork seg = p.network.with_load_power(pl);
            if (p.drive.controller) eqs.push_back(closed_loop_equilibrium(seg, p.drive.controller->cost));
            else eqs.push_back(find_equilibrium(p.u0, pl, seg));
        }
    } catch (const Error&) {
        eqs.clear();
    }
    return eqs;
}

/// Integrates the reduced model for a scenario and fills every monitor channel.
inline ScenarioRun run_scenario(const Scenario& s) {
    ScenarioRun run{prepare_scenario(s), {}, {}};
    run.trajectory = integrate_reduced(run.prepared.initial, run.prepared.drive, run.prepared.network, s.integrator, s.events);
    run.equilibria = segment_equilibria(run.trajectory, run.prepared);
    monitors(run.trajectory, run.prepared.network, run.equilibria,
             run.prepared.drive.controller ? &run.prepared.drive.controller->cost : nullptr);
    return run;
}

}  // namespace gridreduce
