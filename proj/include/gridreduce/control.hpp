#pragma once

// Optimal frequency regulation and the distributed averaging integral controller.

#include "gridreduce/power_model.hpp"

namespace gridreduce {

/// Quadratic generation cost 1/2 u^T Q u with Q = diag(q).
class CostModel {
public:
    CostModel() = default;
    explicit CostModel(Vector q) : q_(std::move(q)) {
        for (Eigen::Index i = 0; i < q_.size(); ++i)
            if (!(q_[i] > 0.0) || !std::isfinite(q_[i]))
                throw InvalidArgument("cost coefficient " + std::to_string(i) + " must be positive");
    }
    const Vector& q() const noexcept { return q_; }
    Vector q_inverse() const { return q_.cwiseInverse(); }
    std::size_t size() const noexcept { return static_cast<std::size_t>(q_.size()); }

private:
    Vector q_;
};

/// Connected communication graph over the generators, unit edge weights.
class CommunicationGraph {
public:
    CommunicationGraph() = default;
    explicit CommunicationGraph(UndirectedGraph g) : graph_(std::move(g)) {
        if (!is_connected(graph_)) throw InvalidArgument("communication graph is not connected");
        const Matrix b = incidence_matrix(graph_);
        laplacian_ = b * b.transpose();
    }
    const UndirectedGraph& graph() const noexcept { return graph_; }
    const Matrix& laplacian() const noexcept { return laplacian_; }

private:
    UndirectedGraph graph_;
    Matrix laplacian_;
};

struct OfrSolution {
    Vector u_star;
    double lambda = 0.0;
};

/// Minimizes 1/2 u^T Q u subject to 1^T u + total_load = 0:
/// lambda = total_load / sum(1/q), u*_i = -lambda / q_i.
inline OfrSolution solve_ofr(const CostModel& cost, double total_load) {
    OfrSolution s;
    const Vector qi = cost.q_inverse();
    s.lambda = total_load / qi.sum();
    s.u_star = -s.lambda * qi;
    return s;
}

struct ControllerRates {
    Vector d_xi;
    Vector u;
};

/// d xi = -L_C xi - Q^{-1} omega, u = Q^{-1} xi.
inline ControllerRates controller_rhs(const Vector& xi, const Vector& omega, const CostModel& cost,
                                      const CommunicationGraph& comm) {
    const Vector qi = cost.q_inverse();
    return {-comm.laplacian() * xi - qi.cwiseProduct(omega), qi.cwiseProduct(xi)};
}

struct ClosedLoopRates {
    Vector d_eta;
    Vector d_omega;
    Vector d_xi;
};

/// Nonlinear reduced model driven by the averaging controller.
inline ClosedLoopRates closed_loop_rhs(const ReducedState& x, const Vector& xi, const PowerNetwork& net,
                                       const CostModel& cost, const CommunicationGraph& comm) {
    auto c = controller_rhs(xi, x.omega, cost, comm);
    auto r = nonlinear_reduced_rhs(x, c.u, net);
    return {std::move(r.d_eta), std::move(r.d_omega), std::move(c.d_xi)};
}

/// Closed-loop equilibrium: u = u* for the current loads and zero frequency deviation.
inline EquilibriumPoint closed_loop_equilibrium(const PowerNetwork& net, const CostModel& cost) {
    return find_equilibrium(solve_ofr(cost, net.load_power().sum()).u_star, net.load_power(), net);
}

/// V = W + 1/2 |xi - Q u_bar|^2.
inline double lyapunov_V(const ReducedState& x, const Vector& xi, const EquilibriumPoint& eq, const PowerNetwork& net,
                         const CostModel& cost) {
    const Vector dxi = xi - cost.q().cwiseProduct(eq.u);
    return storage_W(x, eq, net) + 0.5 * dxi.squaredNorm();
}

}  // namespace gridreduce
