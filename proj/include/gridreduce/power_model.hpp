#pragma once

// Right-hand sides, algebraic maps, conserved quantities, equilibria and
// energy functions of the network-preserved and reduced power models.

#include <cmath>
#include <numbers>
#include <string>

#include "gridreduce/network.hpp"

namespace gridreduce {

/// Reduced-model state: per-edge angle differences and generator frequency deviations.
struct ReducedState {
    Vector eta;
    Vector omega;
};

/// Network-preserved state: per-node angles and generator frequency deviations.
struct FullState {
    Vector theta;
    Vector omega;
};

struct ReducedRates {
    Vector d_eta;
    Vector d_omega;
};

/// Steady state of the reduced model. `omega` is the common synchronous
/// deviation; `theta` has the first generator angle pinned to zero.
struct EquilibriumPoint {
    Vector eta;
    Vector theta;
    double omega = 0.0;
    Vector u;
};

/// pi/2 - max_k |eta_k|; negative means outside the security region.
inline double security_margin(const Vector& eta) {
    return std::numbers::pi / 2 - (eta.size() ? eta.cwiseAbs().maxCoeff() : 0.0);
}

inline void check_security(const Vector& eta, const PowerNetwork& net) {
    if (!eta.allFinite()) throw RegularityLoss("angle differences are not finite");
    const double margin = security_margin(eta);
    if (margin <= net.tolerances().security_margin)
        throw RegularityLoss("security constraint violated: margin " + std::to_string(margin) + " rad");
}

/// p = B Gamma sin(B^T theta).
inline Vector active_power(const Vector& theta, const PowerNetwork& net) {
    const Matrix& b = net.incidence();
    return b * (net.weights().values().array() * (b.transpose() * theta).array().sin()).matrix();
}

struct LinearResidual {
    Vector generator;
    Vector load;
};

/// Residual of the linearized network-preserved model (sin eta ~ eta).
inline LinearResidual linear_dae_residual(const Vector& theta, const Vector& omega, const Vector& u,
                                          const PowerNetwork& net) {
    const Vector flow = net.weights().values().cwiseProduct(net.incidence().transpose() * theta);
    return {-net.damping().cwiseProduct(omega) - net.gen_incidence() * flow + u,
            -net.load_incidence() * flow + net.load_power()};
}

namespace detail {

inline Eigen::LLT<Matrix> load_block(const PowerNetwork& net, const Vector& w) {
    const Matrix& bl = net.load_incidence();
    return factor_spd(bl * w.asDiagonal() * bl.transpose(), net.tolerances().graph, "load block B_L Gamma B_L^T");
}

}  // namespace detail

/// theta_L = (B_L Gamma B_L^T)^{-1} (p* - B_L Gamma B_G^T theta_G).
inline Vector solve_theta_L(const Vector& theta_g, const Vector& p_star, const PowerNetwork& net) {
    if (net.load_count() == 0) return Vector(0);
    const Vector& w = net.weights().values();
    const Vector rhs = p_star - net.load_incidence() * w.asDiagonal() * (net.gen_incidence().transpose() * theta_g);
    return detail::load_block(net, w).solve(rhs);
}

/// p_hat = B_G Gamma B_L^T (B_L Gamma B_L^T)^{-1} p*.
inline Vector p_hat(const PowerNetwork& net, const Vector& p_star) {
    if (net.load_count() == 0) return Vector::Zero(static_cast<Eigen::Index>(net.gen_count()));
    const Vector& w = net.weights().values();
    return net.gen_incidence() * w.asDiagonal() * net.load_incidence().transpose() * detail::load_block(net, w).solve(p_star);
}
inline Vector p_hat(const PowerNetwork& net) { return p_hat(net, net.load_power()); }

/// Linear reduced model on the projected incidence:
/// d eta_S = B_S^T omega, M d omega = -A omega - B_S Gamma eta_S + u - p_hat.
inline ReducedRates linear_reduced_rhs(const Vector& eta_s, const Vector& omega, const Vector& u,
                                       const PowerNetwork& net, const Vector& phat) {
    const Matrix& bs = net.constant_projection().matrix;
    ReducedRates r;
    r.d_eta = bs.transpose() * omega;
    r.d_omega = (-net.damping().cwiseProduct(omega) - bs * net.weights().values().cwiseProduct(eta_s) + u - phat)
                    .cwiseQuotient(net.inertia());
    return r;
}
inline ReducedRates linear_reduced_rhs(const Vector& eta_s, const Vector& omega, const Vector& u,
                                       const PowerNetwork& net) {
    return linear_reduced_rhs(eta_s, omega, u, net, p_hat(net));
}

/// Gamma'(eta) = Gamma [cos eta]. Entries are nonpositive outside the security region.
inline Vector gamma_prime(const Vector& eta, const PowerNetwork& net) {
    return net.weights().values().cwiseProduct(eta.array().cos().matrix());
}

/// State-dependent projected incidence B_S(eta), built with weights Gamma'(eta).
inline ProjectedIncidence projected_incidence_at(const Vector& eta, const PowerNetwork& net) {
    check_security(eta, net);
    try {
        auto out = projected_incidence(net.gen_incidence(), net.load_incidence(), EdgeWeights(gamma_prime(eta, net)),
                                       net.tolerances().graph);
        out.partition = net.partition();
        return out;
    } catch (const RankDeficient& e) {
        throw RegularityLoss(std::string("load Jacobian singular: ") + e.what());
    }
}

/// omega_L = -(B_L Gamma' B_L^T)^{-1} B_L Gamma' B_G^T omega_G.
inline Vector omega_L_reconstruct(const Vector& eta, const Vector& omega, const PowerNetwork& net) {
    check_security(eta, net);
    if (net.load_count() == 0) return Vector(0);
    const Vector gp = gamma_prime(eta, net);
    try {
        return -detail::load_block(net, gp).solve(net.load_incidence() * gp.asDiagonal() * (net.gen_incidence().transpose() * omega));
    } catch (const RankDeficient& e) {
        throw RegularityLoss(std::string("load Jacobian singular: ") + e.what());
    }
}

/// Nonlinear reduced model: d eta = B_S(eta)^T omega, M d omega = -A omega - B_G Gamma sin(eta) + u.
inline ReducedRates nonlinear_reduced_rhs(const ReducedState& x, const Vector& u, const PowerNetwork& net) {
    const auto bs = projected_incidence_at(x.eta, net);
    ReducedRates r;
    r.d_eta = bs.matrix.transpose() * x.omega;
    r.d_omega = (-net.damping().cwiseProduct(x.omega) -
                 net.gen_incidence() * net.weights().values().cwiseProduct(x.eta.array().sin().matrix()) + u)
                    .cwiseQuotient(net.inertia());
    return r;
}

/// Reduced model with both approximations applied: constant-Gamma B_S in the
/// angle dynamics and sin(eta) replaced by eta.
inline ReducedRates approximate_reduced_rhs(const ReducedState& x, const Vector& u, const PowerNetwork& net) {
    ReducedRates r;
    r.d_eta = net.constant_projection().matrix.transpose() * x.omega;
    r.d_omega = (-net.damping().cwiseProduct(x.omega) - net.gen_incidence() * net.weights().values().cwiseProduct(x.eta) + u)
                    .cwiseQuotient(net.inertia());
    return r;
}

/// B_L Gamma sin(eta); constant along reduced trajectories.
inline Vector conserved_load_vector(const Vector& eta, const PowerNetwork& net) {
    return net.load_incidence() * net.weights().values().cwiseProduct(eta.array().sin().matrix());
}

/// omega^0 = (1^T B_L Gamma sin(eta) + 1^T u) / 1^T A 1.
inline double synchronous_frequency(const Vector& eta, const Vector& u, const PowerNetwork& net) {
    return (conserved_load_vector(eta, net).sum() + u.sum()) / net.damping().sum();
}

/// Solves the power flow B Gamma sin(B^T theta) = (u - A omega_bar, p*) by damped
/// Newton with the first generator angle pinned. omega_bar follows from the
/// supply/demand mismatch.
inline EquilibriumPoint find_equilibrium(const Vector& u_bar, const Vector& p_star, const PowerNetwork& net) {
    const auto n = static_cast<Eigen::Index>(net.node_count());
    const auto& tol = net.tolerances();
    if (static_cast<std::size_t>(u_bar.size()) != net.gen_count()) throw InvalidArgument("u_bar has wrong length");
    if (static_cast<std::size_t>(p_star.size()) != net.load_count()) throw InvalidArgument("p_star has wrong length");

    EquilibriumPoint eq;
    eq.u = u_bar;
    eq.omega = (u_bar.sum() + p_star.sum()) / net.damping().sum();
    const Vector injection = net.assemble_nodes(u_bar - eq.omega * net.damping(), p_star);

    const auto pinned = static_cast<Eigen::Index>(net.params().generators.front());
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < n; ++i)
        if (i != pinned) free.push_back(i);
    const auto nf = static_cast<Eigen::Index>(free.size());

    const Matrix& b = net.incidence();
    auto residual = [&](const Vector& th) { return Vector(active_power(th, net) - injection); };
    auto inside = [&](const Vector& th) { return security_margin(b.transpose() * th) > tol.security_margin; };

    Vector theta = Vector::Zero(n);
    Vector f = residual(theta);
    double r = f.cwiseAbs().maxCoeff();
    int it = 0;
    while (r > tol.newton_tolerance) {
        if (++it > tol.newton_max_iterations)
            throw NewtonDivergence("equilibrium Newton did not converge, residual " + std::to_string(r));
        const Vector eta = b.transpose() * theta;
        const Matrix jac = b * gamma_prime(eta, net).asDiagonal() * b.transpose();
        Matrix jr(nf, nf);
        Vector fr(nf);
        for (Eigen::Index i = 0; i < nf; ++i) {
            fr[i] = f[free[i]];
            for (Eigen::Index j = 0; j < nf; ++j) jr(i, j) = jac(free[i], free[j]);
        }
        Eigen::PartialPivLU<Matrix> lu(jr);
        const Vector step = lu.solve(-fr);
        if (!step.allFinite()) throw NewtonDivergence("equilibrium Newton step is not finite");

        double t = 1.0;
        bool accepted = false;
        bool left_region = false;
        for (int h = 0; h < 40 && !accepted; ++h, t *= 0.5) {
            Vector trial = theta;
            for (Eigen::Index i = 0; i < nf; ++i) trial[free[i]] += t * step[i];
            if (!inside(trial)) {
                left_region = true;
                continue;
            }
            const Vector ft = residual(trial);
            const double rt = ft.cwiseAbs().maxCoeff();
            if (rt < r) {
                theta = trial;
                f = ft;
                r = rt;
                accepted = true;
            }
        }
        if (!accepted) {
            if (left_region) throw RegularityLoss("equilibrium iterate leaves the security region");
            throw NewtonDivergence("equilibrium Newton stalled at residual " + std::to_string(r));
        }
    }
    eq.theta = theta;
    eq.eta = b.transpose() * theta;
    if (security_margin(eq.eta) <= tol.security_margin) throw RegularityLoss("equilibrium outside the security region");
    return eq;
}

/// Incremental storage function W around an equilibrium.
inline double storage_W(const ReducedState& x, const EquilibriumPoint& eq, const PowerNetwork& net) {
    const Vector& g = net.weights().values();
    const Vector dw = x.omega.array() - eq.omega;
    return 0.5 * dw.dot(net.inertia().cwiseProduct(dw)) - g.dot(x.eta.array().cos().matrix()) +
           g.dot(eq.eta.array().cos().matrix()) - g.cwiseProduct(eq.eta.array().sin().matrix()).dot(x.eta - eq.eta);
}

/// Analytic gradient of W: (Gamma (sin eta - sin eta_bar), M (omega - omega_bar)).
inline ReducedState storage_W_gradient(const ReducedState& x, const EquilibriumPoint& eq, const PowerNetwork& net) {
    return {net.weights().values().cwiseProduct((x.eta.array().sin() - eq.eta.array().sin()).matrix()),
            net.inertia().cwiseProduct((x.omega.array() - eq.omega).matrix())};
}

/// H(eta_S, rho) = 1/2 rho^T M^{-1} rho - 1^T Gamma cos(eta_S), rho = M omega.
inline double hamiltonian(const Vector& eta_s, const Vector& omega, const PowerNetwork& net) {
    return 0.5 * omega.dot(net.inertia().cwiseProduct(omega)) - net.weights().values().dot(eta_s.array().cos().matrix());
}

/// Same form on the Kron graph: weights Gamma_hat and edge variables eta_hat.
inline double kron_hamiltonian(const Vector& eta_hat, const Vector& omega, const Vector& inertia, const EdgeWeights& kron_weights) {
    return 0.5 * omega.dot(inertia.cwiseProduct(omega)) - kron_weights.values().dot(eta_hat.array().cos().matrix());
}

/// v = B^T omega over all nodes.
inline Vector frequency_disagreement(const Vector& omega_full, const PowerNetwork& net) {
    return net.incidence().transpose() * omega_full;
}

/// v_hat = B_hat^T omega_G on the Kron graph.
inline Vector kron_disagreement(const Vector& omega, const Matrix& kron_incidence) {
    return kron_incidence.transpose() * omega;
}

/// eta_S = Pi^T eta with the constant-Gamma projection.
inline Vector project_eta_S(const Vector& eta, const PowerNetwork& net) {
    return net.constant_projection().pi.transpose() * eta;
}

/// Kron-reduced linear model data: L_S, its recovered graph and p_hat.
struct KronModel {
    Matrix reduced_laplacian;
    KronGraph graph;
    Vector p_hat;
};

inline KronModel kron_model(const PowerNetwork& net) {
    KronModel k;
    k.reduced_laplacian = schur_complement(weighted_laplacian(net.incidence(), net.weights()), net.partition(),
                                           net.tolerances().graph);
    k.graph = kron_edge_recovery(k.reduced_laplacian, net.tolerances().graph);
    k.p_hat = p_hat(net);
    return k;
}

/// Kron state space: d eta_hat = B_hat^T omega, M d omega = -A omega - B_hat Gamma_hat eta_hat + u - p_hat.
inline ReducedRates kron_linear_rhs(const Vector& eta_hat, const Vector& omega, const Vector& u, const PowerNetwork& net,
                                    const KronModel& k) {
    const Matrix& bh = k.graph.incidence;
    ReducedRates r;
    r.d_eta = bh.transpose() * omega;
    r.d_omega = (-net.damping().cwiseProduct(omega) - bh * k.graph.weights.values().cwiseProduct(eta_hat) + u - k.p_hat)
                    .cwiseQuotient(net.inertia());
    return r;
}

}  // namespace gridreduce
