#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "gridreduce/graph.hpp"

namespace gridreduce {

/// Lossless inductive network with swing-equation generators and
/// constant-power loads. Angles in rad, frequencies as deviations in rad/s,
/// powers in pu. Load powers are net injections (consumption is negative).
struct NetworkParameters {
    UndirectedGraph graph;
    std::vector<std::size_t> generators;
    std::vector<std::size_t> loads;
    Vector inertia;     ///< M, per generator
    Vector damping;     ///< A, per generator
    Vector reactance;   ///< X, per edge
    Vector voltage;     ///< V, per node; empty means 1.0 pu everywhere
    Vector load_power;  ///< p*, per load
    double nominal_frequency = 50.0;
};

inline bool same_vector(const Vector& a, const Vector& b) {
    return a.size() == b.size() && (a.size() == 0 || a == b);
}

inline bool operator==(const NetworkParameters& a, const NetworkParameters& b) {
    return a.graph == b.graph && a.generators == b.generators && a.loads == b.loads &&
           same_vector(a.inertia, b.inertia) && same_vector(a.damping, b.damping) &&
           same_vector(a.reactance, b.reactance) && same_vector(a.voltage, b.voltage) &&
           same_vector(a.load_power, b.load_power) && a.nominal_frequency == b.nominal_frequency;
}

/// Thresholds shared by the power-model routines.
struct PowerTolerances {
    /// Evaluations with |eta_k| >= pi/2 - security_margin are rejected.
    double security_margin = 1e-6;
    double newton_tolerance = 1e-12;
    int newton_max_iterations = 50;
    GraphTolerances graph;
};

/// gamma_k = V_i V_j / X_k.
inline EdgeWeights line_weights(const NetworkParameters& p) {
    Vector w(static_cast<Eigen::Index>(p.graph.edge_count()));
    for (std::size_t k = 0; k < p.graph.edge_count(); ++k) {
        const auto& e = p.graph.edge(k);
        const double vi = p.voltage.size() ? p.voltage[static_cast<Eigen::Index>(e.tail)] : 1.0;
        const double vj = p.voltage.size() ? p.voltage[static_cast<Eigen::Index>(e.head)] : 1.0;
        w[static_cast<Eigen::Index>(k)] = vi * vj / p.reactance[static_cast<Eigen::Index>(k)];
    }
    return EdgeWeights(std::move(w));
}

/// Validated parameters plus the constant matrices every model needs.
class PowerNetwork {
public:
    explicit PowerNetwork(NetworkParameters params, PowerTolerances tol = {}) : p_(std::move(params)), tol_(tol) {
        const auto n = p_.graph.node_count();
        const auto m = static_cast<Eigen::Index>(p_.graph.edge_count());
        const auto ng = static_cast<Eigen::Index>(p_.generators.size());
        const auto nl = static_cast<Eigen::Index>(p_.loads.size());
        if (ng == 0) throw InvalidArgument("network needs at least one generator");
        partition_ = NodePartition(n, p_.generators, p_.loads);
        if (!is_connected(p_.graph)) throw InvalidArgument("network graph is not connected");
        check_positive(p_.inertia, ng, "inertia");
        check_positive(p_.damping, ng, "damping");
        check_positive(p_.reactance, m, "reactance");
        if (p_.voltage.size() == 0) p_.voltage = Vector::Ones(static_cast<Eigen::Index>(n));
        check_positive(p_.voltage, static_cast<Eigen::Index>(n), "voltage");
        if (p_.load_power.size() != nl)
            throw InvalidArgument("load_power has " + std::to_string(p_.load_power.size()) + " entries, expected " +
                                  std::to_string(nl));
        if (!p_.load_power.allFinite()) throw InvalidArgument("load_power must be finite");

        b_ = incidence_matrix(p_.graph);
        bg_ = select_rows(b_, p_.generators);
        bl_ = select_rows(b_, p_.loads);
        gamma_ = line_weights(p_);
        constant_ = projected_incidence(bg_, bl_, gamma_, tol_.graph);
        constant_.partition = partition_;
    }

    const NetworkParameters& params() const noexcept { return p_; }
    const PowerTolerances& tolerances() const noexcept { return tol_; }
    const NodePartition& partition() const noexcept { return partition_; }
    /// Full incidence B (n x m), generator rows B_G and load rows B_L.
    const Matrix& incidence() const noexcept { return b_; }
    const Matrix& gen_incidence() const noexcept { return bg_; }
    const Matrix& load_incidence() const noexcept { return bl_; }
    const EdgeWeights& weights() const noexcept { return gamma_; }
    /// B_S and Pi built with the constant weights Gamma.
    const ProjectedIncidence& constant_projection() const noexcept { return constant_; }

    std::size_t node_count() const noexcept { return p_.graph.node_count(); }
    std::size_t edge_count() const noexcept { return p_.graph.edge_count(); }
    std::size_t gen_count() const noexcept { return p_.generators.size(); }
    std::size_t load_count() const noexcept { return p_.loads.size(); }
    const Vector& inertia() const noexcept { return p_.inertia; }
    const Vector& damping() const noexcept { return p_.damping; }
    const Vector& load_power() const noexcept { return p_.load_power; }

    /// Same network with a different load vector.
    PowerNetwork with_load_power(const Vector& p_star) const {
        NetworkParameters q = p_;
        q.load_power = p_star;
        return PowerNetwork(std::move(q), tol_);
    }

    /// Node-ordered vector from generator and load parts.
    Vector assemble_nodes(const Vector& gen_part, const Vector& load_part) const {
        Vector out(static_cast<Eigen::Index>(node_count()));
        for (std::size_t i = 0; i < gen_count(); ++i) out[static_cast<Eigen::Index>(p_.generators[i])] = gen_part[static_cast<Eigen::Index>(i)];
        for (std::size_t i = 0; i < load_count(); ++i) out[static_cast<Eigen::Index>(p_.loads[i])] = load_part[static_cast<Eigen::Index>(i)];
        return out;
    }
    Vector gen_part(const Vector& nodes) const { return select_entries(nodes, p_.generators); }
    Vector load_part(const Vector& nodes) const { return select_entries(nodes, p_.loads); }

private:
    static void check_positive(const Vector& v, Eigen::Index expected, const char* name) {
        if (v.size() != expected)
            throw InvalidArgument(std::string(name) + " has " + std::to_string(v.size()) + " entries, expected " +
                                  std::to_string(expected));
        for (Eigen::Index i = 0; i < v.size(); ++i)
            if (!(v[i] > 0.0) || !std::isfinite(v[i]))
                throw InvalidArgument(std::string(name) + "[" + std::to_string(i) + "] must be positive");
    }

    NetworkParameters p_;
    PowerTolerances tol_;
    NodePartition partition_;
    Matrix b_, bg_, bl_;
    EdgeWeights gamma_;
    ProjectedIncidence constant_;
};

}  // namespace gridreduce
