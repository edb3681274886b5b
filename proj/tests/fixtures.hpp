#pragma once

#include <random>
#include <string>
#include <vector>

#include "gridreduce/gridreduce.hpp"
#include "oracles.hpp"

namespace fixtures {

using namespace gridreduce;

inline std::string scenario_path(const std::string& name) { return std::string(GRIDREDUCE_SCENARIO_DIR) + "/" + name; }

inline std::vector<oracle::Line> lines_of(const UndirectedGraph& g) {
    std::vector<oracle::Line> out;
    for (const auto& e : g.edges()) out.emplace_back(e.tail, e.head);
    return out;
}

inline std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

inline PowerNetwork case6() { return PowerNetwork(builtin_case6().network); }

/// Star with two generators (nodes 0, 1) and one load (node 2); weights a, b.
inline NetworkParameters star(double a, double b, double load = 0.0) {
    NetworkParameters p;
    p.graph = UndirectedGraph(3, {{0, 2}, {2, 1}});
    p.generators = {0, 1};
    p.loads = {2};
    p.inertia = Vector::Ones(2);
    p.damping = Vector::Ones(2);
    p.reactance = Vector{{1.0 / a, 1.0 / b}};
    p.load_power = Vector::Constant(1, load);
    return p;
}

/// Random small network with light loads so an equilibrium exists in the
/// security region. Generators are the graph's first partition set.
inline NetworkParameters random_network(std::mt19937_64& rng, std::size_t max_nodes = 6, double load_scale = 0.3) {
    RandomGraphSpec spec;
    spec.max_nodes = max_nodes;
    spec.min_weight = 1.0;
    spec.max_weight = 10.0;
    auto wg = random_connected_graph(rng, spec);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    NetworkParameters p;
    p.graph = wg.graph;
    p.generators = wg.partition.set_one();
    p.loads = wg.partition.set_two();
    const auto ng = static_cast<Eigen::Index>(p.generators.size());
    const auto nl = static_cast<Eigen::Index>(p.loads.size());
    p.inertia.resize(ng);
    p.damping.resize(ng);
    for (Eigen::Index i = 0; i < ng; ++i) p.inertia[i] = 2.0 + 4.0 * unit(rng), p.damping[i] = 0.5 + 1.5 * unit(rng);
    p.reactance = wg.weights.values().cwiseInverse();
    p.load_power.resize(nl);
    for (Eigen::Index i = 0; i < nl; ++i) p.load_power[i] = -load_scale * unit(rng);
    return p;
}

}  // namespace fixtures
