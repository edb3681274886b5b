#pragma once

#include <algorithm>
#include <numeric>
#include <random>

#include "gridreduce/graph.hpp"

namespace gridreduce {

struct RandomGraphSpec {
    std::size_t min_nodes = 3;
    std::size_t max_nodes = 10;
    double min_weight = 0.1;
    double max_weight = 10.0;
    /// Probability of each non-tree pair becoming an edge.
    double extra_edge_probability = 0.3;
};

struct WeightedGraph {
    UndirectedGraph graph;
    EdgeWeights weights;
    /// set_one has between 1 and n-1 nodes, so set_two is never empty.
    NodePartition partition;
};

/// Random connected graph: a random spanning tree plus random chords, with
/// random orientations and weights drawn uniformly from [min_weight, max_weight].
inline WeightedGraph random_connected_graph(std::mt19937_64& rng, const RandomGraphSpec& spec = {}) {
    std::uniform_int_distribution<std::size_t> size_dist(std::max<std::size_t>(spec.min_nodes, 2), std::max(spec.min_nodes, spec.max_nodes));
    const std::size_t n = size_dist(rng);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    std::bernoulli_distribution coin(0.5);
    std::bernoulli_distribution chord(spec.extra_edge_probability);
    std::vector<std::vector<bool>> used(n, std::vector<bool>(n, false));
    std::vector<Edge> edges;
    auto add = [&](std::size_t a, std::size_t b) {
        used[a][b] = used[b][a] = true;
        edges.push_back(coin(rng) ? Edge{a, b} : Edge{b, a});
    };
    for (std::size_t i = 1; i < n; ++i) {
        std::uniform_int_distribution<std::size_t> parent(0, i - 1);
        add(order[i], order[parent(rng)]);
    }
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
            if (!used[a][b] && chord(rng)) add(a, b);
    std::shuffle(edges.begin(), edges.end(), rng);

    std::uniform_real_distribution<double> wdist(spec.min_weight, spec.max_weight);
    Vector w(static_cast<Eigen::Index>(edges.size()));
    for (auto& x : w) x = wdist(rng);

    std::shuffle(order.begin(), order.end(), rng);
    std::uniform_int_distribution<std::size_t> keep(1, n - 1);
    const std::size_t n1 = keep(rng);
    std::vector<std::size_t> one(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n1));
    std::vector<std::size_t> two(order.begin() + static_cast<std::ptrdiff_t>(n1), order.end());
    std::sort(one.begin(), one.end());
    std::sort(two.begin(), two.end());

    return {UndirectedGraph(n, std::move(edges)), EdgeWeights(std::move(w)), NodePartition(n, std::move(one), std::move(two))};
}

}  // namespace gridreduce
