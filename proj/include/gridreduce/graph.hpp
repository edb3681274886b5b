#pragma once

// Weighted graphs, incidence/Laplacian construction, Schur-complement (Kron)
// reduction and the projected incidence matrix B_S = B_1 (I - B_2^+ B_2).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gridreduce/errors.hpp"

namespace gridreduce {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Oriented edge; the orientation only fixes the sign of the incidence column.
struct Edge {
    std::size_t tail = 0;
    std::size_t head = 0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

/// Undirected simple graph with a fixed orientation per edge.
class UndirectedGraph {
public:
    UndirectedGraph() = default;

    /// Edges are taken with the orientation given.
    UndirectedGraph(std::size_t node_count, std::vector<Edge> edges)
        : node_count_(node_count), edges_(std::move(edges)) {
        if (node_count_ == 0) throw InvalidArgument("graph needs at least one node");
        std::set<std::pair<std::size_t, std::size_t>> seen;
        for (std::size_t k = 0; k < edges_.size(); ++k) {
            const auto [t, h] = edges_[k];
            if (t >= node_count_ || h >= node_count_)
                throw InvalidArgument("edge " + std::to_string(k) + " has a node index out of range");
            if (t == h) throw InvalidArgument("edge " + std::to_string(k) + " is a self-loop");
            if (!seen.insert({std::min(t, h), std::max(t, h)}).second)
                throw InvalidArgument("edge " + std::to_string(k) + " duplicates an earlier edge");
        }
    }

    /// Tail is the smaller node index of each pair.
    static UndirectedGraph from_pairs(std::size_t node_count,
                                      const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
        std::vector<Edge> edges;
        edges.reserve(pairs.size());
        for (const auto& [i, j] : pairs) edges.push_back({std::min(i, j), std::max(i, j)});
        return UndirectedGraph(node_count, std::move(edges));
    }

    std::size_t node_count() const noexcept { return node_count_; }
    std::size_t edge_count() const noexcept { return edges_.size(); }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    const Edge& edge(std::size_t k) const { return edges_.at(k); }

    friend bool operator==(const UndirectedGraph&, const UndirectedGraph&) = default;

private:
    std::size_t node_count_ = 0;
    std::vector<Edge> edges_;
};

/// Strictly positive per-edge weights (the diagonal of Gamma).
class EdgeWeights {
public:
    EdgeWeights() = default;
    explicit EdgeWeights(Vector values) : values_(std::move(values)) {
        for (Eigen::Index k = 0; k < values_.size(); ++k) {
            if (!(values_[k] > 0.0) || !std::isfinite(values_[k]))
                throw InvalidArgument("edge weight " + std::to_string(k) + " must be positive and finite, got " +
                                      std::to_string(values_[k]));
        }
    }
    EdgeWeights(std::initializer_list<double> values)
        : EdgeWeights(Vector(Eigen::Map<const Vector>(values.begin(), static_cast<Eigen::Index>(values.size())))) {}

    const Vector& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }
    double operator[](std::size_t k) const { return values_[static_cast<Eigen::Index>(k)]; }
    auto as_diagonal() const { return values_.asDiagonal(); }

private:
    Vector values_;
};

/// Disjoint cover of the node set. set_two is the set eliminated by reduction.
class NodePartition {
public:
    NodePartition() = default;
    NodePartition(std::size_t node_count, std::vector<std::size_t> set_one, std::vector<std::size_t> set_two)
        : set_one_(std::move(set_one)), set_two_(std::move(set_two)) {
        std::vector<int> hits(node_count, 0);
        for (auto* s : {&set_one_, &set_two_}) {
            for (auto i : *s) {
                if (i >= node_count) throw InvalidArgument("partition index " + std::to_string(i) + " out of range");
                ++hits[i];
            }
        }
        for (std::size_t i = 0; i < node_count; ++i) {
            if (hits[i] != 1)
                throw InvalidArgument("node " + std::to_string(i) +
                                      (hits[i] == 0 ? " is not covered by the partition" : " appears twice in the partition"));
        }
        if (set_one_.empty()) throw InvalidArgument("retained node set must not be empty");
    }

    const std::vector<std::size_t>& set_one() const noexcept { return set_one_; }
    const std::vector<std::size_t>& set_two() const noexcept { return set_two_; }
    std::size_t node_count() const noexcept { return set_one_.size() + set_two_.size(); }

    friend bool operator==(const NodePartition&, const NodePartition&) = default;

private:
    std::vector<std::size_t> set_one_;
    std::vector<std::size_t> set_two_;
};

/// Numerical thresholds used by the graph routines.
struct GraphTolerances {
    /// Squared min/max Cholesky pivot ratio below which an SPD block is declared singular.
    double rank_ratio = 1e-13;
    /// Relative tolerance for the Laplacian checks in kron_edge_recovery.
    double laplacian_check = 1e-9;
    /// Off-diagonals smaller than drop * max|off-diagonal| are not edges.
    double drop = 1e-9;
};

namespace detail {

inline Eigen::LLT<Matrix> factor_spd(const Matrix& s, const GraphTolerances& tol, const char* what) {
    Eigen::LLT<Matrix> llt(s);
    if (llt.info() != Eigen::Success) throw RankDeficient(std::string(what) + " is not positive definite");
    if (s.rows() > 0) {
        const Vector d = llt.matrixLLT().diagonal().cwiseAbs2();
        if (d.minCoeff() <= tol.rank_ratio * d.maxCoeff())
            throw RankDeficient(std::string(what) + " is numerically singular");
    }
    return llt;
}

inline void require(bool ok, const std::string& msg) {
    if (!ok) throw InvalidArgument(msg);
}

}  // namespace detail

/// Rows of `m` listed in `rows`, in that order.
inline Matrix select_rows(const Matrix& m, const std::vector<std::size_t>& rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = m.row(static_cast<Eigen::Index>(rows[r]));
    return out;
}

/// Entries of `v` listed in `idx`, in that order.
inline Vector select_entries(const Vector& v, const std::vector<std::size_t>& idx) {
    Vector out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t r = 0; r < idx.size(); ++r) out[static_cast<Eigen::Index>(r)] = v[static_cast<Eigen::Index>(idx[r])];
    return out;
}

/// n x m incidence matrix: +1 at the tail, -1 at the head of each edge.
inline Matrix incidence_matrix(const UndirectedGraph& g) {
    Matrix b = Matrix::Zero(static_cast<Eigen::Index>(g.node_count()), static_cast<Eigen::Index>(g.edge_count()));
    for (std::size_t k = 0; k < g.edge_count(); ++k) {
        b(static_cast<Eigen::Index>(g.edge(k).tail), static_cast<Eigen::Index>(k)) = 1.0;
        b(static_cast<Eigen::Index>(g.edge(k).head), static_cast<Eigen::Index>(k)) = -1.0;
    }
    return b;
}

/// L = B Gamma B^T.
inline Matrix weighted_laplacian(const Matrix& b, const EdgeWeights& w) {
    detail::require(static_cast<std::size_t>(b.cols()) == w.size(),
                    "incidence has " + std::to_string(b.cols()) + " columns but " + std::to_string(w.size()) + " weights");
    return b * w.as_diagonal() * b.transpose();
}

/// L_S = L11 - L12 L22^{-1} L12^T with blocks taken along the partition.
inline Matrix schur_complement(const Matrix& l, const NodePartition& p, const GraphTolerances& tol = {}) {
    detail::require(l.rows() == l.cols(), "Laplacian must be square");
    detail::require(static_cast<std::size_t>(l.rows()) == p.node_count(), "partition does not match Laplacian size");
    const auto& one = p.set_one();
    const auto& two = p.set_two();
    const auto n1 = static_cast<Eigen::Index>(one.size());
    const auto n2 = static_cast<Eigen::Index>(two.size());
    Matrix l11(n1, n1), l12(n1, n2), l22(n2, n2);
    for (Eigen::Index i = 0; i < n1; ++i) {
        for (Eigen::Index j = 0; j < n1; ++j) l11(i, j) = l(one[i], one[j]);
        for (Eigen::Index j = 0; j < n2; ++j) l12(i, j) = l(one[i], two[j]);
    }
    for (Eigen::Index i = 0; i < n2; ++i)
        for (Eigen::Index j = 0; j < n2; ++j) l22(i, j) = l(two[i], two[j]);
    if (n2 == 0) return l11;
    const auto llt = detail::factor_spd(l22, tol, "eliminated Laplacian block L22");
    Matrix ls = l11 - l12 * llt.solve(l12.transpose());
    return 0.5 * (ls + ls.transpose());
}

/// Pi = I - Gamma B2^T (B2 Gamma B2^T)^{-1} B2, the Gamma-orthogonal projection onto ker B2.
inline Matrix projection_pi(const Matrix& b2, const EdgeWeights& w, const GraphTolerances& tol = {}) {
    const auto m = static_cast<Eigen::Index>(w.size());
    detail::require(b2.cols() == m || b2.rows() == 0, "B2 column count does not match weights");
    if (b2.rows() == 0) return Matrix::Identity(m, m);
    const Matrix gb2t = w.as_diagonal() * b2.transpose();
    const auto llt = detail::factor_spd(b2 * gb2t, tol, "B2 Gamma B2^T");
    return Matrix::Identity(m, m) - gb2t * llt.solve(b2);
}

/// Projected incidence matrix together with what it was built from.
struct ProjectedIncidence {
    Matrix matrix;  ///< B_S, |set_one| x m
    Matrix pi;      ///< m x m projection
    EdgeWeights weights;
    std::optional<NodePartition> partition;
};

/// B_S = B1 (I - B2^+ B2) with B2^+ = Gamma B2^T (B2 Gamma B2^T)^{-1}.
inline ProjectedIncidence projected_incidence(const Matrix& b1, const Matrix& b2, const EdgeWeights& w,
                                              const GraphTolerances& tol = {}) {
    detail::require(static_cast<std::size_t>(b1.cols()) == w.size(), "B1 column count does not match weights");
    detail::require(b2.rows() == 0 || b2.cols() == b1.cols(), "B1 and B2 column counts differ");
    ProjectedIncidence out;
    out.pi = projection_pi(b2, w, tol);
    out.matrix = b1 * out.pi;
    out.weights = w;
    return out;
}

inline ProjectedIncidence projected_incidence(const UndirectedGraph& g, const NodePartition& p, const EdgeWeights& w,
                                              const GraphTolerances& tol = {}) {
    detail::require(p.node_count() == g.node_count(), "partition does not match graph");
    const Matrix b = incidence_matrix(g);
    auto out = projected_incidence(select_rows(b, p.set_one()), select_rows(b, p.set_two()), w, tol);
    out.partition = p;
    return out;
}

/// Reduced graph read back from a Laplacian: L_S = B_hat Gamma_hat B_hat^T.
struct KronGraph {
    UndirectedGraph graph;
    EdgeWeights weights;
    Matrix incidence;
};

/// One edge {i,j}, i<j, of weight -L(i,j) per significantly negative off-diagonal.
inline KronGraph kron_edge_recovery(const Matrix& ls, const GraphTolerances& tol = {}) {
    if (ls.rows() != ls.cols() || ls.rows() == 0) throw NotLaplacian("matrix must be square and nonempty");
    const double scale = std::max(1.0, ls.cwiseAbs().maxCoeff());
    const double eps = tol.laplacian_check * scale;
    if ((ls - ls.transpose()).cwiseAbs().maxCoeff() > eps) throw NotLaplacian("matrix is not symmetric");
    if (ls.rowwise().sum().cwiseAbs().maxCoeff() > eps) throw NotLaplacian("row sums are not zero");
    const auto n = ls.rows();
    double max_off = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (i != j) {
                if (ls(i, j) > eps) throw NotLaplacian("positive off-diagonal entry");
                max_off = std::max(max_off, -ls(i, j));
            }
    std::vector<Edge> edges;
    std::vector<double> weights;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            if (-ls(i, j) > tol.drop * max_off && -ls(i, j) > 0.0) {
                edges.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j)});
                weights.push_back(-0.5 * (ls(i, j) + ls(j, i)));
            }
    KronGraph out{UndirectedGraph(static_cast<std::size_t>(n), std::move(edges)),
                  EdgeWeights(Vector(Eigen::Map<Vector>(weights.data(), static_cast<Eigen::Index>(weights.size())))), {}};
    out.incidence = incidence_matrix(out.graph);
    return out;
}

/// True iff the graph has exactly one connected component.
inline bool is_connected(const UndirectedGraph& g) {
    const std::size_t n = g.node_count();
    std::vector<std::vector<std::size_t>> adj(n);
    for (const auto& e : g.edges()) {
        adj[e.tail].push_back(e.head);
        adj[e.head].push_back(e.tail);
    }
    std::vector<bool> seen(n, false);
    std::queue<std::size_t> frontier;
    frontier.push(0);
    seen[0] = true;
    std::size_t count = 1;
    while (!frontier.empty()) {
        const auto v = frontier.front();
        frontier.pop();
        for (auto u : adj[v])
            if (!seen[u]) {
                seen[u] = true;
                ++count;
                frontier.push(u);
            }
    }
    return count == n;
}

}  // namespace gridreduce
