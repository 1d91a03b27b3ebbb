#ifndef KCANON_TESTS_CORPUS_HPP_
#define KCANON_TESTS_CORPUS_HPP_

// Graph generators shared by the unit and acceptance suites.

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "kcanon/graph.hpp"

namespace kcanon::testing {

inline Graph make(int n, std::initializer_list<std::pair<int, int>> pairs) {
    std::vector<Edge> edges;
    for (auto [u, v] : pairs) edges.push_back({u, v, 1.0});
    return Graph::build(n, std::move(edges));
}

inline Graph path(int n) {
    std::vector<Edge> edges;
    for (int i = 1; i < n; ++i) edges.push_back({i, i + 1, 1.0});
    return Graph::build(n, std::move(edges));
}

inline Graph cycle(int n) {
    std::vector<Edge> edges;
    for (int i = 1; i < n; ++i) edges.push_back({i, i + 1, 1.0});
    edges.push_back({n, 1, 1.0});
    return Graph::build(n, std::move(edges));
}

inline Graph complete(int n) {
    std::vector<Edge> edges;
    for (int i = 1; i <= n; ++i) {
        for (int j = i + 1; j <= n; ++j) edges.push_back({i, j, 1.0});
    }
    return Graph::build(n, std::move(edges));
}

/// Star K1,leaves with node 1 as centre.
inline Graph star(int leaves) {
    std::vector<Edge> edges;
    for (int i = 2; i <= leaves + 1; ++i) edges.push_back({1, i, 1.0});
    return Graph::build(leaves + 1, std::move(edges));
}

inline Graph with_chord(const Graph& g, int u, int v) {
    std::vector<Edge> edges(g.edges().begin(), g.edges().end());
    edges.push_back({u, v, 1.0});
    return Graph::build(g.n(), std::move(edges));
}

inline std::vector<int> random_permutation(int n, std::mt19937_64& rng) {
    std::vector<int> p(n);
    std::iota(p.begin(), p.end(), 1);
    std::shuffle(p.begin(), p.end(), rng);
    return p;
}

/// Relabels and also shuffles the stored edge order and orientation.
inline Graph scramble(const Graph& g, const std::vector<int>& perm, std::mt19937_64& rng) {
    std::vector<Edge> edges;
    for (const Edge& e : g.edges()) {
        Edge r{perm[e.u - 1], perm[e.v - 1], e.w};
        if (rng() & 1U) std::swap(r.u, r.v);
        edges.push_back(r);
    }
    std::shuffle(edges.begin(), edges.end(), rng);
    return Graph::build(g.n(), std::move(edges));
}

/// Uniform random labelled tree via a Pruefer sequence.
inline Graph random_tree(int n, std::mt19937_64& rng) {
    if (n == 2) return path(2);
    std::uniform_int_distribution<int> pick(1, n);
    std::vector<int> seq(n - 2);
    for (int& s : seq) s = pick(rng);
    std::vector<int> deg(n + 1, 1);
    for (int s : seq) ++deg[s];
    std::vector<Edge> edges;
    std::set<int> leaves;
    for (int i = 1; i <= n; ++i) {
        if (deg[i] == 1) leaves.insert(i);
    }
    for (int s : seq) {
        const int leaf = *leaves.begin();
        leaves.erase(leaves.begin());
        edges.push_back({leaf, s, 1.0});
        if (--deg[s] == 1) leaves.insert(s);
    }
    const int a = *leaves.begin();
    const int b = *std::next(leaves.begin());
    edges.push_back({a, b, 1.0});
    return Graph::build(n, std::move(edges));
}

/// Random spanning tree plus each remaining pair with probability p.
/// Weights are 1 unless `weighted`, then uniform in [0.1, 10].
inline Graph random_connected(int n, double p, std::mt19937_64& rng, bool weighted = false) {
    const Graph tree = random_tree(n, rng);
    std::set<std::pair<int, int>> have;
    std::vector<Edge> edges;
    std::uniform_real_distribution<double> wdist(0.1, 10.0);
    std::bernoulli_distribution coin(p);
    for (const Edge& e : tree.edges()) {
        have.insert({std::min(e.u, e.v), std::max(e.u, e.v)});
        edges.push_back({e.u, e.v, weighted ? wdist(rng) : 1.0});
    }
    for (int i = 1; i <= n; ++i) {
        for (int j = i + 1; j <= n; ++j) {
            if (!have.count({i, j}) && coin(rng)) edges.push_back({i, j, weighted ? wdist(rng) : 1.0});
        }
    }
    return Graph::build(n, std::move(edges));
}

/// Degree-preserving double edge swap; returns the input when no valid swap
/// keeps the graph simple and connected within a few tries.
inline Graph degree_preserving_swap(const Graph& g, std::mt19937_64& rng) {
    std::vector<Edge> edges(g.edges().begin(), g.edges().end());
    std::uniform_int_distribution<std::size_t> pick(0, edges.size() - 1);
    for (int attempt = 0; attempt < 100; ++attempt) {
        const std::size_t i = pick(rng), j = pick(rng);
        if (i == j) continue;
        Edge a = edges[i], b = edges[j];
        if (rng() & 1U) std::swap(b.u, b.v);
        // (a.u-a.v, b.u-b.v) -> (a.u-b.v, b.u-a.v)
        if (a.u == b.v || b.u == a.v || g.weight(a.u, b.v) != 0.0 || g.weight(b.u, a.v) != 0.0) continue;
        if (a.u == b.u || a.v == b.v) continue;
        std::vector<Edge> next = edges;
        next[i] = {a.u, b.v, 1.0};
        next[j] = {b.u, a.v, 1.0};
        Graph candidate = Graph::structural(g.n(), next);
        if (is_connected(candidate)) return Graph::build(g.n(), std::move(next));
    }
    return g;
}

} // namespace kcanon::testing

#endif // KCANON_TESTS_CORPUS_HPP_
