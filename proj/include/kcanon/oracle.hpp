#ifndef KCANON_ORACLE_HPP_
#define KCANON_ORACLE_HPP_

// Ground truth for small instances: exact rational voltages and brute-force
// automorphism / isomorphism search. Nothing in here uses floating-point
// solves or voltage signatures.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "kcanon/error.hpp"
#include "kcanon/graph.hpp"

namespace kcanon::oracle {

using BigInt = boost::multiprecision::cpp_int;
using ExactRational = boost::multiprecision::cpp_rational;

inline constexpr int kMaxBruteForceNodes = 10;
inline constexpr int kMaxEnumerationNodes = 7;

/// Exact value of a finite double (every double is a dyadic rational).
inline ExactRational to_exact(double x) {
    if (!std::isfinite(x)) throw Error(ErrorKind::NonFinite, "cannot convert non-finite value");
    if (x == 0.0) return ExactRational(0);
    int exp = 0;
    const double frac = std::frexp(x, &exp); // x = frac * 2^exp, 0.5 <= |frac| < 1
    const auto mant = static_cast<std::int64_t>(std::ldexp(frac, 53));
    exp -= 53;
    ExactRational r{BigInt(mant)};
    if (exp > 0) {
        r *= ExactRational(BigInt(1) << exp);
    } else if (exp < 0) {
        r /= ExactRational(BigInt(1) << -exp);
    }
    return r;
}

inline double to_double(const ExactRational& r) { return r.convert_to<double>(); }

namespace detail {

inline BigInt lcm(const BigInt& a, const BigInt& b) {
    return a / boost::multiprecision::gcd(a, b) * b;
}

} // namespace detail

/// Solves A x = rhs exactly by fraction-free (Bareiss) elimination after
/// clearing denominators row by row.
inline std::vector<ExactRational> bareiss_solve(const std::vector<std::vector<ExactRational>>& a,
                                                const std::vector<ExactRational>& rhs) {
    const std::size_t m = a.size();
    std::vector<std::vector<BigInt>> mat(m, std::vector<BigInt>(m + 1));
    for (std::size_t i = 0; i < m; ++i) {
        BigInt scale = 1;
        for (std::size_t j = 0; j < m; ++j) scale = detail::lcm(scale, denominator(a[i][j]));
        scale = detail::lcm(scale, denominator(rhs[i]));
        for (std::size_t j = 0; j < m; ++j) {
            mat[i][j] = numerator(a[i][j]) * (scale / denominator(a[i][j]));
        }
        mat[i][m] = numerator(rhs[i]) * (scale / denominator(rhs[i]));
    }

    BigInt prev = 1;
    for (std::size_t k = 0; k < m; ++k) {
        if (mat[k][k] == 0) {
            std::size_t r = k + 1;
            while (r < m && mat[r][k] == 0) ++r;
            if (r == m) throw Error(ErrorKind::SingularSystem, "zero pivot in exact elimination");
            std::swap(mat[k], mat[r]);
        }
        for (std::size_t i = k + 1; i < m; ++i) {
            for (std::size_t j = k + 1; j <= m; ++j) {
                mat[i][j] = (mat[i][j] * mat[k][k] - mat[i][k] * mat[k][j]) / prev;
            }
            mat[i][k] = 0;
        }
        prev = mat[k][k];
    }

    std::vector<ExactRational> x(m);
    for (std::size_t ii = m; ii-- > 0;) {
        ExactRational s{mat[ii][m]};
        for (std::size_t j = ii + 1; j < m; ++j) s -= ExactRational(mat[ii][j]) * x[j];
        x[ii] = s / ExactRational(mat[ii][ii]);
    }
    return x;
}

inline std::vector<std::vector<ExactRational>> exact_laplacian(const Graph& g) {
    const auto n = static_cast<std::size_t>(g.n());
    std::vector<std::vector<ExactRational>> lap(n, std::vector<ExactRational>(n));
    for (const Edge& e : g.edges()) {
        const ExactRational w = to_exact(e.w);
        const std::size_t i = e.u - 1, j = e.v - 1;
        lap[i][j] -= w;
        lap[j][i] -= w;
        lap[i][i] += w;
        lap[j][j] += w;
    }
    return lap;
}

/// Exact sum-zero voltages for unit current a -> b, grounding node `ground`
/// for the elimination (node N when 0).
inline std::vector<ExactRational> exact_solve_pair(const Graph& g, int a, int b, int ground = 0) {
    const int n = g.n();
    if (n < 2) throw Error(ErrorKind::InvalidArgument, "need at least 2 nodes");
    if (a < 1 || a > n || b < 1 || b > n) throw Error(ErrorKind::InvalidNode, "bad source/sink");
    if (a == b) throw Error(ErrorKind::SameSourceSink, "source equals sink");
    if (ground == 0) ground = n;

    const auto lap = exact_laplacian(g);
    std::vector<int> keep;
    for (int k = 1; k <= n; ++k) {
        if (k != ground) keep.push_back(k);
    }
    std::vector<std::vector<ExactRational>> reduced(keep.size(),
                                                    std::vector<ExactRational>(keep.size()));
    std::vector<ExactRational> rhs(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) {
        for (std::size_t j = 0; j < keep.size(); ++j) reduced[i][j] = lap[keep[i] - 1][keep[j] - 1];
        if (keep[i] == a) rhs[i] += 1;
        if (keep[i] == b) rhs[i] -= 1;
    }
    const auto x = bareiss_solve(reduced, rhs);

    std::vector<ExactRational> v(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < keep.size(); ++i) v[keep[i] - 1] = x[i];
    ExactRational mean = std::accumulate(v.begin(), v.end(), ExactRational(0)) / n;
    for (auto& vk : v) vk -= mean;
    return v;
}

// ---------------------------------------------------------------------------
// Brute-force symmetry search
// ---------------------------------------------------------------------------

struct AutomorphismReport {
    std::uint64_t order = 0;
    std::vector<std::vector<int>> orbits; // sorted classes, ordered by smallest member
    /// Every automorphism as image lists (perm[i-1] = image of node i), when
    /// there are at most `kMaxListedAutomorphisms` of them; empty otherwise.
    std::vector<std::vector<int>> automorphisms;
};

inline constexpr std::uint64_t kMaxListedAutomorphisms = 50000;

namespace detail {

/// Depth-first search over bijections g1 -> g2 that preserve weighted
/// adjacency, pruning any prefix that already breaks it. `visit` returns
/// false to stop the search.
inline void for_each_isomorphism(const Graph& g1, const Graph& g2,
                                 const std::function<bool(const std::vector<int>&)>& visit) {
    const int n = g1.n();
    if (n != g2.n() || g1.m() != g2.m()) return;
    const AdjacencyMatrix w1 = adjacency(g1);
    const AdjacencyMatrix w2 = adjacency(g2);
    // Sorted incident weights: an exact, label-free per-node invariant.
    auto incident = [](const Graph& g, int node) {
        std::vector<double> ws;
        for (const Neighbor& nb : g.neighbors(node)) ws.push_back(nb.w);
        std::sort(ws.begin(), ws.end());
        return ws;
    };
    std::vector<std::vector<double>> inc1(n), inc2(n);
    for (int i = 0; i < n; ++i) {
        inc1[i] = incident(g1, i + 1);
        inc2[i] = incident(g2, i + 1);
    }
    std::vector<int> image(n, -1);
    std::vector<char> used(n, 0);
    bool stop = false;

    std::function<void(int)> extend = [&](int u) {
        if (stop) return;
        if (u == n) {
            std::vector<int> perm(n);
            for (int i = 0; i < n; ++i) perm[i] = image[i] + 1;
            if (!visit(perm)) stop = true;
            return;
        }
        for (int v = 0; v < n && !stop; ++v) {
            if (used[v] || inc1[u] != inc2[v]) continue;
            bool ok = true;
            for (int x = 0; x < u && ok; ++x) ok = w1(u, x) == w2(v, image[x]);
            if (!ok) continue;
            image[u] = v;
            used[v] = 1;
            extend(u + 1);
            used[v] = 0;
            image[u] = -1;
        }
    };
    extend(0);
}

inline std::vector<std::vector<int>> orbits_from(int n, const std::vector<int>& parent_in) {
    std::vector<int> parent = parent_in;
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::map<int, std::vector<int>> by_root;
    for (int i = 0; i < n; ++i) by_root[find(i)].push_back(i + 1);
    std::vector<std::vector<int>> out;
    for (auto& [root, members] : by_root) out.push_back(std::move(members));
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace detail

inline AutomorphismReport brute_force_automorphisms(const Graph& g) {
    if (g.n() > kMaxBruteForceNodes) {
        throw Error(ErrorKind::TooLarge, "brute-force automorphism search is limited to " +
                                             std::to_string(kMaxBruteForceNodes) + " nodes");
    }
    const int n = g.n();
    AutomorphismReport rep;
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    detail::for_each_isomorphism(g, g, [&](const std::vector<int>& perm) {
        ++rep.order;
        for (int i = 0; i < n; ++i) {
            const int ra = find(i), rb = find(perm[i] - 1);
            if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
        }
        if (rep.order <= kMaxListedAutomorphisms) rep.automorphisms.push_back(perm);
        return true;
    });
    if (rep.order > kMaxListedAutomorphisms) rep.automorphisms.clear();
    rep.orbits = detail::orbits_from(n, parent);
    return rep;
}

/// A weight-preserving bijection (mapping[i-1] = image of node i), or
/// std::nullopt as proof that none exists.
inline std::optional<std::vector<int>> brute_force_isomorphic(const Graph& g1, const Graph& g2) {
    if (g1.n() > kMaxBruteForceNodes || g2.n() > kMaxBruteForceNodes) {
        throw Error(ErrorKind::TooLarge, "brute-force isomorphism is limited to " +
                                             std::to_string(kMaxBruteForceNodes) + " nodes");
    }
    std::optional<std::vector<int>> found;
    detail::for_each_isomorphism(g1, g2, [&](const std::vector<int>& perm) {
        found = perm;
        return false;
    });
    return found;
}

// ---------------------------------------------------------------------------
// Exhaustive enumeration of small connected graphs
// ---------------------------------------------------------------------------

namespace detail {

/// Unweighted simple graph on <= 8 nodes as adjacency bit rows.
struct SmallGraph {
    int n = 0;
    std::array<std::uint8_t, 8> rows{};

    bool has(int i, int j) const { return (rows[i] >> j) & 1U; }
    void add(int i, int j) {
        rows[i] |= static_cast<std::uint8_t>(1U << j);
        rows[j] |= static_cast<std::uint8_t>(1U << i);
    }
};

/// Minimum upper-triangle bit string over all relabelings that keep nodes
/// sorted by (degree, sorted neighbour degrees). That vertex invariant is
/// label independent, so the minimum is a canonical code for the
/// isomorphism class.
inline std::uint32_t canonical_code(const SmallGraph& g) {
    const int n = g.n;
    std::vector<int> deg(n);
    for (int i = 0; i < n; ++i) deg[i] = std::popcount(static_cast<unsigned>(g.rows[i]));
    std::vector<std::vector<int>> inv(n);
    for (int i = 0; i < n; ++i) {
        inv[i].push_back(deg[i]);
        std::vector<int> nd;
        for (int j = 0; j < n; ++j) {
            if (g.has(i, j)) nd.push_back(deg[j]);
        }
        std::sort(nd.begin(), nd.end());
        inv[i].insert(inv[i].end(), nd.begin(), nd.end());
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return inv[a] < inv[b]; });
    // Position p may only host nodes whose invariant equals inv[order[p]].
    std::vector<int> perm(n, -1);
    std::vector<char> used(n, 0);
    std::uint32_t best = UINT32_MAX;

    std::function<void(int)> place = [&](int p) {
        if (p == n) {
            std::uint32_t code = 0;
            for (int i = 0; i < n; ++i) {
                for (int j = i + 1; j < n; ++j) code = (code << 1) | (g.has(perm[i], perm[j]) ? 1U : 0U);
            }
            best = std::min(best, code);
            return;
        }
        for (int v = 0; v < n; ++v) {
            if (used[v] || inv[v] != inv[order[p]]) continue;
            used[v] = 1;
            perm[p] = v;
            place(p + 1);
            used[v] = 0;
        }
    };
    place(0);
    return best;
}

inline SmallGraph decode(int n, std::uint32_t code) {
    SmallGraph g;
    g.n = n;
    int bit = n * (n - 1) / 2;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            --bit;
            if ((code >> bit) & 1U) g.add(i, j);
        }
    }
    return g;
}

inline bool small_connected(const SmallGraph& g) {
    unsigned seen = 1U, frontier = 1U;
    while (frontier) {
        unsigned next = 0;
        for (int i = 0; i < g.n; ++i) {
            if ((frontier >> i) & 1U) next |= g.rows[i];
        }
        frontier = next & ~seen;
        seen |= next;
    }
    return seen == (1U << g.n) - 1U;
}

} // namespace detail

/// All connected simple unit-weight graphs on n labelled nodes, one per
/// isomorphism class, in increasing canonical-code order.
inline std::vector<Graph> enumerate_connected_graphs(int n) {
    if (n > kMaxEnumerationNodes) {
        throw Error(ErrorKind::TooLarge, "enumeration is limited to " +
                                             std::to_string(kMaxEnumerationNodes) + " nodes");
    }
    if (n < 2) throw Error(ErrorKind::InvalidArgument, "enumeration needs n >= 2");

    // Every class on k nodes is some class on k-1 nodes plus one new node.
    std::set<std::uint32_t> level{0}; // k = 1
    for (int k = 2; k <= n; ++k) {
        std::set<std::uint32_t> next;
        for (std::uint32_t code : level) {
            const detail::SmallGraph base = detail::decode(k - 1, code);
            for (unsigned mask = 0; mask < (1U << (k - 1)); ++mask) {
                detail::SmallGraph g = base;
                g.n = k;
                for (int j = 0; j < k - 1; ++j) {
                    if ((mask >> j) & 1U) g.add(k - 1, j);
                }
                next.insert(detail::canonical_code(g));
            }
        }
        level = std::move(next);
    }

    std::vector<Graph> out;
    for (std::uint32_t code : level) {
        const detail::SmallGraph g = detail::decode(n, code);
        if (!detail::small_connected(g)) continue;
        std::vector<Edge> edges;
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                if (g.has(i, j)) edges.push_back({i + 1, j + 1, 1.0});
            }
        }
        out.push_back(Graph::build(n, std::move(edges)));
    }
    return out;
}

} // namespace kcanon::oracle

#endif // KCANON_ORACLE_HPP_
