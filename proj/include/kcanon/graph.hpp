#ifndef KCANON_GRAPH_HPP_
#define KCANON_GRAPH_HPP_

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "kcanon/error.hpp"

namespace kcanon {

/// Undirected edge between 1-based node ids, carrying a conductance in siemens.
struct Edge {
    int u = 0;
    int v = 0;
    double w = 1.0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

struct Neighbor {
    int node = 0; // 1-based
    double w = 0.0;
    int edge = 0; // index into Graph::edges()
};

using AdjacencyMatrix = Eigen::MatrixXd;

namespace detail {

inline std::uint64_t pair_key(int u, int v) {
    const auto lo = static_cast<std::uint64_t>(std::min(u, v));
    const auto hi = static_cast<std::uint64_t>(std::max(u, v));
    return (lo << 32) | hi;
}

/// Connected components as sorted lists of 1-based ids, ordered by smallest member.
inline std::vector<std::vector<int>> components(int n,
                                                const std::vector<std::vector<Neighbor>>& adj) {
    std::vector<std::vector<int>> out;
    std::vector<char> seen(static_cast<std::size_t>(n) + 1, 0);
    for (int start = 1; start <= n; ++start) {
        if (seen[start]) continue;
        std::vector<int> comp{start};
        seen[start] = 1;
        for (std::size_t head = 0; head < comp.size(); ++head) {
            for (const Neighbor& nb : adj[comp[head]]) {
                if (!seen[nb.node]) {
                    seen[nb.node] = 1;
                    comp.push_back(nb.node);
                }
            }
        }
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
    }
    return out;
}

inline std::string describe_components(const std::vector<std::vector<int>>& comps) {
    std::ostringstream os;
    os << comps.size() << " components:";
    for (const auto& c : comps) {
        os << " {";
        for (std::size_t i = 0; i < c.size(); ++i) os << (i ? "," : "") << c[i];
        os << "}";
    }
    return os.str();
}

/// Shortest decimal that round-trips to the same double.
inline std::string format_shortest(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

} // namespace detail

/// Immutable, validated, undirected weighted graph with nodes 1..n.
///
/// Construction rejects self-loops, parallel edges, out-of-range endpoints and
/// non-positive or non-finite weights. `Graph::build` additionally requires
/// connectivity; `Graph::structural` skips that check so callers can inspect
/// disconnected inputs (e.g. with `is_connected`).
class Graph {
public:
    Graph() = default;

    static Graph build(int n, std::vector<Edge> edges) {
        Graph g = structural(n, std::move(edges));
        if (g.n_ == 0) throw Error(ErrorKind::Disconnected, "graph has no nodes");
        auto comps = detail::components(g.n_, g.adj_);
        if (comps.size() > 1) {
            throw Error(ErrorKind::Disconnected, detail::describe_components(comps));
        }
        return g;
    }

    static Graph structural(int n, std::vector<Edge> edges) {
        if (n < 0) throw Error(ErrorKind::InvalidArgument, "negative node count");
        Graph g;
        g.n_ = n;
        g.edges_ = std::move(edges);
        g.adj_.assign(static_cast<std::size_t>(n) + 1, {});
        std::unordered_set<std::uint64_t> seen;
        seen.reserve(g.edges_.size() * 2);
        for (std::size_t i = 0; i < g.edges_.size(); ++i) {
            const Edge& e = g.edges_[i];
            if (e.u < 1 || e.u > n || e.v < 1 || e.v > n) {
                throw Error(ErrorKind::InvalidNode, "edge " + std::to_string(e.u) + "-" +
                                                        std::to_string(e.v) +
                                                        " has an endpoint outside 1.." +
                                                        std::to_string(n));
            }
            if (e.u == e.v) {
                throw Error(ErrorKind::SelfLoop, "self-loop at node " + std::to_string(e.u));
            }
            if (!std::isfinite(e.w) || !(e.w > 0.0)) {
                throw Error(ErrorKind::NonPositiveWeight,
                            "edge " + std::to_string(e.u) + "-" + std::to_string(e.v) +
                                " has weight " + detail::format_shortest(e.w));
            }
            if (!seen.insert(detail::pair_key(e.u, e.v)).second) {
                throw Error(ErrorKind::DuplicateEdge, "parallel edge " + std::to_string(e.u) +
                                                          "-" + std::to_string(e.v));
            }
            const int idx = static_cast<int>(i);
            g.adj_[e.u].push_back({e.v, e.w, idx});
            g.adj_[e.v].push_back({e.u, e.w, idx});
        }
        return g;
    }

    int n() const noexcept { return n_; }
    int m() const noexcept { return static_cast<int>(edges_.size()); }
    std::span<const Edge> edges() const noexcept { return edges_; }
    std::span<const Neighbor> neighbors(int node) const { return adj_.at(node); }

    /// Conductance of edge {u,v}, 0 when absent.
    double weight(int u, int v) const {
        for (const Neighbor& nb : adj_.at(u)) {
            if (nb.node == v) return nb.w;
        }
        return 0.0;
    }

    /// Weighted degree (row sum of the adjacency matrix).
    double degree(int node) const {
        double d = 0.0;
        for (const Neighbor& nb : adj_.at(node)) d += nb.w;
        return d;
    }

    friend bool operator==(const Graph& a, const Graph& b) {
        return a.n_ == b.n_ && a.edges_ == b.edges_;
    }

private:
    int n_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::vector<Neighbor>> adj_; // indexed 1..n
};

/// FNV-1a over n and the edge list; distinguishes graphs for mismatch checks.
inline std::uint64_t structural_tag(const Graph& g) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::uint64_t x) {
        for (int i = 0; i < 8; ++i) {
            h ^= (x >> (8 * i)) & 0xffU;
            h *= 1099511628211ULL;
        }
    };
    mix(static_cast<std::uint64_t>(g.n()));
    for (const Edge& e : g.edges()) {
        mix(static_cast<std::uint64_t>(e.u));
        mix(static_cast<std::uint64_t>(e.v));
        std::uint64_t bits = 0;
        std::memcpy(&bits, &e.w, sizeof bits);
        mix(bits);
    }
    return h;
}

inline bool is_connected(const Graph& g) {
    if (g.n() <= 1) return true;
    std::vector<char> seen(static_cast<std::size_t>(g.n()) + 1, 0);
    std::vector<int> queue{1};
    seen[1] = 1;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        for (const Neighbor& nb : g.neighbors(queue[head])) {
            if (!seen[nb.node]) {
                seen[nb.node] = 1;
                queue.push_back(nb.node);
            }
        }
    }
    return static_cast<int>(queue.size()) == g.n();
}

inline AdjacencyMatrix adjacency(const Graph& g) {
    AdjacencyMatrix a = AdjacencyMatrix::Zero(g.n(), g.n());
    for (const Edge& e : g.edges()) {
        a(e.u - 1, e.v - 1) = e.w;
        a(e.v - 1, e.u - 1) = e.w;
    }
    return a;
}

/// Diagonal of the degree matrix D, D_ii = sum_j a_ij.
inline Eigen::VectorXd degrees(const Graph& g) {
    Eigen::VectorXd d(g.n());
    for (int i = 1; i <= g.n(); ++i) d(i - 1) = g.degree(i);
    return d;
}

/// Renames node i to perm[i-1]. `perm` must be a permutation of 1..n.
inline Graph relabel(const Graph& g, std::span<const int> perm) {
    if (static_cast<int>(perm.size()) != g.n()) {
        throw Error(ErrorKind::InvalidArgument, "permutation size does not match node count");
    }
    std::vector<char> hit(perm.size() + 1, 0);
    for (int p : perm) {
        if (p < 1 || p > g.n() || hit[p]) {
            throw Error(ErrorKind::InvalidArgument, "not a permutation of 1..n");
        }
        hit[p] = 1;
    }
    std::vector<Edge> edges;
    edges.reserve(g.edges().size());
    for (const Edge& e : g.edges()) edges.push_back({perm[e.u - 1], perm[e.v - 1], e.w});
    return Graph::structural(g.n(), std::move(edges));
}

// ---------------------------------------------------------------------------
// Edge-list text format
// ---------------------------------------------------------------------------

namespace detail {

inline bool parse_node_id(std::string_view tok, int& out) {
    const char* end = tok.data() + tok.size();
    auto res = std::from_chars(tok.data(), end, out);
    return res.ec == std::errc() && res.ptr == end && out >= 1;
}

inline bool parse_weight(std::string_view tok, double& out) {
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    const char* end = tok.data() + tok.size();
    auto res = std::from_chars(tok.data(), end, out);
    return res.ec == std::errc() && res.ptr == end;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> toks;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) toks.push_back(line.substr(i, j - i));
        i = j;
    }
    return toks;
}

} // namespace detail

/// Parses "u v" / "u v w" lines. '#' starts a comment line; blank lines are
/// skipped. N is the largest id seen, so numbering gaps surface as Disconnected.
inline Graph parse_edge_list(std::istream& in) {
    std::vector<Edge> edges;
    std::unordered_set<std::uint64_t> seen;
    int n = 0;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto toks = detail::split_ws(line);
        if (toks.empty() || toks.front().front() == '#') continue;
        const std::string where = "line " + std::to_string(line_no);
        Edge e;
        if (toks.size() < 2 || toks.size() > 3 || !detail::parse_node_id(toks[0], e.u) ||
            !detail::parse_node_id(toks[1], e.v)) {
            throw Error(ErrorKind::MalformedLine, where + ": expected 'u v [w]' with u, v >= 1");
        }
        if (toks.size() == 3 && !detail::parse_weight(toks[2], e.w)) {
            throw Error(ErrorKind::MalformedLine, where + ": bad weight '" +
                                                      std::string(toks[2]) + "'");
        }
        if (e.u == e.v) {
            throw Error(ErrorKind::SelfLoop, where + ": self-loop at node " + std::to_string(e.u));
        }
        if (!std::isfinite(e.w) || !(e.w > 0.0)) {
            throw Error(ErrorKind::NonPositiveWeight, where + ": weight must be positive");
        }
        if (!seen.insert(detail::pair_key(e.u, e.v)).second) {
            throw Error(ErrorKind::DuplicateEdge, where + ": parallel edge " +
                                                      std::to_string(e.u) + "-" +
                                                      std::to_string(e.v));
        }
        n = std::max({n, e.u, e.v});
        edges.push_back(e);
    }
    return Graph::build(n, std::move(edges));
}

inline Graph parse_edge_list(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_edge_list(in);
}

/// Edge-list text with weights written as shortest round-trip decimals.
inline std::string to_edge_list(const Graph& g) {
    std::string out;
    for (const Edge& e : g.edges()) {
        out += std::to_string(e.u);
        out += ' ';
        out += std::to_string(e.v);
        out += ' ';
        out += detail::format_shortest(e.w);
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON form: {"n": N, "edges": [[u, v, w], ...]}
// ---------------------------------------------------------------------------

inline Graph graph_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("n") || !j.contains("edges") ||
        !j["n"].is_number_integer() || !j["edges"].is_array()) {
        throw Error(ErrorKind::MalformedLine, "expected {\"n\": N, \"edges\": [[u,v,w],...]}");
    }
    const auto n = j["n"].get<std::int64_t>();
    if (n < 0 || n > (1 << 24)) throw Error(ErrorKind::InvalidArgument, "bad node count");
    std::vector<Edge> edges;
    int idx = 0;
    for (const auto& item : j["edges"]) {
        const std::string where = "edge #" + std::to_string(idx++);
        if (!item.is_array() || item.size() < 2 || item.size() > 3 ||
            !item[0].is_number_integer() || !item[1].is_number_integer() ||
            (item.size() == 3 && !item[2].is_number())) {
            throw Error(ErrorKind::MalformedLine, where + ": expected [u, v] or [u, v, w]");
        }
        const auto u = item[0].get<std::int64_t>();
        const auto v = item[1].get<std::int64_t>();
        if (u < 1 || v < 1 || u > n || v > n) {
            throw Error(ErrorKind::InvalidNode, where + ": endpoint outside 1..n");
        }
        edges.push_back({static_cast<int>(u), static_cast<int>(v),
                         item.size() == 3 ? item[2].get<double>() : 1.0});
    }
    return Graph::build(static_cast<int>(n), std::move(edges));
}

inline nlohmann::json graph_to_json(const Graph& g) {
    nlohmann::json edges = nlohmann::json::array();
    for (const Edge& e : g.edges()) edges.push_back({e.u, e.v, e.w});
    return {{"n", g.n()}, {"edges", std::move(edges)}};
}

/// Parses either format: text whose first non-space character is '{' is JSON.
inline Graph parse_graph(std::string_view text) {
    auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string_view::npos && text[first] == '{') {
        nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
        if (j.is_discarded()) throw Error(ErrorKind::MalformedLine, "invalid JSON");
        return graph_from_json(j);
    }
    return parse_edge_list(text);
}

inline Graph load_graph(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_graph(buf.str());
}

} // namespace kcanon

#endif // KCANON_GRAPH_HPP_
