#ifndef KCANON_SIGNATURES_HPP_
#define KCANON_SIGNATURES_HPP_

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "kcanon/digest.hpp"
#include "kcanon/error.hpp"
#include "kcanon/graph.hpp"
#include "kcanon/solver.hpp"

namespace kcanon {

inline constexpr double kDefaultTolerance = 1e-8;
inline constexpr std::uint64_t kDefaultSearchBudget = 1'000'000;

// ---------------------------------------------------------------------------
// Quantization
// ---------------------------------------------------------------------------

/// Snap-to-grid equality convention: x is represented by the integer k
/// nearest to x / tol (halves away from zero, so the map is odd).
class Quantizer {
public:
    explicit Quantizer(double tol = kDefaultTolerance) : tol_(tol) {
        if (!std::isfinite(tol) || !(tol > 0.0)) {
            throw Error(ErrorKind::InvalidArgument, "tolerance must be positive and finite");
        }
        const double inv = std::round(1.0 / tol);
        if (inv >= 1.0 && std::abs(inv * tol - 1.0) <= 4 * std::numeric_limits<double>::epsilon()) {
            inverse_ = inv;
        }
    }

    double tol() const noexcept { return tol_; }

    std::int64_t index(double x) const {
        if (!std::isfinite(x)) throw Error(ErrorKind::NonFinite, "cannot quantize non-finite value");
        const double q = x / tol_;
        if (!(std::abs(q) < 9.0e18)) {
            throw Error(ErrorKind::NonFinite, "value exceeds quantization range");
        }
        return std::llround(q);
    }

    /// Grid point k as a double. For tolerances like 1e-8 this is k / 1e8,
    /// the double nearest the decimal k * tol.
    double value(std::int64_t k) const {
        if (k == 0) return 0.0;
        return inverse_ > 0.0 ? static_cast<double>(k) / inverse_ : static_cast<double>(k) * tol_;
    }

    double snap(double x) const { return value(index(x)); }

private:
    double tol_;
    double inverse_ = 0.0;
};

inline double quantize(double x, double tol = kDefaultTolerance) { return Quantizer(tol).snap(x); }

// ---------------------------------------------------------------------------
// Signatures
// ---------------------------------------------------------------------------

/// Sorted grid indices; equality of these vectors is signature equality.
using SignatureValues = std::vector<std::int64_t>;

struct NodeSignature {
    int node = 0;
    SignatureValues values;
};

/// Edge {u,v} with u < v.
struct EdgeSignature {
    int u = 0;
    int v = 0;
    SignatureValues values;
};

struct SignatureOptions {
    double tol = kDefaultTolerance;
    SolverOptions solver{};
    unsigned threads = 1;
};

/// Node and edge signatures of one graph, from a single pass over all pairs.
struct SignatureSet {
    Quantizer quantizer{};
    int n = 0;
    int m = 0;
    std::vector<NodeSignature> nodes; // nodes[k-1] is node k
    std::vector<EdgeSignature> edges; // parallel to Graph::edges()
};

namespace detail {

inline std::size_t pair_count(int n) {
    return static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2;
}

} // namespace detail

/// Solves every unordered pair (a < b) once, reading the (b, a) entry off
/// as the negation. Pairs are split across `threads` workers, each writing
/// disjoint slots, so the result does not depend on scheduling.
inline SignatureSet compute_signatures(const Graph& g, const PairSolver& solver,
                                       const SignatureOptions& opt = {}) {
    if (g.n() < 2) throw Error(ErrorKind::InvalidArgument, "signatures need at least 2 nodes");
    if (solver.n() != g.n()) throw Error(ErrorKind::GraphMismatch, "solver built for another graph");
    const int n = g.n();
    const auto edges = g.edges();
    const std::size_t pairs = detail::pair_count(n);
    const std::size_t len = 2 * pairs;

    SignatureSet set;
    set.quantizer = Quantizer(opt.tol);
    set.n = n;
    set.m = g.m();
    set.nodes.resize(n);
    for (int k = 1; k <= n; ++k) {
        set.nodes[k - 1].node = k;
        set.nodes[k - 1].values.resize(len);
    }
    set.edges.resize(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e) {
        set.edges[e].u = std::min(edges[e].u, edges[e].v);
        set.edges[e].v = std::max(edges[e].u, edges[e].v);
        set.edges[e].values.resize(len);
    }

    std::vector<std::pair<int, int>> order;
    order.reserve(pairs);
    for (int a = 1; a <= n; ++a) {
        for (int b = a + 1; b <= n; ++b) order.emplace_back(a, b);
    }

    const Quantizer& q = set.quantizer;
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            const VoltageProfile prof = solver.solve_pair(order[p].first, order[p].second);
            for (int k = 0; k < n; ++k) {
                const std::int64_t x = q.index(prof.v(k));
                set.nodes[k].values[2 * p] = x;
                set.nodes[k].values[2 * p + 1] = -x;
            }
            for (std::size_t e = 0; e < edges.size(); ++e) {
                const Edge& ed = edges[e];
                const std::int64_t x = q.index(ed.w * (prof.v(ed.u - 1) - prof.v(ed.v - 1)));
                set.edges[e].values[2 * p] = x;
                set.edges[e].values[2 * p + 1] = -x;
            }
        }
    };

    const unsigned threads =
        std::max(1U, std::min<unsigned>(opt.threads, static_cast<unsigned>(pairs)));
    if (threads == 1) {
        work(0, pairs);
    } else {
        std::vector<std::exception_ptr> errors(threads);
        {
            std::vector<std::jthread> pool;
            for (unsigned t = 0; t < threads; ++t) {
                const std::size_t begin = pairs * t / threads;
                const std::size_t end = pairs * (t + 1) / threads;
                pool.emplace_back([&, t, begin, end] {
                    try {
                        work(begin, end);
                    } catch (...) {
                        errors[t] = std::current_exception();
                    }
                });
            }
        }
        for (auto& err : errors) {
            if (err) std::rethrow_exception(err);
        }
    }

    for (auto& s : set.nodes) std::sort(s.values.begin(), s.values.end());
    for (auto& s : set.edges) std::sort(s.values.begin(), s.values.end());
    return set;
}

inline SignatureSet compute_signatures(const Graph& g, const SignatureOptions& opt = {}) {
    if (g.n() < 2) throw Error(ErrorKind::InvalidArgument, "signatures need at least 2 nodes");
    return compute_signatures(g, PairSolver::make(g, opt.solver), opt);
}

inline std::vector<NodeSignature> all_node_signatures(const Graph& g,
                                                      double tol = kDefaultTolerance) {
    return compute_signatures(g, SignatureOptions{.tol = tol}).nodes;
}

inline std::vector<EdgeSignature> all_edge_signatures(const Graph& g,
                                                      double tol = kDefaultTolerance) {
    if (g.m() < 1) throw Error(ErrorKind::InvalidArgument, "graph has no edges");
    return compute_signatures(g, SignatureOptions{.tol = tol}).edges;
}

// ---------------------------------------------------------------------------
// Orbit candidates
// ---------------------------------------------------------------------------

/// Nodes grouped by identical signatures. Classes are ordered by signature
/// (lexicographically); members ascend. These are orbit *candidates*: every
/// automorphism orbit lies inside one class, the converse is not guaranteed.
struct OrbitPartition {
    std::vector<std::vector<int>> classes;
    std::vector<SignatureValues> class_signature; // parallel to classes
    std::vector<int> class_of;                    // class_of[k-1] for node k
};

inline OrbitPartition orbit_partition(const SignatureSet& set) {
    std::map<SignatureValues, std::vector<int>> groups;
    for (const NodeSignature& s : set.nodes) groups[s.values].push_back(s.node);
    OrbitPartition part;
    part.class_of.assign(set.n, -1);
    for (auto& [sig, members] : groups) {
        const int id = static_cast<int>(part.classes.size());
        for (int k : members) part.class_of[k - 1] = id;
        part.classes.push_back(std::move(members));
        part.class_signature.push_back(sig);
    }
    return part;
}

inline OrbitPartition orbit_partition(const Graph& g, double tol = kDefaultTolerance) {
    return orbit_partition(compute_signatures(g, SignatureOptions{.tol = tol}));
}

// ---------------------------------------------------------------------------
// Fingerprint
// ---------------------------------------------------------------------------

/// Label-free summary: the sorted multisets of node and edge signatures.
struct Fingerprint {
    Quantizer quantizer{};
    int n = 0;
    int m = 0;
    std::vector<SignatureValues> node_part;
    std::vector<SignatureValues> edge_part;

    friend bool operator==(const Fingerprint& a, const Fingerprint& b) {
        return a.quantizer.tol() == b.quantizer.tol() && a.n == b.n && a.m == b.m &&
               a.node_part == b.node_part && a.edge_part == b.edge_part;
    }
};

inline Fingerprint fingerprint(const SignatureSet& set) {
    Fingerprint fp;
    fp.quantizer = set.quantizer;
    fp.n = set.n;
    fp.m = set.m;
    fp.node_part.reserve(set.nodes.size());
    for (const auto& s : set.nodes) fp.node_part.push_back(s.values);
    fp.edge_part.reserve(set.edges.size());
    for (const auto& s : set.edges) fp.edge_part.push_back(s.values);
    std::sort(fp.node_part.begin(), fp.node_part.end());
    std::sort(fp.edge_part.begin(), fp.edge_part.end());
    return fp;
}

inline Fingerprint fingerprint(const Graph& g, double tol = kDefaultTolerance) {
    return fingerprint(compute_signatures(g, SignatureOptions{.tol = tol}));
}

namespace detail {

inline void append_grid_value(std::string& out, const Quantizer& q, std::int64_t k) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), q.value(k));
    out.append(buf, res.ptr);
}

inline void append_parts(std::string& out, const Quantizer& q,
                         const std::vector<SignatureValues>& parts) {
    out += '[';
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += ',';
        out += '[';
        for (std::size_t j = 0; j < parts[i].size(); ++j) {
            if (j) out += ',';
            append_grid_value(out, q, parts[i][j]);
        }
        out += ']';
    }
    out += ']';
}

} // namespace detail

/// Canonical compact JSON: {"n":..,"m":..,"edge_part":[[..]..],"node_part":[[..]..]}
/// with grid values as shortest round-trip decimals. Byte-identical for
/// equal fingerprints.
inline std::string serialize(const Fingerprint& fp) {
    std::string out;
    std::size_t values = 0;
    for (const auto& p : fp.node_part) values += p.size();
    for (const auto& p : fp.edge_part) values += p.size();
    out.reserve(32 + values * 12);
    out += "{\"n\":" + std::to_string(fp.n) + ",\"m\":" + std::to_string(fp.m) + ",\"edge_part\":";
    detail::append_parts(out, fp.quantizer, fp.edge_part);
    out += ",\"node_part\":";
    detail::append_parts(out, fp.quantizer, fp.node_part);
    out += '}';
    return out;
}

inline std::string fingerprint_hash(const Fingerprint& fp) { return sha256_hex(serialize(fp)); }

/// Short digest of one signature, for display.
inline std::string signature_digest(const Quantizer& q, const SignatureValues& values) {
    std::string out;
    out.reserve(values.size() * 12);
    for (std::size_t j = 0; j < values.size(); ++j) {
        if (j) out += ',';
        detail::append_grid_value(out, q, values[j]);
    }
    return sha256_hex(out).substr(0, 16);
}

// ---------------------------------------------------------------------------
// Isomorphism search and screening
// ---------------------------------------------------------------------------

/// True iff `mapping` (mapping[i-1] = image of node i) is a bijection that
/// carries every edge of g1 onto an edge of g2 with the same weight, and the
/// edge counts agree.
inline bool verify_isomorphism(const Graph& g1, const Graph& g2, std::span<const int> mapping) {
    if (g1.n() != g2.n() || g1.m() != g2.m() || static_cast<int>(mapping.size()) != g1.n()) {
        return false;
    }
    std::vector<char> hit(mapping.size() + 1, 0);
    for (int x : mapping) {
        if (x < 1 || x > g2.n() || hit[x]) return false;
        hit[x] = 1;
    }
    for (const Edge& e : g1.edges()) {
        if (g2.weight(mapping[e.u - 1], mapping[e.v - 1]) != e.w) return false;
    }
    return true;
}

struct IsoSearchResult {
    enum class Status { Found, NotFound, BudgetExhausted };
    Status status = Status::NotFound;
    std::vector<int> mapping; // when Found
    std::uint64_t expansions = 0;
};

/// Backtracking over g1 -> g2 assignments restricted to equal-signature
/// classes. Nodes of g1 are taken smallest class first, then by id; each
/// tentative assignment counts one expansion against `budget`.
inline IsoSearchResult find_isomorphism(const Graph& g1, const SignatureSet& s1, const Graph& g2,
                                        const SignatureSet& s2,
                                        std::uint64_t budget = kDefaultSearchBudget) {
    IsoSearchResult res;
    const int n = g1.n();
    if (n != g2.n() || g1.m() != g2.m()) return res;

    std::map<SignatureValues, int> class_id;
    std::vector<int> cls1(n), cls2(n);
    std::vector<int> class_size;
    for (int k = 0; k < n; ++k) {
        auto [it, inserted] = class_id.try_emplace(s1.nodes[k].values, static_cast<int>(class_size.size()));
        if (inserted) class_size.push_back(0);
        cls1[k] = it->second;
        ++class_size[it->second];
    }
    std::vector<std::vector<int>> pool(class_size.size());
    for (int k = 0; k < n; ++k) {
        auto it = class_id.find(s2.nodes[k].values);
        if (it == class_id.end()) return res;
        cls2[k] = it->second;
        pool[it->second].push_back(k);
    }
    for (std::size_t c = 0; c < pool.size(); ++c) {
        if (static_cast<int>(pool[c].size()) != class_size[c]) return res;
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return class_size[cls1[a]] < class_size[cls1[b]];
    });

    const AdjacencyMatrix w1 = adjacency(g1);
    const AdjacencyMatrix w2 = adjacency(g2);
    std::vector<int> image(n, -1);
    std::vector<char> used(n, 0);
    bool out_of_budget = false;

    std::function<bool(int)> extend = [&](int depth) -> bool {
        if (depth == n) return true;
        const int u = order[depth];
        for (int v : pool[cls1[u]]) {
            if (used[v]) continue;
            if (++res.expansions > budget) {
                out_of_budget = true;
                return false;
            }
            bool ok = true;
            for (int d = 0; d < depth && ok; ++d) {
                const int x = order[d];
                ok = w1(u, x) == w2(v, image[x]);
            }
            if (!ok) continue;
            image[u] = v;
            used[v] = 1;
            if (extend(depth + 1)) return true;
            used[v] = 0;
            image[u] = -1;
            if (out_of_budget) return false;
        }
        return false;
    };

    if (extend(0)) {
        res.status = IsoSearchResult::Status::Found;
        res.mapping.resize(n);
        for (int k = 0; k < n; ++k) res.mapping[k] = image[k] + 1;
    } else {
        res.status = out_of_budget ? IsoSearchResult::Status::BudgetExhausted
                                   : IsoSearchResult::Status::NotFound;
    }
    return res;
}

inline IsoSearchResult find_isomorphism(const Graph& g1, const Graph& g2,
                                        double tol = kDefaultTolerance,
                                        std::uint64_t budget = kDefaultSearchBudget) {
    if (g1.n() != g2.n() || g1.m() != g2.m()) return {};
    const SignatureOptions opt{.tol = tol};
    return find_isomorphism(g1, compute_signatures(g1, opt), g2, compute_signatures(g2, opt), budget);
}

struct IsoVerdict {
    enum class Kind { DistinctCertified, PossiblyIsomorphic, IsomorphicCertified };
    Kind kind = Kind::PossiblyIsomorphic;
    std::vector<int> mapping; // IsomorphicCertified only
    std::string reason;
    std::uint64_t expansions = 0;
};

inline constexpr std::string_view to_string(IsoVerdict::Kind k) {
    switch (k) {
    case IsoVerdict::Kind::DistinctCertified: return "DistinctCertified";
    case IsoVerdict::Kind::PossiblyIsomorphic: return "PossiblyIsomorphic";
    case IsoVerdict::Kind::IsomorphicCertified: return "IsomorphicCertified";
    }
    return "Unknown";
}

/// Fingerprint equality is only a necessary condition, so isomorphism is
/// claimed only with a mapping that passed `verify_isomorphism`.
inline IsoVerdict iso_screen(const Graph& g1, const Graph& g2, const SignatureOptions& opt = {},
                             std::uint64_t budget = kDefaultSearchBudget) {
    IsoVerdict verdict;
    if (g1.n() != g2.n()) {
        verdict.kind = IsoVerdict::Kind::DistinctCertified;
        verdict.reason = "node counts differ";
        return verdict;
    }
    if (g1.m() != g2.m()) {
        verdict.kind = IsoVerdict::Kind::DistinctCertified;
        verdict.reason = "edge counts differ";
        return verdict;
    }
    if (g1.n() == 1) {
        verdict.kind = IsoVerdict::Kind::IsomorphicCertified;
        verdict.mapping = {1};
        verdict.reason = "single node";
        return verdict;
    }
    const SignatureSet s1 = compute_signatures(g1, opt);
    const SignatureSet s2 = compute_signatures(g2, opt);
    if (!(fingerprint(s1) == fingerprint(s2))) {
        verdict.kind = IsoVerdict::Kind::DistinctCertified;
        verdict.reason = "fingerprints differ";
        return verdict;
    }
    const IsoSearchResult found = find_isomorphism(g1, s1, g2, s2, budget);
    verdict.expansions = found.expansions;
    if (found.status == IsoSearchResult::Status::Found && verify_isomorphism(g1, g2, found.mapping)) {
        verdict.kind = IsoVerdict::Kind::IsomorphicCertified;
        verdict.mapping = found.mapping;
        verdict.reason = "verified mapping";
    } else if (found.status == IsoSearchResult::Status::BudgetExhausted) {
        verdict.reason = "search budget exhausted";
    } else {
        verdict.reason = "no signature-respecting mapping found";
    }
    return verdict;
}

inline IsoVerdict iso_screen(const Graph& g1, const Graph& g2, double tol,
                             std::uint64_t budget = kDefaultSearchBudget) {
    return iso_screen(g1, g2, SignatureOptions{.tol = tol}, budget);
}

// ---------------------------------------------------------------------------
// Canonical labeling
// ---------------------------------------------------------------------------

struct CanonicalLabeling {
    /// order[p] is the original node placed at canonical position p+1.
    std::vector<int> order;
    /// relabel[k-1] is the canonical label of original node k.
    std::vector<int> relabel;
    /// Compact JSON graph in canonical labels with edges sorted.
    std::string form;
    bool certified = true;
    std::uint64_t expansions = 0;
};

namespace detail {

inline std::string canonical_form_text(const Graph& g, const std::vector<int>& relabel) {
    std::vector<Edge> edges;
    for (const Edge& e : g.edges()) {
        const int a = relabel[e.u - 1], b = relabel[e.v - 1];
        edges.push_back({std::min(a, b), std::max(a, b), e.w});
    }
    std::sort(edges.begin(), edges.end(),
              [](const Edge& x, const Edge& y) { return std::pair(x.u, x.v) < std::pair(y.u, y.v); });
    std::string out = "{\"n\":" + std::to_string(g.n()) + ",\"edges\":[";
    for (std::size_t i = 0; i < edges.size(); ++i) {
        if (i) out += ',';
        out += '[' + std::to_string(edges[i].u) + ',' + std::to_string(edges[i].v) + ',' +
               format_shortest(edges[i].w) + ']';
    }
    out += "]}";
    return out;
}

} // namespace detail

/// Positions are filled class by class in signature order; within a class
/// the search keeps the assignment whose lower-triangle adjacency rows
/// (row-major) are lexicographically smallest. Exceeding `budget` expansions
/// returns the best form seen so far with `certified = false`.
inline CanonicalLabeling canonical_labeling(const Graph& g, const OrbitPartition& part,
                                            std::uint64_t budget = kDefaultSearchBudget) {
    const int n = g.n();
    CanonicalLabeling out;
    std::vector<int> pos_class;
    for (std::size_t c = 0; c < part.classes.size(); ++c) {
        pos_class.insert(pos_class.end(), part.classes[c].size(), static_cast<int>(c));
    }
    if (static_cast<int>(pos_class.size()) != n) {
        throw Error(ErrorKind::GraphMismatch, "partition does not cover the graph");
    }

    const AdjacencyMatrix w = adjacency(g);
    const std::size_t tri = static_cast<std::size_t>(n) * (n - 1) / 2;
    std::vector<double> best(tri), cur(tri);
    std::vector<int> best_order;
    std::vector<int> placed(n, -1); // placed[p] = 0-based node
    std::vector<char> used(n, 0);
    bool out_of_budget = false;

    auto row_offset = [](int p) { return static_cast<std::size_t>(p) * (p - 1) / 2; };

    // prefix_cmp[p]: how rows before position p compare with `best`
    // (0 = equal, -1 = already smaller). Whenever `best` is replaced by the
    // current path every level becomes 0 again, so siblings explored later
    // are compared against the new best rather than a stale verdict.
    std::vector<int> prefix_cmp(n + 1, 0);
    std::function<void(int)> place = [&](int p) {
        if (p == n) {
            if (best_order.empty() || prefix_cmp[p] < 0) {
                best = cur;
                best_order = placed;
                std::fill(prefix_cmp.begin(), prefix_cmp.end(), 0);
            }
            return;
        }
        for (int node : part.classes[pos_class[p]]) {
            const int k = node - 1;
            if (used[k]) continue;
            if (++out.expansions > budget) {
                out_of_budget = true;
                return;
            }
            int c = best_order.empty() ? -1 : prefix_cmp[p];
            const std::size_t off = row_offset(p);
            bool worse = false;
            for (int q = 0; q < p; ++q) {
                cur[off + q] = w(k, placed[q]);
                if (c == 0) {
                    if (cur[off + q] < best[off + q]) {
                        c = -1;
                    } else if (cur[off + q] > best[off + q]) {
                        worse = true;
                        break;
                    }
                }
            }
            if (worse) continue;
            placed[p] = k;
            used[k] = 1;
            prefix_cmp[p + 1] = c;
            place(p + 1);
            used[k] = 0;
            placed[p] = -1;
            if (out_of_budget) return;
        }
    };
    place(0);

    if (best_order.empty()) {
        // Budget ran out before any complete labeling: fill greedily.
        std::fill(used.begin(), used.end(), 0);
        best_order.assign(n, -1);
        for (int p = 0; p < n; ++p) {
            for (int node : part.classes[pos_class[p]]) {
                if (!used[node - 1]) {
                    best_order[p] = node - 1;
                    used[node - 1] = 1;
                    break;
                }
            }
        }
    }
    out.certified = !out_of_budget;
    out.order.resize(n);
    out.relabel.resize(n);
    for (int p = 0; p < n; ++p) {
        out.order[p] = best_order[p] + 1;
        out.relabel[best_order[p]] = p + 1;
    }
    out.form = detail::canonical_form_text(g, out.relabel);
    return out;
}

inline CanonicalLabeling canonical_labeling(const Graph& g, double tol = kDefaultTolerance,
                                            std::uint64_t budget = kDefaultSearchBudget) {
    if (g.n() == 1) {
        return {{1}, {1}, detail::canonical_form_text(g, {1}), true, 0};
    }
    return canonical_labeling(g, orbit_partition(g, tol), budget);
}

} // namespace kcanon

#endif // KCANON_SIGNATURES_HPP_
