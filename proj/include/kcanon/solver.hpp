#ifndef KCANON_SOLVER_HPP_
#define KCANON_SOLVER_HPP_

#include <atomic>
#include <cmath>
#include <cstdint>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "kcanon/error.hpp"
#include "kcanon/graph.hpp"

namespace kcanon {

enum class SolveMethod { Grounded, Pseudoinverse, UniversalSink };

inline constexpr std::string_view to_string(SolveMethod m) {
    switch (m) {
    case SolveMethod::Grounded: return "grounded";
    case SolveMethod::Pseudoinverse: return "pseudoinverse";
    case SolveMethod::UniversalSink: return "universal-sink";
    }
    return "unknown";
}

namespace stats {

/// Number of dense Cholesky factorizations performed in this process.
inline std::atomic<std::uint64_t> factorizations{0};

inline std::uint64_t factorization_count() { return factorizations.load(); }
inline void reset_factorization_count() { factorizations.store(0); }

} // namespace stats

/// Node voltages for a unit current injected at `source` and withdrawn at
/// `sink`, shifted so the entries sum to zero.
struct VoltageProfile {
    int source = 0;
    int sink = 0;
    Eigen::VectorXd v;
    SolveMethod method = SolveMethod::Grounded;
    bool approximate = false;
    std::uint64_t graph_tag = 0;

    double at(int node) const { return v(node - 1); }
};

/// Per-edge currents, oriented u->v by each edge's stored endpoint order.
struct PairCurrents {
    int source = 0;
    int sink = 0;
    std::vector<double> current; // parallel to Graph::edges()
};

/// L = D - A as a dense matrix.
inline Eigen::MatrixXd laplacian(const Graph& g) {
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(g.n(), g.n());
    for (const Edge& e : g.edges()) {
        const int i = e.u - 1, j = e.v - 1;
        lap(i, j) -= e.w;
        lap(j, i) -= e.w;
        lap(i, i) += e.w;
        lap(j, j) += e.w;
    }
    return lap;
}

namespace detail {

inline void check_pair(int n, int a, int b) {
    if (a < 1 || a > n || b < 1 || b > n) {
        throw Error(ErrorKind::InvalidNode, "source/sink must be in 1.." + std::to_string(n));
    }
    if (a == b) {
        throw Error(ErrorKind::SameSourceSink,
                    "source and sink are both node " + std::to_string(a));
    }
}

inline void center(Eigen::VectorXd& v) { v.array() -= v.mean(); }

/// Dense lower-triangular Cholesky factor of an SPD matrix, M = C C^T.
///
/// Solves are read-only on the factor and allocate their own scratch, so one
/// factor can serve concurrent callers.
class CholeskyFactor {
public:
    CholeskyFactor() = default;

    explicit CholeskyFactor(const Eigen::MatrixXd& spd) : c_(spd.rows(), spd.cols()) {
        const Eigen::Index n = spd.rows();
        c_.setZero();
        const double scale = n > 0 ? spd.diagonal().cwiseAbs().maxCoeff() : 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            double d = spd(j, j);
            for (Eigen::Index k = 0; k < j; ++k) d -= c_(j, k) * c_(j, k);
            if (!std::isfinite(d) || d <= 1e-14 * scale) {
                throw Error(ErrorKind::FactorizationFailed,
                            "reduced Laplacian is not positive definite (pivot " +
                                std::to_string(j) + ")");
            }
            const double djj = std::sqrt(d);
            c_(j, j) = djj;
            for (Eigen::Index i = j + 1; i < n; ++i) {
                double s = spd(i, j);
                for (Eigen::Index k = 0; k < j; ++k) s -= c_(i, k) * c_(j, k);
                c_(i, j) = s / djj;
            }
        }
        stats::factorizations.fetch_add(1);
    }

    Eigen::Index size() const { return c_.rows(); }

    /// Solves C C^T x = rhs in place; O(n^2).
    void solve_in_place(Eigen::VectorXd& x) const {
        const Eigen::Index n = c_.rows();
        // Forward: C y = b, column-oriented so the inner loop walks a column.
        for (Eigen::Index j = 0; j < n; ++j) {
            x(j) /= c_(j, j);
            const double xj = x(j);
            if (xj == 0.0) continue;
            for (Eigen::Index i = j + 1; i < n; ++i) x(i) -= c_(i, j) * xj;
        }
        // Backward: C^T x = y; row i of C^T is column i of C.
        for (Eigen::Index i = n - 1; i >= 0; --i) {
            double s = x(i);
            for (Eigen::Index k = i + 1; k < n; ++k) s -= c_(k, i) * x(k);
            x(i) = s / c_(i, i);
        }
    }

private:
    Eigen::MatrixXd c_;
};

} // namespace detail

/// Laplacian of a connected graph with a reusable factorization of the
/// grounded reduced system (row and column `ground` deleted).
class LaplacianSystem {
public:
    /// Factorizes once; every later solve is back-substitution only.
    static LaplacianSystem build(const Graph& g, int ground) {
        if (g.n() < 2) throw Error(ErrorKind::InvalidArgument, "need at least 2 nodes");
        if (ground < 1 || ground > g.n()) {
            throw Error(ErrorKind::InvalidNode, "ground must be in 1.." + std::to_string(g.n()));
        }
        LaplacianSystem sys;
        sys.n_ = g.n();
        sys.ground_ = ground;
        sys.tag_ = structural_tag(g);
        sys.lap_ = kcanon::laplacian(g);
        sys.factor_ = detail::CholeskyFactor(sys.reduced_matrix());
        return sys;
    }

    /// Grounds node N.
    static LaplacianSystem build(const Graph& g) { return build(g, g.n()); }

    int n() const noexcept { return n_; }
    int ground() const noexcept { return ground_; }
    std::uint64_t graph_tag() const noexcept { return tag_; }
    const Eigen::MatrixXd& laplacian() const noexcept { return lap_; }

    /// L with row/column `ground` removed.
    Eigen::MatrixXd reduced_matrix() const {
        const int g = ground_ - 1;
        Eigen::MatrixXd r(n_ - 1, n_ - 1);
        for (int i = 0, ri = 0; i < n_; ++i) {
            if (i == g) continue;
            for (int j = 0, rj = 0; j < n_; ++j) {
                if (j == g) continue;
                r(ri, rj++) = lap_(i, j);
            }
            ++ri;
        }
        return r;
    }

    /// Unit current in at `a`, out at `b`. Safe to call concurrently.
    VoltageProfile solve_pair(int a, int b) const {
        detail::check_pair(n_, a, b);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_ - 1);
        if (a != ground_) rhs(reduced_index(a)) += 1.0;
        if (b != ground_) rhs(reduced_index(b)) -= 1.0;
        factor_.solve_in_place(rhs);

        VoltageProfile p;
        p.source = a;
        p.sink = b;
        p.method = SolveMethod::Grounded;
        p.graph_tag = tag_;
        p.v.resize(n_);
        for (int k = 1; k <= n_; ++k) {
            p.v(k - 1) = (k == ground_) ? 0.0 : rhs(reduced_index(k));
        }
        detail::center(p.v);
        return p;
    }

    /// Two-point resistance v_a - v_b in ohms.
    double effective_resistance(int a, int b) const {
        const VoltageProfile p = solve_pair(a, b);
        return p.at(a) - p.at(b);
    }

private:
    int reduced_index(int node) const { return node < ground_ ? node - 1 : node - 2; }

    int n_ = 0;
    int ground_ = 0;
    std::uint64_t tag_ = 0;
    Eigen::MatrixXd lap_;
    detail::CholeskyFactor factor_;
};

/// Applies L^+ through the spectral decomposition of L with the null
/// eigenvector dropped.
class PseudoinverseSystem {
public:
    static PseudoinverseSystem build(const Graph& g) {
        if (g.n() < 2) throw Error(ErrorKind::InvalidArgument, "need at least 2 nodes");
        PseudoinverseSystem sys;
        sys.n_ = g.n();
        sys.tag_ = structural_tag(g);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(laplacian(g));
        if (eig.info() != Eigen::Success) {
            throw Error(ErrorKind::EigendecompositionFailed, "Laplacian eigensolver did not converge");
        }
        const Eigen::VectorXd& lambda = eig.eigenvalues(); // ascending
        const double top = std::max(lambda(g.n() - 1), 1.0);
        if (!(lambda(1) > 1e-10 * top)) {
            throw Error(ErrorKind::SecondEigenvalueNearZero,
                        "algebraic connectivity " + detail::format_shortest(lambda(1)) +
                            " is numerically zero");
        }
        sys.basis_ = eig.eigenvectors().rightCols(g.n() - 1);
        sys.inv_lambda_ = lambda.tail(g.n() - 1).cwiseInverse();
        return sys;
    }

    int n() const noexcept { return n_; }

    VoltageProfile solve_pair(int a, int b) const {
        detail::check_pair(n_, a, b);
        const Eigen::VectorXd coeff =
            (basis_.row(a - 1) - basis_.row(b - 1)).transpose().cwiseProduct(inv_lambda_);
        VoltageProfile p;
        p.source = a;
        p.sink = b;
        p.method = SolveMethod::Pseudoinverse;
        p.graph_tag = tag_;
        p.v = basis_ * coeff;
        return p;
    }

private:
    int n_ = 0;
    std::uint64_t tag_ = 0;
    Eigen::MatrixXd basis_;
    Eigen::VectorXd inv_lambda_;
};

/// Adds node N+1 tied to every node with conductance `sink_weight`, grounds
/// it, and factorizes the resulting N x N matrix L + sink_weight * I. This
/// changes the network, so its voltages are flagged approximate.
class UniversalSinkSystem {
public:
    static UniversalSinkSystem build(const Graph& g, double sink_weight) {
        if (g.n() < 2) throw Error(ErrorKind::InvalidArgument, "need at least 2 nodes");
        if (!std::isfinite(sink_weight) || !(sink_weight > 0.0)) {
            throw Error(ErrorKind::InvalidArgument, "sink weight must be positive");
        }
        UniversalSinkSystem sys;
        sys.n_ = g.n();
        sys.tag_ = structural_tag(g);
        sys.sink_weight_ = sink_weight;
        Eigen::MatrixXd aug = laplacian(g);
        aug.diagonal().array() += sink_weight;
        sys.factor_ = detail::CholeskyFactor(aug);
        return sys;
    }

    int n() const noexcept { return n_; }
    double sink_weight() const noexcept { return sink_weight_; }

    VoltageProfile solve_pair(int a, int b) const {
        detail::check_pair(n_, a, b);
        Eigen::VectorXd x = Eigen::VectorXd::Zero(n_);
        x(a - 1) = 1.0;
        x(b - 1) = -1.0;
        factor_.solve_in_place(x);
        detail::center(x);
        VoltageProfile p;
        p.source = a;
        p.sink = b;
        p.method = SolveMethod::UniversalSink;
        p.approximate = true;
        p.graph_tag = tag_;
        p.v = std::move(x);
        return p;
    }

private:
    int n_ = 0;
    std::uint64_t tag_ = 0;
    double sink_weight_ = 1.0;
    detail::CholeskyFactor factor_;
};

// Free-function entry points.

inline LaplacianSystem build_system(const Graph& g, int ground) {
    return LaplacianSystem::build(g, ground);
}

inline VoltageProfile solve_pair(const LaplacianSystem& sys, int a, int b) {
    return sys.solve_pair(a, b);
}

inline VoltageProfile solve_pair_pseudoinverse(const Graph& g, int a, int b) {
    detail::check_pair(g.n(), a, b);
    return PseudoinverseSystem::build(g).solve_pair(a, b);
}

inline VoltageProfile solve_pair_universal_sink(const Graph& g, int a, int b,
                                                double sink_weight = 1.0) {
    detail::check_pair(g.n(), a, b);
    return UniversalSinkSystem::build(g, sink_weight).solve_pair(a, b);
}

inline double effective_resistance(const LaplacianSystem& sys, int a, int b) {
    return sys.effective_resistance(a, b);
}

/// i_uv = w_uv (v_u - v_v) for every edge.
inline PairCurrents pair_currents(const Graph& g, const VoltageProfile& profile) {
    if (profile.v.size() != g.n() || profile.graph_tag != structural_tag(g)) {
        throw Error(ErrorKind::GraphMismatch, "voltage profile was solved on a different graph");
    }
    PairCurrents pc;
    pc.source = profile.source;
    pc.sink = profile.sink;
    pc.current.reserve(g.edges().size());
    for (const Edge& e : g.edges()) pc.current.push_back(e.w * (profile.at(e.u) - profile.at(e.v)));
    return pc;
}

/// max_k |(L v)_k - (e_a - e_b)_k|.
inline double kcl_residual(const Eigen::MatrixXd& lap, const VoltageProfile& p) {
    Eigen::VectorXd r = lap * p.v;
    r(p.source - 1) -= 1.0;
    r(p.sink - 1) += 1.0;
    return r.cwiseAbs().maxCoeff();
}

/// Net current leaving each node (1-based index; entry 0 unused).
inline std::vector<double> node_balance(const Graph& g, const PairCurrents& pc) {
    std::vector<double> net(static_cast<std::size_t>(g.n()) + 1, 0.0);
    for (std::size_t i = 0; i < pc.current.size(); ++i) {
        const Edge& e = g.edges()[i];
        net[e.u] += pc.current[i];
        net[e.v] -= pc.current[i];
    }
    return net;
}

struct SolverOptions {
    SolveMethod method = SolveMethod::Grounded;
    double sink_weight = 1.0;
};

/// One factorized system of whichever method was requested.
class PairSolver {
public:
    static PairSolver make(const Graph& g, const SolverOptions& opt = {}) {
        PairSolver s;
        switch (opt.method) {
        case SolveMethod::Grounded: s.impl_ = LaplacianSystem::build(g); break;
        case SolveMethod::Pseudoinverse: s.impl_ = PseudoinverseSystem::build(g); break;
        case SolveMethod::UniversalSink:
            s.impl_ = UniversalSinkSystem::build(g, opt.sink_weight);
            break;
        }
        return s;
    }

    VoltageProfile solve_pair(int a, int b) const {
        return std::visit([&](const auto& sys) { return sys.solve_pair(a, b); }, impl_);
    }

    int n() const {
        return std::visit([](const auto& sys) { return sys.n(); }, impl_);
    }

private:
    std::variant<LaplacianSystem, PseudoinverseSystem, UniversalSinkSystem> impl_;
};

} // namespace kcanon

#endif // KCANON_SOLVER_HPP_
