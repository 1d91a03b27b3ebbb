#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "kcanon/graph.hpp"
#include "kcanon/solver.hpp"
#include "support/corpus.hpp"

namespace kcanon {
namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected kcanon::Error";
    return ErrorKind::InvalidArgument;
}

TEST(ParseEdgeList, DefaultWeight) {
    const Graph g = parse_edge_list("1 2\n2 3");
    EXPECT_EQ(g.n(), 3);
    ASSERT_EQ(g.m(), 2);
    EXPECT_EQ(g.edges()[0], (Edge{1, 2, 1.0}));
    EXPECT_EQ(g.edges()[1], (Edge{2, 3, 1.0}));
}

TEST(ParseEdgeList, ExplicitWeightCommentsAndBlanks) {
    const Graph g = parse_edge_list("# a comment\n\n  1 2 0.5  \n   # indented comment\n");
    EXPECT_EQ(g.n(), 2);
    ASSERT_EQ(g.m(), 1);
    EXPECT_EQ(g.edges()[0], (Edge{1, 2, 0.5}));
}

TEST(ParseEdgeList, Errors) {
    EXPECT_EQ(kind_of([] { parse_edge_list("1 2\n3 4"); }), ErrorKind::Disconnected);
    EXPECT_EQ(kind_of([] { parse_edge_list("1 2\n2 x"); }), ErrorKind::MalformedLine);
    EXPECT_EQ(kind_of([] { parse_edge_list("1 2 3 4"); }), ErrorKind::MalformedLine);
    EXPECT_EQ(kind_of([] { parse_edge_list("0 2"); }), ErrorKind::MalformedLine);
    EXPECT_EQ(kind_of([] { parse_edge_list("1 2 abc"); }), ErrorKind::MalformedLine);
    EXPECT_EQ(kind_of([] { parse_edge_list("1 1"); }), ErrorKind::SelfLoop);
    EXPECT_EQ(kind_of([] { parse_edge_list("1 2\n2 1"); }), ErrorKind::DuplicateEdge);
    EXPECT_EQ(kind_of([] { parse_edge_list("1 2 0"); }), ErrorKind::NonPositiveWeight);
    EXPECT_EQ(kind_of([] { parse_edge_list("1 2 -1.5"); }), ErrorKind::NonPositiveWeight);
    EXPECT_EQ(kind_of([] { parse_edge_list("1 2 inf"); }), ErrorKind::NonPositiveWeight);
    EXPECT_EQ(kind_of([] { parse_edge_list(""); }), ErrorKind::Disconnected);
    // Gap in numbering: node 2 never appears.
    EXPECT_EQ(kind_of([] { parse_edge_list("1 3"); }), ErrorKind::Disconnected);
}

TEST(ParseEdgeList, ErrorsCarryLineNumberAndComponents) {
    try {
        parse_edge_list("1 2\n# c\n2 q\n");
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    }
    try {
        parse_edge_list("1 2\n3 4");
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(e.detail().find("{1,2}"), std::string::npos);
        EXPECT_NE(e.detail().find("{3,4}"), std::string::npos);
    }
}

TEST(Json, AcceptsAndEmits) {
    const Graph g = parse_graph(R"({"n": 3, "edges": [[1, 2], [2, 3, 0.25]]})");
    EXPECT_EQ(g.n(), 3);
    EXPECT_EQ(g.edges()[1], (Edge{2, 3, 0.25}));
    EXPECT_EQ(graph_from_json(graph_to_json(g)), g);
    EXPECT_EQ(kind_of([] { parse_graph(R"({"n": 3, "edges": [[1, 2]]})"); }), ErrorKind::Disconnected);
    EXPECT_EQ(kind_of([] { parse_graph(R"({"n": 2, "edges": [[1, 5]]})"); }), ErrorKind::InvalidNode);
    EXPECT_EQ(kind_of([] { parse_graph(R"({"n": 2, "edges": [[1, 2, -1]]})"); }),
              ErrorKind::NonPositiveWeight);
    EXPECT_EQ(kind_of([] { parse_graph(R"({"n": 2, "edges": [[1, 2], [2, 1]]})"); }),
              ErrorKind::DuplicateEdge);
    EXPECT_EQ(kind_of([] { parse_graph("{not json"); }), ErrorKind::MalformedLine);
}

TEST(Adjacency, Examples) {
    EXPECT_EQ(adjacency(testing::path(2)), (Eigen::Matrix2d() << 0, 1, 1, 0).finished());
    const AdjacencyMatrix k3 = adjacency(testing::complete(3));
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) EXPECT_EQ(k3(i, j), i == j ? 0.0 : 1.0);
    }
    EXPECT_EQ(adjacency(Graph::build(2, {{1, 2, 0.5}})),
              (Eigen::Matrix2d() << 0, 0.5, 0.5, 0).finished());
}

TEST(IsConnected, Examples) {
    EXPECT_TRUE(is_connected(testing::path(3)));
    EXPECT_TRUE(is_connected(Graph::structural(1, {})));
    EXPECT_FALSE(is_connected(Graph::structural(4, {{1, 2, 1.0}, {3, 4, 1.0}})));
}

TEST(Graph, StructuralValidation) {
    EXPECT_EQ(kind_of([] { Graph::structural(2, {{1, 3, 1.0}}); }), ErrorKind::InvalidNode);
    EXPECT_EQ(kind_of([] { Graph::build(2, {}); }), ErrorKind::Disconnected);
    EXPECT_EQ(kind_of([] { Graph::build(0, {}); }), ErrorKind::Disconnected);
    EXPECT_NO_THROW(Graph::build(1, {}));
}

// Property: serialize -> parse is the identity on the adjacency matrix,
// bit for bit, including awkward weights.
TEST(RoundTrip, EdgeListPreservesEveryWeightExactly) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> wdist(1e-3, 1e3);
    for (int trial = 0; trial < 50; ++trial) {
        const Graph base = testing::random_connected(2 + trial % 20, 0.3, rng, true);
        std::vector<Edge> edges(base.edges().begin(), base.edges().end());
        for (Edge& e : edges) e.w = wdist(rng) / 3.0;
        const Graph g = Graph::build(base.n(), edges);
        const Graph back = parse_edge_list(to_edge_list(g));
        EXPECT_EQ(back, g);
        EXPECT_EQ(adjacency(back), adjacency(g));
        EXPECT_EQ(parse_graph(graph_to_json(g).dump()), g);
    }
}

TEST(RoundTrip, PermutedLabelsPermuteAdjacency) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const Graph g = testing::random_connected(8, 0.4, rng, true);
        const auto perm = testing::random_permutation(g.n(), rng);
        const Graph h = parse_edge_list(to_edge_list(relabel(g, perm)));
        const AdjacencyMatrix a = adjacency(g), b = adjacency(h);
        for (int i = 0; i < g.n(); ++i) {
            for (int j = 0; j < g.n(); ++j) EXPECT_EQ(b(perm[i] - 1, perm[j] - 1), a(i, j));
        }
    }
}

TEST(DegreeMatrix, MatchesLaplacianDiagonal) {
    std::mt19937_64 rng(3);
    const Graph g = testing::random_connected(12, 0.3, rng, true);
    const Eigen::VectorXd d = degrees(g);
    const Eigen::MatrixXd lap = laplacian(g);
    const AdjacencyMatrix a = adjacency(g);
    for (int i = 0; i < g.n(); ++i) {
        EXPECT_GT(d(i), 0.0);
        EXPECT_NEAR(d(i), a.row(i).sum(), 1e-12);
        EXPECT_NEAR(d(i), lap(i, i), 1e-12);
    }
}

TEST(Relabel, RejectsNonPermutations) {
    const Graph g = testing::path(3);
    EXPECT_EQ(kind_of([&] { relabel(g, std::vector<int>{1, 1, 2}); }), ErrorKind::InvalidArgument);
    EXPECT_EQ(kind_of([&] { relabel(g, std::vector<int>{1, 2}); }), ErrorKind::InvalidArgument);
}

} // namespace
} // namespace kcanon
