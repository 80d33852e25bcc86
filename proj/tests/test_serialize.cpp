#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "graffin/serialize.hpp"
#include "test_support.hpp"

using namespace graffin;
using graffin_tests::figure_graph;
using graffin_tests::make_graph;
using graffin_tests::random_connected_ish_graph;
using graffin_tests::random_features;

TEST_CASE("NodeId strategy is the identity order") {
    AttributedGraph g = random_connected_ish_graph(9, 0.3, 3, 11);
    Serialization s = serialize(g, Strategy::NodeId);
    for (int t = 0; t < g.num_nodes; ++t) {
        REQUIRE(s.order[t] == t);
        REQUIRE(s.inverse[t] == t);
    }
}

TEST_CASE("degree strategy sorts descending with id tie-break") {
    // degrees [1, 3, 2, 2] -> order [1, 2, 3, 0]
    AttributedGraph g = make_graph({{1, 0}, {1, 2}, {1, 3}, {2, 3}}, {0, 0, 0, 0});
    REQUIRE(degrees(g) == std::vector<int>{1, 3, 2, 2});
    Serialization s = serialize(g, Strategy::Degree);
    REQUIRE(s.order == std::vector<int>{1, 2, 3, 0});  // ties 2,3 keep ascending id
}

TEST_CASE("example graph: tail last, degree-1 neighbor precedes it") {
    AttributedGraph g = figure_graph();
    Serialization s = serialize(g, Strategy::Degree);
    REQUIRE(s.order == std::vector<int>{0, 2, 1, 3, 4, 6, 5, 7});
    // tail H (7) sits last; F (5) rather than G (6) is its predecessor
    // because |sigma_F - sigma_H| <= |sigma_G - sigma_H|
    REQUIRE(s.order.back() == 7);
    REQUIRE(s.order[6] == 5);
    REQUIRE(std::abs(s.scores[5] - s.scores[7]) <= std::abs(s.scores[6] - s.scores[7]));
    // head C (2) is preceded only by A (0)
    REQUIRE(s.inverse[2] == 1);
    REQUIRE(s.order[0] == 0);
}

TEST_CASE("order and inverse are mutually inverse for every strategy") {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        AttributedGraph g = random_connected_ish_graph(17, 0.2, 3, seed);
        for (Strategy st : {Strategy::Degree, Strategy::Eigen, Strategy::NodeId}) {
            Serialization s = serialize(g, st);
            for (int t = 0; t < g.num_nodes; ++t) {
                REQUIRE(s.inverse[s.order[t]] == t);
                REQUIRE(s.order[s.inverse[t]] == t);
            }
        }
    }
}

TEST_CASE("degree scores are non-increasing along the sequence") {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        AttributedGraph g = random_connected_ish_graph(23, 0.15, 2, seed);
        Serialization s = serialize(g, Strategy::Degree);
        for (int t = 0; t + 1 < g.num_nodes; ++t) {
            REQUIRE(s.scores[s.order[t]] >= s.scores[s.order[t + 1]]);
            if (s.scores[s.order[t]] == s.scores[s.order[t + 1]])
                REQUIRE(s.order[t] < s.order[t + 1]);
        }
    }
}

TEST_CASE("eigen scores on symmetric structures") {
    SECTION("triangle is uniform") {
        AttributedGraph g = make_graph({{0, 1}, {1, 2}, {0, 2}}, {0, 0, 0});
        PowerIterationResult r = eigen_scores(g);
        REQUIRE(r.converged);
        for (double v : r.scores) REQUIRE(v == Catch::Approx(1.0 / std::sqrt(3.0)).margin(1e-9));
    }
    SECTION("star center dominates leaves") {
        AttributedGraph g = make_graph({{0, 1}, {0, 2}, {0, 3}, {0, 4}}, {0, 0, 0, 0, 0});
        PowerIterationResult r = eigen_scores(g);
        REQUIRE(r.converged);
        for (int leaf = 1; leaf <= 4; ++leaf) REQUIRE(r.scores[0] > r.scores[leaf]);
    }
    SECTION("3-path converges to (1, sqrt2, 1) despite the bipartite spectrum") {
        AttributedGraph g = make_graph({{0, 1}, {1, 2}}, {0, 0, 0});
        PowerIterationResult r = eigen_scores(g, 1e-10, 5000);
        REQUIRE(r.converged);
        const double ratio = r.scores[1] / r.scores[0];
        REQUIRE(ratio == Catch::Approx(std::sqrt(2.0)).margin(1e-6));
        REQUIRE(r.scores[2] == Catch::Approx(r.scores[0]).margin(1e-9));
    }
    SECTION("all-zero adjacency yields the uniform vector") {
        AttributedGraph g = make_graph({}, {0, 0, 0, 0});
        PowerIterationResult r = eigen_scores(g);
        REQUIRE(r.converged);
        for (double v : r.scores) REQUIRE(v == Catch::Approx(0.5));
    }
}

TEST_CASE("eigen scores are relabeling-invariant") {
    AttributedGraph g = random_connected_ish_graph(14, 0.3, 2, 21);
    PowerIterationResult base = eigen_scores(g, 1e-10, 5000);

    // relabel v -> n-1-v
    const int n = g.num_nodes;
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i)
        for (int k = g.adjacency.row_ptr[i]; k < g.adjacency.row_ptr[i + 1]; ++k) {
            const int j = g.adjacency.col_idx[k];
            if (i < j) edges.emplace_back(n - 1 - i, n - 1 - j);
        }
    Mat x(n, g.num_features);
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        x.row(n - 1 - i) = g.features.row(i);
        labels[n - 1 - i] = g.labels[i];
    }
    AttributedGraph h = build_graph(edges, x, labels);
    PowerIterationResult relabeled = eigen_scores(h, 1e-10, 5000);
    for (int i = 0; i < n; ++i)
        REQUIRE(relabeled.scores[n - 1 - i] == Catch::Approx(base.scores[i]).margin(1e-6));
}

TEST_CASE("permute and unpermute rows") {
    SECTION("identity order leaves X unchanged") {
        Mat x = random_features(4, 3, 3);
        REQUIRE(permute_rows(x, {0, 1, 2, 3}) == x);
    }
    SECTION("two-row swap") {
        Mat x = random_features(2, 3, 3);
        Mat y = permute_rows(x, {1, 0});
        REQUIRE(y.row(0) == x.row(1));
        REQUIRE(y.row(1) == x.row(0));
    }
    SECTION("round-trip is exact for every strategy") {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            AttributedGraph g = random_connected_ish_graph(13, 0.25, 2, seed);
            Mat x = random_features(g.num_nodes, 5, seed + 50);
            for (Strategy st : {Strategy::Degree, Strategy::Eigen, Strategy::NodeId}) {
                Serialization s = serialize(g, st);
                REQUIRE(unpermute_rows(permute_rows(x, s.order), s) == x);
            }
        }
    }
}

TEST_CASE("shuffled serialization variant is a seeded permutation") {
    Serialization a = shuffled_serialization(20, 9);
    Serialization b = shuffled_serialization(20, 9);
    Serialization c = shuffled_serialization(20, 10);
    REQUIRE(a.order == b.order);
    REQUIRE(a.order != c.order);
    std::vector<int> sorted = a.order;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> identity(20);
    std::iota(identity.begin(), identity.end(), 0);
    REQUIRE(sorted == identity);
}

TEST_CASE("enrichment report on the example graph") {
    AttributedGraph g = figure_graph();
    Serialization s = serialize(g, Strategy::Degree);
    ClassStats stats = class_stats(g);  // head class 0 (A..E), tail class 1 (F, G, H)
    EnrichmentReport r = enrichment_report(g, s, stats);
    // tail H at the last position has N-1 = 7 previous nodes
    REQUIRE(s.inverse[7] == g.num_nodes - 1);
    // head-class nodes A C B D E occupy positions 0..4
    REQUIRE(r.mean_gs_head == Catch::Approx(2.0));
    // tail-class nodes G F H occupy positions 5, 6, 7
    REQUIRE(r.mean_gs_tail == Catch::Approx(6.0));
    REQUIRE(r.r_g == Catch::Approx(2.0 / 6.0));
    REQUIRE(r.mean_mp_head == Catch::Approx((5 + 3 + 4 + 3 + 3) / 5.0));
    REQUIRE(r.mean_mp_tail == Catch::Approx((1 + 2 + 1) / 3.0));
    REQUIRE(r.r_l == Catch::Approx(r.mean_mp_head / r.mean_mp_tail));
    REQUIRE(r.r_g_approx == Catch::Approx(stats.r_imb / 8.0));
    REQUIRE(r.r_l_approx == Catch::Approx(8.0 / stats.r_imb));
}

TEST_CASE("enrichment report small cases and guards") {
    SECTION("three-node chain, tail serialized last") {
        // labels [0,0,1]: head class 0 (nodes 0,1), tail class 1 (node 2)
        AttributedGraph g = make_graph({{0, 1}}, {0, 0, 1});
        Serialization s = serialize(g, Strategy::Degree);  // degrees [1,1,0] -> order 0,1,2
        EnrichmentReport r = enrichment_report(g, s, class_stats(g));
        REQUIRE(r.mean_gs_head == Catch::Approx(0.5));
        REQUIRE(r.mean_gs_tail == Catch::Approx(2.0));
        REQUIRE(r.r_g == Catch::Approx(0.25));
    }
    SECTION("tail at position 0 reports infinite r_g") {
        // labels [1,0,0]: tail class 1 is node 0, which has the top degree
        AttributedGraph g = make_graph({{0, 1}, {0, 2}}, {1, 0, 0});
        Serialization s = serialize(g, Strategy::Degree);
        REQUIRE(s.order[0] == 0);
        EnrichmentReport r = enrichment_report(g, s, class_stats(g));
        REQUIRE(std::isinf(r.r_g));
    }
    SECTION("isolated tail reports infinite r_l") {
        AttributedGraph g = make_graph({{0, 1}}, {0, 0, 1});
        EnrichmentReport r = enrichment_report(g, serialize(g, Strategy::NodeId), class_stats(g));
        REQUIRE(std::isinf(r.r_l));
    }
}

TEST_CASE("synthetic enrichment approximations come from generator arithmetic") {
    // r_imb = 5 with N = 600: head 500, tail 100
    std::vector<int> labels;
    labels.insert(labels.end(), 500, 0);
    labels.insert(labels.end(), 100, 1);
    AttributedGraph g = make_graph({}, labels, 2);
    EnrichmentReport r = enrichment_report(g, serialize(g, Strategy::NodeId), class_stats(g));
    REQUIRE(r.r_g_approx == Catch::Approx(5.0 / 600.0));
    REQUIRE(r.r_l_approx == Catch::Approx(600.0 / 5.0));
}
