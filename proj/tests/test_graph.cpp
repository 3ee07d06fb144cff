#include "confres/error.hpp"
#include "confres/graph.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace confres;

namespace {

PointSet line_points(std::initializer_list<double> xs) {
    return PointSet(xs.size(), 1, std::vector<double>(xs));
}

bool has_edge(const NeighborGraph& g, std::size_t i, std::size_t j) {
    for (const auto& e : g.edges)
        if (e.i == std::min(i, j) && e.j == std::max(i, j))
            return true;
    return false;
}

}  // namespace

TEST_CASE("point set validation") {
    CHECK_THROWS_AS(PointSet(1, 2, {0.0, 1.0}), InputError);
    CHECK_THROWS_AS(PointSet(2, 0, {}), InputError);
    CHECK_THROWS_AS(PointSet(2, 1, {0.0}), InputError);
    CHECK_THROWS_AS(PointSet(2, 1, {0.0, std::nan("")}), InputError);
    CHECK_THROWS_AS(PointSet(2, 1, {0.0, INFINITY}), InputError);
    const PointSet p(2, 2, {1, 2, 3, 4});
    CHECK(p.size() == 2);
    CHECK(p.dim() == 2);
    CHECK(p.row(1)[0] == 3.0);
}

TEST_CASE("knn: two points, k = 1") {
    const auto g = build_knn_graph(line_points({0.0, 2.5}), 1);
    REQUIRE(g.edges.size() == 1);
    CHECK(g.edges[0].i == 0);
    CHECK(g.edges[0].j == 1);
    CHECK(g.edges[0].distance == doctest::Approx(2.5));
}

TEST_CASE("knn: collinear points are linked to their nearest neighbor") {
    const auto g = build_knn_graph(line_points({0.0, 1.0, 3.0}), 1);
    REQUIRE(g.edges.size() == 2);
    CHECK(has_edge(g, 0, 1));
    CHECK(has_edge(g, 1, 2));
    CHECK_FALSE(has_edge(g, 0, 2));
}

TEST_CASE("knn: unit square corners skip the diagonal") {
    const PointSet p(4, 2, {0, 0, 1, 0, 1, 1, 0, 1});
    const auto g = build_knn_graph(p, 2);
    CHECK(g.edges.size() == 4);
    CHECK(has_edge(g, 0, 1));
    CHECK(has_edge(g, 1, 2));
    CHECK(has_edge(g, 2, 3));
    CHECK(has_edge(g, 0, 3));
    CHECK_FALSE(has_edge(g, 0, 2));
    CHECK_FALSE(has_edge(g, 1, 3));
}

TEST_CASE("knn: ties go to the smaller index") {
    // Item 1 is equidistant from 0 and 2.
    const auto g = build_knn_graph(line_points({0.0, 1.0, 2.0}), 1);
    CHECK(has_edge(g, 0, 1));
    CHECK(has_edge(g, 1, 2));  // from item 2's own nearest neighbor
    CHECK(g.edges.size() == 2);
    const auto h = build_knn_graph(line_points({0.0, 1.0, 2.0, 10.0}), 1);
    CHECK(has_edge(h, 2, 3));
}

TEST_CASE("knn: parameter errors") {
    const auto p = line_points({0.0, 1.0, 3.0});
    CHECK_THROWS_AS(build_knn_graph(p, 0), ParameterError);
    CHECK_THROWS_AS(build_knn_graph(p, 3), ParameterError);
    CHECK_NOTHROW(build_knn_graph(p, 2));
}

TEST_CASE("knn: cosine metric") {
    // Same direction means distance 0 under cosine.
    const PointSet p(3, 2, {1, 0, 2, 0, 0, 1});
    const auto g = build_knn_graph(p, 1, Metric::cosine);
    REQUIRE(has_edge(g, 0, 1));
    for (const auto& e : g.edges)
        if (e.i == 0 && e.j == 1)
            CHECK(e.distance == doctest::Approx(0.0));
}

TEST_CASE("knn: thread count does not change the graph") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    std::vector<double> v(300 * 3);
    for (auto& x : v)
        x = nd(rng);
    const PointSet p(300, 3, v);
    const auto a = build_knn_graph(p, 7, Metric::euclidean, 1);
    const auto b = build_knn_graph(p, 7, Metric::euclidean, 4);
    REQUIRE(a.edges.size() == b.edges.size());
    for (std::size_t e = 0; e < a.edges.size(); ++e) {
        CHECK(a.edges[e].i == b.edges[e].i);
        CHECK(a.edges[e].j == b.edges[e].j);
        CHECK(a.edges[e].distance == b.edges[e].distance);
    }
}

TEST_CASE("knn: row order only relabels the graph") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u;
    const std::size_t n = 40;
    std::vector<double> v(n * 2);
    for (auto& x : v)
        x = u(rng);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> w(n * 2);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t d = 0; d < 2; ++d)
            w[r * 2 + d] = v[perm[r] * 2 + d];
    const auto a = build_knn_graph(PointSet(n, 2, v), 4);
    const auto b = build_knn_graph(PointSet(n, 2, w), 4);
    REQUIRE(a.edges.size() == b.edges.size());
    for (const auto& e : b.edges)
        CHECK(has_edge(a, perm[e.i], perm[e.j]));
}

TEST_CASE("affinity: single edge normalizes to weight 1") {
    const auto g = derive_affinity(build_knn_graph(line_points({0.0, 1.0}), 1));
    CHECK(g.attraction_weight(0, 1) == doctest::Approx(1.0));
    CHECK(g.total_attraction() == doctest::Approx(1.0));
}

TEST_CASE("affinity: path with equal distances") {
    NeighborGraph ng{3, 1, {{0, 1, 1.0}, {1, 2, 1.0}}};
    const auto rows = stochastic_rows(ng, Kernel::self_tuning_gaussian);
    REQUIRE(rows[1].size() == 2);
    CHECK(rows[1][0].weight == doctest::Approx(0.5));
    CHECK(rows[1][1].weight == doctest::Approx(0.5));
    const auto g = derive_affinity(ng);
    CHECK(g.attraction_weight(0, 1) == doctest::Approx(0.75));
    CHECK(g.attraction_weight(1, 0) == g.attraction_weight(0, 1));
    CHECK(g.attraction_weight(1, 2) == doctest::Approx(0.75));
    CHECK(g.attraction_weight(0, 2) == 0.0);
}

TEST_CASE("affinity: rows are stochastic for both kernels") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd;
    std::vector<double> v(80 * 2);
    for (auto& x : v)
        x = nd(rng);
    const auto ng = build_knn_graph(PointSet(80, 2, v), 6);
    for (auto kernel : {Kernel::self_tuning_gaussian, Kernel::inverse_distance}) {
        const auto rows = stochastic_rows(ng, kernel);
        for (const auto& row : rows) {
            double s = 0;
            for (const auto& nb : row)
                s += nb.weight;
            CHECK(std::abs(s - 1.0) <= 1e-12);
        }
    }
}

TEST_CASE("affinity: duplicate points stay finite") {
    const PointSet p(4, 1, {0.0, 0.0, 0.0, 5.0});
    for (auto kernel : {Kernel::self_tuning_gaussian, Kernel::inverse_distance}) {
        const auto g = derive_affinity(build_knn_graph(p, 2), kernel);
        for (std::size_t i = 0; i < 4; ++i)
            CHECK(std::isfinite(g.strength(i)));
    }
}

TEST_CASE("affinity: explicit scheme is not derivable from points") {
    const auto ng = build_knn_graph(line_points({0.0, 1.0}), 1);
    CHECK_THROWS_AS(derive_affinity(ng, Kernel::self_tuning_gaussian, RepulsionScheme::explicit_weights),
                    ParameterError);
}

TEST_CASE("configuration null repulsion") {
    // Path 0-1-2 with unit weights: s = (1, 2, 1), W = 2.
    const std::vector<WeightedEdge> e{{0, 1, 1.0}, {1, 2, 1.0}};
    const auto g = from_edge_list(3, e);
    CHECK(g.total_attraction() == doctest::Approx(2.0));
    CHECK(g.strength(1) == doctest::Approx(2.0));
    CHECK(g.repulsion_weight(0, 1) == doctest::Approx(0.5));
    CHECK(g.repulsion_weight(0, 2) == doctest::Approx(0.25));
}

TEST_CASE("configuration null: closed-form total repulsion") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const std::size_t n = 7;
        const auto edges = oracle::random_graph(n, seed);
        const auto g = from_edge_list(n, edges);
        double pairs = 0, sum_s = 0, sum_s2 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            sum_s += g.strength(i);
            sum_s2 += g.strength(i) * g.strength(i);
            for (std::size_t j = i + 1; j < n; ++j)
                pairs += g.repulsion_weight(i, j);
        }
        const double closed = (sum_s * sum_s - sum_s2) / (4.0 * g.total_attraction());
        CHECK(pairs == doctest::Approx(closed).epsilon(1e-12));
    }
}

TEST_CASE("uniform repulsion is 1/n") {
    const std::vector<WeightedEdge> e{{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 2.0}};
    const auto g = from_edge_list(4, e, RepulsionScheme::uniform);
    CHECK(g.repulsion_weight(0, 3) == doctest::Approx(0.25));
    CHECK(g.repulsion_weight(1, 2) == doctest::Approx(0.25));
}

TEST_CASE("explicit repulsion") {
    const std::vector<WeightedEdge> a{{0, 1, 1.0}, {1, 2, 1.0}};
    const std::vector<WeightedEdge> r{{0, 2, 3.0}, {2, 0, 1.0}};
    const auto g = from_edge_list(3, a, RepulsionScheme::explicit_weights, r);
    CHECK(g.repulsion_weight(0, 2) == doctest::Approx(2.0));
    CHECK(g.repulsion_weight(0, 1) == 0.0);
}

TEST_CASE("edge list ingestion") {
    SUBCASE("single edge") {
        const std::vector<WeightedEdge> e{{0, 1, 1.0}};
        const auto g = from_edge_list(2, e);
        CHECK(g.total_attraction() == doctest::Approx(1.0));
        CHECK(g.strength(0) == doctest::Approx(1.0));
        CHECK(g.strength(1) == doctest::Approx(1.0));
    }
    SUBCASE("directions are averaged") {
        const std::vector<WeightedEdge> e{{0, 1, 1.0}, {1, 0, 3.0}};
        CHECK(from_edge_list(2, e).attraction_weight(0, 1) == doctest::Approx(2.0));
    }
    SUBCASE("one direction is kept as is") {
        const std::vector<WeightedEdge> e{{1, 0, 3.0}};
        CHECK(from_edge_list(2, e).attraction_weight(0, 1) == doctest::Approx(3.0));
    }
    SUBCASE("index out of range") {
        const std::vector<WeightedEdge> e{{0, 5, 1.0}};
        CHECK_THROWS_AS(from_edge_list(3, e), InputError);
    }
    SUBCASE("negative weight") {
        const std::vector<WeightedEdge> e{{0, 1, -1.0}};
        CHECK_THROWS_AS(from_edge_list(2, e), InputError);
    }
    SUBCASE("self loop") {
        const std::vector<WeightedEdge> e{{1, 1, 1.0}};
        CHECK_THROWS_AS(from_edge_list(2, e), InputError);
    }
}

TEST_CASE("singleton bound") {
    const std::vector<WeightedEdge> e{{0, 1, 1.0}, {1, 2, 1.0}};
    const auto g = from_edge_list(3, e);
    // max w+ = 1, min w- = 1 * 1 / 4.
    CHECK(singleton_bound(g) == doctest::Approx(4.0));
    const std::vector<WeightedEdge> none;
    CHECK(singleton_bound(from_edge_list(3, none)) == 0.0);
}
