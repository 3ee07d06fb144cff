#include "confres/cognition.hpp"
#include "confres/error.hpp"
#include "confres/evaluation.hpp"
#include "confres/resolution.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace confres;

namespace {

AffinityGraph blobs(std::size_t per, std::size_t count, double sep, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    std::vector<double> v;
    for (std::size_t c = 0; c < count; ++c)
        for (std::size_t i = 0; i < per; ++i) {
            v.push_back(nd(rng) + sep * static_cast<double>(c));
            v.push_back(nd(rng));
        }
    return derive_affinity(build_knn_graph(PointSet(per * count, 2, v), 8));
}

void check_tiling(const ConfigurationSet& cs) {
    REQUIRE(!cs.entries.empty());
    CHECK(cs.entries.front().gamma_lo == 0.0);
    CHECK(cs.entries.back().gamma_hi == cs.gamma_max);
    for (std::size_t e = 0; e < cs.size(); ++e) {
        CHECK(cs.entries[e].gamma_lo < cs.entries[e].gamma_hi);
        if (e > 0) {
            CHECK(cs.entries[e].gamma_lo == cs.entries[e - 1].gamma_hi);
            CHECK_FALSE(cs.entries[e].partition == cs.entries[e - 1].partition);
        }
    }
}

}  // namespace

TEST_CASE("lower envelope: single line") {
    const std::vector<EnvelopeLine> l{{3, -1.0, 2.0}};
    const auto env = lower_envelope(l);
    REQUIRE(env.size() == 1);
    CHECK(env[0].id == 3);
    CHECK(env[0].gamma_lo == 0.0);
    CHECK(std::isinf(env[0].gamma_hi));
}

TEST_CASE("lower envelope: whole vs singletons") {
    // Whole with no repulsion dominates everywhere.
    const std::vector<EnvelopeLine> l{{0, -4.0, 0.0}, {1, 0.0, 0.0}};
    const auto env = lower_envelope(l);
    REQUIRE(env.size() == 1);
    CHECK(env[0].id == 0);
}

TEST_CASE("lower envelope: dominated line excluded") {
    // Lines -2 + g, -1 + 0.5 g, 0: crossings at g = 2 for all three.
    // -1.5 + 0.9 g is never minimal.
    const std::vector<EnvelopeLine> l{{0, -2.0, 1.0}, {1, -0.5, 0.9}, {2, 0.0, 0.0}, {3, -1.2, 0.5}};
    const auto env = lower_envelope(l);
    std::vector<std::size_t> ids;
    for (const auto& s : env)
        ids.push_back(s.id);
    CHECK(ids == std::vector<std::size_t>{0, 3, 2});
    CHECK(env[0].gamma_hi == doctest::Approx(1.6));
    CHECK(env[1].gamma_hi == doctest::Approx(2.4));
}

TEST_CASE("lower envelope matches a gamma grid") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<EnvelopeLine> l;
        for (std::size_t i = 0; i < 8; ++i)
            l.push_back({i, -5.0 * u(rng), 3.0 * u(rng)});
        const auto env = lower_envelope(l);
        for (int s = 0; s <= 400; ++s) {
            const double g = 0.01 * s;
            double best = INFINITY;
            for (const auto& x : l)
                best = std::min(best, x.h_a + g * x.h_r);
            for (const auto& seg : env)
                if (g >= seg.gamma_lo && g < seg.gamma_hi) {
                    const auto& x = l[seg.id];
                    CHECK(x.h_a + g * x.h_r == doctest::Approx(best).epsilon(1e-12));
                }
        }
    }
}

TEST_CASE("sweep: two separated blobs") {
    const auto g = blobs(40, 2, 12.0, 1);
    const auto cs = find_configurations(g, 4.0);
    check_tiling(cs);
    std::vector<int> truth(80);
    for (std::size_t i = 40; i < 80; ++i)
        truth[i] = 1;
    bool found = false;
    for (const auto& e : cs.entries)
        if (e.cluster_count == 2) {
            found = true;
            CHECK(ari(contingency(e.partition.as_ints(), truth)) == 1.0);
            // Direct optimization inside the plateau agrees.
            for (int s = 1; s <= 10; ++s) {
                const double gamma = e.gamma_lo + (e.gamma_hi - e.gamma_lo) * s / 11.0;
                CHECK(optimize(g, gamma).partition == e.partition);
            }
        }
    CHECK(found);
    CHECK(cs.monotonicity_violations == 0);
}

TEST_CASE("sweep: no attraction gives one singleton plateau") {
    const std::vector<WeightedEdge> none;
    const auto g = from_edge_list(5, none, RepulsionScheme::uniform);
    const auto cs = find_configurations(g, 2.0);
    REQUIRE(cs.size() == 1);
    CHECK(cs.entries[0].cluster_count == 5);
    CHECK(cs.has_singletons);
}

TEST_CASE("sweep: dominance at interior samples") {
    const auto g = blobs(30, 3, 5.0, 2);
    const auto cs = find_configurations(g, 4.0);
    check_tiling(cs);
    std::vector<LandscapePoint> pts;
    for (const auto& c : cs.candidates)
        pts.push_back(landscape_point(g, c));
    for (const auto& e : cs.entries)
        for (int s = 1; s <= 5; ++s) {
            const double gamma = e.gamma_lo + (e.gamma_hi - e.gamma_lo) * s / 6.0;
            const double h = e.h_a + gamma * e.h_r;
            for (const auto& p : pts)
                CHECK(h <= p.at(gamma) + 1e-12);
            CHECK(&cs.at_gamma(gamma) == &e);
        }
}

TEST_CASE("sweep: small graphs follow the exhaustive envelope") {
    int agree = 0, total = 0;
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const std::size_t n = 7;
        const auto g = from_edge_list(n, oracle::random_graph(n, 500 + seed, 0.4));
        const auto cs = find_configurations(g, 3.0, {.optimize = {.seed = seed}});
        check_tiling(cs);
        std::vector<LandscapePoint> all;
        oracle::for_each_partition(n, [&](const oracle::Labels& lab) {
            all.push_back(landscape_point(g, Partition::from_labels(std::span<const std::size_t>(lab))));
        });
        for (int s = 1; s < 30; ++s) {
            const double gamma = 0.1 * s;
            double best = INFINITY;
            for (const auto& p : all)
                best = std::min(best, p.at(gamma));
            const auto& e = cs.at_gamma(gamma);
            agree += e.h_a + gamma * e.h_r <= best + 1e-9;
            ++total;
        }
    }
    CHECK(agree >= total * 95 / 100);
}

TEST_CASE("sweep: extremes") {
    const std::size_t n = 6;
    const auto g = from_edge_list(n, oracle::random_graph(n, 42, 0.7));
    const double bound = singleton_bound(g);
    const auto cs = find_configurations(g, bound * 1.5);
    CHECK(cs.entries.front().cluster_count == 1);  // connected input
    CHECK(cs.entries.back().cluster_count == n);
    CHECK(cs.has_whole);
    CHECK(cs.has_singletons);
}

TEST_CASE("sweep: thread count does not change the result") {
    const auto g = blobs(25, 4, 5.0, 3);
    const auto a = find_configurations(g, 4.0, {.threads = 1});
    const auto b = find_configurations(g, 4.0, {.threads = 4});
    REQUIRE(a.size() == b.size());
    for (std::size_t e = 0; e < a.size(); ++e) {
        CHECK(a.entries[e].gamma_lo == b.entries[e].gamma_lo);
        CHECK(a.entries[e].partition == b.entries[e].partition);
    }
}

TEST_CASE("sweep: parameter errors") {
    const auto g = blobs(5, 2, 5.0, 4);
    CHECK_THROWS_AS(find_configurations(g, 0.0), ParameterError);
    CHECK_THROWS_AS(find_configurations(g, -1.0), ParameterError);
}

TEST_CASE("widest plateau by linear and log width") {
    ConfigurationSet cs;
    cs.gamma_max = 4.0;
    cs.width_floor = 1e-3;
    cs.entries.resize(3);
    cs.entries[0].gamma_lo = 0.0;
    cs.entries[0].gamma_hi = 0.01;
    cs.entries[1].gamma_lo = 0.01;
    cs.entries[1].gamma_hi = 1.0;
    cs.entries[2].gamma_lo = 1.0;
    cs.entries[2].gamma_hi = 4.0;
    CHECK(&cs.widest(WidthScale::linear) == &cs.entries[2]);
    CHECK(&cs.widest(WidthScale::log) == &cs.entries[1]);
    CHECK(cs.entries[0].log_width(1e-3) == doctest::Approx(std::log(10.0)));
    CHECK(&cs.at_gamma(0.5) == &cs.entries[1]);
    CHECK(&cs.at_gamma(4.0) == &cs.entries[2]);
}

TEST_CASE("evaluate sweep") {
    const auto g = blobs(30, 2, 12.0, 5);
    const auto cs = find_configurations(g, 4.0);
    std::vector<int> truth(60);
    for (std::size_t i = 30; i < 60; ++i)
        truth[i] = 1;
    const auto rows = evaluate_sweep(cs, truth, LabelLevel::basic);
    REQUIRE(rows.size() == cs.size());
    double best = -1;
    for (const auto& r : rows) {
        best = std::max(best, r.ari);
        CHECK(r.level == LabelLevel::basic);
    }
    CHECK(best == 1.0);

    std::mt19937_64 rng(1);
    std::vector<int> random(60);
    for (auto& x : random)
        x = static_cast<int>(rng() % 2);
    for (const auto& r : evaluate_sweep(cs, random))
        CHECK(std::abs(r.ari) < 0.1);

    const std::vector<int> short_truth(10, 0);
    CHECK_THROWS_AS(evaluate_sweep(cs, short_truth), InputError);
}
