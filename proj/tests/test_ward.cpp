#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "facet/errors.hpp"
#include "facet/rng.hpp"
#include "facet/ward.hpp"

using namespace facet;

namespace {

PointSet line_points(std::initializer_list<double> xs) {
    PointSet points(1);
    for (const double x : xs) {
        const float v = static_cast<float>(x);
        points.add(std::span<const float>(&v, 1));
    }
    return points;
}

PointSet random_points(std::size_t m, std::size_t d, Rng& rng) {
    PointSet points(d);
    std::vector<float> v(d);
    for (std::size_t i = 0; i < m; ++i) {
        for (auto& x : v) x = static_cast<float>(rng.next_gaussian());
        points.add(v);
    }
    return points;
}

std::vector<double> sorted_costs(const ward::MergeHistory& history) {
    std::vector<double> costs;
    for (const auto& e : history.events) costs.push_back(e.distance);
    std::sort(costs.begin(), costs.end());
    return costs;
}

// Partitions compared as sorted lists of sorted member lists.
std::vector<std::vector<std::uint32_t>> canonical(const ward::ClusterSet& set) {
    auto clusters = set.clusters;
    for (auto& c : clusters) std::sort(c.begin(), c.end());
    std::sort(clusters.begin(), clusters.end());
    return clusters;
}

} // namespace

TEST_CASE("lance williams update reproduces direct merge costs") {
    // Singletons i=(0), j=(2) merged; k=(5).  Direct cost of (i u j) vs k with
    // the full-squared-distance scale: 2*|A||B|/(|A|+|B|) * ||mu_A - mu_B||^2
    // = 2*(2*1/3)*16 = 64/3.
    const double d_ik = 25.0; // (0-5)^2 scaled by 2*1*1/2 = 1
    const double d_jk = 9.0;
    const double d_ij = 4.0;
    const double updated = ward::lance_williams_update(d_ik, d_jk, d_ij, 1, 1, 1);
    CHECK(updated == doctest::Approx(64.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("singleton merge cost is the full squared distance") {
    auto points = line_points({0.0, 3.0});
    const auto history = ward::build_dendrogram(points);
    REQUIRE(history.events.size() == 1);
    CHECK(history.events[0].distance == doctest::Approx(9.0));
}

TEST_CASE("four point line dendrogram by hand") {
    // {0,1} cost 1, {10,11} cost 1, then the pair merge:
    // 2 * (2*2/4) * (10.5-0.5)^2 = 200.
    auto points = line_points({0.0, 1.0, 10.0, 11.0});
    const auto history = ward::build_dendrogram(points);
    REQUIRE(history.events.size() == 3);
    const auto costs = sorted_costs(history);
    CHECK(costs[0] == doctest::Approx(1.0));
    CHECK(costs[1] == doctest::Approx(1.0));
    CHECK(costs[2] == doctest::Approx(200.0));

    // Cutting between the scales yields the two obvious clusters.
    const auto set = ward::extract_clusters(history, 10.0);
    REQUIRE(set.clusters.size() == 2);
    const auto flat = canonical(set);
    CHECK(flat[0] == std::vector<std::uint32_t>{0, 1});
    CHECK(flat[1] == std::vector<std::uint32_t>{2, 3});
    CHECK(set.assignment[0] == set.assignment[1]);
    CHECK(set.assignment[2] == set.assignment[3]);
    CHECK(set.assignment[0] != set.assignment[2]);
}

TEST_CASE("chain agrees with the naive reference on random instances") {
    Rng rng(99);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t m = 3 + rng.next_below(30);
        const std::size_t d = 1 + rng.next_below(6);
        auto points = random_points(m, d, rng);

        ward::ChainStats stats;
        const auto chain = ward::build_dendrogram(points, &stats);
        const auto naive = ward::naive_reference(points);
        REQUIRE(chain.events.size() == m - 1);
        REQUIRE(naive.events.size() == m - 1);

        const auto a = sorted_costs(chain);
        const auto b = sorted_costs(naive);
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-9));
        }

        // Flat cuts agree wherever the cut is unambiguous.
        for (const double alpha : {0.5, 2.0, 8.0, 64.0}) {
            const auto cut_chain = ward::extract_clusters(chain, alpha);
            const auto cut_naive = ward::extract_clusters(naive, alpha);
            CHECK(canonical(cut_chain) == canonical(cut_naive));
        }

        CHECK(stats.lemma_violations == 0);
        CHECK(stats.double_push_violations == 0);
        CHECK(stats.merges == m - 1);
        CHECK(stats.pushes <= 3 * m - 2); // 2(m-1) + m
    }
}

TEST_CASE("extract clusters respects alpha") {
    auto points = line_points({0.0, 1.0, 10.0, 11.0});
    const auto history = ward::build_dendrogram(points);

    // Below the smallest merge cost everything stays a singleton.
    const auto singletons = ward::extract_clusters(history, 0.5);
    CHECK(singletons.clusters.size() == 4);

    // Above the final merge cost everything collapses into one cluster.
    const auto all = ward::extract_clusters(history, 1000.0);
    CHECK(all.clusters.size() == 1);
    CHECK(all.clusters[0].size() == 4);

    // Every point is covered exactly once at any alpha.
    for (const double alpha : {0.0, 1.0, 50.0, 200.0, 1e6}) {
        const auto set = ward::extract_clusters(history, alpha);
        std::vector<bool> seen(4, false);
        for (const auto& cluster : set.clusters) {
            for (const auto p : cluster) {
                CHECK_FALSE(seen[p]);
                seen[p] = true;
            }
        }
        CHECK(std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }));
        CHECK(set.assignment.size() == 4);
    }
}

TEST_CASE("clusters are ordered by smallest member") {
    Rng rng(4);
    auto points = random_points(24, 3, rng);
    const auto [history, set] = ward::cluster(points, 2.0);
    (void)history;
    std::uint32_t last_front = 0;
    bool first = true;
    for (const auto& cluster : set.clusters) {
        REQUIRE(!cluster.empty());
        CHECK(std::is_sorted(cluster.begin(), cluster.end()));
        if (!first) CHECK(cluster.front() > last_front);
        last_front = cluster.front();
        first = false;
    }
}

TEST_CASE("naive reference merge costs never decrease") {
    Rng rng(17);
    auto points = random_points(20, 2, rng);
    const auto naive = ward::naive_reference(points);
    for (std::size_t i = 1; i < naive.events.size(); ++i) {
        CHECK(naive.events[i].distance >= naive.events[i - 1].distance - 1e-9);
    }
}

TEST_CASE("ward input guards") {
    PointSet empty(3);
    const auto history = ward::build_dendrogram(empty);
    CHECK(history.initial_count == 0);
    CHECK(history.events.empty());

    auto points = line_points({0.0, 1.0, 2.0, 3.0});
    CHECK_THROWS_AS((void)ward::build_dendrogram(points, nullptr, 3), ValidationError);
}
