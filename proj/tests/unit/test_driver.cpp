#include <doctest.h>

#include <cmath>
#include <random>

#include "../oracles.hpp"
#include "cpasynth/driver.hpp"
#include "cpasynth/ep_decomp.hpp"
#include "cpasynth/errors.hpp"
#include "cpasynth/parallel.hpp"
#include "cpasynth/refgen.hpp"

using namespace cpa;

namespace {

PmmConfig small_config(int q) {
    PmmConfig c;
    c.q_count = q;
    c.restarts = 10;
    return c;
}

}  // namespace

TEST_CASE("parallel_for covers every index once and rethrows the lowest failure") {
    for (unsigned threads : {1u, 3u, 8u}) {
        std::vector<int> hits(100);
        parallel_for(hits.size(), threads, [&](std::size_t i) { ++hits[i]; });
        CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
        try {
            parallel_for(50, threads, [](std::size_t i) {
                if (i == 7 || i == 30) throw std::runtime_error(std::to_string(i));
            });
            FAIL("expected an exception");
        } catch (const std::runtime_error& e) {
            CHECK(std::string(e.what()) == "7");
        }
    }
}

TEST_CASE("PMM result is the best per-sample candidate") {
    const auto ref = dolph_chebyshev(12, -20.0, 10.0);
    const ArrayGeometry geo(12);
    const auto r = pmm_synthesize(geo, ref, small_config(8));
    REQUIRE(r.per_sample.size() == 17);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : r.per_sample) {
        CHECK(s.m < 17);
        CHECK(s.u == AngularGrid(17).node(s.m));
        if (s.degenerate) {
            CHECK(std::isnan(s.gamma));
            continue;
        }
        CHECK(s.distinct_clusterings >= 1);
        CHECK(s.clustering.q_count() == 8);
        best = std::min(best, s.gamma);
    }
    CHECK(r.gamma == best);
    CHECK(r.per_sample[r.best_sample].gamma == r.gamma);
    CHECK(r.clustering == r.per_sample[r.best_sample].clustering);
    const auto p = result_pattern(geo, r, AngularGrid(17));
    CHECK(pm_metric(fpa_power_pattern(geo, ref, AngularGrid(17)), p) == doctest::Approx(r.gamma).epsilon(1e-12));
}

TEST_CASE("PMM clustering at a sample comes from k-means on that sample's normalized EP column") {
    const auto ref = dolph_chebyshev(10, -25.0, 0.0);
    const ArrayGeometry geo(10);
    auto cfg = small_config(5);
    cfg.restarts = 1;
    const auto r = pmm_synthesize(geo, ref, cfg);
    const auto ep = ep_matrix(geo, ref, AngularGrid(17));
    for (const auto& s : r.per_sample) {
        if (s.degenerate) continue;
        const auto col = normalize_column(ep, s.m);
        const auto km = kmeans_cluster(col.values, 5, cfg.base_seed);
        CHECK(km.clustering == s.clustering);
    }
}

TEST_CASE("identity clustering through the driver") {
    std::mt19937_64 g(44);
    for (int trial = 0; trial < 5; ++trial) {
        const std::size_t n = 3 + g() % 12;
        const ExcitationVector ref(oracle::random_excitations(g, n));
        auto cfg = small_config(static_cast<int>(n));
        cfg.clustering_m = 2 * n + 1;
        CHECK(pmm_synthesize(ArrayGeometry(n), ref, cfg).gamma <= 1e-10);
    }
}

TEST_CASE("thread count does not change the answer") {
    const auto ref = taylor_nbar(14, -25.0, 3, 10.0);
    const ArrayGeometry geo(14);
    auto cfg = small_config(6);
    cfg.clustering_m = 33;
    const auto a = pmm_synthesize(geo, ref, cfg);
    cfg.threads = 5;
    const auto b = pmm_synthesize(geo, ref, cfg);
    CHECK(a.gamma == b.gamma);
    CHECK(a.clustering == b.clustering);
    CHECK(a.weights == b.weights);
    CHECK(a.best_sample == b.best_sample);
}

TEST_CASE("degenerate samples are skipped") {
    // Two anti-phase elements null out broadside.
    const ExcitationVector ref{1.0, -1.0, 1.0, -1.0};
    auto cfg = small_config(2);
    cfg.clustering_m = 9;
    const auto r = pmm_synthesize(ArrayGeometry(4), ref, cfg);
    CHECK(r.per_sample[4].degenerate);
    CHECK(std::isfinite(r.gamma));
}

TEST_CASE("driver argument checks") {
    const auto ref = dolph_chebyshev(6, -20.0, 0.0);
    auto cfg = small_config(7);
    CHECK_THROWS_AS(pmm_synthesize(ArrayGeometry(6), ref, cfg), ArgumentError);
    cfg = small_config(3);
    cfg.restarts = 0;
    CHECK_THROWS_AS(pmm_synthesize(ArrayGeometry(6), ref, cfg), ArgumentError);
    cfg = small_config(3);
    CHECK_THROWS_AS(pmm_synthesize(ArrayGeometry(7), ref, cfg), ArgumentError);
    cfg.metric_m = 5;  // fewer samples than N + 1
    CHECK_THROWS_AS(pmm_synthesize(ArrayGeometry(6), ref, cfg), ArgumentError);
}
