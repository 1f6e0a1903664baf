#include <catch2/catch_amalgamated.hpp>
#include <curveseg/allocation.hpp>
#include <curveseg/clustering.hpp>

#include "oracles.hpp"

using namespace curveseg;

namespace {

// non-increasing rows, like any real R table
CostMatrix random_r(oracle::Rng& rng, std::size_t k, std::size_t cols) {
    CostMatrix r(k, std::vector<double>(cols));
    for (auto& row : r) {
        double v = rng.uniform(5.0, 30.0);
        for (std::size_t p = 0; p < cols; ++p) {
            row[p] = v;
            v -= rng.uniform(0.0, v / 2.0);
        }
    }
    return r;
}

CurveSet random_set(oracle::Rng& rng, std::size_t n, std::size_t m) {
    std::vector<double> vals;
    vals.reserve(n * m);
    for (std::size_t i = 0; i < n * m; ++i) vals.push_back(rng.uniform(-5.0, 5.0));
    return CurveSet(SampleGrid::index_grid(m), std::move(vals));
}

}  // namespace

TEST_CASE("single cluster gets the whole budget") {
    CostMatrix r{{9.0, 5.0, 2.0, 1.0}};
    auto out = allocate(r, 3);
    CHECK(out.allocation == std::vector<std::size_t>{3});
    CHECK(out.cost == 2.0);
}

TEST_CASE("allocation matches composition enumeration") {
    oracle::Rng rng(41);
    for (int rep = 0; rep < 60; ++rep) {
        const std::size_t k = 2 + rng.index(3);              // 2..4
        const std::size_t p = k + rng.index(13 - k);         // k..12
        const std::size_t cols = p - k + 1;
        auto r = random_r(rng, k, cols);
        auto out = allocate(r, p);
        const double want = oracle::enum_best_allocation(r, p, cols);
        CHECK(oracle::rel_close(out.cost, want, 1e-9));
        std::size_t total = 0;
        for (std::size_t u : out.allocation) {
            CHECK(u >= 1);
            total += u;
        }
        CHECK(total == p);
        double recomputed = 0.0;
        for (std::size_t c = 0; c < k; ++c) recomputed += r[c][out.allocation[c] - 1];
        CHECK(oracle::rel_close(recomputed, out.cost, 1e-12));
    }
}

TEST_CASE("identical rows: canonical tie-break and enumeration cost agree") {
    CostMatrix r(3, {8.0, 4.0, 2.0, 1.0, 0.5, 0.25, 0.12});
    auto out = allocate(r, 9);
    const double want = oracle::enum_best_allocation(r, 9, 7);
    double got = 0.0;
    for (std::size_t c = 0; c < 3; ++c) got += r[c][out.allocation[c] - 1];
    CHECK(oracle::rel_close(got, want, 1e-12));
    // canonical choice per the smallest-u tie-break, derived from enumeration
    std::vector<std::size_t> canonical(3, 0);
    std::size_t remaining = 9;
    for (std::size_t l = 3; l >= 1; --l) {
        double best = oracle::kInf;
        std::size_t best_u = 0;
        for (std::size_t u = 1; u + (l - 1) <= remaining && u <= 7; ++u) {
            double v = r[l - 1][u - 1];
            if (l > 1) {
                CostMatrix head(r.begin(), r.begin() + (l - 1));
                v += oracle::enum_best_allocation(head, remaining - u, 7);
            } else if (u != remaining) {
                continue;
            }
            if (v < best) {
                best = v;
                best_u = u;
            }
        }
        canonical[l - 1] = best_u;
        remaining -= best_u;
    }
    CHECK(out.allocation == canonical);
}

TEST_CASE("cap restricts the allocation and can make it infeasible") {
    CostMatrix r(2, {10.0, 1.0, 0.9, 0.8, 0.7, 0.6});
    auto capped = allocate(r, 6, 4);
    for (std::size_t u : capped.allocation) CHECK(u <= 4);
    CHECK(capped.allocation[0] + capped.allocation[1] == 6);
    CHECK_THROWS_AS(allocate(r, 6, 2), DomainError);
    CHECK_THROWS_AS(allocate(r, 1, std::nullopt), DomainError);  // budget below K
}

TEST_CASE("optimal allocation never loses to the uniform split") {
    oracle::Rng rng(42);
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t k = 2 + rng.index(3);
        const std::size_t per = 1 + rng.index(4);
        const std::size_t p = k * per;
        auto r = random_r(rng, k, p - k + 1);
        auto out = allocate(r, p);
        double uniform_cost = 0.0;
        for (std::size_t c = 0; c < k; ++c) uniform_cost += r[c][per - 1];
        CHECK(out.cost <= uniform_cost + 1e-12);
    }
}

TEST_CASE("build_R rows equal per-cluster dp runs") {
    oracle::Rng rng(43);
    auto set = random_set(rng, 9, 10);
    std::vector<std::vector<std::size_t>> clusters{{0, 1, 2}, {3, 4, 5}, {6, 7, 8}};
    ModelSpec spec{SegmentModel::ConstantL2, SetAggregate::SumOverCurves};
    auto r = build_R(set, clusters, spec, 6);
    REQUIRE(r.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
        SegmentCostFn cost = make_set_cost(set, clusters[k], spec);
        auto tables = run_dp(cost, 10, 6);
        for (std::size_t p = 1; p <= 6; ++p) CHECK(r[k][p - 1] == tables.best(p));
        for (std::size_t p = 1; p < 6; ++p) CHECK(r[k][p] <= r[k][p - 1] + 1e-10);
    }
}

TEST_CASE("R of identical constant curves is all zero; singleton rows reduce") {
    std::vector<double> vals;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 6; ++j) vals.push_back(1.5);
    for (int j = 0; j < 6; ++j) vals.push_back(static_cast<double>(j * j));
    CurveSet set(SampleGrid::index_grid(6), vals);
    ModelSpec spec;
    auto r = build_R(set, {{0, 1, 2, 3}, {4}}, spec, 4);
    for (std::size_t p = 1; p <= 4; ++p) CHECK(r[0][p - 1] == Catch::Approx(0.0).margin(1e-15));
    auto solo_stats = build_prefix_stats(set, 4);
    auto solo_tables = run_dp(
        [&](std::size_t a, std::size_t b) { return cost_constant_l2(solo_stats, a, b); }, 6, 4);
    for (std::size_t p = 1; p <= 4; ++p)
        CHECK(oracle::rel_close(r[1][p - 1], solo_tables.best(p), 1e-9));
}
