#include <catch2/catch_amalgamated.hpp>
#include <curveseg/cost.hpp>

#include "oracles.hpp"

using namespace curveseg;

namespace {

std::vector<double> index_axis(std::size_t m) {
    std::vector<double> t(m);
    for (std::size_t j = 0; j < m; ++j) t[j] = static_cast<double>(j + 1);
    return t;
}

CurveSet random_set(oracle::Rng& rng, std::size_t n, std::size_t m) {
    std::vector<double> vals;
    vals.reserve(n * m);
    for (std::size_t i = 0; i < n * m; ++i) vals.push_back(rng.uniform(-5.0, 5.0));
    return CurveSet(SampleGrid::index_grid(m), std::move(vals));
}

std::vector<std::size_t> all_indices(std::size_t n) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    return idx;
}

}  // namespace

TEST_CASE("prefix sums of small hand curves") {
    auto t4 = index_axis(4);
    auto s = build_prefix_stats(std::vector<double>{1, 1, 1, 1}, t4);
    CHECK(s.sum_v == std::vector<double>{0, 1, 2, 3, 4});
    CHECK(s.sum_vv == std::vector<double>{0, 1, 2, 3, 4});

    auto t3 = index_axis(3);
    auto s2 = build_prefix_stats(std::vector<double>{1, 2, 3}, t3);
    CHECK(s2.sum_v == std::vector<double>{0, 1, 3, 6});
}

TEST_CASE("prefix subtraction equals direct summation") {
    oracle::Rng rng(11);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t m = 10;
        auto v = oracle::random_curve(rng, m);
        auto t = index_axis(m);
        auto s = build_prefix_stats(v, t);
        REQUIRE(s.sum_v.size() == m + 1);
        REQUIRE(s.sum_v[0] == 0.0);
        for (std::size_t k = 0; k < m; ++k)
            for (std::size_t l = k + 1; l <= m; ++l) {
                double direct = 0.0;
                for (std::size_t j = k; j < l; ++j) direct += v[j];
                CHECK(oracle::rel_close(s.sum_v[l] - s.sum_v[k], direct, 1e-9));
            }
    }
}

TEST_CASE("constant L2 cost: hand values and the two-pass oracle") {
    auto t = index_axis(3);
    auto flat = build_prefix_stats(std::vector<double>{5, 5, 5}, t);
    CHECK(cost_constant_l2(flat, 0, 3) == 0.0);

    auto t2 = index_axis(2);
    auto pair = build_prefix_stats(std::vector<double>{0, 2}, t2);
    CHECK(cost_constant_l2(pair, 0, 2) == Catch::Approx(2.0));

    oracle::Rng rng(12);
    for (int rep = 0; rep < 50; ++rep) {
        auto v = oracle::random_curve(rng, 8);
        auto ax = index_axis(8);
        auto s = build_prefix_stats(v, ax);
        for (std::size_t k = 0; k < 8; ++k)
            for (std::size_t l = k + 1; l <= 8; ++l)
                CHECK(oracle::rel_close(cost_constant_l2(s, k, l),
                                        oracle::direct_constant_l2(v, k, l), 1e-9));
    }
}

TEST_CASE("constant L1 cost: hand values and the sort oracle") {
    std::vector<double> flat{5, 5, 5};
    CHECK(cost_constant_l1(flat, 0, 3) == 0.0);
    std::vector<double> spiky{0, 0, 10};
    CHECK(cost_constant_l1(spiky, 0, 3) == 10.0);  // median 0 shrugs off the outlier

    oracle::Rng rng(13);
    for (int rep = 0; rep < 50; ++rep) {
        auto v = oracle::random_curve(rng, 7);
        for (std::size_t k = 0; k < 7; ++k)
            for (std::size_t l = k + 1; l <= 7; ++l)
                CHECK(oracle::rel_close(cost_constant_l1(v, k, l),
                                        oracle::direct_constant_l1(v, k, l), 1e-12));
    }
}

TEST_CASE("line L2 cost: exact line, degenerate point, regression oracle") {
    auto t = index_axis(6);
    std::vector<double> line(6);
    for (std::size_t j = 0; j < 6; ++j) line[j] = 2.0 * t[j] + 1.0;
    auto s = build_prefix_stats(line, t);
    CHECK(cost_line_l2(s, 0, 6) == Catch::Approx(0.0).margin(1e-12));
    CHECK(cost_line_l2(s, 2, 3) == 0.0);

    oracle::Rng rng(14);
    for (int rep = 0; rep < 50; ++rep) {
        auto v = oracle::random_curve(rng, 9);
        auto ax = index_axis(9);
        auto st = build_prefix_stats(v, ax);
        for (std::size_t k = 0; k < 9; ++k)
            for (std::size_t l = k + 1; l <= 9; ++l)
                CHECK(oracle::rel_close(cost_line_l2(st, k, l),
                                        oracle::direct_line_l2(v, ax, k, l), 1e-8));
    }
}

TEST_CASE("interpolation cost: chord reproduces lines, hand case, chord oracle") {
    auto t = index_axis(5);
    std::vector<double> line(5);
    for (std::size_t j = 0; j < 5; ++j) line[j] = -1.5 * t[j] + 4.0;
    auto s = build_prefix_stats(line, t);
    CHECK(cost_interp_l2(s, 0, 5) == Catch::Approx(0.0).margin(1e-12));

    std::vector<double> vee{0, 1, 0};
    std::vector<double> tv{0, 1, 2};
    auto sv = build_prefix_stats(vee, tv);
    CHECK(cost_interp_l2(sv, 0, 3) == Catch::Approx(1.0));
    CHECK_THROWS_AS(cost_interp_l2(sv, 1, 2), DomainError);

    oracle::Rng rng(15);
    for (int rep = 0; rep < 50; ++rep) {
        auto v = oracle::random_curve(rng, 6);
        auto ax = index_axis(6);
        auto st = build_prefix_stats(v, ax);
        for (std::size_t k = 0; k < 6; ++k)
            for (std::size_t l = k + 2; l <= 6; ++l)
                CHECK(oracle::rel_close(cost_interp_l2(st, k, l),
                                        oracle::direct_interp_l2(v, ax, k, l), 1e-8));
    }
}

TEST_CASE("segment costs are nonnegative and grow with the segment") {
    oracle::Rng rng(16);
    for (int rep = 0; rep < 25; ++rep) {
        auto v = oracle::random_curve(rng, 12);
        auto ax = index_axis(12);
        auto s = build_prefix_stats(v, ax);
        for (std::size_t k = 0; k < 12; ++k)
            for (std::size_t l = k + 1; l <= 12; ++l) {
                CHECK(cost_constant_l2(s, k, l) >= 0.0);
                CHECK(cost_line_l2(s, k, l) >= 0.0);
                CHECK(cost_constant_l1(v, k, l) >= 0.0);
                if (l < 12) {
                    CHECK(cost_constant_l2(s, k, l) <= cost_constant_l2(s, k, l + 1) + 1e-12);
                    CHECK(cost_line_l2(s, k, l) <= cost_line_l2(s, k, l + 1) + 1e-12);
                }
            }
    }
}

TEST_CASE("translation and scaling behave like the norms say") {
    oracle::Rng rng(17);
    auto v = oracle::random_curve(rng, 10);
    auto ax = index_axis(10);
    const double shift = 3.7, scale = -2.5;
    std::vector<double> shifted(10), scaled(10);
    for (std::size_t j = 0; j < 10; ++j) {
        shifted[j] = v[j] + shift;
        scaled[j] = v[j] * scale;
    }
    auto s0 = build_prefix_stats(v, ax);
    auto s1 = build_prefix_stats(shifted, ax);
    auto s2 = build_prefix_stats(scaled, ax);
    for (std::size_t k = 0; k < 10; ++k)
        for (std::size_t l = k + 1; l <= 10; ++l) {
            CHECK(oracle::rel_close(cost_constant_l2(s0, k, l), cost_constant_l2(s1, k, l), 1e-8));
            CHECK(oracle::rel_close(cost_line_l2(s0, k, l), cost_line_l2(s1, k, l), 1e-7));
            CHECK(oracle::rel_close(cost_constant_l1(v, k, l), cost_constant_l1(shifted, k, l),
                                    1e-8));
            if (l - k >= 2)
                CHECK(oracle::rel_close(cost_interp_l2(s0, k, l),
                                        cost_interp_l2(s1, k, l), 1e-7));
            CHECK(oracle::rel_close(cost_constant_l2(s2, k, l),
                                    scale * scale * cost_constant_l2(s0, k, l), 1e-8));
            CHECK(oracle::rel_close(cost_constant_l1(scaled, k, l),
                                    std::abs(scale) * cost_constant_l1(v, k, l), 1e-8));
        }
}

TEST_CASE("prefix path reproduces the recursive Q table") {
    oracle::Rng rng(18);
    for (int rep = 0; rep < 5; ++rep) {
        const std::size_t m = 40 + rng.index(60);
        auto v = oracle::random_curve(rng, m);
        auto ax = index_axis(m);
        auto s = build_prefix_stats(v, ax);
        auto q = oracle::recursive_q_table(v);
        const double floor = oracle::recursion_noise_floor(v);
        for (std::size_t k = 0; k < m; ++k)
            for (std::size_t l = k; l < m; ++l)
                CHECK(oracle::close_with_floor(cost_constant_l2(s, k, l + 1), q[k][l], 1e-9,
                                               floor));
    }
}

TEST_CASE("set stats: degenerate sets") {
    oracle::Rng rng(19);
    auto set = random_set(rng, 4, 6);
    std::vector<std::size_t> one{2};
    auto stats = build_set_stats(set, one);
    for (std::size_t j = 0; j < 6; ++j) CHECK(stats.mean[j] == set.value(2, j));
    CHECK(set_residual(stats, 0, 6) == 0.0);

    // duplicate a row: residual stays zero, mean equals the row
    std::vector<double> vals;
    for (int copy = 0; copy < 2; ++copy)
        for (std::size_t j = 0; j < 6; ++j) vals.push_back(set.value(1, j));
    CurveSet twins(SampleGrid::index_grid(6), vals);
    auto both = build_set_stats(twins, all_indices(2));
    CHECK(set_residual(both, 0, 6) == Catch::Approx(0.0).margin(1e-18));
    for (std::size_t j = 0; j < 6; ++j) CHECK(both.mean[j] == Catch::Approx(set.value(1, j)));

    CHECK_THROWS_AS(build_set_stats(set, std::vector<std::size_t>{}), DomainError);
}

TEST_CASE("Huygens identity: set cost equals mean cost plus residual") {
    oracle::Rng rng(20);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t n = 2 + rng.index(6), m = 4 + rng.index(8);
        auto set = random_set(rng, n, m);
        auto members = all_indices(n);
        auto stats = build_set_stats(set, members);
        auto t = set.grid().points();
        for (std::size_t k = 0; k < m; ++k)
            for (std::size_t l = k + 1; l <= m; ++l) {
                const double lhs = cost_set_sum(stats, k, l, SegmentModel::ConstantL2);
                const auto mean = oracle::direct_mean_curve(set, members);
                const double rhs =
                    static_cast<double>(n) * oracle::direct_constant_l2(mean, k, l) +
                    oracle::direct_set_residual(set, members, k, l);
                CHECK(oracle::rel_close(lhs, rhs, 1e-8));
                // and both equal the grand-mean double sum
                CHECK(oracle::rel_close(lhs, oracle::direct_set_constant_l2(set, members, k, l),
                                        1e-8));
            }
    }
}

TEST_CASE("set cost of a singleton reduces to the curve cost") {
    oracle::Rng rng(21);
    auto set = random_set(rng, 3, 9);
    std::vector<std::size_t> solo{1};
    auto stats = build_set_stats(set, solo);
    auto t = set.grid().points();
    auto s = build_prefix_stats(set, 1);
    for (std::size_t k = 0; k < 9; ++k)
        for (std::size_t l = k + 1; l <= 9; ++l) {
            CHECK(oracle::rel_close(cost_set_sum(stats, k, l, SegmentModel::ConstantL2),
                                    cost_constant_l2(s, k, l), 1e-9));
            CHECK(oracle::rel_close(cost_set_sum(stats, k, l, SegmentModel::LineL2),
                                    cost_line_l2(s, k, l), 1e-9));
        }
}

TEST_CASE("identical constant members cost nothing") {
    std::vector<double> vals;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 5; ++j) vals.push_back(2.5);
    CurveSet set(SampleGrid::index_grid(5), vals);
    auto stats = build_set_stats(set, all_indices(3));
    CHECK(cost_set_sum(stats, 0, 5, SegmentModel::ConstantL2) ==
          Catch::Approx(0.0).margin(1e-18));
    CHECK(cost_set_max(set, all_indices(3), 0, 5) == Catch::Approx(0.0).margin(1e-18));
}

TEST_CASE("max-over-curves cost: singleton, symmetry, oracle") {
    oracle::Rng rng(22);
    auto set = random_set(rng, 3, 8);
    std::vector<std::size_t> solo{0};
    auto s0 = build_prefix_stats(set, 0);
    for (std::size_t k = 0; k < 8; ++k)
        for (std::size_t l = k + 1; l <= 8; ++l)
            CHECK(oracle::rel_close(cost_set_max(set, solo, k, l), cost_constant_l2(s0, k, l),
                                    1e-10));

    // two curves with identical per-segment variance: optimum sits midway
    std::vector<double> vals;
    std::vector<double> base = {0.3, -0.4, 0.9, -0.8};
    for (double b : base) vals.push_back(1.0 + b);
    for (double b : base) vals.push_back(5.0 + b);
    CurveSet sym(SampleGrid::index_grid(4), vals);
    auto solve = solve_set_max(sym, all_indices(2), 0, 4);
    CHECK(solve.level == Catch::Approx(3.0).margin(1e-9));

    for (int rep = 0; rep < 15; ++rep) {
        auto rs = random_set(rng, 3, 7);
        auto members = all_indices(3);
        for (std::size_t k = 0; k < 7; ++k)
            for (std::size_t l = k + 1; l <= 7; ++l) {
                const double got = cost_set_max(rs, members, k, l);
                const double want = oracle::grid_search_set_max(rs, members, k, l);
                CHECK(std::abs(got - want) <= 1e-10 * std::max(1.0, std::abs(want)));
            }
    }
}

TEST_CASE("pooled-median L1 set cost beats any scanned level") {
    oracle::Rng rng(23);
    auto set = random_set(rng, 4, 6);
    auto members = all_indices(4);
    for (std::size_t k = 0; k < 6; ++k)
        for (std::size_t l = k + 1; l <= 6; ++l) {
            const double got = cost_set_constant_l1(set, members, k, l);
            auto objective = [&](double a) {
                double total = 0.0;
                for (std::size_t i : members)
                    for (std::size_t j = k; j < l; ++j) total += std::abs(set.value(i, j) - a);
                return total;
            };
            double best = oracle::kInf;
            for (std::size_t i : members)
                for (std::size_t j = k; j < l; ++j) best = std::min(best, objective(set.value(i, j)));
            CHECK(got <= best + 1e-10);
            CHECK(oracle::rel_close(got, objective(pooled_median(set, members, k, l)), 1e-12));
        }
}

TEST_CASE("degenerate segments cost nothing across providers") {
    oracle::Rng rng(24);
    auto v = oracle::random_curve(rng, 9);
    auto ax = index_axis(9);
    auto s = build_prefix_stats(v, ax);
    for (std::size_t k = 0; k < 9; ++k) {
        CHECK(cost_constant_l2(s, k, k + 1) == 0.0);
        CHECK(cost_constant_l1(v, k, k + 1) == 0.0);
        CHECK(cost_line_l2(s, k, k + 1) == 0.0);
        if (k + 2 <= 9) {
            CHECK(cost_line_l2(s, k, k + 2) == 0.0);
            CHECK(cost_interp_l2(s, k, k + 2) == 0.0);
        }
    }
}
