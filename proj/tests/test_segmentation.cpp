#include <catch2/catch_amalgamated.hpp>
#include <curveseg/cost.hpp>
#include <curveseg/segmentation.hpp>

#include "oracles.hpp"

using namespace curveseg;

namespace {

std::vector<double> index_axis(std::size_t m) {
    std::vector<double> t(m);
    for (std::size_t j = 0; j < m; ++j) t[j] = static_cast<double>(j + 1);
    return t;
}

}  // namespace

TEST_CASE("constant curve segments to zero cost for any p") {
    std::vector<double> v(9, 4.2);
    auto t = index_axis(9);
    ConstantL2Cost cost(v, t);
    auto tables = run_dp(cost, 9, 5);
    for (std::size_t p = 1; p <= 5; ++p) {
        CHECK(tables.best(p) == Catch::Approx(0.0).margin(1e-15));
        CHECK(backtrack(tables, p).segment_count() == p);
    }
}

TEST_CASE("p equal to m gives singletons and zero cost") {
    oracle::Rng rng(31);
    auto v = oracle::random_curve(rng, 7);
    auto t = index_axis(7);
    ConstantL2Cost cost(v, t);
    auto tables = run_dp(cost, 7, 7);
    CHECK(tables.best(7) == Catch::Approx(0.0).margin(1e-12));
    auto seg = backtrack(tables, 7);
    CHECK(seg.segment_count() == 7);
}

TEST_CASE("step curve splits exactly at the step") {
    std::vector<double> v{0, 0, 0, 1, 1, 1};
    auto t = index_axis(6);
    ConstantL2Cost cost(v, t);
    auto tables = run_dp(cost, 6, 2);
    CHECK(tables.best(2) == Catch::Approx(0.0).margin(1e-15));
    auto seg = backtrack(tables, 2);
    REQUIRE(seg.cuts().size() == 1);
    CHECK(seg.cuts()[0] == 3);
    CHECK(backtrack(tables, 1).cuts().empty());
}

TEST_CASE("dp preconditions") {
    std::vector<double> v(5, 1.0);
    auto t = index_axis(5);
    ConstantL2Cost cost(v, t);
    CHECK_THROWS_AS(run_dp(cost, 5, 6), DomainError);
    CHECK_THROWS_AS(run_dp(cost, 5, 0), DomainError);
    InterpL2Cost icost(v, t);
    CHECK_THROWS_AS(run_dp(icost, 5, 3, SegmentAggregate::Sum, 2), DomainError);
    auto nan_cost = [](std::size_t, std::size_t) {
        return std::numeric_limits<double>::quiet_NaN();
    };
    CHECK_THROWS_AS(run_dp(nan_cost, 5, 2), InternalError);
}

TEST_CASE("dp equals exhaustive enumeration on random instances") {
    oracle::Rng rng(32);
    for (int rep = 0; rep < 40; ++rep) {
        const std::size_t m = 6 + rng.index(7);  // 6..12
        const std::size_t p = 1 + rng.index(std::min<std::size_t>(5, m));
        auto v = oracle::random_curve(rng, m);
        auto t = index_axis(m);
        const auto agg = (rep % 2 == 0) ? SegmentAggregate::Sum : SegmentAggregate::Max;

        SegmentCostFn cost = make_curve_cost(v, t, SegmentModel::ConstantL2);
        auto tables = run_dp(cost, m, p, agg);
        const double want = oracle::enum_best_cost(cost, m, p, agg);
        CHECK(oracle::rel_close(tables.best(p), want, 1e-9));
        auto seg = backtrack(tables, p);
        CHECK(seg.cuts() == oracle::enum_canonical_cuts(cost, m, p, agg));
    }
}

TEST_CASE("dp handles every model kind against enumeration") {
    oracle::Rng rng(33);
    const SegmentModel kinds[] = {SegmentModel::ConstantL2, SegmentModel::ConstantL1,
                                  SegmentModel::LineL2, SegmentModel::InterpL2};
    for (int rep = 0; rep < 24; ++rep) {
        const SegmentModel kind = kinds[rep % 4];
        const std::size_t len = min_segment_length(kind);
        const std::size_t p = 1 + rng.index(4);
        const std::size_t m = std::max<std::size_t>(p * len, 6) + rng.index(5);
        auto v = oracle::random_curve(rng, m);
        auto t = index_axis(m);
        SegmentCostFn cost = make_curve_cost(v, t, kind);
        auto tables = run_dp(cost, m, p, SegmentAggregate::Sum, len);
        CHECK(oracle::rel_close(tables.best(p),
                                oracle::enum_best_cost(cost, m, p, SegmentAggregate::Sum, len),
                                1e-9));
    }
}

TEST_CASE("more segments never hurt the free-parameter models") {
    oracle::Rng rng(34);
    for (int rep = 0; rep < 10; ++rep) {
        const std::size_t m = 10 + rng.index(8);
        auto v = oracle::random_curve(rng, m);
        auto t = index_axis(m);
        for (SegmentModel kind :
             {SegmentModel::ConstantL2, SegmentModel::ConstantL1, SegmentModel::LineL2}) {
            SegmentCostFn cost = make_curve_cost(v, t, kind);
            for (auto agg : {SegmentAggregate::Sum, SegmentAggregate::Max}) {
                auto tables = run_dp(cost, m, 6, agg);
                for (std::size_t p = 1; p < 6; ++p)
                    CHECK(tables.best(p + 1) <= tables.best(p) + 1e-10);
                // the same monotonicity holds layer-wise wherever defined
                for (std::size_t p = 1; p < 6; ++p)
                    for (std::size_t k = 0; k + p + 1 <= m; ++k)
                        CHECK(tables.cost[p][k] <= tables.cost[p - 1][k] + 1e-10);
            }
        }
    }
}

TEST_CASE("dp runs are deterministic") {
    oracle::Rng rng(35);
    auto v = oracle::random_curve(rng, 20);
    auto t = index_axis(20);
    ConstantL2Cost cost(v, t);
    auto a = run_dp(cost, 20, 5);
    auto b = run_dp(cost, 20, 5);
    CHECK(a.cost == b.cost);
    CHECK(a.split == b.split);
    CHECK(backtrack(a, 5) == backtrack(b, 5));
}

TEST_CASE("cost attribution: re-evaluating the summary reproduces F") {
    oracle::Rng rng(36);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t m = 8 + rng.index(10);
        auto v = oracle::random_curve(rng, m);
        SampleGrid grid = SampleGrid::index_grid(m);
        auto t = grid.points();
        for (SegmentModel kind :
             {SegmentModel::ConstantL2, SegmentModel::ConstantL1, SegmentModel::LineL2}) {
            SegmentCostFn cost = make_curve_cost(v, t, kind);
            const std::size_t p = 2 + rng.index(3);
            auto tables = run_dp(cost, m, p);
            auto seg = backtrack(tables, p);
            Summary s = fit_summary(v, grid, seg, kind);
            auto fitted = s.values_on_grid();
            double err = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                const double d = v[j] - fitted[j];
                err += (kind == SegmentModel::ConstantL1) ? std::abs(d) : d * d;
            }
            CHECK(oracle::rel_close(err, tables.best(p), 1e-9));
        }
    }
}

TEST_CASE("knot dp recovers exact piecewise-linear curves") {
    oracle::Rng rng(37);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t m = 12 + rng.index(10);
        const std::size_t pieces = 2 + rng.index(3);
        // distinct interior knots with clearly different slopes per piece
        std::vector<std::size_t> knots{0};
        std::size_t span = (m - 1) / pieces;
        for (std::size_t c = 1; c < pieces; ++c) knots.push_back(c * span);
        knots.push_back(m - 1);
        auto t = index_axis(m);
        std::vector<double> v(m, 0.0);
        double level = 0.0, slope = 1.0;
        for (std::size_t c = 1; c < knots.size(); ++c) {
            slope = -slope * (1.0 + rng.uniform(0.2, 0.8));  // alternate, never collinear
            for (std::size_t j = knots[c - 1]; j <= knots[c]; ++j)
                v[j] = level + slope * (t[j] - t[knots[c - 1]]);
            level = v[knots[c]];
        }
        auto fit = run_knot_dp(v, t, pieces);
        CHECK(fit.error < 1e-10);
        CHECK(fit.knots.knots() == knots);
    }
}

TEST_CASE("knot dp with one chord and against enumeration") {
    oracle::Rng rng(38);
    auto v = oracle::random_curve(rng, 10);
    auto t = index_axis(10);
    auto one = run_knot_dp(v, t, 1);
    CHECK(one.knots.knots() == std::vector<std::size_t>{0, 9});
    CHECK(oracle::rel_close(one.error, oracle::direct_interp_l2(v, t, 0, 10), 1e-9));

    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t m = 6 + rng.index(5);
        const std::size_t p = 1 + rng.index(3);
        auto rv = oracle::random_curve(rng, m);
        auto rt = index_axis(m);
        auto fit = run_knot_dp(rv, rt, p);
        std::vector<std::size_t> want_knots;
        const double want = oracle::enum_best_knots(rv, rt, p, &want_knots);
        CHECK(oracle::rel_close(fit.error, want, 1e-9));
    }
    CHECK_THROWS_AS(run_knot_dp(v, t, 10), DomainError);
}

TEST_CASE("fitting recovers hand parameters") {
    SampleGrid grid = SampleGrid::index_grid(2);
    std::vector<double> two{1.0, 3.0};
    Summary mean_fit = fit_summary(two, grid, Segmentation(2, {}), SegmentModel::ConstantL2);
    CHECK(mean_fit.levels()[0] == Catch::Approx(2.0));

    SampleGrid g3 = SampleGrid::index_grid(3);
    std::vector<double> med{0.0, 0.0, 10.0};
    Summary med_fit = fit_summary(med, g3, Segmentation(3, {}), SegmentModel::ConstantL1);
    CHECK(med_fit.levels()[0] == 0.0);

    oracle::Rng rng(39);
    const double slope = rng.uniform(-3, 3), icpt = rng.uniform(-3, 3);
    std::vector<double> line(8);
    auto t = index_axis(8);
    for (std::size_t j = 0; j < 8; ++j) line[j] = icpt + slope * t[j];
    Summary line_fit =
        fit_summary(line, SampleGrid::index_grid(8), Segmentation(8, {4}), SegmentModel::LineL2);
    for (const auto& c : line_fit.lines()) {
        CHECK(c.slope == Catch::Approx(slope).margin(1e-12));
        CHECK(c.intercept == Catch::Approx(icpt).margin(1e-12));
    }
}

TEST_CASE("set fits use the pooled median for L1 and the minimax level for max") {
    std::vector<double> vals{0, 0, 0, 0, 10, 10, 10, 10, 0, 0, 0, 0};
    CurveSet set(SampleGrid::index_grid(4), vals);
    std::vector<std::size_t> members{0, 1, 2};
    Segmentation whole(4, {});
    ModelSpec l1{SegmentModel::ConstantL1, SetAggregate::SumOverCurves};
    Summary s1 = fit_summary_set(set, members, whole, l1);
    CHECK(s1.levels()[0] == 0.0);  // pooled median of 8 zeros and 4 tens

    ModelSpec mx{SegmentModel::ConstantL2, SetAggregate::MaxOverCurves};
    Summary s2 = fit_summary_set(set, members, whole, mx);
    CHECK(s2.levels()[0] == Catch::Approx(5.0).margin(1e-9));
}
