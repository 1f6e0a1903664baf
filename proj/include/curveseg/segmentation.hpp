#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "cost.hpp"
#include "types.hpp"

namespace curveseg {

// Exact optimal segmentation by dynamic programming over suffixes.
// cost[j-1][k] is the best error of splitting [k, M) into j segments and
// split[j-1][k] the end (exclusive) of the first of those segments. Scanning
// candidate ends in increasing order and replacing only on strict improvement
// makes the optimum unique and favors short leading segments, which the
// clustering loop needs for convergence.
struct DPTables {
    std::size_t num_points = 0;
    std::size_t max_segments = 0;
    SegmentAggregate aggregate = SegmentAggregate::Sum;
    std::size_t min_seg_len = 1;
    std::vector<std::vector<double>> cost;
    std::vector<std::vector<std::size_t>> split;

    // F(1, p) in suffix terms: best error over the whole range with p segments.
    double best(std::size_t p) const { return cost[p - 1][0]; }
};

template <typename CostFn>
DPTables run_dp(CostFn&& q, std::size_t num_points, std::size_t max_segments,
                SegmentAggregate aggregate = SegmentAggregate::Sum,
                std::size_t min_seg_len = 1) {
    const std::size_t m = num_points, p_max = max_segments, len = min_seg_len;
    if (p_max == 0) throw DomainError("need at least one segment");
    if (p_max > m) throw DomainError("more segments than grid points");
    if (p_max * len > m) throw DomainError("segment budget infeasible for this model");

    constexpr double inf = std::numeric_limits<double>::infinity();
    DPTables tables;
    tables.num_points = m;
    tables.max_segments = p_max;
    tables.aggregate = aggregate;
    tables.min_seg_len = len;
    tables.cost.assign(p_max, std::vector<double>(m, inf));
    tables.split.assign(p_max, std::vector<std::size_t>(m, 0));

    auto checked = [&q](std::size_t first, std::size_t last) {
        const double c = q(first, last);
        if (!std::isfinite(c)) throw InternalError("non-finite segment cost");
        return c;
    };

    for (std::size_t k = 0; k + len <= m; ++k) {
        tables.cost[0][k] = checked(k, m);
        tables.split[0][k] = m;
    }
    for (std::size_t j = 2; j <= p_max; ++j) {
        auto& layer = tables.cost[j - 1];
        auto& wins = tables.split[j - 1];
        const auto& prev = tables.cost[j - 2];
        // suffix [k, M) must fit j segments of at least `len` points
        for (std::size_t k = 0; k + j * len <= m; ++k) {
            double best = inf;
            std::size_t best_end = 0;
            const std::size_t lo = k + len, hi = m - (j - 1) * len;
            for (std::size_t e = lo; e <= hi; ++e) {
                const double head = checked(k, e);
                const double tail = prev[e];
                const double v =
                    (aggregate == SegmentAggregate::Sum) ? head + tail : std::max(head, tail);
                if (v < best) {
                    best = v;
                    best_end = e;
                }
            }
            layer[k] = best;
            wins[k] = best_end;
        }
    }
    return tables;
}

inline Segmentation backtrack(const DPTables& tables, std::size_t p) {
    if (p == 0 || p > tables.max_segments) throw DomainError("segment count outside the tables");
    std::vector<std::size_t> cuts;
    cuts.reserve(p - 1);
    std::size_t k = 0;
    for (std::size_t j = p; j >= 1; --j) {
        const std::size_t e = tables.split[j - 1][k];
        if (e == 0) throw InternalError("backtrack hit an unreachable table entry");
        if (j > 1) cuts.push_back(e);
        k = e;
    }
    return Segmentation(tables.num_points, std::move(cuts));
}

// DP over interpolation knots. Unlike the partition DP, adjacent segments
// share their boundary point: cost[j-1][k] is the best error of covering
// [k, M-1] with j chords whose first knot is k.
struct KnotTables {
    std::size_t num_points = 0;
    std::size_t max_segments = 0;
    std::vector<std::vector<double>> cost;
    std::vector<std::vector<std::size_t>> next;

    double best(std::size_t p) const { return cost[p - 1][0]; }
};

// q(a, b) must give the chord error over inclusive knot indices a < b.
template <typename ChordCostFn>
KnotTables run_knot_tables(ChordCostFn&& q, std::size_t num_points, std::size_t max_segments) {
    const std::size_t m = num_points, p_max = max_segments;
    if (p_max == 0) throw DomainError("need at least one chord");
    if (p_max >= m) throw DomainError("interpolation needs fewer segments than grid points");

    constexpr double inf = std::numeric_limits<double>::infinity();
    KnotTables tables;
    tables.num_points = m;
    tables.max_segments = p_max;
    tables.cost.assign(p_max, std::vector<double>(m, inf));
    tables.next.assign(p_max, std::vector<std::size_t>(m, 0));

    auto checked = [&q](std::size_t a, std::size_t b) {
        const double c = q(a, b);
        if (!std::isfinite(c)) throw InternalError("non-finite chord cost");
        return c;
    };

    for (std::size_t k = 0; k + 1 < m; ++k) {
        tables.cost[0][k] = checked(k, m - 1);
        tables.next[0][k] = m - 1;
    }
    for (std::size_t j = 2; j <= p_max; ++j) {
        for (std::size_t k = 0; k + j < m; ++k) {
            double best = inf;
            std::size_t best_next = 0;
            const std::size_t hi = (m - 1) - (j - 1);
            for (std::size_t nxt = k + 1; nxt <= hi; ++nxt) {
                const double v = checked(k, nxt) + tables.cost[j - 2][nxt];
                if (v < best) {
                    best = v;
                    best_next = nxt;
                }
            }
            tables.cost[j - 1][k] = best;
            tables.next[j - 1][k] = best_next;
        }
    }
    return tables;
}

inline KnotSet backtrack_knots(const KnotTables& tables, std::size_t p) {
    if (p == 0 || p > tables.max_segments) throw DomainError("segment count outside the tables");
    std::vector<std::size_t> knots;
    knots.reserve(p + 1);
    std::size_t k = 0;
    knots.push_back(k);
    for (std::size_t j = p; j >= 1; --j) {
        k = tables.next[j - 1][k];
        knots.push_back(k);
    }
    return KnotSet(tables.num_points, std::move(knots));
}

struct KnotFit {
    KnotSet knots;
    double error = 0.0;
};

inline KnotFit run_knot_dp(std::span<const double> values, std::span<const double> t,
                           std::size_t segments) {
    const PrefixStats stats = build_prefix_stats(values, t);
    auto chord = [&](std::size_t a, std::size_t b) {
        return cost_interp_l2(stats, a, b + 1);
    };
    KnotTables tables = run_knot_tables(chord, values.size(), segments);
    return KnotFit{backtrack_knots(tables, segments), tables.best(segments)};
}

// -- optimal per-segment parameters ------------------------------------------

inline Summary fit_summary(std::span<const double> values, const SampleGrid& grid,
                           const Segmentation& seg, SegmentModel kind) {
    const auto t = grid.points();
    const auto ranges = seg.segments();
    switch (kind) {
        case SegmentModel::ConstantL2: {
            std::vector<double> levels;
            levels.reserve(ranges.size());
            for (const auto& [b, e] : ranges) {
                double sum = 0.0;
                for (std::size_t j = b; j < e; ++j) sum += values[j];
                levels.push_back(sum / static_cast<double>(e - b));
            }
            return Summary::piecewise_constant(kind, grid, seg, std::move(levels));
        }
        case SegmentModel::ConstantL1: {
            std::vector<double> levels;
            levels.reserve(ranges.size());
            for (const auto& [b, e] : ranges) levels.push_back(segment_median(values, b, e));
            return Summary::piecewise_constant(kind, grid, seg, std::move(levels));
        }
        case SegmentModel::LineL2: {
            std::vector<LineCoef> lines;
            lines.reserve(ranges.size());
            for (const auto& [b, e] : ranges) lines.push_back(fit_line(values, t, b, e));
            return Summary::piecewise_line(grid, seg, std::move(lines));
        }
        case SegmentModel::InterpL2:
            throw DomainError("the interpolation model is fitted from knots");
    }
    throw DomainError("unknown segment model");
}

inline Summary fit_summary(std::span<const double> values, const SampleGrid& grid,
                           const KnotSet& knots) {
    std::vector<double> kv;
    kv.reserve(knots.knots().size());
    for (std::size_t k : knots.knots()) kv.push_back(values[k]);
    return Summary::interpolation(grid, knots, std::move(kv));
}

// Set fits. Sum-of-L2 kinds reduce to the member-mean curve; L1 takes pooled
// medians; max-over-curves solves the minimax level per segment.
inline Summary fit_summary_set(const CurveSet& set, std::span<const std::size_t> members,
                               const Segmentation& seg, const ModelSpec& spec,
                               const SetStats* stats = nullptr) {
    validate_model_spec(spec);
    if (spec.set_aggregate == SetAggregate::MaxOverCurves) {
        std::vector<double> levels;
        levels.reserve(seg.segment_count());
        for (const auto& [b, e] : seg.segments())
            levels.push_back(solve_set_max(set, members, b, e).level);
        return Summary::piecewise_constant(SegmentModel::ConstantL2, set.grid(), seg,
                                           std::move(levels));
    }
    if (spec.model == SegmentModel::ConstantL1) {
        std::vector<double> levels;
        levels.reserve(seg.segment_count());
        for (const auto& [b, e] : seg.segments())
            levels.push_back(pooled_median(set, members, b, e));
        return Summary::piecewise_constant(SegmentModel::ConstantL1, set.grid(), seg,
                                           std::move(levels));
    }
    SetStats local;
    if (!stats) {
        local = build_set_stats(set, members);
        stats = &local;
    }
    return fit_summary(stats->mean, set.grid(), seg, spec.model);
}

inline Summary fit_summary_set(const CurveSet& set, std::span<const std::size_t> members,
                               const KnotSet& knots, const SetStats* stats = nullptr) {
    SetStats local;
    if (!stats) {
        local = build_set_stats(set, members);
        stats = &local;
    }
    return fit_summary(stats->mean, set.grid(), knots);
}

}  // namespace curveseg
