#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "cost.hpp"
#include "parallel.hpp"
#include "segmentation.hpp"
#include "types.hpp"

namespace curveseg {

// Distributes the global budget of P segments over K clusters exactly:
//   S(l, p) = min_{1 <= u <= p-l+1} S(l-1, p-u) + R_l(u),
// with the same increasing-scan strict-improvement tie-break as the
// segmentation DP (smallest feasible u wins).

// R[k][p-1] = optimal segmentation error of cluster k using p segments.
using CostMatrix = std::vector<std::vector<double>>;

struct AllocationResult {
    std::vector<std::size_t> allocation;  // K entries, each >= 1, summing to P
    double cost = 0.0;
};

inline AllocationResult allocate(const CostMatrix& r, std::size_t total_segments,
                                 std::optional<std::size_t> cap = std::nullopt) {
    const std::size_t k_count = r.size();
    const std::size_t p_total = total_segments;
    if (k_count == 0) throw DomainError("allocation needs at least one cluster");
    if (p_total < k_count) throw DomainError("budget smaller than the cluster count");
    std::size_t u_max = r[0].size();
    for (const auto& row : r)
        if (row.size() != u_max) throw DomainError("ragged cost matrix");
    if (cap) {
        if (*cap < 1) throw DomainError("per-cluster cap must be at least 1");
        u_max = std::min(u_max, *cap);
    }
    if (u_max * k_count < p_total)
        throw DomainError("per-cluster cap makes the budget infeasible");

    constexpr double inf = std::numeric_limits<double>::infinity();
    // s[l][p], winner[l][p]: best error of clusters 0..l-1 using exactly p segments
    std::vector<std::vector<double>> s(k_count + 1, std::vector<double>(p_total + 1, inf));
    std::vector<std::vector<std::size_t>> winner(k_count + 1,
                                                 std::vector<std::size_t>(p_total + 1, 0));
    for (std::size_t p = 1; p <= std::min(u_max, p_total); ++p) {
        s[1][p] = r[0][p - 1];
        winner[1][p] = p;
    }
    for (std::size_t l = 2; l <= k_count; ++l) {
        for (std::size_t p = l; p <= p_total; ++p) {
            double best = inf;
            std::size_t best_u = 0;
            const std::size_t hi = std::min(u_max, p - l + 1);
            for (std::size_t u = 1; u <= hi; ++u) {
                const double tail = s[l - 1][p - u];
                if (tail == inf) continue;
                const double v = tail + r[l - 1][u - 1];
                if (v < best) {
                    best = v;
                    best_u = u;
                }
            }
            s[l][p] = best;
            winner[l][p] = best_u;
        }
    }
    if (s[k_count][p_total] == inf) throw DomainError("no feasible allocation");

    AllocationResult out;
    out.cost = s[k_count][p_total];
    out.allocation.assign(k_count, 0);
    std::size_t remaining = p_total;
    for (std::size_t l = k_count; l >= 1; --l) {
        const std::size_t u = winner[l][remaining];
        if (u == 0) throw InternalError("allocation backtrack hit an empty entry");
        out.allocation[l - 1] = u;
        remaining -= u;
    }
    if (remaining != 0) throw InternalError("allocation does not exhaust the budget");
    return out;
}

// Per-cluster optimal-error table: one segmentation DP per cluster, run on the
// cluster's set cost. Returns the full tables too so callers can backtrack at
// the allocated segment count without rerunning.
struct ClusterTables {
    CostMatrix r;
    std::vector<DPTables> tables;
};

inline ClusterTables build_cluster_tables(const CurveSet& set,
                                          const std::vector<std::vector<std::size_t>>& clusters,
                                          const ModelSpec& spec, std::size_t max_segments,
                                          SegmentAggregate aggregate = SegmentAggregate::Sum,
                                          std::size_t threads = 1) {
    validate_model_spec(spec);
    const std::size_t m = set.points();
    const std::size_t len = min_segment_length(spec.model);
    if (max_segments * len > m) throw DomainError("segment budget infeasible for this model");
    ClusterTables out;
    out.tables.resize(clusters.size());
    out.r.resize(clusters.size());
    parallel_for(
        clusters.size(),
        [&](std::size_t k) {
            if (clusters[k].empty()) throw DomainError("empty cluster");
            SegmentCostFn cost = make_set_cost(set, clusters[k], spec);
            out.tables[k] = run_dp(cost, m, max_segments, aggregate, len);
            auto& row = out.r[k];
            row.resize(max_segments);
            for (std::size_t p = 1; p <= max_segments; ++p) row[p - 1] = out.tables[k].best(p);
        },
        threads);
    return out;
}

inline CostMatrix build_R(const CurveSet& set,
                          const std::vector<std::vector<std::size_t>>& clusters,
                          const ModelSpec& spec, std::size_t max_segments,
                          SegmentAggregate aggregate = SegmentAggregate::Sum) {
    return build_cluster_tables(set, clusters, spec, max_segments, aggregate).r;
}

}  // namespace curveseg
