#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "allocation.hpp"
#include "cost.hpp"
#include "parallel.hpp"
#include "segmentation.hpp"
#include "types.hpp"

namespace curveseg {

enum class ClusterMode { Uniform, OptimalAllocation, PlainKMeans };
enum class InitKind { Random, GivenPartition };

struct ClusteringConfig {
    std::size_t clusters = 2;        // K
    std::size_t total_segments = 4;  // P
    ModelSpec model;
    ClusterMode mode = ClusterMode::Uniform;
    SegmentAggregate aggregate = SegmentAggregate::Sum;
    std::optional<std::size_t> cap;  // per-cluster maximum segment count
    std::size_t max_iter = 100;
    std::uint64_t seed = 0;
    InitKind init = InitKind::Random;
    std::vector<std::size_t> initial_assignment;
    std::size_t threads = 1;
};

// Deterministic Fisher-Yates; the standard shuffle leaves the draw sequence to
// the library implementation, which would tie results to a particular stdlib.
inline std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::mt19937_64 rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

// Shuffle then deal round-robin; every cluster is nonempty when k <= n.
inline std::vector<std::size_t> random_partition(std::size_t n, std::size_t k,
                                                 std::uint64_t seed) {
    if (k == 0 || k > n) throw DomainError("cluster count must be in [1, N]");
    const auto perm = seeded_permutation(n, seed);
    std::vector<std::size_t> assignment(n);
    for (std::size_t pos = 0; pos < n; ++pos) assignment[perm[pos]] = pos % k;
    return assignment;
}

inline std::vector<std::vector<std::size_t>> group_members(
    std::span<const std::size_t> assignment, std::size_t k) {
    std::vector<std::vector<std::size_t>> members(k);
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        if (assignment[i] >= k) throw DomainError("assignment index out of range");
        members[assignment[i]].push_back(i);
    }
    return members;
}

inline double grid_distance2(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double diff = a[j] - b[j];
        d += diff * diff;
    }
    return d;
}

// Ties go to the smallest cluster index (strict improvement scan).
inline std::size_t nearest_prototype(std::span<const double> curve,
                                     const std::vector<std::vector<double>>& prototypes) {
    std::size_t best = 0;
    double best_d = grid_distance2(curve, prototypes[0]);
    for (std::size_t k = 1; k < prototypes.size(); ++k) {
        const double d = grid_distance2(curve, prototypes[k]);
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    return best;
}

inline std::vector<std::size_t> assign_to_values(
    const CurveSet& set, const std::vector<std::vector<double>>& prototypes) {
    std::vector<std::size_t> assignment(set.count());
    for (std::size_t i = 0; i < set.count(); ++i)
        assignment[i] = nearest_prototype(set.row(i), prototypes);
    return assignment;
}

// Curves go to the summary minimizing the squared L2 grid distance.
inline std::vector<std::size_t> assign_step(const CurveSet& set,
                                            const std::vector<Summary>& summaries) {
    std::vector<std::vector<double>> values;
    values.reserve(summaries.size());
    for (const auto& s : summaries) values.push_back(s.values_on_grid());
    return assign_to_values(set, values);
}

// An emptied cluster is reseeded with the curve farthest from its current
// prototype, drawn from clusters that can spare one; smallest index on ties.
inline void repair_empty_clusters(const CurveSet& set,
                                  const std::vector<std::vector<double>>& prototypes,
                                  std::vector<std::size_t>& assignment) {
    const std::size_t k_count = prototypes.size();
    std::vector<std::size_t> sizes(k_count, 0);
    for (std::size_t c : assignment) ++sizes[c];
    for (std::size_t k = 0; k < k_count; ++k) {
        if (sizes[k] > 0) continue;
        std::size_t pick = set.count();
        double pick_d = -1.0;
        for (std::size_t i = 0; i < set.count(); ++i) {
            if (sizes[assignment[i]] < 2) continue;
            const double d = grid_distance2(set.row(i), prototypes[k]);
            if (d > pick_d) {
                pick_d = d;
                pick = i;
            }
        }
        if (pick == set.count()) throw InternalError("no donor curve for an empty cluster");
        --sizes[assignment[pick]];
        assignment[pick] = k;
        sizes[k] = 1;
    }
}

namespace detail {

// Per-cluster segmentation machinery for one iteration. The interpolation
// model runs the knot DP on the member-mean curve; its segment-count error is
// members * (mean-curve interpolation error) + the segmentation-independent
// residual. Everything else runs the partition DP on the set cost.
struct ClusterFit {
    std::shared_ptr<SetStats> stats;
    std::optional<DPTables> dp;
    std::optional<KnotTables> knots;
    double residual_total = 0.0;
    std::size_t members = 0;
    std::vector<double> r;  // R_k(p) for p = 1..max_segments

    Summary summarize(const CurveSet& set, std::span<const std::size_t> member_idx,
                      std::size_t p, const ModelSpec& spec) const {
        if (knots)
            return fit_summary_set(set, member_idx, backtrack_knots(*knots, p), stats.get());
        return fit_summary_set(set, member_idx, backtrack(*dp, p), spec, stats.get());
    }
};

inline ClusterFit build_cluster_fit(const CurveSet& set, const std::vector<std::size_t>& members,
                                    const ModelSpec& spec, std::size_t max_segments,
                                    SegmentAggregate aggregate) {
    validate_model_spec(spec);
    if (members.empty()) throw DomainError("empty cluster");
    ClusterFit fit;
    fit.members = members.size();
    const std::size_t m = set.points();
    if (spec.model == SegmentModel::InterpL2) {
        if (aggregate != SegmentAggregate::Sum)
            throw DomainError("the interpolation model supports only sum aggregation");
        fit.stats = std::make_shared<SetStats>(build_set_stats(set, members));
        fit.residual_total = set_residual(*fit.stats, 0, m);
        const SetStats& st = *fit.stats;
        auto chord = [&st](std::size_t a, std::size_t b) {
            return cost_interp_l2(st.mean_stats, a, b + 1);
        };
        fit.knots = run_knot_tables(chord, m, max_segments);
        fit.r.resize(max_segments);
        for (std::size_t p = 1; p <= max_segments; ++p)
            fit.r[p - 1] = static_cast<double>(fit.members) * fit.knots->best(p) +
                           fit.residual_total;
        return fit;
    }
    SegmentCostFn cost;
    if (spec.set_aggregate == SetAggregate::SumOverCurves &&
        spec.model != SegmentModel::ConstantL1) {
        fit.stats = std::make_shared<SetStats>(build_set_stats(set, members));
        const SetStats& st = *fit.stats;
        cost = [&st, kind = spec.model](std::size_t first, std::size_t last) {
            return cost_set_sum(st, first, last, kind);
        };
    } else {
        cost = make_set_cost(set, members, spec);
    }
    fit.dp = run_dp(cost, m, max_segments, aggregate, min_segment_length(spec.model));
    fit.r.resize(max_segments);
    for (std::size_t p = 1; p <= max_segments; ++p) fit.r[p - 1] = fit.dp->best(p);
    return fit;
}

// Largest per-cluster segment count the model can use on an M-point grid.
inline std::size_t model_max_segments(const ModelSpec& spec, std::size_t m) {
    return spec.model == SegmentModel::InterpL2 ? m - 1 : m;
}

struct FittedPartition {
    std::vector<Summary> summaries;
    std::vector<std::vector<double>> values;
    std::vector<std::size_t> allocation;
};

inline FittedPartition fit_partition(const CurveSet& set,
                                     const std::vector<std::vector<std::size_t>>& members,
                                     const ClusteringConfig& config) {
    const std::size_t k_count = members.size();
    const std::size_t p_total = config.total_segments;
    const std::size_t model_cap = model_max_segments(config.model, set.points());
    FittedPartition out;
    out.summaries.reserve(k_count);
    out.values.reserve(k_count);

    std::size_t per_cluster_max;
    if (config.mode == ClusterMode::Uniform) {
        per_cluster_max = p_total / k_count;
    } else {
        per_cluster_max = std::min(p_total - k_count + 1, model_cap);
        if (config.cap) per_cluster_max = std::min(per_cluster_max, *config.cap);
    }
    if (per_cluster_max == 0 || per_cluster_max > model_cap)
        throw DomainError("segment budget infeasible for this model and grid");

    std::vector<ClusterFit> fits(k_count);
    parallel_for(
        k_count,
        [&](std::size_t k) {
            fits[k] = build_cluster_fit(set, members[k], config.model, per_cluster_max,
                                        config.aggregate);
        },
        config.threads);

    if (config.mode == ClusterMode::Uniform) {
        out.allocation.assign(k_count, per_cluster_max);
    } else {
        CostMatrix r(k_count);
        for (std::size_t k = 0; k < k_count; ++k) r[k] = fits[k].r;
        out.allocation = allocate(r, p_total, config.cap).allocation;
    }
    for (std::size_t k = 0; k < k_count; ++k) {
        out.summaries.push_back(
            fits[k].summarize(set, members[k], out.allocation[k], config.model));
        out.values.push_back(out.summaries.back().values_on_grid());
    }
    return out;
}

// E recomputed directly from the data and the fitted prototypes, not from any
// DP table. Sum aggregation totals pointwise losses; max-over-curves totals
// the per-segment worst member.
inline double direct_error(const CurveSet& set,
                           const std::vector<std::vector<std::size_t>>& members,
                           const std::vector<Summary>& summaries,
                           const std::vector<std::vector<double>>& values,
                           const ModelSpec& spec) {
    double total = 0.0;
    if (spec.set_aggregate == SetAggregate::MaxOverCurves) {
        for (std::size_t k = 0; k < members.size(); ++k) {
            const auto segs = summaries[k].segmentation()->segments();
            for (const auto& [b, e] : segs) {
                double worst = 0.0;
                for (std::size_t i : members[k]) {
                    auto row = set.row(i);
                    double d = 0.0;
                    for (std::size_t j = b; j < e; ++j) {
                        const double diff = row[j] - values[k][j];
                        d += diff * diff;
                    }
                    worst = std::max(worst, d);
                }
                total += worst;
            }
        }
        return total;
    }
    const bool l1 = spec.model == SegmentModel::ConstantL1;
    for (std::size_t k = 0; k < members.size(); ++k) {
        for (std::size_t i : members[k]) {
            auto row = set.row(i);
            if (l1) {
                for (std::size_t j = 0; j < row.size(); ++j)
                    total += std::abs(row[j] - values[k][j]);
            } else {
                total += grid_distance2(row, values[k]);
            }
        }
    }
    return total;
}

inline void validate_config(const CurveSet& set, const ClusteringConfig& config) {
    validate_model_spec(config.model);
    if (config.clusters == 0 || config.clusters > set.count())
        throw DomainError("cluster count must be in [1, N]");
    if (config.total_segments < config.clusters)
        throw DomainError("segment budget must provide at least one segment per cluster");
    if (config.mode == ClusterMode::Uniform &&
        config.total_segments % config.clusters != 0)
        throw DomainError("uniform mode requires the cluster count to divide the budget");
    if (config.max_iter == 0) throw DomainError("max_iter must be positive");
    if (config.init == InitKind::GivenPartition) {
        if (config.initial_assignment.size() != set.count())
            throw DomainError("initial assignment size does not match the curve count");
        std::vector<std::size_t> sizes(config.clusters, 0);
        for (std::size_t c : config.initial_assignment) {
            if (c >= config.clusters) throw DomainError("initial assignment index out of range");
            ++sizes[c];
        }
        for (std::size_t s : sizes)
            if (s == 0) throw DomainError("initial partition has an empty cluster");
    }
}

inline ClusterState alternate(const CurveSet& set, const ClusteringConfig& config) {
    validate_config(set, config);
    std::vector<std::size_t> assignment =
        (config.init == InitKind::GivenPartition)
            ? config.initial_assignment
            : random_partition(set.count(), config.clusters, config.seed);

    ClusterState state;
    state.model = config.model;
    for (std::size_t iter = 1; iter <= config.max_iter; ++iter) {
        auto members = group_members(assignment, config.clusters);
        FittedPartition fitted = fit_partition(set, members, config);
        const double e = direct_error(set, members, fitted.summaries, fitted.values, config.model);
        state.trace.push_back(e);
        state.iterations = iter;

        std::vector<std::size_t> next = assign_to_values(set, fitted.values);
        repair_empty_clusters(set, fitted.values, next);
        // Fits are pure functions of the partition, so an unchanged partition
        // reproduces the same allocation and summaries; checking the partition
        // is the full stability test.
        const bool stable = (next == assignment);
        if (stable || iter == config.max_iter) {
            state.assignment = std::move(assignment);
            state.allocation = std::move(fitted.allocation);
            state.summaries = std::move(fitted.summaries);
            state.total_error = e;
            return state;
        }
        assignment = std::move(next);
    }
    throw InternalError("clustering loop exited without a result");
}

}  // namespace detail

// Algorithm with a uniform split of the budget: every cluster gets P/K segments.
inline ClusterState cluster_uniform(const CurveSet& set, const ClusteringConfig& config) {
    ClusteringConfig c = config;
    c.mode = ClusterMode::Uniform;
    return detail::alternate(set, c);
}

// Alternating minimization with the allocation DP choosing each cluster's
// segment count every iteration.
inline ClusterState cluster_optimal(const CurveSet& set, const ClusteringConfig& config) {
    ClusteringConfig c = config;
    c.mode = ClusterMode::OptimalAllocation;
    return detail::alternate(set, c);
}

struct KMeansResult {
    std::vector<std::size_t> assignment;
    std::vector<std::vector<double>> prototypes;
    std::size_t iterations = 0;
    std::vector<double> trace;
    double total_error = 0.0;
};

// Standard Lloyd iteration on the M-vector representation, sharing the
// assignment, tie-break and empty-cluster rules of the constrained loop.
inline KMeansResult kmeans(const CurveSet& set, std::size_t k, std::uint64_t seed,
                           std::size_t max_iter = 100,
                           const std::vector<std::size_t>* given = nullptr) {
    if (k == 0 || k > set.count()) throw DomainError("cluster count must be in [1, N]");
    std::vector<std::size_t> assignment =
        given ? *given : random_partition(set.count(), k, seed);
    if (given && given->size() != set.count())
        throw DomainError("initial assignment size does not match the curve count");

    KMeansResult result;
    for (std::size_t iter = 1; iter <= max_iter; ++iter) {
        auto members = group_members(assignment, k);
        std::vector<std::vector<double>> prototypes(k);
        for (std::size_t c = 0; c < k; ++c) {
            if (members[c].empty()) throw DomainError("empty cluster in k-means");
            prototypes[c] = build_set_stats(set, members[c]).mean;
        }
        double e = 0.0;
        for (std::size_t c = 0; c < k; ++c)
            for (std::size_t i : members[c]) e += grid_distance2(set.row(i), prototypes[c]);
        result.trace.push_back(e);
        result.iterations = iter;

        std::vector<std::size_t> next = assign_to_values(set, prototypes);
        repair_empty_clusters(set, prototypes, next);
        const bool stable = (next == assignment);
        if (stable || iter == max_iter) {
            result.assignment = std::move(assignment);
            result.prototypes = std::move(prototypes);
            result.total_error = e;
            return result;
        }
        assignment = std::move(next);
    }
    throw InternalError("k-means loop exited without a result");
}

// One fit of a fixed partition under the budget (no alternation): the fast
// baseline of summarizing an existing clustering.
inline ClusterState summarize_partition(const CurveSet& set,
                                        const std::vector<std::size_t>& assignment,
                                        const ClusteringConfig& config) {
    ClusteringConfig c = config;
    c.init = InitKind::GivenPartition;
    c.initial_assignment = assignment;
    if (c.mode == ClusterMode::PlainKMeans) c.mode = ClusterMode::OptimalAllocation;
    detail::validate_config(set, c);
    auto members = group_members(assignment, c.clusters);
    detail::FittedPartition fitted = detail::fit_partition(set, members, c);
    ClusterState state;
    state.model = c.model;
    state.assignment = assignment;
    state.allocation = std::move(fitted.allocation);
    state.total_error = detail::direct_error(set, members, fitted.summaries, fitted.values, c.model);
    state.summaries = std::move(fitted.summaries);
    state.iterations = 0;
    state.trace = {state.total_error};
    return state;
}

struct TwoPhaseResult {
    KMeansResult phase1;
    double phase1_error = 0.0;  // E of summarizing the k-means partition as-is
    ClusterState state;
};

// K-means first, then the constrained loop seeded with its partition. With
// mode PlainKMeans the run stops after summarizing the k-means clusters once.
inline TwoPhaseResult two_phase(const CurveSet& set, const ClusteringConfig& config) {
    detail::validate_config(set, config);
    TwoPhaseResult out;
    out.phase1 = kmeans(set, config.clusters, config.seed, config.max_iter,
                        config.init == InitKind::GivenPartition ? &config.initial_assignment
                                                                : nullptr);
    ClusteringConfig phase2 = config;
    phase2.init = InitKind::GivenPartition;
    phase2.initial_assignment = out.phase1.assignment;
    switch (config.mode) {
        case ClusterMode::Uniform:
            out.state = cluster_uniform(set, phase2);
            break;
        case ClusterMode::OptimalAllocation:
            out.state = cluster_optimal(set, phase2);
            break;
        case ClusterMode::PlainKMeans:
            out.state = summarize_partition(set, out.phase1.assignment, phase2);
            break;
    }
    out.phase1_error = out.state.trace.front();
    return out;
}

// E per the objective, recomputed from the data and the state's prototypes.
inline double global_error(const CurveSet& set, const ClusterState& state) {
    auto members = group_members(state.assignment, state.summaries.size());
    std::vector<std::vector<double>> values;
    values.reserve(state.summaries.size());
    for (const auto& s : state.summaries) values.push_back(s.values_on_grid());
    return detail::direct_error(set, members, state.summaries, values, state.model);
}

// Total within-curve variability: the denominator of the relative error.
inline double total_internal_variability(const CurveSet& set) {
    double denom = 0.0;
    for (std::size_t i = 0; i < set.count(); ++i) {
        auto row = set.row(i);
        double mean = 0.0;
        for (double v : row) mean += v;
        mean /= static_cast<double>(row.size());
        for (double v : row) denom += (v - mean) * (v - mean);
    }
    return denom;
}

inline double relative_error(const CurveSet& set, double total_error) {
    const double denom = total_internal_variability(set);
    if (denom == 0.0) throw DomainError("relative error undefined: all curves are constant");
    return total_error / denom;
}

inline double relative_error(const CurveSet& set, const ClusterState& state) {
    return relative_error(set, global_error(set, state));
}

}  // namespace curveseg
