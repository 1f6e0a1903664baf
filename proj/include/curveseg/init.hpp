#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "clustering.hpp"
#include "types.hpp"

namespace curveseg {

// Starting partitions for the clustering loop: Ward's hierarchical clustering
// (cut at the analyst's K) and a batch Self-Organizing Map on a rectangular
// grid, plus the bridges that turn either into an assignment vector.

struct DendrogramMerge {
    std::size_t left = 0;   // cluster ids: leaves 0..N-1, merge i creates id N+i
    std::size_t right = 0;
    double height = 0.0;    // increase in total within-class variance
    std::size_t size = 0;   // leaves under the merged cluster
};

struct Dendrogram {
    std::size_t leaves = 0;
    std::vector<DendrogramMerge> merges;    // N-1 entries, heights non-decreasing
    std::vector<std::size_t> leaf_order;    // left-to-right plotting order
};

// Ward linkage via the Lance-Williams update. Pair distances start at half the
// squared Euclidean distance, which equals the variance increase of merging
// two singletons; each merge picks the smallest pending increase
// (lexicographically smallest pair on ties).
inline Dendrogram ward_cluster(const CurveSet& set) {
    const std::size_t n = set.count();
    if (n < 2) throw DomainError("hierarchical clustering needs at least 2 curves");

    std::vector<double> dist(n * n, 0.0);
    auto d = [&dist, n](std::size_t a, std::size_t b) -> double& { return dist[a * n + b]; };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = 0.5 * grid_distance2(set.row(i), set.row(j));
            d(i, j) = v;
            d(j, i) = v;
        }

    std::vector<bool> active(n, true);
    std::vector<std::size_t> cluster_id(n), sizes(n, 1);
    std::iota(cluster_id.begin(), cluster_id.end(), 0);
    std::vector<std::vector<std::size_t>> children(n);  // slot -> leaf list in order

    Dendrogram out;
    out.leaves = n;
    out.merges.reserve(n - 1);
    for (std::size_t i = 0; i < n; ++i) children[i] = {i};

    for (std::size_t step = 0; step < n - 1; ++step) {
        std::size_t best_a = n, best_b = n;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < n; ++a) {
            if (!active[a]) continue;
            for (std::size_t b = a + 1; b < n; ++b) {
                if (!active[b]) continue;
                if (d(a, b) < best) {
                    best = d(a, b);
                    best_a = a;
                    best_b = b;
                }
            }
        }
        const std::size_t a = best_a, b = best_b;
        out.merges.push_back({cluster_id[a], cluster_id[b], best, sizes[a] + sizes[b]});

        const double na = static_cast<double>(sizes[a]);
        const double nb = static_cast<double>(sizes[b]);
        for (std::size_t c = 0; c < n; ++c) {
            if (!active[c] || c == a || c == b) continue;
            const double nc = static_cast<double>(sizes[c]);
            d(a, c) = d(c, a) = ((na + nc) * d(a, c) + (nb + nc) * d(b, c) - nc * d(a, b)) /
                                (na + nb + nc);
        }
        active[b] = false;
        sizes[a] += sizes[b];
        cluster_id[a] = n + step;
        children[a].insert(children[a].end(), children[b].begin(), children[b].end());
    }
    for (std::size_t i = 0; i < n; ++i)
        if (active[i]) out.leaf_order = children[i];
    return out;
}

// Heights of the final merges in merge order: the total within-class variance
// decrease when going from k+1 to k clusters, for the last `count` steps.
inline std::vector<double> ward_variance_decreases(const Dendrogram& dendro,
                                                   std::size_t count = 20) {
    const std::size_t n = dendro.merges.size();
    const std::size_t take = std::min(count, n);
    std::vector<double> out;
    out.reserve(take);
    for (std::size_t i = n - take; i < n; ++i) out.push_back(dendro.merges[i].height);
    return out;
}

// Cut the dendrogram into K clusters; labels are compacted to 0..K-1 in order
// of the smallest leaf index per cluster.
inline std::vector<std::size_t> partition_from(const Dendrogram& dendro, std::size_t k) {
    const std::size_t n = dendro.leaves;
    if (k == 0 || k > n) throw DomainError("cut count must be in [1, N]");
    std::vector<std::size_t> parent(2 * n - 1);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (std::size_t step = 0; step + k < n; ++step) {
        const auto& m = dendro.merges[step];
        const std::size_t id = n + step;
        parent[find(m.left)] = id;
        parent[find(m.right)] = id;
    }
    std::vector<std::size_t> label(2 * n - 1, n);
    std::vector<std::size_t> assignment(n);
    std::size_t next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t root = find(i);
        if (label[root] == n) label[root] = next++;
        assignment[i] = label[root];
    }
    if (next != k) throw InternalError("dendrogram cut produced the wrong cluster count");
    return assignment;
}

struct SomConfig {
    std::size_t rows = 1;
    std::size_t cols = 1;
    double initial_radius = -1.0;  // negative means max(rows, cols) / 2
    double final_radius = 0.5;
    std::size_t epochs = 30;
    std::uint64_t seed = 0;
    // optional explicit unit seeds; empty means seeded random curve draws
    std::vector<std::vector<double>> initial_prototypes;
};

struct SomGrid {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::vector<double>> prototypes;  // rows*cols entries, M values each
    std::vector<std::size_t> assignment;          // best matching unit per curve

    std::size_t units() const { return rows * cols; }
    std::pair<std::size_t, std::size_t> position(std::size_t u) const {
        return {u / cols, u % cols};
    }
    double grid_distance(std::size_t u, std::size_t v) const {
        const auto [ur, uc] = position(u);
        const auto [vr, vc] = position(v);
        const double dr = static_cast<double>(ur) - static_cast<double>(vr);
        const double dc = static_cast<double>(uc) - static_cast<double>(vc);
        return std::sqrt(dr * dr + dc * dc);
    }
};

// Batch SOM: alternate best-matching-unit assignment with neighborhood-weighted
// prototype averaging under a Gaussian kernel on the grid, radius decreasing
// linearly across epochs. Prototypes start at seeded-randomly drawn curves.
// A zero radius degenerates to a batch k-means step (empty units keep their
// prototype).
inline SomGrid batch_som(const CurveSet& set, const SomConfig& config) {
    const std::size_t units = config.rows * config.cols;
    if (units == 0) throw DomainError("SOM grid must be non-empty");
    if (units > set.count()) throw DomainError("more SOM units than curves");
    if (config.epochs == 0) throw DomainError("SOM needs at least one epoch");
    const std::size_t m = set.points();

    SomGrid grid;
    grid.rows = config.rows;
    grid.cols = config.cols;
    if (!config.initial_prototypes.empty()) {
        if (config.initial_prototypes.size() != units)
            throw DomainError("initial prototype count does not match the grid");
        for (const auto& p : config.initial_prototypes)
            if (p.size() != m) throw DomainError("initial prototype length does not match M");
        grid.prototypes = config.initial_prototypes;
    } else {
        grid.prototypes.resize(units);
        const auto perm = seeded_permutation(set.count(), config.seed);
        for (std::size_t u = 0; u < units; ++u) {
            auto row = set.row(perm[u]);
            grid.prototypes[u].assign(row.begin(), row.end());
        }
    }

    const double r0 = config.initial_radius >= 0.0
                          ? config.initial_radius
                          : 0.5 * static_cast<double>(std::max(config.rows, config.cols));
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const double frac = (config.epochs > 1)
                                ? static_cast<double>(epoch) /
                                      static_cast<double>(config.epochs - 1)
                                : 0.0;
        const double sigma = r0 + (config.final_radius - r0) * frac;
        grid.assignment = assign_to_values(set, grid.prototypes);

        std::vector<std::vector<double>> numer(units, std::vector<double>(m, 0.0));
        std::vector<double> denom(units, 0.0);
        for (std::size_t i = 0; i < set.count(); ++i) {
            const std::size_t bmu = grid.assignment[i];
            auto row = set.row(i);
            for (std::size_t u = 0; u < units; ++u) {
                double h;
                if (sigma > 1e-12) {
                    const double gd = grid.grid_distance(u, bmu);
                    h = std::exp(-gd * gd / (2.0 * sigma * sigma));
                } else {
                    h = (u == bmu) ? 1.0 : 0.0;
                }
                if (h == 0.0) continue;
                denom[u] += h;
                auto& acc = numer[u];
                for (std::size_t j = 0; j < m; ++j) acc[j] += h * row[j];
            }
        }
        for (std::size_t u = 0; u < units; ++u) {
            if (denom[u] <= 0.0) continue;  // uninfluenced unit keeps its prototype
            for (std::size_t j = 0; j < m; ++j) grid.prototypes[u][j] = numer[u][j] / denom[u];
        }
    }
    grid.assignment = assign_to_values(set, grid.prototypes);
    return grid;
}

// SOM units become clusters; empty units are dropped and labels compacted in
// unit order, so the returned cluster count can be below rows*cols.
struct SomPartition {
    std::vector<std::size_t> assignment;
    std::size_t clusters = 0;
    std::vector<std::size_t> unit_of_cluster;  // original unit index per cluster
};

inline SomPartition partition_from(const SomGrid& grid) {
    SomPartition out;
    std::vector<std::size_t> label(grid.units(), grid.units());
    out.assignment.resize(grid.assignment.size());
    for (std::size_t u = 0; u < grid.units(); ++u) {
        bool used = false;
        for (std::size_t b : grid.assignment)
            if (b == u) {
                used = true;
                break;
            }
        if (used) {
            label[u] = out.clusters++;
            out.unit_of_cluster.push_back(u);
        }
    }
    for (std::size_t i = 0; i < grid.assignment.size(); ++i)
        out.assignment[i] = label[grid.assignment[i]];
    return out;
}

// Mean grid distance between each curve's best and second-best matching units.
// Small values mean neighboring units code similar curves, the usual sign of a
// well-organized map.
inline double topology_statistic(const CurveSet& set, const SomGrid& grid) {
    if (grid.units() < 2) throw DomainError("topology statistic needs at least 2 units");
    double total = 0.0;
    for (std::size_t i = 0; i < set.count(); ++i) {
        auto row = set.row(i);
        std::size_t b1 = 0, b2 = 1;
        double d1 = grid_distance2(row, grid.prototypes[0]);
        double d2 = grid_distance2(row, grid.prototypes[1]);
        if (d2 < d1) {
            std::swap(b1, b2);
            std::swap(d1, d2);
        }
        for (std::size_t u = 2; u < grid.units(); ++u) {
            const double d = grid_distance2(row, grid.prototypes[u]);
            if (d < d1) {
                b2 = b1;
                d2 = d1;
                b1 = u;
                d1 = d;
            } else if (d < d2) {
                b2 = u;
                d2 = d;
            }
        }
        total += grid.grid_distance(b1, b2);
    }
    return total / static_cast<double>(set.count());
}

}  // namespace curveseg
