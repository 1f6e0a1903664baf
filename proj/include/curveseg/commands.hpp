#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "clustering.hpp"
#include "init.hpp"
#include "io.hpp"
#include "parallel.hpp"

namespace curveseg {

// The command implementations behind the CLI. Each run_* function reads the
// dataset, computes, and writes its artifacts under output_dir; errors
// propagate as ParseError / DomainError / InternalError for the CLI to map to
// exit codes.

namespace detail {

inline void ensure_dir(const std::string& dir) {
    std::filesystem::create_directories(dir);
}

inline std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

inline json csv_options_json(const CsvOptions& csv) {
    return json{{"header_row", csv.header_row},
                {"id_column", csv.id_column},
                {"transpose", csv.transpose}};
}

inline json dataset_json(const std::string& path, const CurveSet& set) {
    return json{{"path", path},
                {"rows", set.count()},
                {"cols", set.points()},
                {"fingerprint", fingerprint_hex(set)}};
}

inline std::string assignment_csv(const CurveSet& set, const std::vector<std::size_t>& assignment) {
    std::string out = "id,cluster\n";
    for (std::size_t i = 0; i < set.count(); ++i) {
        out += set.ids()[i];
        out += ',';
        out += std::to_string(assignment[i]);
        out += '\n';
    }
    return out;
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

inline SegmentAggregate seg_aggregate_from_string(const std::string& s) {
    if (s == "sum") return SegmentAggregate::Sum;
    if (s == "max") return SegmentAggregate::Max;
    throw DomainError("unknown segment aggregate '" + s + "'");
}

inline SetAggregate set_aggregate_from_string(const std::string& s) {
    if (s == "sum") return SetAggregate::SumOverCurves;
    if (s == "max") return SetAggregate::MaxOverCurves;
    throw DomainError("unknown curve aggregate '" + s + "'");
}

}  // namespace detail

// -- segment: optimal segmentation of a single curve ---------------------------

struct SegmentOptions {
    std::string input;
    std::string output_dir = "out";
    CsvOptions csv;
    std::string model = "const-l2";
    std::string seg_aggregate = "sum";
    std::size_t segments = 4;  // P
    std::size_t row = 0;
};

inline void run_segment(const SegmentOptions& options) {
    detail::Timer timer;
    const CurveSet set = read_curves(options.input, options.csv);
    if (options.row >= set.count()) throw DomainError("--row is past the last curve");
    const SegmentModel model = segment_model_from_string(options.model);
    const SegmentAggregate agg = detail::seg_aggregate_from_string(options.seg_aggregate);
    const std::size_t p_max = options.segments;
    const auto values = set.row(options.row);
    const SampleGrid& grid = set.grid();
    CurveSet single(grid, std::vector<double>(values.begin(), values.end()),
                    {set.ids()[options.row]});

    json per_p = json::array();
    detail::ensure_dir(options.output_dir);
    auto emit = [&](std::size_t p, double error, const Summary& summary) {
        json entry{{"segments", p}, {"error", error}, {"summary", summary}};
        per_p.push_back(entry);
        char name[48];
        std::snprintf(name, sizeof(name), "summary_p%zu.svg", p);
        atomic_write(detail::join_path(options.output_dir, name),
                     svg_summary_overlay(single, summary));
    };

    if (model == SegmentModel::InterpL2) {
        if (agg != SegmentAggregate::Sum)
            throw DomainError("the interpolation model supports only sum aggregation");
        const PrefixStats stats = build_prefix_stats(values, grid.points());
        auto chord = [&](std::size_t a, std::size_t b) {
            return cost_interp_l2(stats, a, b + 1);
        };
        KnotTables tables = run_knot_tables(chord, set.points(), p_max);
        for (std::size_t p = 1; p <= p_max; ++p) {
            KnotSet knots = backtrack_knots(tables, p);
            emit(p, tables.best(p), fit_summary(values, grid, knots));
        }
    } else {
        SegmentCostFn cost = make_curve_cost(values, grid.points(), model);
        DPTables tables = run_dp(cost, set.points(), p_max, agg, min_segment_length(model));
        for (std::size_t p = 1; p <= p_max; ++p) {
            Segmentation seg = backtrack(tables, p);
            emit(p, tables.best(p), fit_summary(values, grid, seg, model));
        }
    }

    json out{{"command", "segment"},
             {"config",
              {{"input", options.input},
               {"model", options.model},
               {"seg_aggregate", options.seg_aggregate},
               {"P", p_max},
               {"row", options.row},
               {"csv", detail::csv_options_json(options.csv)}}},
             {"dataset", detail::dataset_json(options.input, set)},
             {"curve", {{"index", options.row}, {"id", set.ids()[options.row]}}},
             {"per_p", per_p},
             {"wall_seconds", timer.seconds()}};
    atomic_write(detail::join_path(options.output_dir, "segmentation.json"), out.dump(2) + "\n");
}

// -- summarize-set: one prototype for the whole file ---------------------------

struct SummarizeSetOptions {
    std::string input;
    std::string output_dir = "out";
    CsvOptions csv;
    std::string model = "const-l2";
    std::string aggregate = "sum";      // across curves
    std::string seg_aggregate = "sum";  // across segments
    std::size_t segments = 4;           // P
};

inline void run_summarize_set(const SummarizeSetOptions& options) {
    detail::Timer timer;
    const CurveSet set = read_curves(options.input, options.csv);
    ModelSpec spec{segment_model_from_string(options.model),
                   detail::set_aggregate_from_string(options.aggregate)};
    const SegmentAggregate agg = detail::seg_aggregate_from_string(options.seg_aggregate);
    std::vector<std::size_t> members(set.count());
    for (std::size_t i = 0; i < set.count(); ++i) members[i] = i;

    const std::size_t model_cap = detail::model_max_segments(spec, set.points());
    if (options.segments > model_cap)
        throw DomainError("segment budget infeasible for this model and grid");
    detail::ClusterFit fit =
        detail::build_cluster_fit(set, members, spec, options.segments, agg);

    json per_p = json::array();
    std::optional<Summary> last;
    for (std::size_t p = 1; p <= options.segments; ++p) {
        Summary summary = fit.summarize(set, members, p, spec);
        per_p.push_back(json{{"segments", p}, {"error", fit.r[p - 1]}, {"summary", summary}});
        if (p == options.segments) last = std::move(summary);
    }

    detail::ensure_dir(options.output_dir);
    json out{{"command", "summarize-set"},
             {"config",
              {{"input", options.input},
               {"model", options.model},
               {"aggregate", options.aggregate},
               {"seg_aggregate", options.seg_aggregate},
               {"P", options.segments},
               {"csv", detail::csv_options_json(options.csv)}}},
             {"dataset", detail::dataset_json(options.input, set)},
             {"per_p", per_p},
             {"wall_seconds", timer.seconds()}};
    atomic_write(detail::join_path(options.output_dir, "summary.json"), out.dump(2) + "\n");
    atomic_write(detail::join_path(options.output_dir, "summary.svg"),
                 svg_summary_overlay(set, *last));
}

// -- cluster: the full joint clustering-and-segmentation run -------------------

struct ClusterOptions {
    std::string input;
    std::string output_dir = "out";
    CsvOptions csv;
    std::string model = "const-l2";
    std::string aggregate = "sum";      // across curves
    std::string seg_aggregate = "sum";  // across segments
    std::size_t clusters = 2;           // K
    std::size_t total_segments = 4;     // P
    std::string mode = "uniform";       // uniform | optimal | kmeans
    std::optional<double> cap_lambda;   // per-cluster cap as a multiple of P/K
    std::size_t seeds = 1;
    std::uint64_t seed = 0;
    std::size_t max_iter = 100;
    std::string init = "random";  // random | ward | som
    std::size_t som_rows = 0, som_cols = 0;
    std::vector<double> som_radii;
    std::size_t som_epochs = 30;
    bool two_phase = false;
};

struct ClusterRunOutput {
    RunManifest manifest;
    ClusterState state;
};

inline ClusterRunOutput run_cluster(const ClusterOptions& options) {
    detail::Timer timer;
    const CurveSet set = read_curves(options.input, options.csv);

    ClusteringConfig config;
    config.model = ModelSpec{segment_model_from_string(options.model),
                             detail::set_aggregate_from_string(options.aggregate)};
    config.aggregate = detail::seg_aggregate_from_string(options.seg_aggregate);
    config.clusters = options.clusters;
    config.total_segments = options.total_segments;
    config.max_iter = options.max_iter;
    if (options.mode == "uniform")
        config.mode = ClusterMode::Uniform;
    else if (options.mode == "optimal")
        config.mode = ClusterMode::OptimalAllocation;
    else if (options.mode == "kmeans")
        config.mode = ClusterMode::PlainKMeans;
    else
        throw DomainError("unknown mode '" + options.mode + "'");

    json details = json::object();
    if (options.cap_lambda) {
        const double lambda = *options.cap_lambda;
        if (lambda <= 0.0) throw DomainError("--cap must be positive");
        const std::size_t k = config.clusters, p = config.total_segments;
        std::size_t cap = static_cast<std::size_t>(
            lambda * static_cast<double>(p) / static_cast<double>(k) + 1e-9);
        cap = std::max<std::size_t>(cap, (p + k - 1) / k);  // keep the budget feasible
        config.cap = cap;
        details["cap"] = {{"lambda", lambda}, {"segments", cap}};
    }

    // initial partition
    std::vector<std::size_t> som_cells;  // unit index per cluster, for the panel layout
    if (options.init == "ward") {
        config.init = InitKind::GivenPartition;
        config.initial_assignment = partition_from(ward_cluster(set), config.clusters);
    } else if (options.init == "som") {
        if (options.som_rows == 0 || options.som_cols == 0)
            throw DomainError("--init som needs --som-grid RxC");
        SomConfig som;
        som.rows = options.som_rows;
        som.cols = options.som_cols;
        som.epochs = options.som_epochs;
        som.seed = options.seed;
        std::vector<double> radii = options.som_radii;
        if (radii.empty()) radii.push_back(-1.0);
        double best_stat = std::numeric_limits<double>::infinity();
        SomGrid best_grid;
        json sweep = json::array();
        for (double r : radii) {
            som.initial_radius = r;
            SomGrid grid = batch_som(set, som);
            const double stat = topology_statistic(set, grid);
            sweep.push_back(json{{"radius", r}, {"topology_statistic", stat}});
            if (stat < best_stat) {
                best_stat = stat;
                best_grid = std::move(grid);
            }
        }
        SomPartition part = partition_from(best_grid);
        if (part.clusters != config.clusters)
            std::cerr << "note: SOM left " << part.clusters
                      << " nonempty units; clustering with K=" << part.clusters << "\n";
        config.clusters = part.clusters;
        config.init = InitKind::GivenPartition;
        config.initial_assignment = part.assignment;
        som_cells = part.unit_of_cluster;
        details["som"] = {{"rows", som.rows},
                          {"cols", som.cols},
                          {"epochs", som.epochs},
                          {"sweep", sweep},
                          {"topology_statistic", best_stat},
                          {"clusters_used", part.clusters}};
        if (config.mode == ClusterMode::Uniform &&
            config.total_segments % config.clusters != 0)
            throw DomainError("uniform mode needs K to divide P after dropping empty units");
    } else if (options.init != "random") {
        throw DomainError("unknown init '" + options.init + "'");
    }

    // restarts: different seeds only change anything when the starting
    // partition is seeded, so ward/SOM starts collapse to a single run
    std::size_t runs = options.seeds == 0 ? 1 : options.seeds;
    const bool seeded_start = config.init == InitKind::Random;
    if (!seeded_start && runs > 1) {
        std::cerr << "note: fixed initial partition, collapsing --seeds to 1\n";
        runs = 1;
    }

    struct OneRun {
        ClusterState state;
        double phase1_error = 0.0;
        std::size_t phase1_iterations = 0;
        bool has_phase1 = false;
    };
    std::vector<OneRun> results(runs);
    const bool use_two_phase = options.two_phase || config.mode == ClusterMode::PlainKMeans;
    parallel_for(runs, [&](std::size_t r) {
        ClusteringConfig local = config;
        local.seed = options.seed + r;
        local.threads = runs > 1 ? 1 : thread_budget();
        OneRun& out = results[r];
        if (use_two_phase) {
            TwoPhaseResult tp = two_phase(set, local);
            out.state = std::move(tp.state);
            out.phase1_error = tp.phase1_error;
            out.phase1_iterations = tp.phase1.iterations;
            out.has_phase1 = true;
        } else if (local.mode == ClusterMode::Uniform) {
            out.state = cluster_uniform(set, local);
        } else {
            out.state = cluster_optimal(set, local);
        }
    }, runs > 1 ? thread_budget() : 1);

    std::size_t best = 0;
    for (std::size_t r = 1; r < runs; ++r)
        if (results[r].state.total_error < results[best].state.total_error) best = r;

    RunManifest manifest;
    manifest.config = {{"command", "cluster"},
                       {"input", options.input},
                       {"model", options.model},
                       {"aggregate", options.aggregate},
                       {"seg_aggregate", options.seg_aggregate},
                       {"K", config.clusters},
                       {"P", config.total_segments},
                       {"mode", options.mode},
                       {"cap", options.cap_lambda ? json(*options.cap_lambda) : json()},
                       {"seeds", options.seeds},
                       {"seed", options.seed},
                       {"max_iter", options.max_iter},
                       {"init", options.init},
                       {"two_phase", options.two_phase},
                       {"csv", detail::csv_options_json(options.csv)}};
    manifest.dataset_path = options.input;
    manifest.rows = set.count();
    manifest.cols = set.points();
    manifest.dataset_fingerprint = fingerprint_hex(set);
    manifest.seed = options.seed + best;
    const ClusterState& state = results[best].state;
    manifest.trace = state.trace;
    manifest.total_error = state.total_error;
    manifest.relative_error = relative_error(set, state.total_error);
    manifest.allocation = state.allocation;
    manifest.iterations = state.iterations;
    for (std::size_t r = 0; r < runs; ++r)
        manifest.restarts.push_back(json{{"seed", options.seed + r},
                                         {"total_error", results[r].state.total_error},
                                         {"iterations", results[r].state.iterations}});
    if (results[best].has_phase1)
        details["two_phase"] = {{"phase1_error", results[best].phase1_error},
                                {"phase1_iterations", results[best].phase1_iterations}};
    manifest.details = details;
    manifest.wall_seconds = timer.seconds();

    detail::ensure_dir(options.output_dir);
    atomic_write(detail::join_path(options.output_dir, "manifest.json"),
                 json(manifest).dump(2) + "\n");
    atomic_write(detail::join_path(options.output_dir, "assignment.csv"),
                 detail::assignment_csv(set, state.assignment));
    atomic_write(detail::join_path(options.output_dir, "summaries.json"),
                 json(state).dump(2) + "\n");

    SvgPanelOptions panel;
    if (!som_cells.empty()) {
        panel.grid_rows = options.som_rows;
        panel.grid_cols = options.som_cols;
        panel.cell_of_cluster = som_cells;
    }
    auto members = group_members(state.assignment, state.cluster_count());
    atomic_write(detail::join_path(options.output_dir, "panel.svg"),
                 svg_cluster_panel(set, members, state.summaries, panel));
    return ClusterRunOutput{std::move(manifest), results[best].state};
}

// -- kmeans: the unconstrained baseline ----------------------------------------

struct KmeansOptions {
    std::string input;
    std::string output_dir = "out";
    CsvOptions csv;
    std::size_t clusters = 2;
    std::uint64_t seed = 0;
    std::size_t seeds = 1;
    std::size_t max_iter = 100;
};

inline KMeansResult run_kmeans_command(const KmeansOptions& options) {
    detail::Timer timer;
    const CurveSet set = read_curves(options.input, options.csv);
    const std::size_t runs = options.seeds == 0 ? 1 : options.seeds;
    std::vector<KMeansResult> results(runs);
    parallel_for(runs, [&](std::size_t r) {
        results[r] = kmeans(set, options.clusters, options.seed + r, options.max_iter);
    }, runs > 1 ? thread_budget() : 1);
    std::size_t best = 0;
    for (std::size_t r = 1; r < runs; ++r)
        if (results[r].total_error < results[best].total_error) best = r;
    const KMeansResult& km = results[best];

    json restarts = json::array();
    for (std::size_t r = 0; r < runs; ++r)
        restarts.push_back(json{{"seed", options.seed + r},
                                {"total_error", results[r].total_error},
                                {"iterations", results[r].iterations}});
    json out{{"command", "kmeans"},
             {"config",
              {{"input", options.input},
               {"K", options.clusters},
               {"seed", options.seed},
               {"seeds", options.seeds},
               {"max_iter", options.max_iter},
               {"csv", detail::csv_options_json(options.csv)}}},
             {"dataset", detail::dataset_json(options.input, set)},
             {"seed", options.seed + best},
             {"iterations", km.iterations},
             {"trace", km.trace},
             {"total_error", km.total_error},
             {"restarts", restarts},
             {"wall_seconds", timer.seconds()}};

    detail::ensure_dir(options.output_dir);
    atomic_write(detail::join_path(options.output_dir, "kmeans.json"), out.dump(2) + "\n");
    atomic_write(detail::join_path(options.output_dir, "assignment.csv"),
                 detail::assignment_csv(set, km.assignment));
    std::vector<double> proto_values;
    for (const auto& p : km.prototypes)
        proto_values.insert(proto_values.end(), p.begin(), p.end());
    CurveSet protos(set.grid(), proto_values);
    atomic_write(detail::join_path(options.output_dir, "prototypes.csv"), curves_to_csv(protos));
    return km;
}

// -- ward: dendrogram for choosing K -------------------------------------------

struct WardOptions {
    std::string input;
    std::string output_dir = "out";
    CsvOptions csv;
    std::size_t height_count = 20;
};

inline Dendrogram run_ward(const WardOptions& options) {
    const CurveSet set = read_curves(options.input, options.csv);
    Dendrogram dendro = ward_cluster(set);

    std::string table = "step,left,right,height,size\n";
    for (std::size_t s = 0; s < dendro.merges.size(); ++s) {
        const auto& m = dendro.merges[s];
        table += std::to_string(s) + ',' + std::to_string(m.left) + ',' +
                 std::to_string(m.right) + ',' + format_double(m.height) + ',' +
                 std::to_string(m.size) + '\n';
    }
    const auto heights = ward_variance_decreases(dendro, options.height_count);
    std::string hcsv = "clusters_after,height\n";
    for (std::size_t i = 0; i < heights.size(); ++i) {
        const std::size_t clusters_after = heights.size() - i;
        hcsv += std::to_string(clusters_after) + ',' + format_double(heights[i]) + '\n';
    }

    detail::ensure_dir(options.output_dir);
    atomic_write(detail::join_path(options.output_dir, "dendrogram.csv"), table);
    atomic_write(detail::join_path(options.output_dir, "heights.csv"), hcsv);
    atomic_write(detail::join_path(options.output_dir, "heights.svg"),
                 svg_heights_chart(heights));
    return dendro;
}

// -- som: train a map, sweep radii, report topology ----------------------------

struct SomOptions {
    std::string input;
    std::string output_dir = "out";
    CsvOptions csv;
    std::size_t rows = 0, cols = 0;
    std::vector<double> radii;
    std::size_t epochs = 30;
    std::uint64_t seed = 0;
};

inline SomGrid run_som(const SomOptions& options) {
    detail::Timer timer;
    const CurveSet set = read_curves(options.input, options.csv);
    if (options.rows == 0 || options.cols == 0)
        throw DomainError("som needs --som-grid RxC");
    SomConfig config;
    config.rows = options.rows;
    config.cols = options.cols;
    config.epochs = options.epochs;
    config.seed = options.seed;

    std::vector<double> radii = options.radii;
    if (radii.empty()) radii.push_back(-1.0);
    json sweep = json::array();
    double best_stat = std::numeric_limits<double>::infinity();
    double best_radius = radii.front();
    SomGrid best_grid;
    for (double r : radii) {
        config.initial_radius = r;
        SomGrid grid = batch_som(set, config);
        const double stat = topology_statistic(set, grid);
        SomPartition part = partition_from(grid);
        sweep.push_back(json{{"radius", r},
                             {"topology_statistic", stat},
                             {"nonempty_units", part.clusters}});
        if (stat < best_stat) {
            best_stat = stat;
            best_radius = r;
            best_grid = std::move(grid);
        }
    }

    json out{{"command", "som"},
             {"config",
              {{"input", options.input},
               {"rows", options.rows},
               {"cols", options.cols},
               {"epochs", options.epochs},
               {"seed", options.seed},
               {"radii", options.radii},
               {"csv", detail::csv_options_json(options.csv)}}},
             {"dataset", detail::dataset_json(options.input, set)},
             {"sweep", sweep},
             {"best_radius", best_radius},
             {"best_topology_statistic", best_stat},
             {"wall_seconds", timer.seconds()}};

    detail::ensure_dir(options.output_dir);
    atomic_write(detail::join_path(options.output_dir, "som.json"), out.dump(2) + "\n");
    atomic_write(detail::join_path(options.output_dir, "assignment.csv"),
                 detail::assignment_csv(set, best_grid.assignment));
    std::vector<double> proto_values;
    for (const auto& p : best_grid.prototypes)
        proto_values.insert(proto_values.end(), p.begin(), p.end());
    CurveSet protos(set.grid(), proto_values);
    atomic_write(detail::join_path(options.output_dir, "prototypes.csv"), curves_to_csv(protos));

    std::vector<std::vector<std::size_t>> members(best_grid.units());
    for (std::size_t i = 0; i < best_grid.assignment.size(); ++i)
        members[best_grid.assignment[i]].push_back(i);
    SvgPanelOptions panel;
    panel.grid_rows = options.rows;
    panel.grid_cols = options.cols;
    atomic_write(detail::join_path(options.output_dir, "panel.svg"),
                 svg_prototype_panel(set, members, best_grid.prototypes, panel));
    return best_grid;
}

// -- report: compare manifests ---------------------------------------------------

struct ReportOptions {
    std::vector<std::string> manifests;
    std::string output_dir = "out";
};

inline std::string run_report(const ReportOptions& options) {
    if (options.manifests.empty()) throw DomainError("report needs at least one manifest");
    std::vector<RunManifest> manifests;
    for (const auto& path : options.manifests) {
        std::ifstream in(path);
        if (!in) throw ParseError("cannot open '" + path + "'", 0, 0);
        json j = json::parse(in, nullptr, true, true);
        manifests.push_back(j.get<RunManifest>());
    }
    for (std::size_t i = 1; i < manifests.size(); ++i)
        if (manifests[i].dataset_fingerprint != manifests[0].dataset_fingerprint)
            std::cerr << "warning: '" << options.manifests[i]
                      << "' was computed on a different dataset\n";

    auto field = [](const json& config, const char* key) -> std::string {
        if (config.contains(key) && !config.at(key).is_null()) {
            const auto& v = config.at(key);
            return v.is_string() ? v.get<std::string>() : v.dump();
        }
        return "-";
    };
    std::string csv = "manifest,K,P,mode,total_error,relative_error,allocation,iterations,"
                      "wall_seconds\n";
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < manifests.size(); ++i) {
        const RunManifest& m = manifests[i];
        std::string alloc;
        for (std::size_t k = 0; k < m.allocation.size(); ++k) {
            if (k) alloc += '+';
            alloc += std::to_string(m.allocation[k]);
        }
        if (alloc.empty()) alloc = "-";
        std::vector<std::string> row{
            options.manifests[i],          field(m.config, "K"),
            field(m.config, "P"),          field(m.config, "mode"),
            format_double(m.total_error),  format_double(m.relative_error),
            alloc,                         std::to_string(m.iterations),
            format_double(m.wall_seconds)};
        rows.push_back(row);
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) csv += ',';
            csv += row[c];
        }
        csv += '\n';
    }

    // aligned text table
    const char* headers[] = {"manifest", "K",          "P",          "mode",
                             "E",        "rel_error",  "allocation", "iterations",
                             "wall_s"};
    std::vector<std::size_t> widths(9);
    for (std::size_t c = 0; c < 9; ++c) widths[c] = std::string(headers[c]).size();
    for (const auto& row : rows)
        for (std::size_t c = 0; c < 9; ++c) widths[c] = std::max(widths[c], row[c].size());
    std::string text;
    for (std::size_t c = 0; c < 9; ++c) {
        text += headers[c];
        text += std::string(widths[c] - std::string(headers[c]).size() + 2, ' ');
    }
    text += '\n';
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < 9; ++c) {
            text += row[c];
            text += std::string(widths[c] - row[c].size() + 2, ' ');
        }
        text += '\n';
    }

    detail::ensure_dir(options.output_dir);
    atomic_write(detail::join_path(options.output_dir, "report.csv"), csv);
    atomic_write(detail::join_path(options.output_dir, "report.txt"), text);
    return text;
}

}  // namespace curveseg
