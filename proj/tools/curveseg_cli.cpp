// curveseg: summarize sets of sampled curves by joint clustering and optimal
// segmentation. Subcommands: segment, summarize-set, cluster, kmeans, ward,
// som, report. Exit codes: 0 ok, 2 input parse error, 3 configuration error,
// 4 internal consistency failure.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <curveseg/commands.hpp>

namespace {

void add_csv_flags(CLI::App* cmd, curveseg::CsvOptions& csv) {
    cmd->add_flag("--header-row", csv.header_row, "first row holds the grid abscissae");
    cmd->add_flag("--id-column", csv.id_column, "first column holds curve ids");
    cmd->add_flag("--transpose", csv.transpose, "file stores curves as columns");
}

void parse_som_grid(const std::string& text, std::size_t& rows, std::size_t& cols) {
    const auto x = text.find('x');
    if (x == std::string::npos) throw curveseg::DomainError("--som-grid expects RxC, e.g. 4x5");
    try {
        rows = std::stoul(text.substr(0, x));
        cols = std::stoul(text.substr(x + 1));
    } catch (const std::exception&) {
        throw curveseg::DomainError("--som-grid expects RxC, e.g. 4x5");
    }
    if (rows == 0 || cols == 0) throw curveseg::DomainError("--som-grid dimensions must be positive");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"joint clustering and optimal segmentation of sampled curves"};
    app.require_subcommand(1);

    curveseg::SegmentOptions segment;
    auto* cmd_segment = app.add_subcommand("segment", "optimal segmentation of one curve");
    cmd_segment->add_option("--input", segment.input, "curves CSV")->required();
    cmd_segment->add_option("--output-dir", segment.output_dir, "output directory");
    cmd_segment->add_option("--model", segment.model, "const-l2|const-l1|line-l2|interp-l2");
    cmd_segment->add_option("--seg-aggregate", segment.seg_aggregate,
                            "combine segment errors by sum|max");
    cmd_segment->add_option("--P", segment.segments, "segment budget")->required();
    cmd_segment->add_option("--row", segment.row, "curve row to segment (default 0)");
    add_csv_flags(cmd_segment, segment.csv);

    curveseg::SummarizeSetOptions summarize;
    auto* cmd_summarize =
        app.add_subcommand("summarize-set", "one piecewise prototype for the whole file");
    cmd_summarize->add_option("--input", summarize.input, "curves CSV")->required();
    cmd_summarize->add_option("--output-dir", summarize.output_dir, "output directory");
    cmd_summarize->add_option("--model", summarize.model,
                              "const-l2|const-l1|line-l2|interp-l2");
    cmd_summarize->add_option("--aggregate", summarize.aggregate,
                              "combine curve errors by sum|max");
    cmd_summarize->add_option("--seg-aggregate", summarize.seg_aggregate,
                              "combine segment errors by sum|max");
    cmd_summarize->add_option("--P", summarize.segments, "segment budget")->required();
    add_csv_flags(cmd_summarize, summarize.csv);

    curveseg::ClusterOptions cluster;
    std::string cluster_som_grid;
    auto* cmd_cluster =
        app.add_subcommand("cluster", "joint clustering and segmentation under a budget");
    cmd_cluster->add_option("--input", cluster.input, "curves CSV")->required();
    cmd_cluster->add_option("--output-dir", cluster.output_dir, "output directory");
    cmd_cluster->add_option("--model", cluster.model, "const-l2|const-l1|line-l2|interp-l2");
    cmd_cluster->add_option("--aggregate", cluster.aggregate, "combine curve errors by sum|max");
    cmd_cluster->add_option("--seg-aggregate", cluster.seg_aggregate,
                            "combine segment errors by sum|max");
    cmd_cluster->add_option("--K", cluster.clusters, "cluster count")->required();
    cmd_cluster->add_option("--P", cluster.total_segments, "total segment budget")->required();
    cmd_cluster->add_option("--mode", cluster.mode, "uniform|optimal|kmeans");
    cmd_cluster->add_option("--cap", cluster.cap_lambda,
                            "per-cluster segment cap as a multiple of P/K (e.g. 2)");
    cmd_cluster->add_option("--seeds", cluster.seeds, "number of seeded restarts");
    cmd_cluster->add_option("--seed", cluster.seed, "base random seed");
    cmd_cluster->add_option("--max-iter", cluster.max_iter, "iteration cap");
    cmd_cluster->add_option("--init", cluster.init, "random|ward|som");
    cmd_cluster->add_option("--som-grid", cluster_som_grid, "SOM grid RxC (with --init som)");
    cmd_cluster->add_option("--som-radius", cluster.som_radii,
                            "initial radii to sweep (with --init som)")
        ->delimiter(',');
    cmd_cluster->add_option("--som-epochs", cluster.som_epochs, "SOM training epochs");
    cmd_cluster->add_flag("--two-phase", cluster.two_phase,
                          "run k-means first, then the constrained loop");
    add_csv_flags(cmd_cluster, cluster.csv);

    curveseg::KmeansOptions km;
    auto* cmd_kmeans = app.add_subcommand("kmeans", "plain Lloyd k-means baseline");
    cmd_kmeans->add_option("--input", km.input, "curves CSV")->required();
    cmd_kmeans->add_option("--output-dir", km.output_dir, "output directory");
    cmd_kmeans->add_option("--K", km.clusters, "cluster count")->required();
    cmd_kmeans->add_option("--seed", km.seed, "base random seed");
    cmd_kmeans->add_option("--seeds", km.seeds, "number of seeded restarts");
    cmd_kmeans->add_option("--max-iter", km.max_iter, "iteration cap");
    add_csv_flags(cmd_kmeans, km.csv);

    curveseg::WardOptions ward;
    auto* cmd_ward = app.add_subcommand("ward", "Ward hierarchical clustering dendrogram");
    cmd_ward->add_option("--input", ward.input, "curves CSV")->required();
    cmd_ward->add_option("--output-dir", ward.output_dir, "output directory");
    cmd_ward->add_option("--heights", ward.height_count, "how many final merges to chart");
    add_csv_flags(cmd_ward, ward.csv);

    curveseg::SomOptions som;
    std::string som_grid;
    auto* cmd_som = app.add_subcommand("som", "batch self-organizing map");
    cmd_som->add_option("--input", som.input, "curves CSV")->required();
    cmd_som->add_option("--output-dir", som.output_dir, "output directory");
    cmd_som->add_option("--som-grid", som_grid, "grid RxC, e.g. 4x5")->required();
    cmd_som->add_option("--som-radius", som.radii, "initial radii to sweep")->delimiter(',');
    cmd_som->add_option("--som-epochs", som.epochs, "training epochs");
    cmd_som->add_option("--seed", som.seed, "random seed");
    add_csv_flags(cmd_som, som.csv);

    curveseg::ReportOptions report;
    auto* cmd_report = app.add_subcommand("report", "compare run manifests");
    cmd_report->add_option("manifests", report.manifests, "manifest.json files")->required();
    cmd_report->add_option("--output-dir", report.output_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 3;
    }

    try {
        if (cmd_segment->parsed()) {
            curveseg::run_segment(segment);
        } else if (cmd_summarize->parsed()) {
            curveseg::run_summarize_set(summarize);
        } else if (cmd_cluster->parsed()) {
            if (!cluster_som_grid.empty())
                parse_som_grid(cluster_som_grid, cluster.som_rows, cluster.som_cols);
            auto out = curveseg::run_cluster(cluster);
            std::printf("E=%s relative=%s iterations=%zu\n",
                        curveseg::format_double(out.manifest.total_error).c_str(),
                        curveseg::format_double(out.manifest.relative_error).c_str(),
                        out.manifest.iterations);
        } else if (cmd_kmeans->parsed()) {
            auto out = curveseg::run_kmeans_command(km);
            std::printf("E=%s iterations=%zu\n",
                        curveseg::format_double(out.total_error).c_str(), out.iterations);
        } else if (cmd_ward->parsed()) {
            curveseg::run_ward(ward);
        } else if (cmd_som->parsed()) {
            parse_som_grid(som_grid, som.rows, som.cols);
            auto grid = curveseg::run_som(som);
            (void)grid;
        } else if (cmd_report->parsed()) {
            std::cout << curveseg::run_report(report);
        }
    } catch (const curveseg::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const curveseg::InternalError& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    } catch (const curveseg::DomainError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
