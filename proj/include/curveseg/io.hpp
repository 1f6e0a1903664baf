#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "clustering.hpp"
#include "init.hpp"
#include "types.hpp"

namespace curveseg {

// CSV ingestion, JSON (de)serialization of the core types, SVG emission and
// the run manifest. Numeric text uses 17 significant digits so every double
// round-trips bit-exactly; all indices in file formats are 0-based.

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// -- CSV ----------------------------------------------------------------------

struct CsvOptions {
    bool header_row = false;  // first row holds the grid abscissae
    bool id_column = false;   // first column holds curve labels
    bool transpose = false;   // file stores curves as columns
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(field);
            field.clear();
        } else if (ch != '\r') {
            field.push_back(ch);
        }
    }
    fields.push_back(field);
    return fields;
}

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

inline double parse_number(const std::string& field, std::size_t row, std::size_t col) {
    const std::string t = trim(field);
    if (t.empty()) throw ParseError("empty cell at row " + std::to_string(row) + ", column " +
                                        std::to_string(col),
                                    row, col);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size())
        throw ParseError("non-numeric cell '" + t + "' at row " + std::to_string(row) +
                             ", column " + std::to_string(col),
                         row, col);
    if (!std::isfinite(v))
        throw ParseError("non-finite value at row " + std::to_string(row) + ", column " +
                             std::to_string(col),
                         row, col);
    return v;
}

}  // namespace detail

// Rows are curves and columns grid points (after the optional transpose).
// Blank lines and lines starting with '#' are skipped. Error positions refer
// to the oriented table.
inline CurveSet read_curves(std::istream& in, const CsvOptions& options = {}) {
    std::vector<std::vector<std::string>> table;
    std::string line;
    while (std::getline(in, line)) {
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        table.push_back(detail::split_csv_line(line));
    }
    if (table.empty()) throw ParseError("no data rows", 0, 0);

    const std::size_t width = table[0].size();
    for (std::size_t r = 1; r < table.size(); ++r)
        if (table[r].size() != width)
            throw ParseError("ragged row " + std::to_string(r) + ": expected " +
                                 std::to_string(width) + " fields, found " +
                                 std::to_string(table[r].size()),
                             r, table[r].size());

    if (options.transpose) {
        std::vector<std::vector<std::string>> flipped(width,
                                                      std::vector<std::string>(table.size()));
        for (std::size_t r = 0; r < table.size(); ++r)
            for (std::size_t c = 0; c < width; ++c) flipped[c][r] = table[r][c];
        table = std::move(flipped);
    }

    std::size_t first_row = options.header_row ? 1 : 0;
    std::size_t first_col = options.id_column ? 1 : 0;
    if (table.size() <= first_row) throw ParseError("no curve rows after the header", 0, 0);
    if (table[0].size() <= first_col || table[0].size() - first_col < 2)
        throw ParseError("need at least 2 value columns", 0, first_col);

    const std::size_t m = table[0].size() - first_col;
    std::vector<double> grid_points;
    if (options.header_row) {
        grid_points.reserve(m);
        // when ids are present the header's first field labels the id column
        for (std::size_t c = first_col; c < table[0].size(); ++c)
            grid_points.push_back(detail::parse_number(table[0][c], 0, c));
    }

    std::vector<double> values;
    std::vector<std::string> ids;
    values.reserve((table.size() - first_row) * m);
    for (std::size_t r = first_row; r < table.size(); ++r) {
        if (options.id_column) ids.push_back(detail::trim(table[r][0]));
        for (std::size_t c = first_col; c < table[r].size(); ++c)
            values.push_back(detail::parse_number(table[r][c], r, c));
    }

    try {
        SampleGrid grid = options.header_row ? SampleGrid(std::move(grid_points))
                                             : SampleGrid::index_grid(m);
        return CurveSet(std::move(grid), std::move(values), std::move(ids));
    } catch (const DomainError& e) {
        throw ParseError(e.what(), 0, 0);
    }
}

inline CurveSet read_curves(const std::string& path, const CsvOptions& options = {}) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'", 0, 0);
    return read_curves(in, options);
}

inline void atomic_write(const std::string& path, std::string_view content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
    }
    std::filesystem::rename(tmp, path);
}

inline std::string curves_to_csv(const CurveSet& set, bool header_row = true,
                                 bool id_column = true) {
    std::ostringstream out;
    if (header_row) {
        if (id_column) out << "id";
        for (std::size_t j = 0; j < set.points(); ++j) {
            if (id_column || j > 0) out << ',';
            out << format_double(set.grid()[j]);
        }
        out << '\n';
    }
    for (std::size_t i = 0; i < set.count(); ++i) {
        if (id_column) out << set.ids()[i];
        auto row = set.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (id_column || j > 0) out << ',';
            out << format_double(row[j]);
        }
        out << '\n';
    }
    return out.str();
}

// FNV-1a over the dimensions, grid and value bit patterns.
inline std::uint64_t fingerprint(const CurveSet& set) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t word) {
        for (int b = 0; b < 8; ++b) {
            h ^= (word >> (8 * b)) & 0xffu;
            h *= 1099511628211ull;
        }
    };
    auto mix_double = [&mix](double v) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(v));
        std::memcpy(&bits, &v, sizeof(bits));
        mix(bits);
    };
    mix(set.count());
    mix(set.points());
    for (double t : set.grid().points()) mix_double(t);
    for (double v : set.raw()) mix_double(v);
    return h;
}

inline std::string fingerprint_hex(const CurveSet& set) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fingerprint(set)));
    return buf;
}

// -- JSON ---------------------------------------------------------------------

using json = nlohmann::json;

// The core types are not default-constructible, so deserialization goes
// through explicit *_from_json helpers instead of nlohmann's get<T>().
inline void to_json(json& j, const SampleGrid& grid) {
    j = json{{"points", std::vector<double>(grid.points().begin(), grid.points().end())}};
}
inline SampleGrid grid_from_json(const json& j) {
    return SampleGrid(j.at("points").get<std::vector<double>>());
}

inline void to_json(json& j, const Segmentation& seg) {
    j = json{{"num_points", seg.num_points()}, {"cuts", seg.cuts()}};
}
inline Segmentation segmentation_from_json(const json& j) {
    return Segmentation(j.at("num_points").get<std::size_t>(),
                        j.at("cuts").get<std::vector<std::size_t>>());
}

inline void to_json(json& j, const KnotSet& knots) {
    j = json{{"num_points", knots.num_points()}, {"knots", knots.knots()}};
}
inline KnotSet knotset_from_json(const json& j) {
    return KnotSet(j.at("num_points").get<std::size_t>(),
                   j.at("knots").get<std::vector<std::size_t>>());
}

inline SegmentModel segment_model_from_string(const std::string& s) {
    if (s == "const-l2") return SegmentModel::ConstantL2;
    if (s == "const-l1") return SegmentModel::ConstantL1;
    if (s == "line-l2") return SegmentModel::LineL2;
    if (s == "interp-l2") return SegmentModel::InterpL2;
    throw DomainError("unknown model '" + s + "'");
}

inline void to_json(json& j, const Summary& s) {
    j = json{{"model", to_string(s.kind())}, {"grid", s.grid()}};
    if (s.kind() == SegmentModel::InterpL2) {
        j["knots"] = *s.knots();
        j["knot_values"] = s.knot_values();
    } else {
        j["segmentation"] = *s.segmentation();
        if (s.kind() == SegmentModel::LineL2) {
            json lines = json::array();
            for (const auto& c : s.lines())
                lines.push_back({{"intercept", c.intercept}, {"slope", c.slope}});
            j["lines"] = lines;
        } else {
            j["levels"] = s.levels();
        }
    }
}

inline Summary summary_from_json(const json& j) {
    const SegmentModel kind = segment_model_from_string(j.at("model").get<std::string>());
    SampleGrid grid = grid_from_json(j.at("grid"));
    if (kind == SegmentModel::InterpL2) {
        return Summary::interpolation(std::move(grid), knotset_from_json(j.at("knots")),
                                      j.at("knot_values").get<std::vector<double>>());
    }
    Segmentation seg = segmentation_from_json(j.at("segmentation"));
    if (kind == SegmentModel::LineL2) {
        std::vector<LineCoef> lines;
        for (const auto& e : j.at("lines"))
            lines.push_back({e.at("intercept").get<double>(), e.at("slope").get<double>()});
        return Summary::piecewise_line(std::move(grid), std::move(seg), std::move(lines));
    }
    return Summary::piecewise_constant(kind, std::move(grid), std::move(seg),
                                       j.at("levels").get<std::vector<double>>());
}

inline void to_json(json& j, const ClusterState& state) {
    j = json{{"model", to_string(state.model.model)},
             {"aggregate", to_string(state.model.set_aggregate)},
             {"assignment", state.assignment},
             {"allocation", state.allocation},
             {"summaries", state.summaries},
             {"total_error", state.total_error},
             {"iterations", state.iterations},
             {"trace", state.trace}};
}

inline void from_json(const json& j, ClusterState& state) {
    state.model.model = segment_model_from_string(j.at("model").get<std::string>());
    state.model.set_aggregate = j.at("aggregate").get<std::string>() == "max"
                                    ? SetAggregate::MaxOverCurves
                                    : SetAggregate::SumOverCurves;
    state.assignment = j.at("assignment").get<std::vector<std::size_t>>();
    state.allocation = j.at("allocation").get<std::vector<std::size_t>>();
    state.summaries.clear();
    for (const auto& e : j.at("summaries")) state.summaries.push_back(summary_from_json(e));
    state.total_error = j.at("total_error").get<double>();
    state.iterations = j.at("iterations").get<std::size_t>();
    state.trace = j.at("trace").get<std::vector<double>>();
}

// Everything needed to reproduce and compare one clustering run.
struct RunManifest {
    json config;  // echo of all flags
    std::string dataset_path;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::string dataset_fingerprint;
    std::uint64_t seed = 0;
    std::vector<double> trace;
    double total_error = 0.0;
    double relative_error = 0.0;
    std::vector<std::size_t> allocation;
    std::size_t iterations = 0;
    double wall_seconds = 0.0;
    json restarts = json::array();  // {seed, total_error, iterations} per restart
    json details = json::object();  // run-specific extras (two-phase, SOM sweep, ...)
};

inline void to_json(json& j, const RunManifest& m) {
    j = json{{"config", m.config},
             {"dataset", {{"path", m.dataset_path},
                          {"rows", m.rows},
                          {"cols", m.cols},
                          {"fingerprint", m.dataset_fingerprint}}},
             {"seed", m.seed},
             {"trace", m.trace},
             {"total_error", m.total_error},
             {"relative_error", m.relative_error},
             {"allocation", m.allocation},
             {"iterations", m.iterations},
             {"wall_seconds", m.wall_seconds},
             {"restarts", m.restarts},
             {"details", m.details}};
}

inline void from_json(const json& j, RunManifest& m) {
    m.config = j.at("config");
    m.dataset_path = j.at("dataset").at("path").get<std::string>();
    m.rows = j.at("dataset").at("rows").get<std::size_t>();
    m.cols = j.at("dataset").at("cols").get<std::size_t>();
    m.dataset_fingerprint = j.at("dataset").at("fingerprint").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.trace = j.at("trace").get<std::vector<double>>();
    m.total_error = j.at("total_error").get<double>();
    m.relative_error = j.at("relative_error").get<double>();
    m.allocation = j.at("allocation").get<std::vector<std::size_t>>();
    m.iterations = j.at("iterations").get<std::size_t>();
    m.wall_seconds = j.at("wall_seconds").get<double>();
    m.restarts = j.value("restarts", json::array());
    m.details = j.value("details", json::object());
}

// -- SVG ----------------------------------------------------------------------

// Panel of cells, one per cluster: member curves in grey under the prototype
// in black. Exactly one <path> per curve and one per prototype; cell frames
// are <rect> elements.
struct SvgPanelOptions {
    std::size_t grid_rows = 0;  // 0 means a near-square layout
    std::size_t grid_cols = 0;
    double cell_width = 220.0;
    double cell_height = 140.0;
    double pad = 8.0;
    // cell index per cluster; empty means cluster k sits in cell k. Lets a
    // SOM-initialized run keep its map layout when units were dropped.
    std::vector<std::size_t> cell_of_cluster;
};

namespace detail {

inline void append_path(std::string& out, const std::vector<double>& xs,
                        const std::vector<double>& ys, const char* stroke, double width) {
    out += "<path fill=\"none\" stroke=\"";
    out += stroke;
    out += "\" stroke-width=\"";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", width);
    out += buf;
    out += "\" d=\"";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%c%.2f %.2f", i == 0 ? 'M' : 'L', xs[i], ys[i]);
        out += buf;
    }
    out += "\"/>\n";
}

// Prototype drawn from its grid values. Constant kinds render as steps with a
// separate subpath per segment (the model is undefined across breaks); the
// other kinds connect their grid samples.
inline void append_summary_path(std::string& out, const Summary& s,
                                const std::vector<double>& xs, const std::vector<double>& ys) {
    char buf[40];
    out += "<path fill=\"none\" stroke=\"#000000\" stroke-width=\"1.80\" d=\"";
    const bool broken = s.kind() != SegmentModel::InterpL2;
    if (broken) {
        for (const auto& [b, e] : s.segmentation()->segments()) {
            for (std::size_t j = b; j < e; ++j) {
                std::snprintf(buf, sizeof(buf), "%c%.2f %.2f", j == b ? 'M' : 'L', xs[j], ys[j]);
                out += buf;
            }
        }
    } else {
        for (std::size_t j = 0; j < xs.size(); ++j) {
            std::snprintf(buf, sizeof(buf), "%c%.2f %.2f", j == 0 ? 'M' : 'L', xs[j], ys[j]);
            out += buf;
        }
    }
    out += "\"/>\n";
}

}  // namespace detail

namespace detail {

// Shared panel scaffolding; draw_prototype renders cluster k's black curve
// from its screen coordinates.
template <typename DrawPrototype>
std::string svg_panel_impl(const CurveSet& set,
                           const std::vector<std::vector<std::size_t>>& members,
                           const std::vector<std::vector<double>>& prototype_values,
                           const SvgPanelOptions& options, DrawPrototype&& draw_prototype) {
    const std::size_t k_count = prototype_values.size();
    std::size_t cells = k_count;
    for (std::size_t c : options.cell_of_cluster) cells = std::max(cells, c + 1);
    std::size_t rows = options.grid_rows, cols = options.grid_cols;
    if (rows * cols < cells) {
        cols = 1;
        while (cols * cols < cells) ++cols;
        rows = (cells + cols - 1) / cols;
    }
    const double w = options.cell_width, h = options.cell_height, pad = options.pad;

    double lo = set.raw()[0], hi = set.raw()[0];
    for (double v : set.raw()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    for (const auto& proto : prototype_values)
        for (double v : proto) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    if (hi == lo) hi = lo + 1.0;
    const double t0 = set.grid().front(), t1 = set.grid().back();

    std::string out;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
                  "viewBox=\"0 0 %.0f %.0f\">\n",
                  cols * w, rows * h, cols * w, rows * h);
    out += buf;
    for (std::size_t cell = 0; cell < rows * cols; ++cell) {
        std::snprintf(buf, sizeof(buf),
                      "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"none\" "
                      "stroke=\"#cccccc\"/>\n",
                      static_cast<double>(cell % cols) * w, static_cast<double>(cell / cols) * h,
                      w, h);
        out += buf;
    }

    for (std::size_t k = 0; k < k_count; ++k) {
        const std::size_t cell =
            options.cell_of_cluster.empty() ? k : options.cell_of_cluster[k];
        const double x0 = static_cast<double>(cell % cols) * w;
        const double y0 = static_cast<double>(cell / cols) * h;
        auto sx = [&](double t) { return x0 + pad + (t - t0) / (t1 - t0) * (w - 2 * pad); };
        auto sy = [&](double v) { return y0 + h - pad - (v - lo) / (hi - lo) * (h - 2 * pad); };

        std::vector<double> xs(set.points());
        for (std::size_t j = 0; j < set.points(); ++j) xs[j] = sx(set.grid()[j]);
        for (std::size_t i : members[k]) {
            std::vector<double> ys(set.points());
            auto row = set.row(i);
            for (std::size_t j = 0; j < row.size(); ++j) ys[j] = sy(row[j]);
            append_path(out, xs, ys, "#b0b0b0", 0.8);
        }
        std::vector<double> ys(prototype_values[k].size());
        for (std::size_t j = 0; j < ys.size(); ++j) ys[j] = sy(prototype_values[k][j]);
        draw_prototype(out, k, xs, ys);
    }
    out += "</svg>\n";
    return out;
}

}  // namespace detail

inline std::string svg_cluster_panel(const CurveSet& set,
                                     const std::vector<std::vector<std::size_t>>& members,
                                     const std::vector<Summary>& summaries,
                                     SvgPanelOptions options = {}) {
    std::vector<std::vector<double>> values;
    values.reserve(summaries.size());
    for (const auto& s : summaries) values.push_back(s.values_on_grid());
    return detail::svg_panel_impl(
        set, members, values, options,
        [&summaries](std::string& out, std::size_t k, const std::vector<double>& xs,
                     const std::vector<double>& ys) {
            detail::append_summary_path(out, summaries[k], xs, ys);
        });
}

// Panel over raw prototype vectors (SOM units, k-means centers).
inline std::string svg_prototype_panel(const CurveSet& set,
                                       const std::vector<std::vector<std::size_t>>& members,
                                       const std::vector<std::vector<double>>& prototypes,
                                       SvgPanelOptions options = {}) {
    return detail::svg_panel_impl(set, members, prototypes, options,
                                  [](std::string& out, std::size_t, const std::vector<double>& xs,
                                     const std::vector<double>& ys) {
                                      detail::append_path(out, xs, ys, "#000000", 1.8);
                                  });
}

// Single-cell convenience: one curve (or one set) with its summary.
inline std::string svg_summary_overlay(const CurveSet& set, const Summary& summary,
                                       SvgPanelOptions options = {}) {
    std::vector<std::vector<std::size_t>> members(1);
    members[0].resize(set.count());
    for (std::size_t i = 0; i < set.count(); ++i) members[0][i] = i;
    options.grid_rows = options.grid_cols = 1;
    options.cell_width = std::max(options.cell_width, 440.0);
    options.cell_height = std::max(options.cell_height, 280.0);
    return svg_cluster_panel(set, members, {summary}, options);
}

// Bar-style chart of merge heights (dendrogram variance decreases).
inline std::string svg_heights_chart(const std::vector<double>& heights, double width = 440.0,
                                     double height = 280.0) {
    std::string out;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
                  "viewBox=\"0 0 %.0f %.0f\">\n",
                  width, height, width, height);
    out += buf;
    double hi = 0.0;
    for (double v : heights) hi = std::max(hi, v);
    if (hi <= 0.0) hi = 1.0;
    const double pad = 20.0;
    const double bw = (width - 2 * pad) / std::max<std::size_t>(heights.size(), 1);
    for (std::size_t i = 0; i < heights.size(); ++i) {
        const double bh = heights[i] / hi * (height - 2 * pad);
        std::snprintf(buf, sizeof(buf),
                      "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" "
                      "fill=\"#606060\"/>\n",
                      pad + i * bw + 1.0, height - pad - bh, bw - 2.0, bh);
        out += buf;
    }
    out += "</svg>\n";
    return out;
}

}  // namespace curveseg
