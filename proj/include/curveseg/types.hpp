#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace curveseg {

// Precondition/configuration violations (bad segment counts, empty clusters, ...).
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Numerical consistency failures that indicate a bug, not bad input.
struct InternalError : std::logic_error {
    using std::logic_error::logic_error;
};

// Malformed input files. row/col are 0-based positions in the oriented table.
struct ParseError : std::runtime_error {
    ParseError(const std::string& msg, std::size_t row_, std::size_t col_)
        : std::runtime_error(msg), row(row_), col(col_) {}
    std::size_t row = 0;
    std::size_t col = 0;
};

// The ordered evaluation points t_0 < ... < t_{M-1} shared by all curves.
class SampleGrid {
  public:
    explicit SampleGrid(std::vector<double> points) : points_(std::move(points)) {
        if (points_.size() < 2) throw DomainError("grid needs at least 2 points");
        for (std::size_t i = 0; i < points_.size(); ++i) {
            if (!std::isfinite(points_[i])) throw DomainError("grid points must be finite");
            if (i > 0 && !(points_[i - 1] < points_[i]))
                throw DomainError("grid points must be strictly increasing");
        }
    }

    // Default abscissae 1..m for files without a header row.
    static SampleGrid index_grid(std::size_t m) {
        std::vector<double> pts(m);
        for (std::size_t i = 0; i < m; ++i) pts[i] = static_cast<double>(i + 1);
        return SampleGrid(std::move(pts));
    }

    std::size_t size() const { return points_.size(); }
    double operator[](std::size_t i) const { return points_[i]; }
    double front() const { return points_.front(); }
    double back() const { return points_.back(); }
    std::span<const double> points() const { return points_; }

    friend bool operator==(const SampleGrid& a, const SampleGrid& b) {
        return a.points_ == b.points_;
    }

  private:
    std::vector<double> points_;
};

// N curves sampled on one shared grid; values stored row-major.
class CurveSet {
  public:
    CurveSet(SampleGrid grid, std::vector<double> values, std::vector<std::string> ids = {})
        : grid_(std::move(grid)), values_(std::move(values)), ids_(std::move(ids)) {
        m_ = grid_.size();
        if (values_.empty() || values_.size() % m_ != 0)
            throw DomainError("curve matrix size is not a multiple of the grid size");
        n_ = values_.size() / m_;
        for (double v : values_)
            if (!std::isfinite(v)) throw DomainError("curve values must be finite");
        if (ids_.empty()) {
            ids_.reserve(n_);
            for (std::size_t i = 0; i < n_; ++i) ids_.push_back(std::to_string(i));
        } else if (ids_.size() != n_) {
            throw DomainError("id count does not match curve count");
        }
    }

    std::size_t count() const { return n_; }   // N
    std::size_t points() const { return m_; }  // M
    const SampleGrid& grid() const { return grid_; }
    const std::vector<std::string>& ids() const { return ids_; }
    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(values_.data() + i * m_, m_);
    }
    double value(std::size_t i, std::size_t j) const { return values_[i * m_ + j]; }
    std::span<const double> raw() const { return values_; }

  private:
    SampleGrid grid_;
    std::vector<double> values_;
    std::vector<std::string> ids_;
    std::size_t n_ = 0, m_ = 0;
};

// Ordered partition of the index range [0, M) into contiguous segments.
// cuts holds the first index of every segment except the first, so segment p
// covers [cuts[p-1], cuts[p]) with the implicit outer bounds 0 and M.
class Segmentation {
  public:
    Segmentation(std::size_t num_points, std::vector<std::size_t> cuts)
        : num_points_(num_points), cuts_(std::move(cuts)) {
        if (num_points_ == 0) throw DomainError("segmentation over empty range");
        std::size_t prev = 0;
        for (std::size_t c : cuts_) {
            if (!(c > prev && c < num_points_))
                throw DomainError("segment cuts must be strictly increasing inside (0, M)");
            prev = c;
        }
    }

    static Segmentation from_segments(const std::vector<std::pair<std::size_t, std::size_t>>& segs) {
        if (segs.empty()) throw DomainError("empty segment list");
        std::vector<std::size_t> cuts;
        std::size_t expect = 0;
        for (const auto& [b, e] : segs) {
            if (b != expect || e <= b) throw DomainError("segment list is not contiguous");
            if (b != 0) cuts.push_back(b);
            expect = e;
        }
        return Segmentation(expect, std::move(cuts));
    }

    std::size_t num_points() const { return num_points_; }
    std::size_t segment_count() const { return cuts_.size() + 1; }
    const std::vector<std::size_t>& cuts() const { return cuts_; }

    // Half-open [begin, end) index ranges, in order.
    std::vector<std::pair<std::size_t, std::size_t>> segments() const {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        out.reserve(segment_count());
        std::size_t begin = 0;
        for (std::size_t c : cuts_) {
            out.emplace_back(begin, c);
            begin = c;
        }
        out.emplace_back(begin, num_points_);
        return out;
    }

    // Index of the segment containing grid index j.
    std::size_t segment_of(std::size_t j) const {
        return static_cast<std::size_t>(std::upper_bound(cuts_.begin(), cuts_.end(), j) -
                                        cuts_.begin());
    }

    friend bool operator==(const Segmentation& a, const Segmentation& b) {
        return a.num_points_ == b.num_points_ && a.cuts_ == b.cuts_;
    }

  private:
    std::size_t num_points_;
    std::vector<std::size_t> cuts_;
};

// Interpolation points for the continuous piecewise-linear model: grid indices
// k_0 = 0 < k_1 < ... < k_P = M-1. Adjacent chords share their knot.
class KnotSet {
  public:
    KnotSet(std::size_t num_points, std::vector<std::size_t> knots)
        : num_points_(num_points), knots_(std::move(knots)) {
        if (num_points_ < 2) throw DomainError("knots need at least 2 grid points");
        if (knots_.size() < 2 || knots_.front() != 0 || knots_.back() != num_points_ - 1)
            throw DomainError("knots must start at 0 and end at M-1");
        for (std::size_t i = 1; i < knots_.size(); ++i)
            if (!(knots_[i - 1] < knots_[i]))
                throw DomainError("knots must be strictly increasing");
    }

    std::size_t num_points() const { return num_points_; }
    std::size_t segment_count() const { return knots_.size() - 1; }  // P
    const std::vector<std::size_t>& knots() const { return knots_; }

    friend bool operator==(const KnotSet& a, const KnotSet& b) {
        return a.num_points_ == b.num_points_ && a.knots_ == b.knots_;
    }

  private:
    std::size_t num_points_;
    std::vector<std::size_t> knots_;
};

enum class SegmentModel { ConstantL2, ConstantL1, LineL2, InterpL2 };
enum class SetAggregate { SumOverCurves, MaxOverCurves };
// How the per-segment errors combine in the segmentation objective.
enum class SegmentAggregate { Sum, Max };

struct ModelSpec {
    SegmentModel model = SegmentModel::ConstantL2;
    SetAggregate set_aggregate = SetAggregate::SumOverCurves;
};

inline void validate_model_spec(const ModelSpec& spec) {
    if (spec.set_aggregate == SetAggregate::MaxOverCurves &&
        spec.model != SegmentModel::ConstantL2)
        throw DomainError("max-over-curves aggregation supports only the constant L2 model");
}

// Smallest segment usable by a model: chords need two anchor points.
inline std::size_t min_segment_length(SegmentModel model) {
    return model == SegmentModel::InterpL2 ? 2 : 1;
}

inline const char* to_string(SegmentModel m) {
    switch (m) {
        case SegmentModel::ConstantL2: return "const-l2";
        case SegmentModel::ConstantL1: return "const-l1";
        case SegmentModel::LineL2: return "line-l2";
        case SegmentModel::InterpL2: return "interp-l2";
    }
    return "?";
}

inline const char* to_string(SetAggregate a) {
    return a == SetAggregate::SumOverCurves ? "sum" : "max";
}

inline const char* to_string(SegmentAggregate a) {
    return a == SegmentAggregate::Sum ? "sum" : "max";
}

struct LineCoef {
    double intercept = 0.0;
    double slope = 0.0;
    double at(double t) const { return intercept + slope * t; }
    friend bool operator==(const LineCoef& a, const LineCoef& b) {
        return a.intercept == b.intercept && a.slope == b.slope;
    }
};

// A fitted piecewise prototype: the simple function summarizing one curve or
// one cluster. Constant and line kinds carry one parameter set per segment;
// the interpolation kind carries the value at every knot.
class Summary {
  public:
    static Summary piecewise_constant(SegmentModel kind, SampleGrid grid, Segmentation seg,
                                      std::vector<double> levels) {
        if (kind != SegmentModel::ConstantL2 && kind != SegmentModel::ConstantL1)
            throw DomainError("piecewise_constant expects a constant model kind");
        if (levels.size() != seg.segment_count())
            throw DomainError("level count does not match segment count");
        check_points(grid, seg.num_points());
        Summary s(kind, std::move(grid));
        s.segmentation_ = std::move(seg);
        s.levels_ = std::move(levels);
        return s;
    }

    static Summary piecewise_line(SampleGrid grid, Segmentation seg, std::vector<LineCoef> lines) {
        if (lines.size() != seg.segment_count())
            throw DomainError("line count does not match segment count");
        check_points(grid, seg.num_points());
        Summary s(SegmentModel::LineL2, std::move(grid));
        s.segmentation_ = std::move(seg);
        s.lines_ = std::move(lines);
        return s;
    }

    static Summary interpolation(SampleGrid grid, KnotSet knots, std::vector<double> knot_values) {
        if (knot_values.size() != knots.knots().size())
            throw DomainError("knot value count does not match knot count");
        check_points(grid, knots.num_points());
        Summary s(SegmentModel::InterpL2, std::move(grid));
        s.knots_ = std::move(knots);
        s.knot_values_ = std::move(knot_values);
        return s;
    }

    SegmentModel kind() const { return kind_; }
    const SampleGrid& grid() const { return grid_; }
    const std::optional<Segmentation>& segmentation() const { return segmentation_; }
    const std::optional<KnotSet>& knots() const { return knots_; }
    const std::vector<double>& levels() const { return levels_; }
    const std::vector<LineCoef>& lines() const { return lines_; }
    const std::vector<double>& knot_values() const { return knot_values_; }

    std::size_t segment_count() const {
        return knots_ ? knots_->segment_count() : segmentation_->segment_count();
    }

    // g(t) anywhere on [t_0, t_{M-1}]. Between grid points that straddle a
    // break, the left segment's model extends up to the next segment's first
    // grid point; the interpolation kind is continuous by construction.
    double evaluate(double t) const {
        const auto pts = grid_.points();
        if (!(t >= pts.front() && t <= pts.back()))
            throw DomainError("evaluation point outside the grid range");
        if (kind_ == SegmentModel::InterpL2) {
            const auto& ks = knots_->knots();
            // last knot a with t_a <= t, capped so a chord [a, a+1] exists
            std::size_t hi = 1;
            while (hi + 1 < ks.size() && pts[ks[hi]] <= t) ++hi;
            std::size_t a = ks[hi - 1], b = ks[hi];
            double w = (t - pts[a]) / (pts[b] - pts[a]);
            return knot_values_[hi - 1] + w * (knot_values_[hi] - knot_values_[hi - 1]);
        }
        // last grid index with t_j <= t
        std::size_t j = static_cast<std::size_t>(
            std::upper_bound(pts.begin(), pts.end(), t) - pts.begin());
        if (j > 0) --j;
        std::size_t p = segmentation_->segment_of(j);
        if (kind_ == SegmentModel::LineL2) return lines_[p].at(t);
        return levels_[p];
    }

    // g sampled at every grid point; knot values are reproduced exactly.
    std::vector<double> values_on_grid() const {
        const auto pts = grid_.points();
        std::vector<double> out(pts.size());
        if (kind_ == SegmentModel::InterpL2) {
            const auto& ks = knots_->knots();
            for (std::size_t c = 1; c < ks.size(); ++c) {
                std::size_t a = ks[c - 1], b = ks[c];
                out[a] = knot_values_[c - 1];
                out[b] = knot_values_[c];
                for (std::size_t j = a + 1; j < b; ++j) {
                    double w = (pts[j] - pts[a]) / (pts[b] - pts[a]);
                    out[j] = knot_values_[c - 1] + w * (knot_values_[c] - knot_values_[c - 1]);
                }
            }
            return out;
        }
        auto segs = segmentation_->segments();
        for (std::size_t p = 0; p < segs.size(); ++p)
            for (std::size_t j = segs[p].first; j < segs[p].second; ++j)
                out[j] = (kind_ == SegmentModel::LineL2) ? lines_[p].at(pts[j]) : levels_[p];
        return out;
    }

    friend bool operator==(const Summary& a, const Summary& b) {
        return a.kind_ == b.kind_ && a.grid_ == b.grid_ && a.segmentation_ == b.segmentation_ &&
               a.knots_ == b.knots_ && a.levels_ == b.levels_ && a.lines_ == b.lines_ &&
               a.knot_values_ == b.knot_values_;
    }

  private:
    Summary(SegmentModel kind, SampleGrid grid) : kind_(kind), grid_(std::move(grid)) {}

    static void check_points(const SampleGrid& grid, std::size_t num_points) {
        if (grid.size() != num_points)
            throw DomainError("segmentation does not match the grid size");
    }

    SegmentModel kind_;
    SampleGrid grid_;
    std::optional<Segmentation> segmentation_;
    std::optional<KnotSet> knots_;
    std::vector<double> levels_;
    std::vector<LineCoef> lines_;
    std::vector<double> knot_values_;
};

// Result of one clustering run: per-curve cluster index, per-cluster segment
// budget, the fitted prototypes, and the error trace (one entry per iteration,
// each recomputed directly from the data).
struct ClusterState {
    ModelSpec model;
    std::vector<std::size_t> assignment;  // N entries in [0, K)
    std::vector<std::size_t> allocation;  // K entries, each >= 1
    std::vector<Summary> summaries;       // K
    double total_error = 0.0;
    std::size_t iterations = 0;
    std::vector<double> trace;

    std::size_t cluster_count() const { return summaries.size(); }
};

}  // namespace curveseg
