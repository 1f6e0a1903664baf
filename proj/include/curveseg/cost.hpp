#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "types.hpp"

namespace curveseg {

// Per-segment approximation errors Q. All queries use half-open 0-based index
// ranges [first, last). Constant-L2, line-L2 and interpolation-L2 answer in
// O(1) from prefix sums; constant-L1 sorts the segment per query.

namespace detail {

// Segment sums of squares cancel catastrophically when the segment is nearly
// constant; tiny negative results within noise of the data scale collapse to
// zero, anything worse is a bug.
inline double clamp_sse(double value, double scale) {
    if (value >= 0.0) return value;
    if (value >= -1e-9 * std::max(scale, 1.0)) return 0.0;
    throw InternalError("segment cost went negative beyond rounding noise");
}

inline double range_sum(const std::vector<double>& prefix, std::size_t first, std::size_t last) {
    return prefix[last] - prefix[first];
}

}  // namespace detail

// Cumulative sums over index prefixes; entry 0 is 0 so any segment aggregate
// is one subtraction. The source samples stay bound to the stats: prefix
// subtraction carries an absolute error floor of eps * prefix magnitude, so
// short segments (whose optimal errors can be arbitrarily small) are answered
// from the raw values instead.
struct PrefixStats {
    std::vector<double> sum_v;   // sum of s
    std::vector<double> sum_vv;  // sum of s^2
    std::vector<double> sum_t;   // sum of t
    std::vector<double> sum_tt;  // sum of t^2
    std::vector<double> sum_tv;  // sum of t*s
    std::vector<double> values;  // the bound samples
    std::vector<double> t;       // their abscissae

    std::size_t size() const { return sum_v.empty() ? 0 : sum_v.size() - 1; }
};

// Below this segment length costs are computed straight from the samples.
inline constexpr std::size_t kDirectSegmentLimit = 32;

inline PrefixStats build_prefix_stats(std::span<const double> values, std::span<const double> t) {
    if (values.size() != t.size()) throw DomainError("curve and grid sizes differ");
    const std::size_t m = values.size();
    PrefixStats s;
    s.values.assign(values.begin(), values.end());
    s.t.assign(t.begin(), t.end());
    s.sum_v.assign(m + 1, 0.0);
    s.sum_vv.assign(m + 1, 0.0);
    s.sum_t.assign(m + 1, 0.0);
    s.sum_tt.assign(m + 1, 0.0);
    s.sum_tv.assign(m + 1, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        s.sum_v[j + 1] = s.sum_v[j] + values[j];
        s.sum_vv[j + 1] = s.sum_vv[j] + values[j] * values[j];
        s.sum_t[j + 1] = s.sum_t[j] + t[j];
        s.sum_tt[j + 1] = s.sum_tt[j] + t[j] * t[j];
        s.sum_tv[j + 1] = s.sum_tv[j] + t[j] * values[j];
    }
    return s;
}

inline PrefixStats build_prefix_stats(const CurveSet& set, std::size_t row) {
    return build_prefix_stats(set.row(row), set.grid().points());
}

// Sum of squared deviations from the segment mean.
inline double cost_constant_l2(const PrefixStats& s, std::size_t first, std::size_t last) {
    if (first >= last || last > s.size()) throw DomainError("bad segment range");
    const double n = static_cast<double>(last - first);
    if (last - first <= kDirectSegmentLimit) {
        double mean = 0.0;
        for (std::size_t j = first; j < last; ++j) mean += s.values[j];
        mean /= n;
        double sse = 0.0;
        for (std::size_t j = first; j < last; ++j) {
            const double d = s.values[j] - mean;
            sse += d * d;
        }
        return sse;
    }
    const double sv = detail::range_sum(s.sum_v, first, last);
    const double svv = detail::range_sum(s.sum_vv, first, last);
    return detail::clamp_sse(svv - sv * sv / n, svv);
}

// Sum of absolute deviations from the segment median. Even-length segments use
// the average of the two central order statistics.
inline double cost_constant_l1(std::span<const double> values, std::size_t first, std::size_t last) {
    if (first >= last || last > values.size()) throw DomainError("bad segment range");
    std::vector<double> seg(values.begin() + first, values.begin() + last);
    std::sort(seg.begin(), seg.end());
    const std::size_t n = seg.size();
    const double median =
        (n % 2 == 1) ? seg[n / 2] : 0.5 * (seg[n / 2 - 1] + seg[n / 2]);
    double total = 0.0;
    for (double v : seg) total += std::abs(v - median);
    return total;
}

inline double segment_median(std::span<const double> values, std::size_t first, std::size_t last) {
    std::vector<double> seg(values.begin() + first, values.begin() + last);
    std::sort(seg.begin(), seg.end());
    const std::size_t n = seg.size();
    return (n % 2 == 1) ? seg[n / 2] : 0.5 * (seg[n / 2 - 1] + seg[n / 2]);
}

// Residual sum of squares of the least-squares line of s against t. A line
// through one or two points is exact. Longer prefix-answered segments center
// the t moments on the segment's left anchor; the raw t*t moments lose too
// many digits for segments far out on the axis.
inline double cost_line_l2(const PrefixStats& s, std::size_t first, std::size_t last) {
    if (first >= last || last > s.size()) throw DomainError("bad segment range");
    if (last - first <= 2) return 0.0;
    const double n = static_cast<double>(last - first);
    if (last - first <= kDirectSegmentLimit) {
        double mt = 0.0, mv = 0.0;
        for (std::size_t j = first; j < last; ++j) {
            mt += s.t[j];
            mv += s.values[j];
        }
        mt /= n;
        mv /= n;
        double sxx = 0.0, sxy = 0.0, syy = 0.0;
        for (std::size_t j = first; j < last; ++j) {
            const double dt = s.t[j] - mt, dv = s.values[j] - mv;
            sxx += dt * dt;
            sxy += dt * dv;
            syy += dv * dv;
        }
        if (sxx <= 0.0) return syy;
        return detail::clamp_sse(syy - sxy * sxy / sxx, syy);
    }
    const double st = detail::range_sum(s.sum_t, first, last);
    const double sv = detail::range_sum(s.sum_v, first, last);
    const double stt = detail::range_sum(s.sum_tt, first, last);
    const double stv = detail::range_sum(s.sum_tv, first, last);
    const double svv = detail::range_sum(s.sum_vv, first, last);
    const double ta = s.t[first];
    const double dst = st - n * ta;                         // sum (t - t_a)
    const double dstt = stt - 2.0 * ta * st + n * ta * ta;  // sum (t - t_a)^2
    const double dstv = stv - ta * sv;                      // sum (t - t_a) v
    const double sxx = dstt - dst * dst / n;
    const double sxy = dstv - dst * sv / n;
    const double syy = svv - sv * sv / n;
    if (sxx <= 0.0) return detail::clamp_sse(syy, svv);  // unreachable on a valid grid
    return detail::clamp_sse(syy - sxy * sxy / sxx, svv);
}

// Least-squares line parameters for one segment, computed from the raw values
// (two-pass, centered) rather than prefix differences.
inline LineCoef fit_line(std::span<const double> values, std::span<const double> t,
                         std::size_t first, std::size_t last) {
    const std::size_t n = last - first;
    if (n == 0) throw DomainError("bad segment range");
    double mt = 0.0, mv = 0.0;
    for (std::size_t j = first; j < last; ++j) {
        mt += t[j];
        mv += values[j];
    }
    mt /= static_cast<double>(n);
    mv /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t j = first; j < last; ++j) {
        sxx += (t[j] - mt) * (t[j] - mt);
        sxy += (t[j] - mt) * (values[j] - mv);
    }
    LineCoef c;
    c.slope = (sxx > 0.0) ? sxy / sxx : 0.0;
    c.intercept = mv - c.slope * mt;
    return c;
}

// Total squared error of the linear interpolation anchored at the segment's
// two endpoints. Endpoints contribute zero. Prefix-answered segments center
// the sums on the left anchor (t_a, v_a); expanding around the raw origin
// multiplies the cancellation noise by t^2.
inline double cost_interp_l2(const PrefixStats& s, std::size_t first, std::size_t last) {
    if (last - first < 2 || last > s.size())
        throw DomainError("interpolation segment needs at least two points");
    const std::size_t a = first, b = last - 1;
    const double beta = (s.values[b] - s.values[a]) / (s.t[b] - s.t[a]);
    const double va = s.values[a], ta = s.t[a];
    if (last - first <= kDirectSegmentLimit) {
        double err = 0.0;
        for (std::size_t j = first + 1; j + 1 < last; ++j) {
            const double d = s.values[j] - (va + beta * (s.t[j] - ta));
            err += d * d;
        }
        return err;
    }
    const double n = static_cast<double>(last - first);
    const double sv = detail::range_sum(s.sum_v, first, last);
    const double svv = detail::range_sum(s.sum_vv, first, last);
    const double st = detail::range_sum(s.sum_t, first, last);
    const double stt = detail::range_sum(s.sum_tt, first, last);
    const double stv = detail::range_sum(s.sum_tv, first, last);
    const double dv2 = svv - 2.0 * va * sv + n * va * va;      // sum (v - v_a)^2
    const double dt2 = stt - 2.0 * ta * st + n * ta * ta;      // sum (t - t_a)^2
    const double dvt = stv - ta * sv - va * st + n * ta * va;  // sum (v - v_a)(t - t_a)
    const double err = dv2 - 2.0 * beta * dvt + beta * beta * dt2;
    return detail::clamp_sse(err, std::abs(dv2) + beta * beta * std::abs(dt2));
}

// Sufficient statistics of a curve subset: the member-mean curve's prefix
// stats plus the per-column residual around the mean, whose segment sums the
// Huygens decomposition needs.
struct SetStats {
    PrefixStats mean_stats;
    std::vector<double> mean;             // member-mean curve
    std::vector<double> residual_prefix;  // length M+1, entry 0 = 0
    std::size_t members = 0;

    std::size_t size() const { return mean.size(); }
};

inline SetStats build_set_stats(const CurveSet& set, std::span<const std::size_t> members) {
    if (members.empty()) throw DomainError("empty curve subset");
    const std::size_t m = set.points();
    SetStats out;
    out.members = members.size();
    out.mean.assign(m, 0.0);
    for (std::size_t i : members) {
        auto r = set.row(i);
        for (std::size_t j = 0; j < m; ++j) out.mean[j] += r[j];
    }
    const double inv = 1.0 / static_cast<double>(members.size());
    for (std::size_t j = 0; j < m; ++j) out.mean[j] *= inv;
    out.residual_prefix.assign(m + 1, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        double r = 0.0;
        for (std::size_t i : members) {
            const double d = set.value(i, j) - out.mean[j];
            r += d * d;
        }
        out.residual_prefix[j + 1] = out.residual_prefix[j] + r;
    }
    out.mean_stats = build_prefix_stats(out.mean, set.grid().points());
    return out;
}

inline double set_residual(const SetStats& s, std::size_t first, std::size_t last) {
    return s.residual_prefix[last] - s.residual_prefix[first];
}

// Sum-of-L2 set cost via the Huygens decomposition:
//   Q(G, seg) = |G| * Q(mean curve, seg) + residual(seg).
// The interpolation kind anchors the chord at the mean curve's endpoints.
inline double cost_set_sum(const SetStats& s, std::size_t first, std::size_t last,
                           SegmentModel kind) {
    const double n = static_cast<double>(s.members);
    double mean_cost = 0.0;
    switch (kind) {
        case SegmentModel::ConstantL2:
            mean_cost = cost_constant_l2(s.mean_stats, first, last);
            break;
        case SegmentModel::LineL2:
            mean_cost = cost_line_l2(s.mean_stats, first, last);
            break;
        case SegmentModel::InterpL2:
            mean_cost = cost_interp_l2(s.mean_stats, first, last);
            break;
        case SegmentModel::ConstantL1:
            throw DomainError("constant-L1 set cost has no mean-curve reduction");
    }
    return n * mean_cost + set_residual(s, first, last);
}

// Sum-of-L1 set cost: optimal level is the pooled median over members x columns.
inline double cost_set_constant_l1(const CurveSet& set, std::span<const std::size_t> members,
                                   std::size_t first, std::size_t last) {
    if (members.empty() || first >= last || last > set.points())
        throw DomainError("bad set segment query");
    std::vector<double> pool;
    pool.reserve(members.size() * (last - first));
    for (std::size_t i : members)
        for (std::size_t j = first; j < last; ++j) pool.push_back(set.value(i, j));
    std::sort(pool.begin(), pool.end());
    const std::size_t n = pool.size();
    const double median =
        (n % 2 == 1) ? pool[n / 2] : 0.5 * (pool[n / 2 - 1] + pool[n / 2]);
    double total = 0.0;
    for (double v : pool) total += std::abs(v - median);
    return total;
}

inline double pooled_median(const CurveSet& set, std::span<const std::size_t> members,
                            std::size_t first, std::size_t last) {
    std::vector<double> pool;
    pool.reserve(members.size() * (last - first));
    for (std::size_t i : members)
        for (std::size_t j = first; j < last; ++j) pool.push_back(set.value(i, j));
    std::sort(pool.begin(), pool.end());
    const std::size_t n = pool.size();
    return (n % 2 == 1) ? pool[n / 2] : 0.5 * (pool[n / 2 - 1] + pool[n / 2]);
}

namespace detail {

// min over a of max over members of sum_j (s_i(t_j) - a)^2. Every member's
// objective is a parabola with the same curvature n, so the upper envelope is
// convex and the max at any a is decided by the per-member segment mean m_i
// and internal scatter c_i. Bisection brackets the optimum, then the exact
// crossing of the two parabolas active at the bracket ends finishes the job.
struct MaxConstantSolve {
    double level = 0.0;
    double cost = 0.0;
};

inline MaxConstantSolve solve_max_constant(std::span<const double> seg_mean,
                                           std::span<const double> seg_sse, double n) {
    const std::size_t count = seg_mean.size();
    auto value = [&](double a, std::size_t i) {
        const double d = a - seg_mean[i];
        return n * d * d + seg_sse[i];
    };
    auto argmax = [&](double a) {
        std::size_t best = 0;
        double bv = value(a, 0);
        for (std::size_t i = 1; i < count; ++i) {
            const double v = value(a, i);
            if (v > bv) {
                bv = v;
                best = i;
            }
        }
        return best;
    };
    double lo = seg_mean[0], hi = seg_mean[0];
    for (double m : seg_mean) {
        lo = std::min(lo, m);
        hi = std::max(hi, m);
    }
    MaxConstantSolve out;
    if (lo == hi) {
        out.level = lo;
        out.cost = value(lo, argmax(lo));
        return out;
    }
    for (int iter = 0; iter < 200 && hi - lo > 1e-13; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const std::size_t i = argmax(mid);
        if (seg_mean[i] > mid)
            lo = mid;  // active parabola still decreasing
        else if (seg_mean[i] < mid)
            hi = mid;
        else {
            lo = hi = mid;  // sitting on the active vertex
            break;
        }
    }
    const std::size_t il = argmax(lo), ir = argmax(hi);
    double best_a = 0.5 * (lo + hi);
    if (il != ir && seg_mean[il] != seg_mean[ir]) {
        // equal curvature: parabolas cross where the linear parts agree
        const double cross =
            (seg_sse[ir] - seg_sse[il] + n * (seg_mean[ir] * seg_mean[ir] -
                                              seg_mean[il] * seg_mean[il])) /
            (2.0 * n * (seg_mean[ir] - seg_mean[il]));
        if (cross >= lo - 1e-9 && cross <= hi + 1e-9) best_a = cross;
    }
    double best_cost = value(best_a, argmax(best_a));
    for (double cand : {lo, hi, seg_mean[il], seg_mean[ir]}) {
        const double c = value(cand, argmax(cand));
        if (c < best_cost) {
            best_cost = c;
            best_a = cand;
        }
    }
    out.level = best_a;
    out.cost = best_cost;
    return out;
}

}  // namespace detail

// Max-over-curves constant-L2 set cost, exposed with the optimal level so the
// fitting stage can reuse the solve.
inline detail::MaxConstantSolve solve_set_max(const CurveSet& set,
                                              std::span<const std::size_t> members,
                                              std::size_t first, std::size_t last) {
    if (members.empty() || first >= last || last > set.points())
        throw DomainError("bad set segment query");
    const double n = static_cast<double>(last - first);
    std::vector<double> seg_mean(members.size()), seg_sse(members.size());
    for (std::size_t idx = 0; idx < members.size(); ++idx) {
        auto r = set.row(members[idx]);
        double sv = 0.0, svv = 0.0;
        for (std::size_t j = first; j < last; ++j) {
            sv += r[j];
            svv += r[j] * r[j];
        }
        seg_mean[idx] = sv / n;
        seg_sse[idx] = detail::clamp_sse(svv - sv * sv / n, svv);
    }
    return detail::solve_max_constant(seg_mean, seg_sse, n);
}

inline double cost_set_max(const CurveSet& set, std::span<const std::size_t> members,
                           std::size_t first, std::size_t last) {
    return solve_set_max(set, members, first, last).cost;
}

// -- callable providers for the segmentation DP ------------------------------

class ConstantL2Cost {
  public:
    explicit ConstantL2Cost(PrefixStats stats) : stats_(std::move(stats)) {}
    ConstantL2Cost(std::span<const double> values, std::span<const double> t)
        : stats_(build_prefix_stats(values, t)) {}
    double operator()(std::size_t first, std::size_t last) const {
        return cost_constant_l2(stats_, first, last);
    }

  private:
    PrefixStats stats_;
};

class ConstantL1Cost {
  public:
    explicit ConstantL1Cost(std::span<const double> values)
        : values_(values.begin(), values.end()) {}
    double operator()(std::size_t first, std::size_t last) const {
        return cost_constant_l1(values_, first, last);
    }

  private:
    std::vector<double> values_;
};

class LineL2Cost {
  public:
    LineL2Cost(std::span<const double> values, std::span<const double> t)
        : stats_(build_prefix_stats(values, t)) {}
    double operator()(std::size_t first, std::size_t last) const {
        return cost_line_l2(stats_, first, last);
    }

  private:
    PrefixStats stats_;
};

class InterpL2Cost {
  public:
    InterpL2Cost(std::span<const double> values, std::span<const double> t)
        : stats_(build_prefix_stats(values, t)) {}
    double operator()(std::size_t first, std::size_t last) const {
        return cost_interp_l2(stats_, first, last);
    }

  private:
    PrefixStats stats_;
};

// Type-erased segment cost; convenient where the model kind is runtime data.
using SegmentCostFn = std::function<double(std::size_t, std::size_t)>;

inline SegmentCostFn make_curve_cost(std::span<const double> values, std::span<const double> t,
                                     SegmentModel kind) {
    switch (kind) {
        case SegmentModel::ConstantL2: return ConstantL2Cost(values, t);
        case SegmentModel::ConstantL1: return ConstantL1Cost(values);
        case SegmentModel::LineL2: return LineL2Cost(values, t);
        case SegmentModel::InterpL2: return InterpL2Cost(values, t);
    }
    throw DomainError("unknown segment model");
}

// Set-level cost bound to a shared SetStats (sum aggregation) or to the raw
// member rows (max aggregation, pooled-median L1).
inline SegmentCostFn make_set_cost(const CurveSet& set, std::vector<std::size_t> members,
                                   const ModelSpec& spec) {
    validate_model_spec(spec);
    if (spec.set_aggregate == SetAggregate::MaxOverCurves) {
        return [&set, members = std::move(members)](std::size_t first, std::size_t last) {
            return cost_set_max(set, members, first, last);
        };
    }
    if (spec.model == SegmentModel::ConstantL1) {
        return [&set, members = std::move(members)](std::size_t first, std::size_t last) {
            return cost_set_constant_l1(set, members, first, last);
        };
    }
    auto stats = std::make_shared<SetStats>(build_set_stats(set, members));
    return [stats, kind = spec.model](std::size_t first, std::size_t last) {
        return cost_set_sum(*stats, first, last, kind);
    };
}

}  // namespace curveseg
