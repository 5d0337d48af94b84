#pragma once

// Time grids, sampled paths, rough lifts and the bracket.

#include "roughstab/core.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <utility>

namespace roughstab {

class TimeGrid {
public:
    TimeGrid() = default;

    /// Uniform grid t0 + k (t1 - t0)/n; the last point is pinned to t1.
    static TimeGrid uniform(double t0, double t1, std::size_t n) {
        if (n < 1) throw std::invalid_argument("TimeGrid: n must be >= 1");
        if (!(t1 > t0)) throw std::invalid_argument("TimeGrid: t1 must exceed t0");
        TimeGrid g;
        g.points_.resize(n + 1);
        g.h_ = (t1 - t0) / static_cast<double>(n);
        for (std::size_t k = 0; k <= n; ++k) g.points_[k] = t0 + static_cast<double>(k) * g.h_;
        g.points_[n] = t1;
        g.uniform_ = true;
        return g;
    }

    static TimeGrid from_points(std::vector<double> pts) {
        if (pts.size() < 2) throw std::invalid_argument("TimeGrid: need at least two points");
        for (std::size_t k = 1; k < pts.size(); ++k)
            if (!(pts[k] > pts[k - 1])) throw std::invalid_argument("TimeGrid: points must be strictly increasing");
        TimeGrid g;
        g.points_ = std::move(pts);
        const std::size_t n = g.points_.size() - 1;
        g.h_ = (g.points_.back() - g.points_.front()) / static_cast<double>(n);
        // Uniform only when every step coincides with the nominal one in floating point.
        g.uniform_ = true;
        for (std::size_t k = 0; k <= n && g.uniform_; ++k) {
            const double expect = (k == n) ? g.points_.back() : g.points_.front() + static_cast<double>(k) * g.h_;
            g.uniform_ = (g.points_[k] == expect);
        }
        return g;
    }

    [[nodiscard]] std::size_t n() const { return points_.size() - 1; }
    [[nodiscard]] double t0() const { return points_.front(); }
    [[nodiscard]] double t1() const { return points_.back(); }
    [[nodiscard]] double operator[](std::size_t k) const { return points_[k]; }
    [[nodiscard]] const std::vector<double>& points() const { return points_; }
    [[nodiscard]] bool is_uniform() const { return uniform_; }
    /// Nominal step (exact step for uniform grids).
    [[nodiscard]] double step() const { return h_; }
    [[nodiscard]] double dt(std::size_t k) const { return points_[k + 1] - points_[k]; }

    /// Index of the cell [t_k, t_{k+1}] containing t (last cell for t = t1).
    [[nodiscard]] std::size_t cell(double t) const {
        if (t <= points_.front()) return 0;
        if (t >= points_.back()) return n() - 1;
        auto it = std::upper_bound(points_.begin(), points_.end(), t);
        return static_cast<std::size_t>(it - points_.begin()) - 1;
    }

    /// Index of t if it is a grid point, otherwise nullopt.
    [[nodiscard]] std::optional<std::size_t> index_of(double t) const {
        auto it = std::lower_bound(points_.begin(), points_.end(), t);
        if (it != points_.end() && *it == t) return static_cast<std::size_t>(it - points_.begin());
        return std::nullopt;
    }

    [[nodiscard]] bool same_as(const TimeGrid& o) const { return points_ == o.points_; }

private:
    std::vector<double> points_{0.0, 1.0};
    double h_ = 1.0;
    bool uniform_ = true;
};

/// Values stored column-wise: values.col(k) is the state at grid point k.
class SampledPath {
public:
    SampledPath() = default;
    SampledPath(TimeGrid grid, Mat values) : grid_(std::move(grid)), values_(std::move(values)) {
        if (static_cast<std::size_t>(values_.cols()) != grid_.n() + 1)
            throw std::invalid_argument("SampledPath: values must have grid.n + 1 columns");
        if (values_.rows() < 1) throw std::invalid_argument("SampledPath: dimension must be >= 1");
        if (!values_.allFinite()) throw std::invalid_argument("SampledPath: non-finite value");
    }

    [[nodiscard]] const TimeGrid& grid() const { return grid_; }
    [[nodiscard]] const Mat& values() const { return values_; }
    [[nodiscard]] std::size_t dim() const { return static_cast<std::size_t>(values_.rows()); }
    [[nodiscard]] std::size_t n() const { return grid_.n(); }
    [[nodiscard]] Vec at(std::size_t k) const { return values_.col(static_cast<Eigen::Index>(k)); }
    [[nodiscard]] Vec increment(std::size_t i, std::size_t j) const {
        return values_.col(static_cast<Eigen::Index>(j)) - values_.col(static_cast<Eigen::Index>(i));
    }

    /// Linear interpolation between grid values.
    [[nodiscard]] Vec value_at(double t) const {
        const std::size_t k = grid_.cell(t);
        const double lam = std::clamp((t - grid_[k]) / grid_.dt(k), 0.0, 1.0);
        if (lam == 0.0) return at(k);
        if (lam == 1.0) return at(k + 1);
        return at(k) + lam * increment(k, k + 1);
    }

    [[nodiscard]] Vec increment_at(double s, double t) const { return value_at(t) - value_at(s); }

    /// Rows (components) selected into a new path on the same grid.
    [[nodiscard]] SampledPath component(std::size_t c) const {
        return SampledPath(grid_, values_.row(static_cast<Eigen::Index>(c)));
    }

private:
    TimeGrid grid_;
    Mat values_ = Mat::Zero(1, 2);
};

/// Second level over a sampled path.
///
/// Each segment carries X_{i,i+1} = ½ Δ_i Δ_i^T + E_i with E_i the excess over the geometric
/// value (zero for the canonical lift). Prefix values X_{0,i} are precomputed and any grid pair
/// follows from Chen's relation, stored as X(j,k) = ∫ x^k_{s,r} dx^j_r so that
/// X_{s,t} − X_{s,u} − X_{u,t} = x_{u,t} x_{s,u}^T.
class RoughLift {
public:
    RoughLift() = default;

    /// Lift from explicit per-segment second levels X_{i,i+1}.
    static RoughLift from_segments(SampledPath path, const std::vector<Mat>& segments,
                                   std::optional<double> hurst_hint = std::nullopt) {
        if (segments.size() != path.n()) throw std::invalid_argument("RoughLift: need one segment matrix per cell");
        const auto m = static_cast<Eigen::Index>(path.dim());
        RoughLift L;
        L.path_ = std::move(path);
        L.hurst_ = hurst_hint;
        L.excess_.reserve(segments.size());
        L.geometric_ = true;
        for (std::size_t i = 0; i < segments.size(); ++i) {
            if (segments[i].rows() != m || segments[i].cols() != m)
                throw std::invalid_argument("RoughLift: segment matrix has wrong shape");
            const Vec d = L.path_.increment(i, i + 1);
            Mat e = segments[i] - 0.5 * outer(d, d);
            if (e.cwiseAbs().maxCoeff() != 0.0) L.geometric_ = false;
            L.excess_.push_back(std::move(e));
        }
        L.build_prefix();
        return L;
    }

    [[nodiscard]] const SampledPath& path() const { return path_; }
    [[nodiscard]] const TimeGrid& grid() const { return path_.grid(); }
    [[nodiscard]] std::size_t dim() const { return path_.dim(); }
    [[nodiscard]] std::size_t n() const { return path_.n(); }
    [[nodiscard]] std::optional<double> hurst_hint() const { return hurst_; }
    /// True when every segment excess is exactly zero and no pair overrides exist.
    [[nodiscard]] bool is_geometric() const { return geometric_ && !is_foreign(); }
    [[nodiscard]] const Mat& segment_excess(std::size_t i) const { return excess_[i]; }
    [[nodiscard]] Mat segment(std::size_t i) const {
        const Vec d = path_.increment(i, i + 1);
        return 0.5 * outer(d, d) + excess_[i];
    }

    [[nodiscard]] Vec x(std::size_t i, std::size_t j) const { return path_.increment(i, j); }

    /// X_{t_i,t_j} for grid indices i ≤ j.
    [[nodiscard]] Mat levy(std::size_t i, std::size_t j) const {
        if (i > j) throw std::invalid_argument("RoughLift::levy: requires i <= j");
        if (null_level2_) return Mat::Zero(static_cast<Eigen::Index>(dim()), static_cast<Eigen::Index>(dim()));
        if (!overrides_.empty()) {
            auto it = overrides_.find({i, j});
            if (it != overrides_.end()) return it->second;
        }
        if (i == j) return Mat::Zero(static_cast<Eigen::Index>(dim()), static_cast<Eigen::Index>(dim()));
        if (i == 0) return prefix_[j];
        return prefix_[j] - prefix_[i] - outer(path_.increment(i, j), path_.increment(0, i));
    }

    /// Frobenius norm of X_{t_i,t_j} without allocating (used by pair sups).
    [[nodiscard]] double levy_norm(std::size_t i, std::size_t j) const {
        if (i == j || null_level2_) return 0.0;
        if (!overrides_.empty()) return levy(i, j).norm();
        const Mat& Pj = prefix_[j];
        const auto m = Pj.rows();
        const auto& v = path_.values();
        const auto ci = static_cast<Eigen::Index>(i), cj = static_cast<Eigen::Index>(j);
        double acc = 0.0;
        for (Eigen::Index b = 0; b < m; ++b) {
            const double base = v(b, ci) - v(b, 0);
            for (Eigen::Index a = 0; a < m; ++a) {
                double e = Pj(a, b);
                if (i != 0) e -= prefix_[i](a, b) + (v(a, cj) - v(a, ci)) * base;
                acc += e * e;
            }
        }
        return std::sqrt(acc);
    }

    /// X_{s,t} for arbitrary times, through the linear interpolation within cells.
    [[nodiscard]] Mat levy_at(double s, double t) const {
        if (s > t) throw std::invalid_argument("RoughLift::levy_at: requires s <= t");
        const auto m = static_cast<Eigen::Index>(dim());
        if (s == t || null_level2_) return Mat::Zero(m, m);
        const auto is = grid().index_of(s);
        const auto it = grid().index_of(t);
        if (is && it) return levy(*is, *it);
        const std::size_t a = grid().cell(s);
        const std::size_t b = grid().cell(t);
        const double la = (s - grid()[a]) / grid().dt(a);
        const double lb = (t - grid()[b]) / grid().dt(b);
        if (a == b || (it && *it == a + 1 && !is)) {
            const double l1 = (a == b) ? lb : 1.0;
            return partial(a, l1 - la);
        }
        // [s, t_{a+1}] then [t_{a+1}, t_b] then [t_b, t], composed with Chen.
        Mat X = partial(a, 1.0 - la);
        Vec xs = path_.value_at(s);
        Vec cur = path_.at(a + 1);
        if (b > a + 1) {
            const Vec mid = path_.increment(a + 1, b);
            X += levy(a + 1, b) + outer(mid, cur - xs);
            cur = path_.at(b);
        }
        if (lb > 0.0) {
            const Vec tail = lb * path_.increment(b, b + 1);
            X += partial(b, lb) + outer(tail, cur - xs);
        }
        return X;
    }

    /// X_{t_0,t} at any time t; X_{s,t} = P(t) − P(s) − x_{s,t} x_{t_0,s}^T for s ≤ t.
    [[nodiscard]] Mat prefix_at(double t) const {
        const auto it = grid().index_of(t);
        if (it) return prefix_[*it];
        const std::size_t a = grid().cell(t);
        const double lam = (t - grid()[a]) / grid().dt(a);
        return prefix_[a] + partial(a, lam) + outer(lam * path_.increment(a, a + 1), path_.increment(0, a));
    }

    /// True when pair values do not follow from the segment data (overrides or a null second level).
    [[nodiscard]] bool is_foreign() const { return !overrides_.empty() || null_level2_; }

    /// Synthetic fixture with X ≡ 0 on every pair. It violates Chen's relation unless x is constant.
    [[nodiscard]] static RoughLift null_second_level(SampledPath path) {
        const auto m = static_cast<Eigen::Index>(path.dim());
        RoughLift L = from_segments(path, std::vector<Mat>(path.n(), Mat::Zero(m, m)));
        L.null_level2_ = true;
        return L;
    }

    /// Copy with X_{i,j} replaced by an arbitrary matrix, to model foreign lifts.
    [[nodiscard]] RoughLift with_override(std::size_t i, std::size_t j, Mat value) const {
        if (i > j || j > n()) throw std::invalid_argument("RoughLift::with_override: bad index pair");
        RoughLift copy = *this;
        copy.overrides_[{i, j}] = std::move(value);
        return copy;
    }

private:
    Mat partial(std::size_t cell, double frac) const {
        const Vec d = frac * path_.increment(cell, cell + 1);
        return 0.5 * outer(d, d) + frac * excess_[cell];
    }

    void build_prefix() {
        const auto m = static_cast<Eigen::Index>(dim());
        prefix_.assign(n() + 1, Mat::Zero(m, m));
        for (std::size_t i = 0; i < n(); ++i) {
            const Vec d = path_.increment(i, i + 1);
            prefix_[i + 1] = prefix_[i] + 0.5 * outer(d, d) + excess_[i] + outer(d, path_.increment(0, i));
        }
    }

    SampledPath path_;
    std::vector<Mat> excess_;
    std::vector<Mat> prefix_;
    std::map<std::pair<std::size_t, std::size_t>, Mat> overrides_;
    std::optional<double> hurst_;
    bool geometric_ = true;
    bool null_level2_ = false;
};

/// Canonical geometric lift of the piecewise-linear interpolation.
[[nodiscard]] inline RoughLift lift_piecewise_linear(const SampledPath& path,
                                                     std::optional<double> hurst_hint = std::nullopt) {
    std::vector<Mat> segs;
    segs.reserve(path.n());
    for (std::size_t i = 0; i < path.n(); ++i) {
        const Vec d = path.increment(i, i + 1);
        segs.push_back(0.5 * outer(d, d));
    }
    return RoughLift::from_segments(path, segs, hurst_hint);
}

/// Itô-type lift: geometric value minus ½(t_j − t_i)·Id. Its bracket is t·Id.
[[nodiscard]] inline RoughLift lift_ito_type(const SampledPath& path) {
    std::vector<Mat> segs;
    segs.reserve(path.n());
    const auto m = static_cast<Eigen::Index>(path.dim());
    for (std::size_t i = 0; i < path.n(); ++i) {
        const Vec d = path.increment(i, i + 1);
        segs.push_back(0.5 * outer(d, d) - 0.5 * path.grid().dt(i) * Mat::Identity(m, m));
    }
    return RoughLift::from_segments(path, segs);
}

/// X_{i,j} − X_{i,k} − X_{k,j} − x_{k,j} ⊗ x_{i,k}.
[[nodiscard]] inline Mat chen_defect(const RoughLift& lift, std::size_t i, std::size_t k, std::size_t j) {
    if (!(i <= k && k <= j) || j > lift.n())
        throw std::invalid_argument("chen_defect: indices must satisfy i <= k <= j <= n");
    return lift.levy(i, j) - lift.levy(i, k) - lift.levy(k, j) - outer(lift.x(k, j), lift.x(i, k));
}

/// Sym(X_{i,j}) − ½ x_{i,j} ⊗ x_{i,j}; zero for geometric lifts.
[[nodiscard]] inline Mat symmetry_defect(const RoughLift& lift, std::size_t i, std::size_t j) {
    const Vec d = lift.x(i, j);
    return sym(lift.levy(i, j)) - 0.5 * outer(d, d);
}

/// [x]_{t_0,t_i} for every grid point.
class BracketPath {
public:
    BracketPath() = default;
    BracketPath(TimeGrid grid, std::vector<Mat> values) : grid_(std::move(grid)), values_(std::move(values)) {}

    [[nodiscard]] const TimeGrid& grid() const { return grid_; }
    [[nodiscard]] const std::vector<Mat>& values() const { return values_; }
    [[nodiscard]] const Mat& at(std::size_t i) const { return values_[i]; }
    /// [x]_{t_i,t_j}; the bracket is additive so increments compose.
    [[nodiscard]] Mat increment(std::size_t i, std::size_t j) const { return values_[j] - values_[i]; }
    [[nodiscard]] double max_abs() const {
        double m = 0.0;
        for (const auto& v : values_) m = std::max(m, v.cwiseAbs().maxCoeff());
        return m;
    }

private:
    TimeGrid grid_;
    std::vector<Mat> values_;
};

/// [x]_{s,t} = x_{s,t} ⊗ x_{s,t} − 2 Sym(X_{s,t}) for a single pair.
[[nodiscard]] inline Mat bracket_pair(const RoughLift& lift, std::size_t i, std::size_t j) {
    const Vec d = lift.x(i, j);
    return outer(d, d) - 2.0 * sym(lift.levy(i, j));
}

[[nodiscard]] inline BracketPath bracket(const RoughLift& lift) {
    std::vector<Mat> vals;
    vals.reserve(lift.n() + 1);
    for (std::size_t i = 0; i <= lift.n(); ++i) vals.push_back(bracket_pair(lift, 0, i));
    return BracketPath(lift.grid(), std::move(vals));
}

}  // namespace roughstab
