#pragma once

// Greedy time sequences for the rough-path functional and their counting bounds.

#include "roughstab/norms.hpp"

namespace roughstab {

struct GreedySequence {
    double gamma = 0.5;
    double alpha = 0.4;
    bool augmented = false;
    double a = 0.0, b = 1.0;
    std::vector<double> times;  ///< τ_0 = a < τ_1 < ... < τ_N = b
    [[nodiscard]] std::size_t count() const { return times.empty() ? 0 : times.size() - 1; }
};

/// Acceptance slack on the threshold; absorbs the last bisection ulp before the interval end.
inline constexpr double kGreedyRelTol = 1e-12;

/// Incremental evaluation of
///   F(t) = ⟦x⟧_{α,[τ,t]} + ⟦X⟧_{2α,[τ,t]}^{1/2}  (+ (t − τ)^{1−2α} when augmented)
/// over the point set {τ} ∪ (grid ∩ (τ,t)) ∪ {t} of the piecewise-linear path. For the first level
/// this is the exact continuum value (the pair ratio is quasi-convex along each linear piece).
class GreedyScanner {
public:
    GreedyScanner(const RoughLift& lift, double alpha, bool augmented, double tau)
        : lift_(lift), alpha_(alpha), augmented_(augmented), tau_(tau), m_(lift.dim()),
          x0_(lift.path().at(0)) {
        append(tau);
    }

    [[nodiscard]] double tau() const { return tau_; }
    [[nodiscard]] double last() const { return pts_.back(); }

    /// Functional value if t (> last point) were the right end.
    [[nodiscard]] double value_with(double t) const {
        auto [s1, s2] = extend(t);
        return compose(t, std::max(S1_, s1), std::max(S2_, s2));
    }

    /// Commits t as a point of the set.
    void push(double t) {
        auto [s1, s2] = extend(t);
        S1_ = std::max(S1_, s1);
        S2_ = std::max(S2_, s2);
        append(t);
    }

    [[nodiscard]] double current() const { return compose(pts_.back(), S1_, S2_); }

private:
    [[nodiscard]] double compose(double t, double s1, double s2) const {
        double v = s1 + std::sqrt(s2);
        if (augmented_ && t > tau_) v += std::pow(t - tau_, 1.0 - 2.0 * alpha_);
        return v;
    }

    void append(double t) {
        pts_.push_back(t);
        const Vec x = lift_.path().value_at(t);
        const Mat P = lift_.prefix_at(t);
        for (std::size_t a = 0; a < m_; ++a) xs_.push_back(x(static_cast<Eigen::Index>(a)));
        for (Eigen::Index i = 0; i < P.size(); ++i) Ps_.push_back(P.data()[i]);
    }

    [[nodiscard]] std::pair<double, double> extend(double t) const {
        const Vec xt = lift_.path().value_at(t);
        const Mat Pt = lift_.prefix_at(t);
        double s1 = 0.0, s2 = 0.0;
        const std::size_t mm = m_ * m_;
        for (std::size_t k = 0; k < pts_.size(); ++k) {
            const double dt = t - pts_[k];
            const double* xu = &xs_[k * m_];
            double d2 = 0.0;
            for (std::size_t a = 0; a < m_; ++a) {
                const double d = xt(static_cast<Eigen::Index>(a)) - xu[a];
                d2 += d * d;
            }
            double X2 = 0.0;
            if (lift_.is_foreign()) {
                X2 = lift_.levy_at(pts_[k], t).squaredNorm();
            } else {
                // Column-major: entry (a,b) is P(a + m b); X_{u,t} = P_t − P_u − x_{u,t} (x_u − x_0)^T.
                const double* Pu = &Ps_[k * mm];
                for (std::size_t b = 0; b < m_; ++b) {
                    const double base = xu[b] - x0_(static_cast<Eigen::Index>(b));
                    for (std::size_t a = 0; a < m_; ++a) {
                        const double inc = xt(static_cast<Eigen::Index>(a)) - xu[a];
                        const double e = Pt.data()[a + m_ * b] - Pu[a + m_ * b] - inc * base;
                        X2 += e * e;
                    }
                }
            }
            s1 = std::max(s1, std::sqrt(d2) / std::pow(dt, alpha_));
            s2 = std::max(s2, std::sqrt(X2) / std::pow(dt, 2.0 * alpha_));
        }
        return {s1, s2};
    }

    const RoughLift& lift_;
    double alpha_;
    bool augmented_;
    double tau_;
    std::size_t m_;
    Vec x0_;
    std::vector<double> pts_;
    std::vector<double> xs_;
    std::vector<double> Ps_;
    double S1_ = 0.0, S2_ = 0.0;
};

/// Functional on [s,t] evaluated from scratch (used to audit sequences).
[[nodiscard]] inline double greedy_functional(const RoughLift& lift, double alpha, bool augmented, double s, double t) {
    GreedyScanner sc(lift, alpha, augmented, s);
    const auto& g = lift.grid();
    for (std::size_t k = g.cell(s) + 1; k <= g.n() && g[k] < t; ++k)
        if (g[k] > s) sc.push(g[k]);
    if (t > sc.last()) sc.push(t);
    return sc.current();
}

namespace detail {

inline double next_greedy_time(const RoughLift& lift, double alpha, bool augmented, double gamma, double tau,
                               double b) {
    const auto& g = lift.grid();
    GreedyScanner sc(lift, alpha, augmented, tau);
    std::size_t k = g.cell(tau);
    while (k <= g.n() && g[k] <= tau) ++k;
    for (;;) {
        const double c = (k <= g.n()) ? std::min(g[k], b) : b;
        const double Fc = sc.value_with(c);
        if (c >= b) {
            if (Fc <= gamma * (1.0 + kGreedyRelTol)) return b;
        } else if (Fc <= gamma) {
            sc.push(c);
            ++k;
            continue;
        }
        // Threshold crossed in (last, c]: bracketed root of F − γ on the continuous right end,
        // Illinois false position with a bisection step whenever progress stalls.
        double lo = sc.last(), hi = c;
        double flo = (lo > tau ? sc.current() : 0.0) - gamma, fhi = Fc - gamma;
        int side = 0;
        for (int it = 0; it < 200 && hi > std::nextafter(lo, hi); ++it) {
            double mid = (it % 4 == 3) ? 0.5 * (lo + hi) : (lo * fhi - hi * flo) / (fhi - flo);
            if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            const double fm = sc.value_with(mid) - gamma;
            if (fm <= 0.0) {
                lo = mid;
                flo = fm;
                if (side == -1) fhi *= 0.5;
                side = -1;
                if (fm >= -1e-14 * gamma) break;
            } else {
                hi = mid;
                fhi = fm;
                if (side == 1) flo *= 0.5;
                side = 1;
            }
        }
        if (!(lo > tau)) throw std::runtime_error("grid too coarse for threshold");
        return lo;
    }
}

inline GreedySequence greedy_impl(const RoughLift& lift, double gamma, double alpha, double a, double b,
                                  bool augmented) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("greedy_times: gamma must lie in (0,1)");
    if (!(alpha > 0.0 && alpha < 1.0) || (augmented && !(alpha < 0.5)))
        throw std::invalid_argument("greedy_times: alpha out of range");
    if (!(a < b) || a < lift.grid().t0() || b > lift.grid().t1())
        throw std::invalid_argument("greedy_times: interval must lie inside the grid");
    GreedySequence seq;
    seq.gamma = gamma;
    seq.alpha = alpha;
    seq.augmented = augmented;
    seq.a = a;
    seq.b = b;
    seq.times.push_back(a);
    double tau = a;
    while (tau < b) {
        tau = next_greedy_time(lift, alpha, augmented, gamma, tau, b);
        seq.times.push_back(tau);
    }
    return seq;
}

}  // namespace detail

/// τ_{i+1} = sup{t > τ_i : ⟦x⟧_α + ⟦X⟧_{2α}^{1/2} ≤ γ on [τ_i, t]} ∧ b, located on the
/// piecewise-linear path (grid scan, then bisection inside the crossing cell).
[[nodiscard]] inline GreedySequence greedy_times(const RoughLift& lift, double gamma, double alpha, double a,
                                                 double b) {
    return detail::greedy_impl(lift, gamma, alpha, a, b, false);
}

/// Same with the additional time term (t − τ̄_i)^{1−2α}.
[[nodiscard]] inline GreedySequence greedy_times_augmented(const RoughLift& lift, double gamma, double alpha,
                                                           double a, double b) {
    return detail::greedy_impl(lift, gamma, alpha, a, b, true);
}

struct CountBoundReport {
    std::size_t count = 0;
    std::size_t full_steps = 0;  ///< plain only: steps whose functional reached γ
    double log_bound = 0.0;     ///< log of the right-hand side (plain bound)
    double bound = 0.0;         ///< right-hand side, may be +inf when it overflows
    bool passed = false;
    double margin = 0.0;        ///< log_bound − log(count) (plain) or bound − count (augmented)
    std::size_t subintervals = 0;  ///< m, augmented only
};

/// Plain: #{steps reaching γ} ≤ |I| γ^{−1/(ν−α)} (⟦x⟧_ν + ⟦X⟧_{2ν}^{1/2})^{1/(ν−α)}, compared in logs.
/// Augmented: N̄_γ ≤ Σ_k N_{γ/2,J_k}, |J_k| = (γ/2)^{1/(1−2α)}, m = ⌈|I|/|J|⌉.
/// The ν-seminorms are taken over grid pairs inside I.
[[nodiscard]] inline CountBoundReport verify_count_bounds(const GreedySequence& seq, const RoughLift& lift, double nu) {
    if (!(nu > seq.alpha)) throw std::invalid_argument("verify_count_bounds: requires nu > alpha");
    CountBoundReport rep;
    rep.count = seq.count();
    const double len = seq.b - seq.a;
    if (!seq.augmented) {
        const auto& g = lift.grid();
        const std::size_t i = g.cell(seq.a) + (g.index_of(seq.a) ? 0 : 1);
        std::size_t j = g.cell(seq.b);
        if (g.index_of(seq.b)) j = *g.index_of(seq.b);
        double fnu = 0.0;
        if (j > i) fnu = rough_seminorm_parts_idx(lift, nu, i, j).value();
        const double e = 1.0 / (nu - seq.alpha);
        rep.log_bound = std::log(len) - e * std::log(seq.gamma) + e * std::log(fnu);
        rep.bound = std::exp(rep.log_bound);
        // The final step is cut at b and need not reach γ; only steps that reached it enter the sum.
        const double s_last = seq.times[seq.times.size() - 2];
        const bool last_full = greedy_functional(lift, seq.alpha, false, s_last, seq.b) >= seq.gamma * (1.0 - 1e-9);
        rep.full_steps = rep.count - 1 + (last_full ? 1 : 0);
        rep.margin = rep.full_steps == 0 ? std::numeric_limits<double>::infinity()
                                         : rep.log_bound - std::log(static_cast<double>(rep.full_steps));
        rep.passed = rep.margin >= -1e-12;
        return rep;
    }
    const double J = std::pow(seq.gamma / 2.0, 1.0 / (1.0 - 2.0 * seq.alpha));
    const auto m = static_cast<std::size_t>(std::ceil(len / J - 1e-12));
    rep.subintervals = m;
    std::size_t total = 0;
    for (std::size_t k = 0; k < m; ++k) {
        const double s = seq.a + static_cast<double>(k) * J;
        const double t = (k + 1 == m) ? seq.b : std::min(seq.b, seq.a + static_cast<double>(k + 1) * J);
        if (!(t > s)) continue;
        total += greedy_times(lift, seq.gamma / 2.0, seq.alpha, s, t).count();
    }
    rep.bound = static_cast<double>(total);
    rep.log_bound = std::log(rep.bound);
    rep.margin = rep.bound - static_cast<double>(rep.count);
    rep.passed = rep.count <= total;
    return rep;
}

struct SubdivisionReport {
    bool steps_within_threshold = true;  ///< F ≤ γ(1 + tol) on every step
    bool steps_maximal = true;           ///< extending to the next grid point exceeds γ
    double worst_excess = 0.0;
};

/// Audits the defining property of a sequence by recomputing each step from scratch.
[[nodiscard]] inline SubdivisionReport check_subdivision(const GreedySequence& seq, const RoughLift& lift) {
    SubdivisionReport rep;
    const auto& g = lift.grid();
    for (std::size_t i = 0; i + 1 < seq.times.size(); ++i) {
        const double s = seq.times[i], t = seq.times[i + 1];
        const double F = greedy_functional(lift, seq.alpha, seq.augmented, s, t);
        rep.worst_excess = std::max(rep.worst_excess, F - seq.gamma);
        if (F > seq.gamma * (1.0 + kGreedyRelTol)) rep.steps_within_threshold = false;
        if (t < seq.b) {
            std::size_t k = g.cell(t) + 1;
            if (k > g.n()) k = g.n();
            const double nxt = std::min(g[k], seq.b);
            if (nxt > t && greedy_functional(lift, seq.alpha, seq.augmented, s, nxt) <= seq.gamma)
                rep.steps_maximal = false;
        }
    }
    return rep;
}

}  // namespace roughstab
