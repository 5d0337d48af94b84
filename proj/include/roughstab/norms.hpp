#pragma once

// Hölder and p-variation seminorms, controls, the Young–Loève constant and the variation-bound check.

#include "roughstab/paths.hpp"

#include <functional>
#include <limits>
#include <random>

namespace roughstab {

struct NormConfig {
    double p = 1.5;
    double q = 1.5;
    double alpha = 0.4;
    double nu = 0.45;

    void validate() const {
        if (p < 1.0 || q < 1.0) throw std::invalid_argument("NormConfig: p and q must be >= 1");
        if (!(1.0 / p + 1.0 / q > 1.0)) throw std::invalid_argument("Young pairing violated");
        if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("NormConfig: alpha must lie in (0,1)");
        if (!(alpha < nu)) throw std::invalid_argument("NormConfig: alpha must be below nu");
    }
};

/// Two-parameter function on grid index pairs (i ≤ j).
using ControlValues = std::function<double(std::size_t, std::size_t)>;

namespace detail {

inline std::pair<std::size_t, std::size_t> grid_interval(const TimeGrid& g, double s, double t) {
    if (!(s < t)) throw std::invalid_argument("seminorm: requires s < t");
    const auto i = g.index_of(s);
    const auto j = g.index_of(t);
    if (!i || !j) throw std::invalid_argument("seminorm: s and t must be grid points");
    return {*i, *j};
}

inline double col_dist(const Mat& v, std::size_t i, std::size_t j) {
    return (v.col(static_cast<Eigen::Index>(j)) - v.col(static_cast<Eigen::Index>(i))).norm();
}

}  // namespace detail

/// sup over grid pairs i ≤ u < v ≤ j of r(u, v).
template <class F>
[[nodiscard]] double pair_sup(std::size_t i, std::size_t j, F&& r) {
    double best = 0.0;
    for (std::size_t u = i; u < j; ++u)
        for (std::size_t v = u + 1; v <= j; ++v) best = std::max(best, r(u, v));
    return best;
}

/// Table S(i,j) = sup over grid pairs i ≤ u < v ≤ j of r(u,v), for all intervals at once.
template <class F>
[[nodiscard]] Mat all_interval_sups(std::size_t n, F&& r) {
    const auto N = static_cast<Eigen::Index>(n + 1);
    Mat S = Mat::Zero(N, N);
    for (std::size_t len = 1; len <= n; ++len)
        for (std::size_t i = 0; i + len <= n; ++i) {
            const std::size_t j = i + len;
            const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
            double v = r(i, j);
            if (len > 1) v = std::max({v, S(a + 1, b), S(a, b - 1)});
            S(a, b) = v;
        }
    return S;
}

[[nodiscard]] inline double holder_seminorm_idx(const SampledPath& path, double alpha, std::size_t i, std::size_t j) {
    if (i >= j) throw std::invalid_argument("holder_seminorm: requires s < t");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("holder_seminorm: alpha must lie in (0,1]");
    const auto& g = path.grid();
    const auto& v = path.values();
    return pair_sup(i, j, [&](std::size_t u, std::size_t w) {
        return detail::col_dist(v, u, w) / std::pow(g[w] - g[u], alpha);
    });
}

[[nodiscard]] inline double holder_seminorm(const SampledPath& path, double alpha, double s, double t) {
    const auto [i, j] = detail::grid_interval(path.grid(), s, t);
    return holder_seminorm_idx(path, alpha, i, j);
}

/// ⟦X⟧_{β} = sup ‖X_{u,v}‖/(v − u)^β over grid pairs.
[[nodiscard]] inline double levy_holder_idx(const RoughLift& lift, double beta, std::size_t i, std::size_t j) {
    const auto& g = lift.grid();
    return pair_sup(i, j, [&](std::size_t u, std::size_t w) { return lift.levy_norm(u, w) / std::pow(g[w] - g[u], beta); });
}

struct RoughNormParts {
    double level1 = 0.0;  ///< ⟦x⟧_α
    double level2 = 0.0;  ///< ⟦X⟧_{2α}
    [[nodiscard]] double value() const { return level1 + std::sqrt(level2); }
};

[[nodiscard]] inline RoughNormParts rough_seminorm_parts_idx(const RoughLift& lift, double alpha, std::size_t i,
                                                             std::size_t j) {
    if (i >= j) throw std::invalid_argument("rough_seminorm: requires s < t");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("rough_seminorm: alpha must lie in (0,1]");
    return {holder_seminorm_idx(lift.path(), alpha, i, j), levy_holder_idx(lift, 2.0 * alpha, i, j)};
}

/// ⟦x⟧_{α,[s,t]} + ⟦X⟧_{2α,[s,t]}^{1/2} over grid pairs.
[[nodiscard]] inline double rough_seminorm(const RoughLift& lift, double alpha, double s, double t) {
    const auto [i, j] = detail::grid_interval(lift.grid(), s, t);
    return rough_seminorm_parts_idx(lift, alpha, i, j).value();
}

/// (⟦x⟧_{p-var,[t_i0,t_j]})^p for every j ≥ i0, by the exact partition DP
/// V(j) = max_{i<j} V(i) + ‖x_{t_i,t_j}‖^p.
///
/// V is nondecreasing and the box bound on ‖x_j − x_k‖ over k ≤ i only shrinks as i decreases,
/// so the backward scan stops once V(i) + bound^p cannot beat the current best.
[[nodiscard]] inline std::vector<double> p_variation_powers_from(const Mat& v, double p, std::size_t i0,
                                                                 std::size_t i1) {
    if (p < 1.0) throw std::invalid_argument("p_variation: p must be >= 1");
    const auto m = v.rows();
    const std::size_t L = i1 - i0 + 1;
    std::vector<double> V(L, 0.0);
    Mat lo(m, static_cast<Eigen::Index>(L)), hi(m, static_cast<Eigen::Index>(L));
    lo.col(0) = hi.col(0) = v.col(static_cast<Eigen::Index>(i0));
    for (std::size_t k = 1; k < L; ++k) {
        const auto c = v.col(static_cast<Eigen::Index>(i0 + k));
        lo.col(static_cast<Eigen::Index>(k)) = lo.col(static_cast<Eigen::Index>(k - 1)).cwiseMin(c);
        hi.col(static_cast<Eigen::Index>(k)) = hi.col(static_cast<Eigen::Index>(k - 1)).cwiseMax(c);
    }
    for (std::size_t j = 1; j < L; ++j) {
        const auto xj = v.col(static_cast<Eigen::Index>(i0 + j));
        double best = 0.0;
        for (std::size_t i = j; i-- > 0;) {
            const auto ii = static_cast<Eigen::Index>(i);
            double bound2 = 0.0;
            for (Eigen::Index c = 0; c < m; ++c) {
                const double b = std::max(xj(c) - lo(c, ii), hi(c, ii) - xj(c));
                bound2 += b * b;
            }
            if (V[i] + std::pow(bound2, 0.5 * p) <= best) break;
            const double d = (xj - v.col(static_cast<Eigen::Index>(i0 + i))).norm();
            best = std::max(best, V[i] + std::pow(d, p));
        }
        V[j] = best;
    }
    return V;
}

struct PVarReport {
    double value = 0.0;          ///< ⟦x⟧_{p-var}
    bool coarsened = false;      ///< a thinning pre-pass was applied
    std::size_t points_used = 0;
};

inline constexpr std::size_t kPVarCoarsenThreshold = 20000;

/// Keep every k-th point plus per-block extrema of each component.
[[nodiscard]] inline std::vector<std::size_t> coarsen_indices(const Mat& v, std::size_t i, std::size_t j,
                                                              std::size_t target) {
    const std::size_t L = j - i;
    const std::size_t k = std::max<std::size_t>(1, (L + target - 1) / target);
    std::vector<std::size_t> keep;
    for (std::size_t b = i; b < j; b += k) {
        const std::size_t e = std::min(j, b + k);
        keep.push_back(b);
        for (Eigen::Index c = 0; c < v.rows(); ++c) {
            std::size_t amin = b, amax = b;
            for (std::size_t u = b; u <= e; ++u) {
                if (v(c, static_cast<Eigen::Index>(u)) < v(c, static_cast<Eigen::Index>(amin))) amin = u;
                if (v(c, static_cast<Eigen::Index>(u)) > v(c, static_cast<Eigen::Index>(amax))) amax = u;
            }
            keep.push_back(amin);
            keep.push_back(amax);
        }
    }
    keep.push_back(j);
    std::sort(keep.begin(), keep.end());
    keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
    return keep;
}

[[nodiscard]] inline PVarReport p_variation_report_idx(const SampledPath& path, double p, std::size_t i,
                                                       std::size_t j) {
    if (p < 1.0) throw std::invalid_argument("p_variation: p must be >= 1");
    if (i >= j) throw std::invalid_argument("p_variation: requires s < t");
    PVarReport rep;
    if (j - i + 1 > kPVarCoarsenThreshold) {
        const auto keep = coarsen_indices(path.values(), i, j, kPVarCoarsenThreshold / 4);
        Mat sub(path.values().rows(), static_cast<Eigen::Index>(keep.size()));
        for (std::size_t k = 0; k < keep.size(); ++k)
            sub.col(static_cast<Eigen::Index>(k)) = path.values().col(static_cast<Eigen::Index>(keep[k]));
        const auto V = p_variation_powers_from(sub, p, 0, keep.size() - 1);
        rep.value = std::pow(V.back(), 1.0 / p);
        rep.coarsened = true;
        rep.points_used = keep.size();
        notice("p-variation: path with " + std::to_string(j - i + 1) + " points coarsened to " +
               std::to_string(keep.size()));
        return rep;
    }
    const auto V = p_variation_powers_from(path.values(), p, i, j);
    rep.value = std::pow(V.back(), 1.0 / p);
    rep.points_used = j - i + 1;
    return rep;
}

[[nodiscard]] inline double p_variation_idx(const SampledPath& path, double p, std::size_t i, std::size_t j) {
    return p_variation_report_idx(path, p, i, j).value;
}

/// ⟦x⟧_{p-var,[s,t]} with s, t grid times.
[[nodiscard]] inline double p_variation(const SampledPath& path, double p, double s, double t) {
    const auto [i, j] = detail::grid_interval(path.grid(), s, t);
    return p_variation_idx(path, p, i, j);
}

/// K(p,q) = (1 − 2^{1 − 1/p − 1/q})^{-1}.
[[nodiscard]] inline double young_loeve_constant(double p, double q) {
    const double e = 1.0 / p + 1.0 / q;
    if (!(e > 1.0)) throw std::invalid_argument("Young pairing violated");
    return 1.0 / (1.0 - std::exp2(1.0 - e));
}

struct ControlReport {
    bool passed = true;
    double worst_violation = 0.0;  ///< max of ω(s,u) + ω(u,t) − ω(s,t), or |ω(t,t)|
    std::size_t s = 0, u = 0, t = 0;
    std::size_t triples_checked = 0;
    bool subsampled = false;
};

/// Zero diagonal and superadditivity on grid triples (tolerance 1e-12).
[[nodiscard]] inline ControlReport check_control(const ControlValues& omega, const TimeGrid& grid,
                                                 std::size_t max_triples = 1000000, std::uint64_t seed = 0) {
    constexpr double tol = 1e-12;
    ControlReport rep;
    const std::size_t n = grid.n();
    for (std::size_t k = 0; k <= n; ++k) {
        const double d = std::abs(omega(k, k));
        if (d > rep.worst_violation) {
            rep.worst_violation = d;
            rep.s = rep.u = rep.t = k;
        }
    }
    auto visit = [&](std::size_t s, std::size_t u, std::size_t t) {
        const double viol = omega(s, u) + omega(u, t) - omega(s, t);
        ++rep.triples_checked;
        if (viol > rep.worst_violation) {
            rep.worst_violation = viol;
            rep.s = s;
            rep.u = u;
            rep.t = t;
        }
    };
    const double total = static_cast<double>(n + 1) * static_cast<double>(n + 2) * static_cast<double>(n + 3) / 6.0;
    if (total <= static_cast<double>(max_triples)) {
        for (std::size_t s = 0; s <= n; ++s)
            for (std::size_t u = s; u <= n; ++u)
                for (std::size_t t = u; t <= n; ++t) visit(s, u, t);
    } else {
        rep.subsampled = true;
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<std::size_t> pick(0, n);
        for (std::size_t r = 0; r < max_triples; ++r) {
            std::size_t a[3] = {pick(rng), pick(rng), pick(rng)};
            std::sort(a, a + 3);
            visit(a[0], a[1], a[2]);
        }
    }
    rep.passed = rep.worst_violation <= tol;
    return rep;
}

/// Control ω(s,t) = (⟦x⟧_{p-var,[s,t]})^p, tabulated over all grid pairs.
[[nodiscard]] inline ControlValues pvar_control(const SampledPath& path, double p) {
    const std::size_t n = path.n();
    auto table = std::make_shared<std::vector<std::vector<double>>>(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
        (*table)[i] = i < n ? p_variation_powers_from(path.values(), p, i, n) : std::vector<double>{0.0};
    return [table](std::size_t i, std::size_t j) { return (*table)[i][j - i]; };
}

struct VariationBoundReport {
    std::size_t pairs = 0;
    std::size_t hypothesis_holds = 0;   ///< pairs where the premise inequality holds
    std::size_t conclusion_holds = 0;
    std::size_t falsified = 0;          ///< premise on every sub-pair, conclusion fails
    double worst_hypothesis_margin = std::numeric_limits<double>::infinity();
    double worst_conclusion_margin = std::numeric_limits<double>::infinity();
    bool hypothesis_everywhere = true;
    bool passed = true;                 ///< no falsified pairs
};

/// Evaluates, on grid pairs, the premise
///   ⟦θ⟧_q ≤ γ + Λ⟦x⟧_p + 2KΛ⟦x⟧_p⟦θ⟧_q
/// and the conclusion
///   ⟦θ⟧_q ≤ 2γ + 2Λ⟦x⟧_p + (2K)^{p−1}(2Λ)^p⟦x⟧_p^p.
/// A pair is counted as falsifying only when the premise holds on all its grid sub-pairs.
/// Paths longer than max_points are thinned to an index stride.
[[nodiscard]] inline VariationBoundReport check_variation_bound(const SampledPath& theta, const ControlValues& gamma,
                                                                const ControlValues& Lambda, const SampledPath& x,
                                                                const NormConfig& cfg, double K,
                                                                std::size_t max_points = 400) {
    if (!theta.grid().same_as(x.grid())) throw std::invalid_argument("check_variation_bound: misaligned grids");
    if (cfg.p < 1.0 || cfg.q < 1.0) throw std::invalid_argument("check_variation_bound: p, q must be >= 1");
    constexpr double tol = 1e-12;
    const std::size_t n = theta.n();
    const std::size_t stride = std::max<std::size_t>(1, (n + max_points - 1) / max_points);
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < n; k += stride) idx.push_back(k);
    idx.push_back(n);
    const std::size_t N = idx.size();

    std::vector<std::vector<char>> hyp(N, std::vector<char>(N, 1)), concl(N, std::vector<char>(N, 1));
    VariationBoundReport rep;
    for (std::size_t a = 0; a + 1 < N; ++a) {
        const auto Vt = p_variation_powers_from(theta.values(), cfg.q, idx[a], n);
        const auto Vx = p_variation_powers_from(x.values(), cfg.p, idx[a], n);
        for (std::size_t b = a + 1; b < N; ++b) {
            const double th = std::pow(Vt[idx[b] - idx[a]], 1.0 / cfg.q);
            const double xp = std::pow(Vx[idx[b] - idx[a]], 1.0 / cfg.p);
            const double g = gamma(idx[a], idx[b]);
            const double L = Lambda(idx[a], idx[b]);
            const double rhs1 = g + L * xp + 2.0 * K * L * xp * th;
            const double rhs2 = 2.0 * g + 2.0 * L * xp + std::pow(2.0 * K, cfg.p - 1.0) * std::pow(2.0 * L, cfg.p) * std::pow(xp, cfg.p);
            const double m1 = rhs1 - th, m2 = rhs2 - th;
            hyp[a][b] = m1 >= -tol * std::max(1.0, th);
            concl[a][b] = m2 >= -tol * std::max(1.0, th);
            ++rep.pairs;
            rep.hypothesis_holds += hyp[a][b];
            rep.conclusion_holds += concl[a][b];
            rep.worst_hypothesis_margin = std::min(rep.worst_hypothesis_margin, m1);
            rep.worst_conclusion_margin = std::min(rep.worst_conclusion_margin, m2);
        }
    }
    // all_ok[a][b]: premise on every sub-pair of [a,b], built from shorter intervals outward.
    std::vector<std::vector<char>> all_ok(N, std::vector<char>(N, 1));
    for (std::size_t len = 1; len < N; ++len)
        for (std::size_t a = 0; a + len < N; ++a) {
            const std::size_t b = a + len;
            all_ok[a][b] = hyp[a][b] && (len == 1 || (all_ok[a + 1][b] && all_ok[a][b - 1]));
            if (all_ok[a][b] && !concl[a][b]) ++rep.falsified;
        }
    rep.hypothesis_everywhere = rep.hypothesis_holds == rep.pairs;
    rep.passed = rep.falsified == 0;
    return rep;
}

}  // namespace roughstab
