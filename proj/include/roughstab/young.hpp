#pragma once

// Young integration, the Young differential equation solver and its a-priori growth bound.

#include "roughstab/norms.hpp"

#include <functional>

namespace roughstab {

using VecField = std::function<Vec(const Vec&)>;
/// Diffusion map y ↦ g(y) ∈ L(R^m, R^d), returned as a d×m matrix (column j is g_j(y)).
using DiffusionMap = std::function<Mat(const Vec&)>;
/// Jacobians Dg_j(y) (d×d), one per driver component.
using DiffusionJacobian = std::function<std::vector<Mat>(const Vec&)>;

/// h(r) = c0 + c1 r/(1 + r): increasing, bounded by c0 + c1.
struct HFunction {
    double c0 = 0.0;
    double c1 = 0.0;
    [[nodiscard]] double operator()(double r) const { return c0 + c1 * r / (1.0 + r); }
    [[nodiscard]] double bound() const { return c0 + c1; }
};

/// dy = [A y + f(y)] dt + g(y) dx, with declared constants C_f (Lipschitz constant of f) and
/// C_g (bound on g, Dg and the Lipschitz constant of Dg).
struct YoungSystem {
    Mat A;
    VecField f;                 ///< empty means f ≡ 0
    DiffusionMap g;
    DiffusionJacobian Dg;       ///< needed by the Milstein scheme and the angular system
    double C_f = 0.0;
    double C_g = 0.0;
    HFunction h{};
    std::size_t m = 1;          ///< driver dimension
    std::string id = "custom";
    /// Linear diffusion g_j(y) = C_j y, kept for solvers that exploit it.
    std::vector<Mat> C;

    [[nodiscard]] std::size_t d() const { return static_cast<std::size_t>(A.rows()); }
    [[nodiscard]] Vec drift(const Vec& y) const {
        Vec r = A * y;
        if (f) r += f(y);
        return r;
    }
};

/// f(y) = h(‖y‖) y. Its Jacobian h I + h'(r) y y^T / r has eigenvalues h(r) and (r h(r))',
/// both bounded by c0 + c1, which is the declared C_f.
[[nodiscard]] inline VecField radial_drift(HFunction h) {
    return [h](const Vec& y) -> Vec { return h(y.norm()) * y; };
}

[[nodiscard]] inline YoungSystem linear_young_system(Mat A, std::vector<Mat> C, HFunction h = {}) {
    if (A.rows() != A.cols()) throw std::invalid_argument("linear_young_system: A must be square");
    for (const auto& c : C)
        if (c.rows() != A.rows() || c.cols() != A.cols())
            throw std::invalid_argument("linear_young_system: C_j must match A");
    if (h.c0 < 0.0 || h.c1 < 0.0) throw std::invalid_argument("linear_young_system: h coefficients must be >= 0");
    YoungSystem s;
    s.A = std::move(A);
    s.m = C.size();
    s.C = C;
    s.g = [C](const Vec& y) {
        Mat out(y.size(), static_cast<Eigen::Index>(C.size()));
        for (std::size_t j = 0; j < C.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = C[j] * y;
        return out;
    };
    s.Dg = [C](const Vec&) { return C; };
    s.C_g = collection_norm(C);
    s.h = h;
    if (h.bound() > 0.0) s.f = radial_drift(h);
    s.C_f = h.bound();
    s.id = "linear";
    return s;
}

/// g_j(y) = C_j tanh(y) componentwise: g(0) = 0, ‖Dg_j‖ ≤ ‖C_j‖, Lip(Dg_j) ≤ 0.77‖C_j‖.
[[nodiscard]] inline YoungSystem tanh_young_system(Mat A, std::vector<Mat> C, HFunction h = {}) {
    YoungSystem s = linear_young_system(std::move(A), C, h);
    s.C.clear();
    s.g = [C](const Vec& y) {
        const Vec t = y.array().tanh().matrix();
        Mat out(y.size(), static_cast<Eigen::Index>(C.size()));
        for (std::size_t j = 0; j < C.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = C[j] * t;
        return out;
    };
    s.Dg = [C](const Vec& y) {
        const Vec dt = (1.0 - y.array().tanh().square()).matrix();
        std::vector<Mat> out;
        out.reserve(C.size());
        for (const auto& c : C) out.push_back(c * dt.asDiagonal());
        return out;
    };
    s.id = "tanh";
    return s;
}

namespace detail {

/// Integrand value at grid point k viewed as an e×m matrix (column-major flattening).
inline Eigen::Map<const Mat> integrand_at(const SampledPath& y, std::size_t k, std::size_t m) {
    const auto e = static_cast<Eigen::Index>(y.dim() / m);
    return Eigen::Map<const Mat>(y.values().col(static_cast<Eigen::Index>(k)).data(), e, static_cast<Eigen::Index>(m));
}

inline void check_integrand(const SampledPath& y, const SampledPath& x) {
    if (!y.grid().same_as(x.grid())) throw std::invalid_argument("integral: misaligned grids");
    if (y.dim() % x.dim() != 0) throw std::invalid_argument("integral: integrand dimension must be a multiple of m");
}

}  // namespace detail

/// Σ_{[u,v]} y_u x_{u,v} over grid cells in [t_i, t_j]. The integrand path stores y_u ∈ L(R^m,R^e)
/// flattened column-major, so y.dim() = e·m.
[[nodiscard]] inline Vec young_integral_idx(const SampledPath& y, const SampledPath& x, std::size_t i, std::size_t j) {
    detail::check_integrand(y, x);
    if (i > j || j > x.n()) throw std::invalid_argument("young_integral: bad interval");
    const std::size_t m = x.dim();
    Vec acc = Vec::Zero(static_cast<Eigen::Index>(y.dim() / m));
    for (std::size_t u = i; u < j; ++u) acc += detail::integrand_at(y, u, m) * x.increment(u, u + 1);
    return acc;
}

[[nodiscard]] inline Vec young_integral(const SampledPath& y, const SampledPath& x, double s, double t) {
    detail::check_integrand(y, x);
    const auto i = x.grid().index_of(s);
    const auto j = x.grid().index_of(t);
    if (!i || !j || s > t) throw std::invalid_argument("young_integral: s <= t must be grid points");
    return young_integral_idx(y, x, *i, *j);
}

enum class YoungScheme { euler, milstein };

[[nodiscard]] inline YoungScheme parse_young_scheme(const std::string& s) {
    if (s == "euler") return YoungScheme::euler;
    if (s == "milstein") return YoungScheme::milstein;
    throw std::invalid_argument("unknown scheme '" + s + "' (expected euler or milstein)");
}

/// One-step schemes on the driver grid:
///   euler:    y + (A y + f(y))Δt + g(y)Δx
///   milstein: euler + ½ Σ_{j,k} Dg_j(y)[g_k(y)] Δx^j Δx^k
[[nodiscard]] inline SampledPath solve_yde(const YoungSystem& sys, const SampledPath& x, const Vec& y0,
                                           YoungScheme scheme) {
    const std::size_t d = sys.d();
    if (static_cast<std::size_t>(y0.size()) != d) throw std::invalid_argument("solve_yde: y0 has wrong dimension");
    if (x.dim() != sys.m) throw std::invalid_argument("solve_yde: driver dimension does not match system");
    if (!sys.g) throw std::invalid_argument("solve_yde: diffusion map missing");
    if (scheme == YoungScheme::milstein && !sys.Dg) throw std::invalid_argument("solve_yde: milstein needs Dg");
    const std::size_t n = x.n();
    const auto& grid = x.grid();
    Mat Y(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(n + 1));
    Y.col(0) = y0;
    bool warned = false;
    Vec y = y0;
    for (std::size_t k = 0; k < n; ++k) {
        const Vec dx = x.increment(k, k + 1);
        if (!warned && dx.norm() * sys.C_g >= 1.0) {
            notice("solve_yde: driver increment times C_g reaches 1; grid may be too coarse");
            warned = true;
        }
        const Mat G = sys.g(y);
        Vec next = y + sys.drift(y) * grid.dt(k) + G * dx;
        if (scheme == YoungScheme::milstein) {
            const auto D = sys.Dg(y);
            Vec corr = Vec::Zero(static_cast<Eigen::Index>(d));
            const Vec Gdx = G * dx;
            for (std::size_t j = 0; j < sys.m; ++j) corr += dx(static_cast<Eigen::Index>(j)) * (D[j] * Gdx);
            next += 0.5 * corr;
        }
        if (!next.allFinite() || next.norm() > 1e300) throw BlowUpError("solve_yde: non-finite state", k + 1);
        y = std::move(next);
        Y.col(static_cast<Eigen::Index>(k + 1)) = y;
    }
    return SampledPath(grid, std::move(Y));
}

struct AprioriBound {
    double F = 0.0;               ///< 4^p log2 max{‖A‖ + C_f, (K+1)C_g}[(b−a)^p + ⟦x⟧_{p-var}^p]
    double log_q_var_bound = 0.0; ///< log(‖y_a‖ e^F), −inf when y_a = 0
    double log_sup_bound = 0.0;   ///< log(‖y_a‖(1 + e^F))
    double q_var_bound = 0.0;     ///< may be +inf when e^F overflows
    double sup_bound = 0.0;
    double x_pvar = 0.0;
};

[[nodiscard]] inline AprioriBound apriori_bound(const YoungSystem& sys, const SampledPath& x, const Vec& y0, double p,
                                                double a, double b) {
    if (!(p > 1.0 && p < 2.0)) throw std::invalid_argument("apriori_bound: p must lie in (1,2)");
    AprioriBound r;
    r.x_pvar = p_variation(x, p, a, b);
    const double K = young_loeve_constant(p, p);
    const double lead = std::max(spectral_norm(sys.A) + sys.C_f, (K + 1.0) * sys.C_g);
    r.F = std::pow(4.0, p) * std::log(2.0) * lead * (std::pow(b - a, p) + std::pow(r.x_pvar, p));
    const double ny = y0.norm();
    r.log_q_var_bound = std::log(ny) + r.F;
    r.log_sup_bound = std::log(ny) + std::log1p(std::exp(-r.F)) + r.F;
    r.q_var_bound = ny * std::exp(r.F);
    r.sup_bound = ny == 0.0 ? 0.0 : ny * (1.0 + std::exp(r.F));
    if (ny == 0.0) r.q_var_bound = 0.0;
    return r;
}

struct AprioriCheck {
    AprioriBound bound;
    double sup_norm = 0.0;
    double q_var = 0.0;
    bool sup_ok = false;
    bool q_var_ok = false;
    [[nodiscard]] bool passed() const { return sup_ok && q_var_ok; }
};

/// Solver output against both bounds; comparisons in log space.
[[nodiscard]] inline AprioriCheck check_apriori(const YoungSystem& sys, const SampledPath& x, const SampledPath& y,
                                                double p, double a, double b) {
    AprioriCheck c;
    const auto i = y.grid().index_of(a);
    const auto j = y.grid().index_of(b);
    if (!i || !j) throw std::invalid_argument("check_apriori: interval ends must be grid points");
    c.bound = apriori_bound(sys, x, y.at(*i), p, a, b);
    for (std::size_t k = *i; k <= *j; ++k) c.sup_norm = std::max(c.sup_norm, y.at(k).norm());
    c.q_var = p_variation_idx(y, p, *i, *j);
    auto le = [](double v, double logb) { return v == 0.0 || std::log(v) <= logb + 1e-12; };
    c.sup_ok = le(c.sup_norm, c.bound.log_sup_bound);
    c.q_var_ok = le(c.q_var, c.bound.log_q_var_bound);
    return c;
}

}  // namespace roughstab
