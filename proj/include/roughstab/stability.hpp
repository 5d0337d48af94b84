#pragma once

// Stability hypotheses and thresholds, the angular/log-norm decomposition, Lyapunov exponent
// estimation and the Monte-Carlo stability experiments.

#include "roughstab/rough.hpp"

#include <map>

namespace roughstab {

// ---------------------------------------------------------------------------------------------
// Spectral data and systems

struct SpectralData {
    double lambda_A = 0.0;  ///< largest λ with ⟨y, A y⟩ ≤ −λ‖y‖²
    double A_norm = 0.0;
};

/// λ_A as the smallest eigenvalue of −Sym(A).
[[nodiscard]] inline SpectralData lambda_A(const Mat& A) {
    if (A.rows() != A.cols() || A.rows() == 0) throw std::invalid_argument("lambda_A: A must be square");
    Eigen::SelfAdjointEigenSolver<Mat> es(sym(A));
    const double top = es.eigenvalues().maxCoeff();
    if (top >= 0.0) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "A not negative definite (Sym(A) has eigenvalue %.6g)", top);
        throw std::invalid_argument(buf);
    }
    return {-top, spectral_norm(A)};
}

/// System description shared by the Young and rough-linear experiment modes:
/// dy = [A y + h(‖y‖) y] dt + g(y) dx with g_j(y) = C_j y (linear) or C_j tanh(y).
struct SystemSpec {
    Mat A;
    std::vector<Mat> C;
    HFunction h{};
    std::string g_family = "linear";

    [[nodiscard]] std::size_t d() const { return static_cast<std::size_t>(A.rows()); }
    [[nodiscard]] std::size_t m() const { return C.size(); }
    [[nodiscard]] double C_norm() const { return collection_norm(C); }
};

[[nodiscard]] inline YoungSystem to_young(const SystemSpec& s) {
    if (s.g_family == "linear") return linear_young_system(s.A, s.C, s.h);
    if (s.g_family == "tanh") return tanh_young_system(s.A, s.C, s.h);
    throw std::invalid_argument("unknown diffusion family '" + s.g_family + "' (expected linear or tanh)");
}

[[nodiscard]] inline RoughLinearSystem to_rough(const SystemSpec& s) {
    if (s.g_family != "linear") throw std::invalid_argument("rough mode supports only linear diffusion");
    return rough_linear_system(s.A, s.C, s.h);
}

// ---------------------------------------------------------------------------------------------
// Functionals

/// Building blocks of the log-norm estimate for Young systems, with K = K(p,p):
///   F(u,v)   = 4^p log2 max{‖A‖ + C_f, (K+1)C_g}(u^p + v^p)
///   κ₁(z)    = z + 8K(‖A‖+C_f)z + 8K C_g z² + (8K C_g)^p z^{p+1} + ½(½Kz + 4K²C_g z²)² e^{2F(1,z)}
///   κ₂(z)    = ½z²,  H(z) = h(z)
///   κ(u,v)   = (e^{2λu} − 1)(1 + e^{F(u,v)})² + 2e^{2λu}(1 + e^{F(u,v)})e^{F(u,v)},  λ = λ_A − C_f
struct StabilityFunctionals {
    double p = 1.5;
    double K = 0.0;
    double A_norm = 0.0;
    double C_f = 0.0;
    double C_g = 0.0;
    double lambda = 0.0;
    HFunction h{};

    [[nodiscard]] double lead() const { return std::max(A_norm + C_f, (K + 1.0) * C_g); }
    [[nodiscard]] double F(double u, double v) const {
        return std::pow(4.0, p) * std::log(2.0) * lead() * (std::pow(u, p) + std::pow(v, p));
    }
    [[nodiscard]] double H(double z) const { return h(z); }
    [[nodiscard]] double kappa1(double z) const {
        const double sq = 0.5 * K * z + 4.0 * K * K * C_g * z * z;
        return z + 8.0 * K * (A_norm + C_f) * z + 8.0 * K * C_g * z * z + std::pow(8.0 * K * C_g, p) * std::pow(z, p + 1.0) +
               0.5 * sq * sq * std::exp(2.0 * F(1.0, z));
    }
    [[nodiscard]] double kappa2(double z) const { return 0.5 * z * z; }
    [[nodiscard]] double kappa(double u, double v) const {
        const double eF = std::exp(F(u, v));
        const double e2 = std::exp(2.0 * lambda * u);
        return (e2 - 1.0) * (1.0 + eF) * (1.0 + eF) + 2.0 * e2 * (1.0 + eF) * eF;
    }
    /// Per-unit-interval Gronwall coefficient 2C_g v[κ(1,v) + 1].
    [[nodiscard]] double gronwall_coeff(double v) const { return 2.0 * C_g * v * (kappa(1.0, v) + 1.0); }
};

[[nodiscard]] inline StabilityFunctionals make_functionals(const Mat& A, double C_f, double C_g, HFunction h, double p,
                                                           double lambda_A_value) {
    StabilityFunctionals fn;
    fn.p = p;
    // K(p,p) exists only for p < 2; the pure moment functionals do not need it.
    fn.K = p < 2.0 ? young_loeve_constant(p, p) : std::numeric_limits<double>::quiet_NaN();
    fn.A_norm = spectral_norm(A);
    fn.C_f = C_f;
    fn.C_g = C_g;
    fn.h = h;
    fn.lambda = lambda_A_value - C_f;
    return fn;
}

/// Seminorms of a lift on one interval: α-level (⟦x⟧_α, ⟦X⟧_{2α}, ⟦[x]⟧_{2α}) and ν-level.
struct RoughNorms {
    double u = 0.0;
    double xa = 0.0, Xa = 0.0, Ba = 0.0;
    double xn = 0.0, Xn = 0.0, Bn = 0.0;
};

[[nodiscard]] inline RoughNorms rough_norms_idx(const RoughLift& lift, double alpha, double nu, std::size_t i,
                                                std::size_t j) {
    const auto& g = lift.grid();
    const auto& v = lift.path().values();
    const bool geometric = lift.is_geometric();
    RoughNorms r;
    r.u = g[j] - g[i];
    for (std::size_t a = i; a < j; ++a)
        for (std::size_t b = a + 1; b <= j; ++b) {
            const double dt = g[b] - g[a];
            const double dx = detail::col_dist(v, a, b);
            const double dX = lift.levy_norm(a, b);
            const double dB = geometric ? 0.0 : bracket_pair(lift, a, b).norm();
            const double ta = std::pow(dt, alpha), tn = std::pow(dt, nu);
            r.xa = std::max(r.xa, dx / ta);
            r.Xa = std::max(r.Xa, dX / (ta * ta));
            r.Ba = std::max(r.Ba, dB / (ta * ta));
            r.xn = std::max(r.xn, dx / tn);
            r.Xn = std::max(r.Xn, dX / (tn * tn));
            r.Bn = std::max(r.Bn, dB / (tn * tn));
        }
    return r;
}

/// Explicit κ for the rough linear case, so that on an interval of length u ≤ 1
///   log‖y_t‖ ≤ log‖y_a‖ − λ_A(t−a) + ∫ h(‖y_s‖)ds + ‖C‖ κ.
/// Assembled from the rough-integral estimate for ⟨θ, Cθ⟩ (first two terms plus the sewing remainder
/// with C_α), the bracket integral with K_α = 1/(1 − 2^{1−3α}), and the angular seminorm bound
///   Θ = uμ/(2(1−μ)) (4M₁/μ)^{1/(ν−α)} [1 + (⟦x⟧_ν + ⟦X⟧_{2ν} + ⟦[x]⟧_{2ν})^{1/(ν−α)}]
/// with M₁ = max{C_{f1}, C_{g1}²(1+C_α), C_{k1}(1+K_α), C_{g1}(1+C_α), ½} and the angular-system
/// constants C_{f1} = ‖A‖ + C_f, C_{g1} = 6‖C‖, C_{k1} = 9‖C‖².
struct RoughKappa {
    double A_norm = 0.0;
    double C_f = 0.0;
    double C_alpha = kSewingConstant;
    double alpha = 0.35;
    double nu = 0.4;
    double mu = 0.5;

    [[nodiscard]] double K_alpha() const { return 1.0 / (1.0 - std::exp2(1.0 - 3.0 * alpha)); }
    [[nodiscard]] double M1(double c) const {
        const double cg = 6.0 * c, ck = 9.0 * c * c;
        return std::max({A_norm + C_f, cg * cg * (1.0 + C_alpha), ck * (1.0 + K_alpha()), cg * (1.0 + C_alpha), 0.5});
    }
    [[nodiscard]] double theta_bound(double c, const RoughNorms& r) const {
        const double e = 1.0 / (nu - alpha);
        return r.u * mu / (2.0 * (1.0 - mu)) * std::pow(4.0 * M1(c) / mu, e) * (1.0 + std::pow(r.xn + r.Xn + r.Bn, e));
    }
    [[nodiscard]] double operator()(double c, const RoughNorms& r) const {
        const double ua = std::pow(r.u, alpha);
        const double Th = theta_bound(c, r);
        const double th = c * r.xa + ua * Th;  // ⟦θ⟧_α
        const double Rb = 4.0 * c * c * r.xa * r.xa + (2.0 + 4.0 * c * ua * r.xa) * Th + ua * ua * Th * Th;
        const double Db = 14.0 * c * th;
        const double rough = ua * r.xa + 4.0 * c * ua * ua * r.Xa + C_alpha * ua * ua * ua * (r.xa * Rb + Db * r.Xa);
        const double brk = c * ua * ua * r.Ba * (1.5 + 5.0 * K_alpha() * ua * th);
        return rough + brk;
    }
};

// ---------------------------------------------------------------------------------------------
// Monte Carlo over unit-interval fBm paths

inline constexpr std::size_t kMcGrid = 256;

struct McEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    std::size_t samples = 0;
};

[[nodiscard]] inline McEstimate mc_mean(const std::vector<double>& v) {
    McEstimate e;
    e.samples = v.size();
    if (v.empty()) return e;
    double s = 0.0;
    for (double x : v) s += x;
    e.estimate = s / static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - e.estimate) * (x - e.estimate);
        e.std_error = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
    }
    return e;
}

/// ⟦x⟧_{p-var,[0,1]} for independent m-dimensional fBm paths on a kMcGrid grid; sample i uses
/// derive_seed(seed, i).
[[nodiscard]] inline std::vector<double> pvar_samples(double H, double p, std::size_t m, std::size_t n_samples,
                                                      std::uint64_t seed) {
    const auto grid = TimeGrid::uniform(0.0, 1.0, kMcGrid);
    const FbmSampler sampler(H, kMcGrid);
    std::vector<double> out(n_samples);
    parallel_for(n_samples, [&](std::size_t i) {
        out[i] = p_variation_idx(sampler.sample(grid, m, derive_seed(seed, i)), p, 0, kMcGrid);
    });
    return out;
}

/// Rough seminorms on [0,1] for geometric fBm lifts (H < 1/2).
[[nodiscard]] inline std::vector<RoughNorms> rough_norm_samples(double H, double alpha, double nu, std::size_t m,
                                                                std::size_t n_samples, std::uint64_t seed) {
    const auto grid = TimeGrid::uniform(0.0, 1.0, kMcGrid);
    const FbmSampler sampler(H, kMcGrid);
    std::vector<RoughNorms> out(n_samples);
    parallel_for(n_samples, [&](std::size_t i) {
        const auto L = lift_piecewise_linear(sampler.sample(grid, m, derive_seed(seed, i)), H);
        out[i] = rough_norms_idx(L, alpha, nu, 0, kMcGrid);
    });
    return out;
}

enum class McFunctional { one, pvar_power, pvar_times_kappa, kappa1, F_exp };

[[nodiscard]] inline McFunctional parse_mc_functional(const std::string& s) {
    if (s == "one") return McFunctional::one;
    if (s == "pvar_power") return McFunctional::pvar_power;
    if (s == "pvar_times_kappa") return McFunctional::pvar_times_kappa;
    if (s == "kappa1") return McFunctional::kappa1;
    if (s == "F_exp") return McFunctional::F_exp;
    throw std::invalid_argument("unknown functional '" + s + "'");
}

/// Value of a functional at v = ⟦x⟧_{p-var,[0,1]}: 1, v^{p+1}, v[κ(1,v) + 1], κ₁(v) or e^{F(1,v)}.
[[nodiscard]] inline double evaluate_functional(McFunctional f, double v, const StabilityFunctionals& fn) {
    switch (f) {
        case McFunctional::one: return 1.0;
        case McFunctional::pvar_power: return std::pow(v, fn.p + 1.0);
        case McFunctional::pvar_times_kappa: return v * (fn.kappa(1.0, v) + 1.0);
        case McFunctional::kappa1: return fn.kappa1(v);
        case McFunctional::F_exp: return std::exp(fn.F(1.0, v));
    }
    return 0.0;
}

[[nodiscard]] inline McEstimate mc_expectation(McFunctional f, double H, double p, std::size_t n_samples,
                                               std::uint64_t seed, const StabilityFunctionals& fn, std::size_t m = 1) {
    if (n_samples < 100) throw std::invalid_argument("mc_expectation: need at least 100 samples");
    if (std::abs(fn.p - p) > 0.0) throw std::invalid_argument("mc_expectation: functionals built for another p");
    const auto v = pvar_samples(H, p, m, n_samples, seed);
    std::vector<double> vals(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) vals[i] = evaluate_functional(f, v[i], fn);
    return mc_mean(vals);
}

// ---------------------------------------------------------------------------------------------
// Criteria

struct CriterionReport {
    double lhs = 0.0;               ///< λ_A
    double rhs = 0.0;               ///< (1 + 4K‖A‖ + 8K + (8K)^p)‖C‖(E x_p^{p+1})^{1/(p+1)}
    double rhs_conservative = 0.0;  ///< same with the moment raised by two standard errors
    double K = 0.0;
    double coefficient = 0.0;       ///< 1 + 4K‖A‖ + 8K + (8K)^p
    McEstimate moment;              ///< E x_p^{p+1}
    double threshold = 0.0;         ///< ‖C‖ at which rhs_conservative = λ_A
    bool satisfied = false;
};

/// Global-stability criterion for dy = Ay dt + Cy dx with a Young driver, on given samples of
/// ⟦x⟧_{p-var,[0,1]}.
[[nodiscard]] inline CriterionReport criterion_linear_young_from_samples(const Mat& A, const std::vector<Mat>& C, double p,
                                                                         double H, const std::vector<double>& pvar) {
    if (!(H > 0.5 && H < 1.0)) throw std::invalid_argument("criterion_linear_young: requires H in (1/2,1)");
    if (!(p > 1.0 && p < 2.0)) throw std::invalid_argument("criterion_linear_young: p must lie in (1,2)");
    if (!(p * H > 1.0)) throw std::invalid_argument("criterion_linear_young: requires p·H > 1");
    if (pvar.size() < 100) throw std::invalid_argument("criterion_linear_young: need at least 100 samples");
    const auto sd = lambda_A(A);
    CriterionReport r;
    r.lhs = sd.lambda_A;
    r.K = young_loeve_constant(p, p);
    r.coefficient = 1.0 + 4.0 * r.K * sd.A_norm + 8.0 * r.K + std::pow(8.0 * r.K, p);
    std::vector<double> pw(pvar.size());
    for (std::size_t i = 0; i < pvar.size(); ++i) pw[i] = std::pow(pvar[i], p + 1.0);
    r.moment = mc_mean(pw);
    const double cn = collection_norm(C);
    const double root = std::pow(r.moment.estimate, 1.0 / (p + 1.0));
    const double root_c = std::pow(r.moment.estimate + 2.0 * r.moment.std_error, 1.0 / (p + 1.0));
    r.rhs = r.coefficient * cn * root;
    r.rhs_conservative = r.coefficient * cn * root_c;
    r.threshold = r.lhs / (r.coefficient * root_c);
    r.satisfied = r.lhs > r.rhs_conservative;
    return r;
}

[[nodiscard]] inline CriterionReport criterion_linear_young(const Mat& A, const std::vector<Mat>& C, double p, double H,
                                                            std::uint64_t mc_seed, std::size_t n_samples = 10000) {
    if (!(H > 0.5 && H < 1.0)) throw std::invalid_argument("criterion_linear_young: requires H in (1/2,1)");
    if (!(p > 1.0 && p < 2.0)) throw std::invalid_argument("criterion_linear_young: p must lie in (1,2)");
    if (!(p * H > 1.0)) throw std::invalid_argument("criterion_linear_young: requires p·H > 1");
    return criterion_linear_young_from_samples(A, C, p, H,
                                               pvar_samples(H, p, std::max<std::size_t>(C.size(), 1), n_samples, mc_seed));
}

namespace detail {

/// sup{c ∈ [0, ∞) : c·E(c) < target} for c·E(c) increasing, by bracketing then bisection.
template <class G>
double largest_below(G&& lhs, double target) {
    if (!(target > 0.0)) return 0.0;
    double lo = 0.0, hi = 1e-6;
    while (lhs(hi) < target) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e6) return hi;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (lhs(mid) < target ? lo : hi) = mid;
    }
    return lo;
}

}  // namespace detail

enum class StabilityMode { young, rough_linear };

[[nodiscard]] inline StabilityMode parse_mode(const std::string& s) {
    if (s == "young") return StabilityMode::young;
    if (s == "rough_linear") return StabilityMode::rough_linear;
    throw std::invalid_argument("unknown mode '" + s + "' (expected young or rough_linear)");
}

[[nodiscard]] inline std::string mode_name(StabilityMode m) { return m == StabilityMode::young ? "young" : "rough_linear"; }

struct GeneralCriterionReport {
    std::string mode;
    double lambda_A = 0.0;
    double C_f = 0.0;
    double h0 = 0.0;
    double noise = 0.0;              ///< C_g (young) or ‖C‖ (rough_linear)
    McEstimate E_kappa;              ///< Eκ₁ (young) or Eκ(1, ·) of the rough assembly
    double predicted_rate = 0.0;     ///< λ_A − C_f − noise·Eκ
    bool local_hypothesis = false;   ///< λ_A > h(0)
    bool global_hypothesis = false;  ///< λ_A > C_f
    double eps_local = 0.0;          ///< largest noise level with noise·Eκ(noise) < λ_A − h(0)
    double eps_global = 0.0;         ///< same against λ_A − C_f
    double eps_step3 = 0.0;          ///< young only: noise·E v[κ(1,v)+1] < λ_A − C_f
    bool local_satisfied = false;
    bool global_satisfied = false;
};

/// ε-thresholds for local and global stability. κ depends on the noise level itself, so each
/// ε solves the implied fixed-point inequality on a frozen Monte-Carlo sample.
[[nodiscard]] inline GeneralCriterionReport criterion_general(const SystemSpec& s, double H, StabilityMode mode,
                                                              std::uint64_t mc_seed, double p = 1.5, double alpha = 0.35,
                                                              std::size_t n_samples = 10000) {
    if (n_samples < 100) throw std::invalid_argument("criterion_general: need at least 100 samples");
    GeneralCriterionReport r;
    r.mode = mode_name(mode);
    const auto sd = lambda_A(s.A);
    r.lambda_A = sd.lambda_A;
    r.C_f = s.h.bound();
    r.h0 = s.h(0.0);
    r.local_hypothesis = r.lambda_A > r.h0;
    r.global_hypothesis = r.lambda_A > r.C_f;
    r.noise = s.C_norm();
    const std::size_t m = std::max<std::size_t>(s.m(), 1);
    if (mode == StabilityMode::young) {
        if (!(H > 0.5)) throw std::invalid_argument("criterion_general: young mode requires H > 1/2");
        const auto v = pvar_samples(H, p, m, n_samples, mc_seed);
        auto mean_at = [&](double cg, McFunctional f) {
            const auto fn = make_functionals(s.A, r.C_f, cg, s.h, p, r.lambda_A);
            std::vector<double> vals(v.size());
            for (std::size_t i = 0; i < v.size(); ++i) vals[i] = evaluate_functional(f, v[i], fn);
            return mc_mean(vals);
        };
        r.E_kappa = mean_at(r.noise, McFunctional::kappa1);
        auto lhs1 = [&](double c) { return c * mean_at(c, McFunctional::kappa1).estimate; };
        auto lhs3 = [&](double c) { return c * mean_at(c, McFunctional::pvar_times_kappa).estimate; };
        r.eps_local = detail::largest_below(lhs1, r.lambda_A - r.h0);
        r.eps_global = detail::largest_below(lhs1, r.lambda_A - r.C_f);
        r.eps_step3 = detail::largest_below(lhs3, r.lambda_A - r.C_f);
    } else {
        if (!(H > 1.0 / 3.0 && H < 0.5)) throw std::invalid_argument("criterion_general: rough mode requires H in (1/3,1/2)");
        if (!(alpha > 1.0 / 3.0 && alpha < H)) throw std::invalid_argument("criterion_general: alpha must lie in (1/3, H)");
        RoughKappa rk;
        rk.A_norm = sd.A_norm;
        rk.C_f = r.C_f;
        rk.alpha = alpha;
        rk.nu = 0.5 * (alpha + H);
        const auto norms = rough_norm_samples(H, alpha, rk.nu, m, n_samples, mc_seed);
        auto mean_at = [&](double c) {
            std::vector<double> vals(norms.size());
            for (std::size_t i = 0; i < norms.size(); ++i) vals[i] = rk(c, norms[i]);
            return mc_mean(vals);
        };
        r.E_kappa = mean_at(r.noise);
        auto lhs = [&](double c) { return c * mean_at(c).estimate; };
        r.eps_local = detail::largest_below(lhs, r.lambda_A - r.h0);
        r.eps_global = detail::largest_below(lhs, r.lambda_A - r.C_f);
    }
    r.predicted_rate = r.lambda_A - r.C_f - r.noise * r.E_kappa.estimate;
    r.local_satisfied = r.local_hypothesis && r.noise < r.eps_local;
    r.global_satisfied = r.global_hypothesis && r.noise < r.eps_global;
    return r;
}

// ---------------------------------------------------------------------------------------------
// Angular / log-norm decomposition

struct AngularConsistency {
    double max_theta_norm_dev = 0.0;  ///< max |‖θ_t‖ − 1|
    double max_recon_rel_err = 0.0;   ///< max ‖e^{ℓ_t}θ_t − y_t‖/‖y_t‖
    double max_lognorm_err = 0.0;     ///< max |ℓ_t − log‖y_t‖|
    double max_direction_err = 0.0;   ///< max ‖θ_t − y_t/‖y_t‖‖
    double scheme_tolerance = 0.0;    ///< step-halving difference of the direct solver (relative)
    [[nodiscard]] bool consistent(double factor = 10.0) const {
        return max_recon_rel_err <= factor * scheme_tolerance;
    }
};

struct AngularResult {
    SampledPath theta;
    SampledPath lognorm;
    SampledPath direct;
    AngularConsistency consistency;
};

namespace detail {

/// The (ℓ, θ) system with ℓ = log‖y‖ and θ = y/‖y‖, stored as z = [ℓ; θ].
struct AngularSystem {
    Mat A;
    VecField f;
    DiffusionMap g;                 ///< general diffusion; empty when C is used
    std::vector<Mat> C;             ///< linear diffusion
    std::size_t m = 1;

    [[nodiscard]] std::size_t d() const { return static_cast<std::size_t>(A.rows()); }

    static double scale(const Vec& z, std::size_t k) {
        const double r = std::exp(z(0));
        if (!(r > 0.0)) throw UnderflowError("angular: norm underflow", k);
        return r;
    }

    [[nodiscard]] Vec drift(const Vec& z, std::size_t k) const {
        const auto d_ = static_cast<Eigen::Index>(d());
        const Vec th = z.tail(d_);
        Vec b = A * th;
        if (f) {
            const double r = scale(z, k);
            b += f(r * th) / r;
        }
        Vec out(d_ + 1);
        const double q = th.dot(b);
        out(0) = q;
        out.tail(d_) = b - th * q;
        return out;
    }

    /// G_j = g_j(y)/‖y‖, column j.
    [[nodiscard]] Mat G(const Vec& z, std::size_t k) const {
        const auto d_ = static_cast<Eigen::Index>(d());
        const Vec th = z.tail(d_);
        if (!C.empty()) {
            Mat out(d_, static_cast<Eigen::Index>(C.size()));
            for (std::size_t j = 0; j < C.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = C[j] * th;
            return out;
        }
        const double r = scale(z, k);
        return g(r * th) / r;
    }

    [[nodiscard]] Mat sigma(const Vec& z, std::size_t k) const {
        const auto d_ = static_cast<Eigen::Index>(d());
        const Vec th = z.tail(d_);
        const Mat Gm = G(z, k);
        Mat out(d_ + 1, Gm.cols());
        for (Eigen::Index j = 0; j < Gm.cols(); ++j) {
            const double q = th.dot(Gm.col(j));
            out(0, j) = q;
            out.col(j).tail(d_) = Gm.col(j) - th * q;
        }
        return out;
    }

    /// D σ_j(z)[v]: exact for linear diffusion, central differences otherwise.
    [[nodiscard]] Vec dsigma(std::size_t j, const Vec& z, const Vec& v, std::size_t k) const {
        const auto d_ = static_cast<Eigen::Index>(d());
        if (!C.empty()) {
            const Vec th = z.tail(d_), vt = v.tail(d_);
            const Vec Ct = C[j] * th, Cv = C[j] * vt;
            const double q = th.dot(Ct);
            const double dq = vt.dot(Ct) + th.dot(Cv);
            Vec out(d_ + 1);
            out(0) = dq;
            out.tail(d_) = Cv - vt * q - th * dq;
            return out;
        }
        const double nv = v.norm();
        if (nv == 0.0) return Vec::Zero(d_ + 1);
        const double eps = 1e-6 / nv;
        const auto jj = static_cast<Eigen::Index>(j);
        return (sigma(z + eps * v, k).col(jj) - sigma(z - eps * v, k).col(jj)) / (2.0 * eps);
    }

    /// ½ D²Ψ[C_j y, C_k y] for Ψ(y) = (log‖y‖, y/‖y‖), linear diffusion only.
    [[nodiscard]] Vec bracket_coeff(const Vec& z, std::size_t j, std::size_t k) const {
        const auto d_ = static_cast<Eigen::Index>(d());
        const Vec th = z.tail(d_);
        const Vec a = C[j] * th, b = C[k] * th;
        const double qa = th.dot(a), qb = th.dot(b), ab = a.dot(b);
        Vec out(d_ + 1);
        out(0) = 0.5 * (ab - 2.0 * qa * qb);
        out.tail(d_) = 0.5 * (-a * qb - b * qa - th * ab + 3.0 * th * qa * qb);
        return out;
    }

    /// z + B Δt + Σ Δx + Σ_{j,k} Dσ_j[σ_k] W_{jk} (+ bracket drift), with W = ½ΔxΔx^T (Young
    /// Milstein) or W = X (rough Davie).
    [[nodiscard]] Vec step(const Vec& z, double dt, const Vec& dx, const Mat& W, const Mat* B, std::size_t k) const {
        const Mat S = sigma(z, k);
        Vec next = z + drift(z, k) * dt + S * dx;
        for (Eigen::Index j = 0; j < S.cols(); ++j)
            for (Eigen::Index l = 0; l < S.cols(); ++l) {
                const double w = W(j, l);
                if (w != 0.0) next += w * dsigma(static_cast<std::size_t>(j), z, S.col(l), k);
            }
        if (B)
            for (Eigen::Index j = 0; j < S.cols(); ++j)
                for (Eigen::Index l = 0; l < S.cols(); ++l)
                    next += (*B)(j, l) * bracket_coeff(z, static_cast<std::size_t>(j), static_cast<std::size_t>(l));
        return next;
    }
};

inline AngularResult integrate_angular(const AngularSystem& sys, const SampledPath& x, const RoughLift* lift,
                                       const Vec& y0, SampledPath direct, double tol) {
    if (y0.norm() == 0.0) throw std::invalid_argument("angular_log_decomposition: y0 must be nonzero");
    const std::size_t n = x.n();
    const auto d = static_cast<Eigen::Index>(sys.d());
    Vec z(d + 1);
    z(0) = std::log(y0.norm());
    z.tail(d) = y0 / y0.norm();
    Mat th(d, static_cast<Eigen::Index>(n + 1)), ln(1, static_cast<Eigen::Index>(n + 1));
    th.col(0) = z.tail(d);
    ln(0, 0) = z(0);
    const bool bracket_terms = lift && !lift->is_geometric();
    for (std::size_t k = 0; k < n; ++k) {
        const Vec dx = x.increment(k, k + 1);
        Mat W = lift ? pair_levy(*lift, k) : Mat(0.5 * outer(dx, dx));
        Mat B;
        if (bracket_terms) B = outer(dx, dx) - 2.0 * sym(W);
        z = sys.step(z, x.grid().dt(k), dx, W, bracket_terms ? &B : nullptr, k + 1);
        if (!z.allFinite()) throw BlowUpError("angular: non-finite state", k + 1);
        if (!std::isfinite(std::exp(z(0))) || std::exp(z(0)) == 0.0) throw UnderflowError("angular: norm underflow", k + 1);
        th.col(static_cast<Eigen::Index>(k + 1)) = z.tail(d);
        ln(0, static_cast<Eigen::Index>(k + 1)) = z(0);
    }
    AngularResult res{SampledPath(x.grid(), th), SampledPath(x.grid(), ln), std::move(direct), {}};
    auto& c = res.consistency;
    c.scheme_tolerance = tol;
    for (std::size_t k = 0; k <= n; ++k) {
        const auto ck = static_cast<Eigen::Index>(k);
        const Vec y = res.direct.at(k);
        const double ny = y.norm();
        const Vec t = th.col(ck);
        c.max_theta_norm_dev = std::max(c.max_theta_norm_dev, std::abs(t.norm() - 1.0));
        c.max_recon_rel_err = std::max(c.max_recon_rel_err, (std::exp(ln(0, ck)) * t - y).norm() / ny);
        c.max_lognorm_err = std::max(c.max_lognorm_err, std::abs(ln(0, ck) - std::log(ny)));
        c.max_direction_err = std::max(c.max_direction_err, (t - y / ny).norm());
    }
    return res;
}

/// Every other grid point; the coarse lift keeps the pair values of the fine one.
inline RoughLift coarsen_lift(const RoughLift& L) {
    const std::size_t n = L.n() / 2;
    Mat v(static_cast<Eigen::Index>(L.dim()), static_cast<Eigen::Index>(n + 1));
    std::vector<double> pts(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        v.col(static_cast<Eigen::Index>(k)) = L.path().at(2 * k);
        pts[k] = L.grid()[2 * k];
    }
    const auto g = L.grid().is_uniform() ? TimeGrid::uniform(pts.front(), pts.back(), n) : TimeGrid::from_points(pts);
    std::vector<Mat> seg(n);
    for (std::size_t k = 0; k < n; ++k) seg[k] = L.levy(2 * k, 2 * k + 2);
    return RoughLift::from_segments(SampledPath(g, std::move(v)), seg, L.hurst_hint());
}

inline double halving_difference(const SampledPath& fine, const SampledPath& coarse) {
    double worst = 0.0;
    for (std::size_t k = 0; k <= coarse.n(); ++k) {
        const Vec a = fine.at(2 * k), b = coarse.at(k);
        worst = std::max(worst, (a - b).norm() / std::max(a.norm(), 1e-300));
    }
    return worst;
}

}  // namespace detail

/// Young mode: integrates the (log‖y‖, θ) system with the Milstein-type scheme and compares it with
/// the direct Milstein solution.
[[nodiscard]] inline AngularResult angular_log_decomposition(const YoungSystem& sys, const SampledPath& x, const Vec& y0) {
    if (x.n() < 2 || x.n() % 2 != 0) throw std::invalid_argument("angular_log_decomposition: need an even number of steps");
    detail::AngularSystem a{sys.A, sys.f, sys.C.empty() ? sys.g : DiffusionMap{}, sys.C, sys.m};
    auto direct = solve_yde(sys, x, y0, YoungScheme::milstein);
    Mat v(static_cast<Eigen::Index>(x.dim()), static_cast<Eigen::Index>(x.n() / 2 + 1));
    for (std::size_t k = 0; k <= x.n() / 2; ++k) v.col(static_cast<Eigen::Index>(k)) = x.at(2 * k);
    std::vector<double> pts(x.n() / 2 + 1);
    for (std::size_t k = 0; k < pts.size(); ++k) pts[k] = x.grid()[2 * k];
    const auto cg = x.grid().is_uniform() ? TimeGrid::uniform(pts.front(), pts.back(), x.n() / 2) : TimeGrid::from_points(pts);
    const auto coarse = solve_yde(sys, SampledPath(cg, std::move(v)), y0, YoungScheme::milstein);
    const double tol = detail::halving_difference(direct, coarse);
    return detail::integrate_angular(a, x, nullptr, y0, std::move(direct), tol);
}

/// Rough-linear mode: Davie-type scheme for the (log‖y‖, θ) system including the bracket drift
/// (which vanishes for geometric lifts).
[[nodiscard]] inline AngularResult angular_log_decomposition(const RoughLinearSystem& sys, const RoughLift& lift,
                                                             const Vec& y0) {
    if (lift.n() < 2 || lift.n() % 2 != 0) throw std::invalid_argument("angular_log_decomposition: need an even number of steps");
    detail::AngularSystem a{sys.A, sys.f, DiffusionMap{}, sys.C, sys.m()};
    auto direct = solve_linear_rde(sys, lift, y0).trajectory;
    const auto coarse = solve_linear_rde(sys, detail::coarsen_lift(lift), y0).trajectory;
    const double tol = detail::halving_difference(direct, coarse);
    return detail::integrate_angular(a, lift.path(), &lift, y0, std::move(direct), tol);
}

// ---------------------------------------------------------------------------------------------
// Lyapunov exponents

/// Least-squares slope of log‖y_t‖ against t on the window after the burn-in fraction.
[[nodiscard]] inline double lyapunov_from_log(const std::vector<double>& t, const std::vector<double>& logs,
                                              double burn_in_fraction = 0.5) {
    if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0))
        throw std::invalid_argument("lyapunov_exponent: burn-in fraction must lie in [0,1)");
    const double t0 = t.front(), T = t.back();
    const double start = t0 + burn_in_fraction * (T - t0);
    double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (t[k] < start) continue;
        const double x = t[k] - start;
        n += 1;
        sx += x;
        sy += logs[k];
        sxx += x * x;
        sxy += x * logs[k];
    }
    if (n < 2) throw std::invalid_argument("lyapunov_exponent: window has fewer than two points");
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

[[nodiscard]] inline double lyapunov_exponent(const SampledPath& traj, double burn_in_fraction = 0.5) {
    std::vector<double> logs(traj.n() + 1);
    for (std::size_t k = 0; k <= traj.n(); ++k) {
        const double r = traj.at(k).norm();
        if (!(r > 0.0)) throw std::invalid_argument("lyapunov_exponent: zero-norm point at index " + std::to_string(k));
        logs[k] = std::log(r);
    }
    return lyapunov_from_log(traj.grid().points(), logs, burn_in_fraction);
}

/// (log‖y_T‖ − log‖y_0‖)/(T − t_0).
[[nodiscard]] inline double endpoint_exponent(const SampledPath& traj) {
    const double a = traj.at(0).norm(), b = traj.at(traj.n()).norm();
    if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("endpoint_exponent: zero-norm endpoint");
    return (std::log(b) - std::log(a)) / (traj.grid().t1() - traj.grid().t0());
}

// ---------------------------------------------------------------------------------------------
// Gronwall, pathwise log-norm bound, Γ and the local radius

/// b_n = b_0 Π_{k<n} (1 + c_k).
[[nodiscard]] inline std::vector<double> discrete_gronwall(double b0, const std::vector<double>& coeffs) {
    std::vector<double> out{b0};
    out.reserve(coeffs.size() + 1);
    for (double c : coeffs) {
        if (c < 0.0) throw std::invalid_argument("discrete_gronwall: negative coefficient");
        out.push_back(out.back() * (1.0 + c));
    }
    return out;
}

namespace detail {

inline std::vector<std::size_t> unit_indices(const TimeGrid& g) {
    std::vector<std::size_t> idx;
    const double t0 = g.t0();
    for (std::size_t k = 0;; ++k) {
        const auto i = g.index_of(t0 + static_cast<double>(k));
        if (!i) break;
        idx.push_back(*i);
    }
    if (idx.size() < 2) throw std::invalid_argument("unit intervals: grid must contain t0 + 1");
    return idx;
}

}  // namespace detail

/// ⟦x⟧_{p-var} on each unit interval [t0 + k, t0 + k + 1] lying in the grid.
[[nodiscard]] inline std::vector<double> unit_pvar(const SampledPath& x, double p) {
    const auto idx = detail::unit_indices(x.grid());
    std::vector<double> out;
    for (std::size_t k = 0; k + 1 < idx.size(); ++k) out.push_back(p_variation_idx(x, p, idx[k], idx[k + 1]));
    return out;
}

struct GronwallCheck {
    std::vector<double> sequence;  ///< e^{2λn}‖y_n‖²
    std::vector<double> bound;     ///< ‖y_0‖² Π(1 + c_k)
    std::size_t violations = 0;
};

/// Compares e^{2λn}‖y_n‖² (λ = λ_A − C_f) with its Gronwall bound built from unit-interval p-variations.
[[nodiscard]] inline GronwallCheck gronwall_check(const StabilityFunctionals& fn, const SampledPath& x,
                                                  const SampledPath& y) {
    const auto idx = detail::unit_indices(y.grid());
    const auto v = unit_pvar(x, fn.p);
    std::vector<double> c(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) c[k] = fn.gronwall_coeff(v[k]);
    GronwallCheck g;
    g.bound = discrete_gronwall(y.at(idx[0]).squaredNorm(), c);
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const double s = std::exp(2.0 * fn.lambda * static_cast<double>(k)) * y.at(idx[k]).squaredNorm();
        g.sequence.push_back(s);
        if (s > g.bound[k] * (1.0 + 1e-12)) ++g.violations;
    }
    return g;
}

struct LogBoundCheck {
    std::size_t points = 0;
    std::size_t violations = 0;
    double worst_margin = std::numeric_limits<double>::infinity();  ///< min of rhs − lhs
};

/// log‖y_t‖ ≤ log‖y_a‖ + ∫_a^t [h(‖y_s‖) − λ_A] ds + C_g κ₁(⟦x⟧_{p-var,[a,t]}) + C_g κ₂(‖y_a‖)
/// on every unit interval and every grid point t inside it.
[[nodiscard]] inline LogBoundCheck log_bound_check(const StabilityFunctionals& fn, double lambda_A_value,
                                                   const SampledPath& x, const SampledPath& y) {
    const auto idx = detail::unit_indices(y.grid());
    const auto& g = y.grid();
    LogBoundCheck c;
    for (std::size_t u = 0; u + 1 < idx.size(); ++u) {
        const std::size_t a = idx[u], b = idx[u + 1];
        auto V = p_variation_powers_from(x.values(), fn.p, a, b);
        const double ya = y.at(a).norm();
        double integral = 0.0;
        for (std::size_t k = a + 1; k <= b; ++k) {
            integral += (fn.H(y.at(k - 1).norm()) - lambda_A_value) * g.dt(k - 1);
            const double xp = std::pow(V[k - a], 1.0 / fn.p);
            const double rhs = std::log(ya) + integral + fn.C_g * fn.kappa1(xp) + fn.C_g * fn.kappa2(ya);
            const double lhs = std::log(y.at(k).norm());
            ++c.points;
            c.worst_margin = std::min(c.worst_margin, rhs - lhs);
            if (lhs > rhs + 1e-12) ++c.violations;
        }
    }
    return c;
}

/// Running means of C_g κ₁ over unit blocks, Γ(n)/n.
[[nodiscard]] inline std::vector<double> gamma_running_mean(const StabilityFunctionals& fn, const SampledPath& x) {
    const auto v = unit_pvar(x, fn.p);
    std::vector<double> out;
    double acc = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
        acc += fn.C_g * fn.kappa1(v[k]);
        out.push_back(acc / static_cast<double>(k + 1));
    }
    return out;
}

struct LocalRadius {
    double epsilon = 0.0;   ///< slack with ε < λ_A − H(0) − ε Eκ₁
    double delta = 0.0;     ///< C_g κ₂(δ) + H(δ e^{C_g κ₂(δ)}) < H(0) + ε
    std::size_t m = 0;      ///< first integer after which Γ(t) < (λ_A − H(0) − ε)t on the horizon
    double radius = 0.0;    ///< r(x)
    bool found = false;
};

/// r(x) = δ exp{Γ(m) − (λ_A − H(0) − ε)m} Π_{j<m}[1 + e^{F(1, x_{p,j})}]^{−1}, with ε taken as half
/// of the fixed point (λ_A − H(0))/(1 + Eκ₁).
[[nodiscard]] inline LocalRadius local_radius(const StabilityFunctionals& fn, double lambda_A_value, double E_kappa1,
                                              const SampledPath& x) {
    LocalRadius r;
    const double h0 = fn.H(0.0);
    if (!(lambda_A_value > h0)) return r;
    r.epsilon = 0.5 * (lambda_A_value - h0) / (1.0 + E_kappa1);
    // Compared as increments over H(0): ε can sit far below the spacing of doubles near H(0).
    const double target = r.epsilon;
    auto lhs = [&](double dl) {
        const double z = dl * std::exp(fn.C_g * fn.kappa2(dl));
        return fn.C_g * fn.kappa2(dl) + fn.h.c1 * z / (1.0 + z);
    };
    double lo = 0.0, hi = 1.0;
    while (lhs(hi) < target && hi < 1e12) hi *= 2.0;
    if (lhs(hi) < target) {
        r.delta = hi;
    } else {
        for (int it = 0; it < 2000 && hi - lo > 1e-14 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            (lhs(mid) < target ? lo : hi) = mid;
        }
        r.delta = lo;
    }
    const auto v = unit_pvar(x, fn.p);
    const double rate = lambda_A_value - h0 - r.epsilon;
    std::vector<double> Gam{0.0};
    for (double vk : v) Gam.push_back(Gam.back() + fn.C_g * fn.kappa1(vk));
    for (std::size_t m = 0; m < Gam.size(); ++m) {
        bool ok = true;
        for (std::size_t t = std::max<std::size_t>(m, 1); t < Gam.size(); ++t)
            if (!(Gam[t] - rate * static_cast<double>(t) < 0.0)) ok = false;
        if (ok) {
            r.m = m;
            r.found = true;
            break;
        }
    }
    if (!r.found) return r;
    double logr = std::log(r.delta) + Gam[r.m] - rate * static_cast<double>(r.m);
    for (std::size_t j = 0; j < r.m; ++j) logr -= std::log1p(std::exp(fn.F(1.0, v[j])));
    r.radius = std::exp(logr);
    return r;
}

struct PhiBoundCheck {
    double log_norm = 0.0;   ///< log‖Φ(T)‖
    double log_bound = 0.0;  ///< −λ_A T + ‖C‖ Σ_k κ on unit intervals
    bool passed = false;
};

/// ‖Φ(T)‖ against exp{−λ_A T + ‖C‖ Σ_k κ_k}, κ_k the rough assembly on [k, k+1].
[[nodiscard]] inline PhiBoundCheck phi_bound_check(const RoughLinearSystem& sys, const RoughLift& lift, double alpha,
                                                   double nu) {
    const auto idx = detail::unit_indices(lift.grid());
    const auto sd = lambda_A(sys.A);
    RoughKappa rk;
    rk.A_norm = sd.A_norm;
    rk.C_f = sys.C_f;
    rk.C_alpha = sys.C_alpha;
    rk.alpha = alpha;
    rk.nu = nu;
    rk.mu = sys.mu;
    const double c = sys.C_norm();
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < idx.size(); ++k) sum += rk(c, rough_norms_idx(lift, alpha, nu, idx[k], idx[k + 1]));
    const auto Phi = solution_matrix(sys, lift);
    PhiBoundCheck p;
    p.log_norm = std::log(spectral_norm(Phi.Phi[idx.back()]));
    p.log_bound = -sd.lambda_A * (lift.grid()[idx.back()] - lift.grid().t0()) + c * sum;
    p.passed = p.log_norm <= p.log_bound + 1e-12;
    return p;
}

// ---------------------------------------------------------------------------------------------
// Experiments

struct ExperimentConfig {
    SystemSpec system;
    double H = 0.7;
    double T = 50.0;
    std::size_t n = 1u << 14;
    std::uint64_t master_seed = 0;
    std::size_t count = 100;
    StabilityMode mode = StabilityMode::young;
    double alpha = 0.35;
    double p = 1.5;
    double burn_in = 0.5;
    std::vector<double> y0_magnitudes{1.0};
    std::size_t mc_samples = 10000;
    bool run_criteria = true;

    void validate() const {
        (void)lambda_A(system.A);
        if (system.C.empty()) throw std::invalid_argument("config: need at least one C_j");
        for (const auto& c : system.C)
            if (c.rows() != system.A.rows() || c.cols() != system.A.cols())
                throw std::invalid_argument("config: C_j must match A");
        if (!(H > 0.0 && H < 1.0)) throw std::invalid_argument("config: H must lie in (0,1)");
        if (mode == StabilityMode::young && !(H > 0.5)) throw std::invalid_argument("config: young mode needs H > 1/2");
        if (mode == StabilityMode::rough_linear && !(H > 1.0 / 3.0 && H < 0.5))
            throw std::invalid_argument("config: rough_linear mode needs H in (1/3,1/2)");
        if (!(T > 0.0) || n < 2 || count < 1) throw std::invalid_argument("config: need T > 0, n >= 2, count >= 1");
        if (y0_magnitudes.empty()) throw std::invalid_argument("config: need at least one initial magnitude");
        for (double r : y0_magnitudes)
            if (!(r > 0.0)) throw std::invalid_argument("config: initial magnitudes must be positive");
    }
};

enum class Classification { globally_exp_stable, locally_exp_stable, unstable, inconclusive };

[[nodiscard]] inline std::string classification_name(Classification c) {
    switch (c) {
        case Classification::globally_exp_stable: return "globally-exp-stable-evidence";
        case Classification::locally_exp_stable: return "locally-exp-stable-evidence";
        case Classification::unstable: return "unstable-evidence";
        case Classification::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

struct SeedRecord {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    double magnitude = 1.0;
    double exponent = 0.0;           ///< regression estimate
    double endpoint = 0.0;           ///< (1/T) log‖y_T‖/‖y_0‖
    bool blew_up = false;
};

struct StabilityReport {
    double measured_exponent = 0.0;  ///< median regression exponent over seeds at magnitude 1 (or the first)
    Classification classification = Classification::inconclusive;
    std::map<std::string, std::pair<double, bool>> thresholds;  ///< name → (bound, satisfied)
    std::vector<SeedRecord> seeds;
    double fraction_negative = 0.0;
    std::optional<CriterionReport> linear_criterion;
    std::optional<GeneralCriterionReport> general_criterion;
};

/// Seed of the Monte-Carlo sample used by the criteria of an experiment.
[[nodiscard]] inline std::uint64_t experiment_mc_seed(const ExperimentConfig& cfg) {
    return derive_seed(cfg.master_seed, std::uint64_t{1} << 40);
}

/// Driver sample for seed i of an experiment.
[[nodiscard]] inline SampledPath experiment_driver(const ExperimentConfig& cfg, std::size_t i) {
    return sample_fbm(cfg.H, TimeGrid::uniform(0.0, cfg.T, cfg.n), std::max<std::size_t>(cfg.system.m(), 1),
                      derive_seed(cfg.master_seed, i));
}

/// Solve from y0 in the configured mode.
[[nodiscard]] inline SampledPath experiment_solve(const ExperimentConfig& cfg, const SampledPath& x, const Vec& y0) {
    if (cfg.mode == StabilityMode::young) return solve_yde(to_young(cfg.system), x, y0, YoungScheme::milstein);
    return solve_linear_rde(to_rough(cfg.system), lift_piecewise_linear(x, cfg.H), y0).trajectory;
}

/// Per-seed solves, exponents and the aggregate classification:
///   globally-exp-stable-evidence: every seed and every initial magnitude gives a negative exponent;
///   locally-exp-stable-evidence: the smallest magnitude does, some larger one does not;
///   unstable-evidence: more than half of the runs at the smallest magnitude are non-negative or blow up;
///   inconclusive otherwise.
[[nodiscard]] inline StabilityReport run_stability_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const std::size_t d = cfg.system.d();
    const Vec dir = Vec::Ones(static_cast<Eigen::Index>(d)) / std::sqrt(static_cast<double>(d));
    std::vector<double> mags = cfg.y0_magnitudes;
    std::sort(mags.begin(), mags.end());
    StabilityReport rep;
    rep.seeds.resize(cfg.count * mags.size());
    parallel_for(cfg.count, [&](std::size_t i) {
        const auto x = experiment_driver(cfg, i);
        for (std::size_t q = 0; q < mags.size(); ++q) {
            SeedRecord& r = rep.seeds[i * mags.size() + q];
            r.index = i;
            r.seed = derive_seed(cfg.master_seed, i);
            r.magnitude = mags[q];
            try {
                const auto y = experiment_solve(cfg, x, mags[q] * dir);
                r.exponent = lyapunov_exponent(y, cfg.burn_in);
                r.endpoint = endpoint_exponent(y);
            } catch (const BlowUpError&) {
                r.blew_up = true;
                r.exponent = r.endpoint = std::numeric_limits<double>::infinity();
            } catch (const std::invalid_argument&) {
                // exact zero reached: decays faster than any exponential
                r.exponent = r.endpoint = -std::numeric_limits<double>::infinity();
            }
        }
    });
    std::vector<std::size_t> neg(mags.size(), 0);
    std::vector<double> first;
    std::size_t ref = 0;
    for (std::size_t q = 0; q < mags.size(); ++q)
        if (mags[q] == 1.0) ref = q;
    for (const auto& r : rep.seeds) {
        std::size_t q = static_cast<std::size_t>(std::find(mags.begin(), mags.end(), r.magnitude) - mags.begin());
        if (r.exponent < 0.0) ++neg[q];
        if (q == ref) first.push_back(r.exponent);
    }
    std::sort(first.begin(), first.end());
    rep.measured_exponent = first[first.size() / 2];
    rep.fraction_negative = static_cast<double>(neg[ref]) / static_cast<double>(cfg.count);
    const bool all_neg = std::all_of(neg.begin(), neg.end(), [&](std::size_t v) { return v == cfg.count; });
    if (all_neg)
        rep.classification = Classification::globally_exp_stable;
    else if (neg.front() == cfg.count)
        rep.classification = Classification::locally_exp_stable;
    else if (2 * neg.front() < cfg.count)
        rep.classification = Classification::unstable;
    if (cfg.run_criteria) {
        const bool linear_young = cfg.mode == StabilityMode::young && cfg.system.g_family == "linear" &&
                                  cfg.system.h.bound() == 0.0;
        if (linear_young && cfg.p * cfg.H > 1.0) {
            rep.linear_criterion = criterion_linear_young(cfg.system.A, cfg.system.C, cfg.p, cfg.H,
                                                          experiment_mc_seed(cfg), cfg.mc_samples);
            rep.thresholds["stablin"] = {rep.linear_criterion->rhs_conservative, rep.linear_criterion->satisfied};
        }
        rep.general_criterion = criterion_general(cfg.system, cfg.H, cfg.mode, experiment_mc_seed(cfg),
                                                  cfg.p, cfg.alpha, cfg.mc_samples);
        const auto& g = *rep.general_criterion;
        rep.thresholds["eps_local"] = {g.eps_local, g.local_satisfied};
        rep.thresholds["eps_global"] = {g.eps_global, g.global_satisfied};
        if (cfg.mode == StabilityMode::young)
            rep.thresholds["eps_step3"] = {g.eps_step3, g.global_hypothesis && g.noise < g.eps_step3};
    }
    return rep;
}

}  // namespace roughstab
