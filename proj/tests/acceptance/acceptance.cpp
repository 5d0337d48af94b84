// Acceptance checks AC1..AC11. Prints one PASS/FAIL line per criterion; exit status 1 if any fails.
// Optional arguments restrict the run to the named criteria, e.g. `acceptance AC4 AC9`.

#include "roughstab/cli.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>

using namespace roughstab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

SampledPath subsample(const SampledPath& x, std::size_t stride) {
    const std::size_t n = x.n() / stride;
    Mat v(static_cast<Eigen::Index>(x.dim()), static_cast<Eigen::Index>(n + 1));
    for (std::size_t k = 0; k <= n; ++k) v.col(static_cast<Eigen::Index>(k)) = x.at(k * stride);
    return SampledPath(TimeGrid::uniform(x.grid().t0(), x.grid().t1(), n), std::move(v));
}

/// Slope and R² of the least-squares line through (a_i, b_i).
std::pair<double, double> fit_line(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sx += a[i];
        sy += b[i];
        sxx += a[i] * a[i];
        sxy += a[i] * b[i];
        syy += b[i] * b[i];
    }
    const double cov = n * sxy - sx * sy, vx = n * sxx - sx * sx, vy = n * syy - sy * sy;
    return {cov / vx, vy > 0 ? cov * cov / (vx * vy) : 1.0};
}

/// Second level of the piecewise-linear interpolation by direct summation, entry (a,b) = ∫ x^b_{u,r} dx^a_r.
Mat levy_direct(const SampledPath& x, std::size_t u, std::size_t v) {
    const auto m = static_cast<Eigen::Index>(x.dim());
    Mat X = Mat::Zero(m, m);
    for (std::size_t k = u; k < v; ++k) {
        const Vec d = x.increment(k, k + 1);
        X += d * x.increment(u, k).transpose() + 0.5 * d * d.transpose();
    }
    return X;
}

/// Maximum of Σ ‖x_{t_{k-1},t_k}‖^p over all 2^{n−1} partitions, raised to 1/p.
double pvar_enumerated(const SampledPath& x, double p) {
    const std::size_t n = x.n();
    double best = 0.0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (n - 1)); ++mask) {
        double s = 0.0;
        std::size_t prev = 0;
        for (std::size_t k = 1; k <= n; ++k) {
            if (k < n && !((mask >> (k - 1)) & 1u)) continue;
            s += std::pow(x.increment(prev, k).norm(), p);
            prev = k;
        }
        best = std::max(best, s);
    }
    return std::pow(best, 1.0 / p);
}

double closed_form_error(const SampledPath& y, const SampledPath& x, double a, double c) {
    double err = 0.0;
    for (std::size_t k = 0; k <= x.n(); ++k)
        err = std::max(err, std::abs(y.at(k)(0) / std::exp(a * x.grid()[k] + c * x.at(k)(0)) - 1.0));
    return err;
}

// ---------------------------------------------------------------------------------------------

Outcome ac1() {
    constexpr double kTol = 1e-12;
    constexpr std::size_t kLifts = 50, kTriples = 10000, kSpot = 50, kN = 4096;
    const double hursts[] = {0.35, 0.5, 0.7};
    double chen = 0.0, symm = 0.0, spot = 0.0;
    for (std::size_t l = 0; l < kLifts; ++l) {
        const double H = hursts[l % 3];
        const auto x = sample_fbm(H, TimeGrid::uniform(0.0, 1.0, kN), 2, derive_seed(101, l));
        const auto L = lift_piecewise_linear(x, H);
        auto eng = make_engine(derive_seed(102, l), 0);
        std::uniform_int_distribution<std::size_t> idx(0, kN);
        for (std::size_t q = 0; q < kTriples; ++q) {
            std::size_t t[3] = {idx(eng), idx(eng), idx(eng)};
            std::sort(t, t + 3);
            chen = std::max(chen, chen_defect(L, t[0], t[1], t[2]).cwiseAbs().maxCoeff());
            symm = std::max(symm, symmetry_defect(L, t[0], t[2]).cwiseAbs().maxCoeff());
        }
        for (std::size_t q = 0; q < kSpot; ++q) {
            std::size_t u = idx(eng), v = idx(eng);
            if (u > v) std::swap(u, v);
            spot = std::max(spot, (L.levy(u, v) - levy_direct(x, u, v)).cwiseAbs().maxCoeff());
        }
    }
    return {chen <= kTol && symm <= kTol && spot <= kTol,
            fmt("max chen %.3g, symmetry %.3g, direct-sum %.3g (tol %.0e)", chen, symm, spot, kTol)};
}

Outcome ac2() {
    constexpr double kRelTol = 1e-10;
    auto eng = make_engine(201, 0);
    std::normal_distribution<double> nd;
    std::uniform_int_distribution<std::size_t> len(1, 12), dim(1, 3);
    std::uniform_real_distribution<double> pd(1.0, 4.0);
    double worst = 0.0;
    for (std::size_t q = 0; q < 200; ++q) {
        const std::size_t n = len(eng), d = dim(eng);
        const double p = q % 4 == 0 ? 1.0 : pd(eng);
        Mat v(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(n + 1));
        for (Eigen::Index k = 0; k < v.size(); ++k) v.data()[k] = nd(eng);
        const SampledPath x(TimeGrid::uniform(0.0, 1.0, n), v);
        const double dp = p_variation_idx(x, p, 0, n), ex = pvar_enumerated(x, p);
        worst = std::max(worst, std::abs(dp - ex) / ex);
    }
    return {worst <= kRelTol, fmt("max relative difference %.3g over 200 paths (tol %.0e)", worst, kRelTol)};
}

Outcome ac3() {
    constexpr std::size_t kPairs = 1000, kN = 512, kRefine = 8;
    const double p = 1.4, K = 1.0 / (1.0 - std::exp2(1.0 - 2.0 / p));
    const auto fine = TimeGrid::uniform(0.0, 1.0, kN * kRefine);
    std::size_t checks = 0, violations = 0;
    double worst = 0.0;
    for (std::size_t q = 0; q < kPairs; ++q) {
        const auto x = sample_fbm(0.7, fine, 1, derive_seed(301, 2 * q));
        const auto y = sample_fbm(0.7, fine, 1, derive_seed(301, 2 * q + 1));
        // p-variation on the n = 512 path, the integral on the refined grid
        const auto Vx = p_variation_powers_from(subsample(x, kRefine).values(), p, 0, kN);
        const auto Vy = p_variation_powers_from(subsample(y, kRefine).values(), p, 0, kN);
        double integral = 0.0;
        for (std::size_t k = 0; k < fine.n(); ++k) {
            integral += y.at(k)(0) * (x.at(k + 1)(0) - x.at(k)(0));
            // intervals [0, j/8] on the coarse grid
            const std::size_t j = k + 1;
            if (j % (fine.n() / 8) != 0) continue;
            const double lhs = std::abs(integral - y.at(0)(0) * (x.at(j)(0) - x.at(0)(0)));
            const double rhs = K * std::pow(Vy[j / kRefine], 1.0 / p) * std::pow(Vx[j / kRefine], 1.0 / p);
            worst = std::max(worst, lhs / rhs);
            ++checks;
            if (lhs > rhs) ++violations;
        }
    }
    return {violations == 0, fmt("%zu violations in %zu checks, max ratio %.3f (K = %.4f)", violations, checks, worst, K)};
}

Outcome ac4() {
    constexpr double kTol = 1e-3, kR2 = 0.95;
    constexpr std::size_t kSeeds = 20, kFine = 1u << 14;
    const double a = -1.0, c = 0.5;
    const Mat A = Mat::Constant(1, 1, a);
    const std::vector<Mat> C{Mat::Constant(1, 1, c)};
    const auto ys = linear_young_system(A, C);
    const auto rs = rough_linear_system(A, C);
    const std::vector<std::size_t> levels{256, 512, 1024, 2048, 4096, 8192};
    std::vector<double> euler(levels.size()), davie(levels.size());
    double worst_young = 0.0, worst_rough = 0.0;
    for (std::size_t s = 0; s < kSeeds; ++s) {
        const auto g = TimeGrid::uniform(0.0, 1.0, kFine);
        const auto xy = sample_fbm(0.7, g, 1, derive_seed(401, s));
        const auto xr = sample_fbm(0.4, g, 1, derive_seed(402, s));
        worst_young = std::max(worst_young, closed_form_error(solve_yde(ys, xy, Vec::Ones(1), YoungScheme::milstein), xy, a, c));
        worst_rough = std::max(worst_rough,
                               closed_form_error(solve_linear_rde(rs, lift_piecewise_linear(xr, 0.4), Vec::Ones(1)).trajectory, xr, a, c));
        for (std::size_t l = 0; l < levels.size(); ++l) {
            const auto cy = subsample(xy, kFine / levels[l]);
            const auto cr = subsample(xr, kFine / levels[l]);
            euler[l] += closed_form_error(solve_yde(ys, cy, Vec::Ones(1), YoungScheme::euler), cy, a, c) / kSeeds;
            davie[l] += closed_form_error(solve_linear_rde(rs, lift_piecewise_linear(cr, 0.4), Vec::Ones(1)).trajectory, cr, a, c) /
                        kSeeds;
        }
    }
    std::vector<double> ln(levels.size()), le(levels.size()), ld(levels.size());
    for (std::size_t l = 0; l < levels.size(); ++l) {
        ln[l] = std::log(static_cast<double>(levels[l]));
        le[l] = std::log(euler[l]);
        ld[l] = std::log(davie[l]);
    }
    const auto [se, r2e] = fit_line(ln, le);
    const auto [sd, r2d] = fit_line(ln, ld);
    const double need_e = 2 * 0.7 - 1 - 0.1, need_d = 2 * (2 * 0.4 - 0.5) - 1 - 0.2;
    const bool ok = worst_young <= kTol && worst_rough <= kTol && -se >= need_e && -sd >= need_d && r2e >= kR2 && r2d >= kR2;
    return {ok, fmt("max rel err young %.2e rough %.2e (tol %.0e); order euler %.3f (need %.2f, R2 %.3f) "
                    "davie %.3f (need %.2f, R2 %.3f)",
                    worst_young, worst_rough, kTol, -se, need_e, r2e, -sd, need_d, r2d)};
}

Outcome ac5() {
    constexpr std::size_t kSeeds = 50, kN = 1u << 16;
    constexpr double kBand = 0.05, kRate = 0.9;
    const auto sys = linear_young_system(Mat::Constant(1, 1, -1.0), {Mat::Constant(1, 1, 0.1)});
    const auto g = TimeGrid::uniform(0.0, 100.0, kN);
    std::size_t hits = 0;
    double lo = 0.0, hi = -1e300;
    for (std::size_t s = 0; s < kSeeds; ++s) {
        const auto x = sample_fbm(0.7, g, 1, derive_seed(501, s));
        // log‖y‖ is −t + 0.1 x_t with no transient, so the whole horizon enters the fit
        const double e = lyapunov_exponent(solve_yde(sys, x, Vec::Ones(1), YoungScheme::milstein), 0.0);
        lo = std::min(lo, e);
        hi = std::max(hi, e);
        if (std::abs(e + 1.0) <= kBand) ++hits;
    }
    const double rate = static_cast<double>(hits) / kSeeds;
    return {rate >= kRate, fmt("%zu/%zu seeds within -1 +/- %.2f (need %.0f%%), range [%.4f, %.4f]", hits, kSeeds, kBand,
                               100 * kRate, lo, hi)};
}

Outcome ac6() {
    constexpr std::size_t kSeeds = 100, kMc = 10000, kN = 1u << 14;
    constexpr double kT = 50.0, kRate = 0.95;
    const double scales[] = {0.25, 0.5, 0.9, 1.1, 2.0, 4.0};
    const Mat A = -Mat::Identity(2, 2);
    Mat dir(2, 2);
    dir << 0.4, 1.0, -0.3, 0.2;
    dir /= spectral_norm(dir);
    bool ok = true;
    std::size_t satisfied_cells = 0;
    std::string detail;
    for (const auto& [H, p] : {std::pair{0.6, 1.75}, std::pair{0.75, 1.4}}) {
        const auto mc_seed = derive_seed(601, static_cast<std::uint64_t>(H * 100));
        const auto samples = pvar_samples(H, p, 1, kMc, mc_seed);
        const double threshold = criterion_linear_young_from_samples(A, {dir}, p, H, samples).threshold;
        const auto fn = make_functionals(A, 0.0, 1.0, {}, p, 1.0);
        const double moment = mc_expectation(McFunctional::pvar_power, H, p, kMc, mc_seed, fn).estimate;
        detail += fmt("H=%.2f threshold %.3e (E x^(p+1) %.4f):", H, threshold, moment);
        std::vector<SampledPath> drivers;
        for (std::size_t s = 0; s < kSeeds; ++s)
            drivers.push_back(sample_fbm(H, TimeGrid::uniform(0.0, kT, kN), 1, derive_seed(602, s)));
        for (double k : scales) {
            const std::vector<Mat> C{k * threshold * dir};
            const bool sat = criterion_linear_young_from_samples(A, C, p, H, samples).satisfied;
            const auto sys = linear_young_system(A, C);
            std::size_t neg = 0;
            for (const auto& x : drivers)
                if (lyapunov_exponent(solve_yde(sys, x, Vec::Ones(2), YoungScheme::milstein)) < 0.0) ++neg;
            const double rate = static_cast<double>(neg) / kSeeds;
            if (sat) {
                ++satisfied_cells;
                if (rate < kRate) ok = false;
            }
            detail += fmt(" %.2gx%s %.2f", k, sat ? "*" : "", rate);
        }
        detail += "; ";
    }
    return {ok && satisfied_cells > 0, detail + fmt("(* = criterion satisfied, need >= %.2f negative)", kRate)};
}

Outcome ac7() {
    constexpr std::size_t kLifts = 100, kN = 512;
    constexpr double alpha = 0.35, nu = 0.375;
    std::size_t checks = 0, violations = 0;
    double min_log_margin = 1e300;
    long min_aug_margin = std::numeric_limits<long>::max();
    for (std::size_t l = 0; l < kLifts; ++l) {
        const auto x = sample_fbm(0.4, TimeGrid::uniform(0.0, 1.0, kN), 2, derive_seed(701, l));
        const auto L = lift_piecewise_linear(x, 0.4);
        const auto& g = x.grid();
        // ν-seminorms of both levels by direct accumulation over all grid pairs
        double xn = 0.0, Xn = 0.0;
        for (std::size_t u = 0; u < kN; ++u) {
            Mat X = Mat::Zero(2, 2);
            for (std::size_t v = u + 1; v <= kN; ++v) {
                const Vec d = x.increment(v - 1, v);
                X += d * x.increment(u, v - 1).transpose() + 0.5 * d * d.transpose();
                const double h = g[v] - g[u];
                xn = std::max(xn, x.increment(u, v).norm() / std::pow(h, nu));
                Xn = std::max(Xn, X.norm() / std::pow(h, 2 * nu));
            }
        }
        for (double gamma : {0.25, 0.5}) {
            const auto plain = greedy_times(L, gamma, alpha, 0.0, 1.0);
            const std::size_t full = verify_count_bounds(plain, L, nu).full_steps;
            const double e = 1.0 / (nu - alpha);
            const double log_rhs = -e * std::log(gamma) + e * std::log(xn + std::sqrt(Xn));
            const double margin = full == 0 ? 1e300 : log_rhs - std::log(static_cast<double>(full));
            min_log_margin = std::min(min_log_margin, margin);
            ++checks;
            if (margin < 0.0) ++violations;

            const auto aug = greedy_times_augmented(L, gamma, alpha, 0.0, 1.0);
            const double J = std::pow(gamma / 2, 1.0 / (1.0 - 2 * alpha));
            std::size_t total = 0;
            for (double s = 0.0; s < 1.0 - 1e-12; s += J) total += greedy_times(L, gamma / 2, alpha, s, std::min(1.0, s + J)).count();
            const long m = static_cast<long>(total) - static_cast<long>(aug.count());
            min_aug_margin = std::min(min_aug_margin, m);
            ++checks;
            if (m < 0) ++violations;
        }
    }
    return {violations == 0, fmt("%zu violations in %zu checks; min log-margin plain %.3f, min slack augmented %ld", violations,
                                 checks, min_log_margin, min_aug_margin)};
}

Outcome ac8() {
    constexpr std::size_t kSeeds = 100;
    constexpr double p = 1.5;
    Mat A(2, 2), C1(2, 2);
    A << -1.0, 0.3, -0.2, -1.5;
    C1 << 0.3, 0.2, -0.1, 0.4;
    const Vec y0 = Vec::Ones(2);
    const auto ys = linear_young_system(A, {C1}, HFunction{0.1, 0.2});
    const auto rs = rough_linear_system(A, {C1});
    const double K = 1.0 / (1.0 - std::exp2(1.0 - 2.0 / p));
    const double lead = std::max(A.jacobiSvd().singularValues()(0) + ys.C_f, (K + 1) * ys.C_g);
    std::size_t young_bad = 0, rough_bad = 0;
    double young_margin = 1e300, rough_margin = 1e300;
    for (std::size_t s = 0; s < kSeeds; ++s) {
        const auto x = sample_fbm(0.7, TimeGrid::uniform(0.0, 1.0, 1024), 1, derive_seed(801, s));
        const auto y = solve_yde(ys, x, y0, YoungScheme::milstein);
        const double F = std::pow(4.0, p) * std::log(2.0) * lead * (1.0 + std::pow(p_variation_idx(x, p, 0, x.n()), p));
        double sup = 0.0;
        for (std::size_t k = 0; k <= y.n(); ++k) sup = std::max(sup, y.at(k).norm());
        const double m1 = std::log(y0.norm()) + std::log1p(std::exp(-F)) + F - std::log(sup);
        young_margin = std::min(young_margin, m1);
        if (m1 < 0.0 || !check_apriori(ys, x, y, p, 0.0, 1.0).passed()) ++young_bad;

        const auto xr = sample_fbm(0.4, TimeGrid::uniform(0.0, 1.0, 512), 1, derive_seed(802, s));
        const auto r = verify_supnorm_bound(rs, lift_piecewise_linear(xr, 0.4), y0, 0.0, 1.0);
        rough_margin = std::min(rough_margin, r.log_bound - std::log(r.sup_norm));
        if (!r.passed()) ++rough_bad;
    }
    return {young_bad == 0 && rough_bad == 0,
            fmt("violations young %zu/%zu rough %zu/%zu; min log-margin young %.3f rough %.3f", young_bad, kSeeds, rough_bad,
                kSeeds, young_margin, rough_margin)};
}

Outcome ac9() {
    constexpr std::size_t kSeeds = 10, kLevels = 6;
    const double alpha = 0.35, need = 3 * alpha - 1 - 0.2;
    const auto sys = rough_linear_system(Mat::Constant(1, 1, -1.0), {Mat::Constant(1, 1, 0.5)});
    const auto V = squared_norm_function();
    double worst = 1e300, mean = 0.0, res_lo = 0.0, res_hi = 0.0;
    for (std::size_t s = 0; s < kSeeds; ++s) {
        const auto x = sample_fbm(0.4, TimeGrid::uniform(0.0, 1.0, 1u << 13), 1, derive_seed(901, s));
        const auto r = change_of_variables_check(V, sys, x, Vec::Ones(1), kLevels);
        worst = std::min(worst, r.order);
        mean += r.order / kSeeds;
        res_hi += r.residuals.front() / kSeeds;
        res_lo += r.residuals.back() / kSeeds;
    }
    return {worst >= need, fmt("fitted order min %.3f mean %.3f (need %.2f); mean residual %.2e at n=256 -> %.2e at n=8192",
                               worst, mean, need, res_hi, res_lo)};
}

Outcome ac10() {
    constexpr std::size_t kSeeds = 20, kN = 1u << 14;
    constexpr double kFactor = 10.0, kTheta = 1e-4;
    Mat A(2, 2), C1(2, 2);
    A << -1.0, 0.3, -0.2, -1.5;
    C1 << 0.2, -0.1, 0.05, 0.1;
    const Vec y0 = Vec::Ones(2);
    const auto ys = linear_young_system(A, {C1});
    const auto rs = rough_linear_system(A, {C1});
    std::size_t bad = 0;
    double ratio = 0.0, theta = 0.0;
    for (std::size_t s = 0; s < kSeeds; ++s) {
        const auto g = TimeGrid::uniform(0.0, 1.0, kN);
        const auto a = angular_log_decomposition(ys, sample_fbm(0.7, g, 1, derive_seed(1001, s)), y0);
        const auto b = angular_log_decomposition(rs, lift_piecewise_linear(sample_fbm(0.4, g, 1, derive_seed(1002, s)), 0.4), y0);
        for (const auto* c : {&a.consistency, &b.consistency}) {
            ratio = std::max(ratio, c->max_recon_rel_err / c->scheme_tolerance);
            theta = std::max(theta, c->max_theta_norm_dev);
            if (!c->consistent(kFactor) || c->max_theta_norm_dev > kTheta) ++bad;
        }
    }
    return {bad == 0, fmt("%zu failures in %zu runs; max recon/scheme-tol %.3f (limit %.0f), max |theta|-1 %.2e (limit %.0e)", bad,
                          2 * kSeeds, ratio, kFactor, theta, kTheta)};
}

// ---------------------------------------------------------------------------------------------

int run_cli(const std::string& args) {
    const std::string cmd = std::string(ROUGHSTAB_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), {}};
}

bool same_tree(const fs::path& a, const fs::path& b) {
    std::set<std::string> na, nb;
    for (auto& e : fs::directory_iterator(a)) na.insert(e.path().filename().string());
    for (auto& e : fs::directory_iterator(b)) nb.insert(e.path().filename().string());
    if (na != nb || na.empty()) return false;
    for (const auto& n : na)
        if (slurp(a / n) != slurp(b / n)) return false;
    return true;
}

Outcome ac11() {
    const auto dir = fs::temp_directory_path() / "roughstab_acceptance_ac11";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "scalar.json") << R"({"A":[[-1]],"C":[[[0.5]]]})";
    std::ofstream(dir / "exp.json")
        << R"({"system":{"A":[[-1,0],[0,-1]],"C":[[[0.3,0.2],[-0.1,0.4]]],"f":{"family":"radial","c0":0.05,"c1":0.1}},
               "driver":{"H":0.75,"T":10,"n":2000},"seeds":{"count":8},"p":1.4,"mc_samples":500})";
    if (run_cli("sample --hurst 0.4 --n 512 --dim 2 --seed 11 --out " + (dir / "src").string()) != 0)
        return {false, "could not produce the input path"};
    const std::string path = (dir / "src" / "path.csv").string();
    const std::string sys = (dir / "scalar.json").string();
    const std::vector<std::pair<std::string, std::string>> cmds{
        {"sample", "sample --hurst 0.7 --n 2048 --dim 2 --seed 7"},
        {"lift", "lift --path " + path + " --type geometric"},
        {"norms", "norms --path " + path + " --alpha 0.35 --p 3"},
        {"greedy", "greedy --path " + path + " --gamma 0.5 --alpha 0.35 --nu 0.375"},
        {"solve-young", "solve --system " + sys + " --hurst 0.7 --n 4096 --seed 3"},
        {"solve-rough", "solve --system " + sys + " --mode rough_linear --hurst 0.4 --n 4096 --seed 3"},
        {"stability", "stability --config " + (dir / "exp.json").string() + " --seed 5 --c-scales 0,0.01,0.1"},
        {"verify", "verify --suite all --seed 4"},
    };
    std::string failed;
    for (const auto& [name, args] : cmds) {
        const auto a = dir / (name + "_a"), b = dir / (name + "_b");
        const int ea = run_cli(args + " --out " + a.string()), eb = run_cli(args + " --out " + b.string());
        if (ea != 0 || eb != 0 || !same_tree(a, b)) failed += " " + name;
    }
    fs::remove_all(dir);
    return {failed.empty(), failed.empty() ? fmt("%zu commands byte-identical across two runs", cmds.size())
                                           : "differing or failing:" + failed};
}

}  // namespace

int main(int argc, char** argv) {
    notices_enabled() = false;
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4},   {"AC5", ac5},   {"AC6", ac6},
        {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9}, {"AC10", ac10}, {"AC11", ac11},
    };
    const std::set<std::string> only(argv + 1, argv + argc);
    int failures = 0;
    for (const auto& [name, fn] : criteria) {
        if (!only.empty() && !only.count(name)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%-4s %s  %s  [%.1fs]\n", name.c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
        std::fflush(stdout);
        if (!o.pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
