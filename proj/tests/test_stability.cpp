#include "roughstab/stability.hpp"

#include <gtest/gtest.h>

using namespace roughstab;

namespace {

SampledPath from_function(const TimeGrid& g, const std::function<double(double)>& fn) {
    Mat v(1, static_cast<Eigen::Index>(g.n() + 1));
    for (std::size_t k = 0; k <= g.n(); ++k) v(0, static_cast<Eigen::Index>(k)) = fn(g[k]);
    return SampledPath(g, v);
}

Mat test_C() {
    Mat C1(2, 2);
    C1 << 0.3, 0.2, -0.1, 0.4;
    return C1;
}

// Plain O(n²) partition DP, no pruning.
double naive_pvar(const SampledPath& x, double p) {
    const std::size_t n = x.n();
    std::vector<double> V(n + 1, 0.0);
    for (std::size_t j = 1; j <= n; ++j)
        for (std::size_t i = 0; i < j; ++i) V[j] = std::max(V[j], V[i] + std::pow((x.at(j) - x.at(i)).norm(), p));
    return std::pow(V[n], 1.0 / p);
}

}  // namespace

TEST(LambdaA, Examples) {
    Mat A(2, 2);
    A << -1.0, 0.0, 0.0, -2.0;
    EXPECT_NEAR(lambda_A(A).lambda_A, 1.0, 1e-14);
    EXPECT_NEAR(lambda_A(-Mat::Identity(3, 3)).lambda_A, 1.0, 1e-14);
    Mat B(2, 2);
    B << -1.0, 10.0, 0.0, -1.0;
    try {
        (void)lambda_A(B);
        FAIL();
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("A not negative definite"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("4"), std::string::npos);
    }
    EXPECT_THROW((void)lambda_A(Mat::Zero(2, 3)), std::invalid_argument);
}

TEST(Functionals, VanishAtZeroAndIncrease) {
    auto fn = make_functionals(-Mat::Identity(2, 2), 0.3, 0.05, HFunction{0.1, 0.2}, 1.5, 1.0);
    EXPECT_EQ(fn.kappa1(0.0), 0.0);
    EXPECT_EQ(fn.kappa2(0.0), 0.0);
    double prev1 = -1, prev2 = -1, prevH = -1;
    for (double z = 0.0; z <= 3.0; z += 0.05) {
        EXPECT_GT(fn.kappa1(z), prev1 - 1e-300);
        EXPECT_GT(fn.kappa2(z), prev2);
        EXPECT_GE(fn.H(z), prevH);
        prev1 = fn.kappa1(z);
        prev2 = fn.kappa2(z);
        prevH = fn.H(z);
    }
    // κ(u,v) at u = 0 reduces to 2(1+e^F)e^F.
    const double eF = std::exp(fn.F(0.0, 0.7));
    EXPECT_NEAR(fn.kappa(0.0, 0.7), 2.0 * (1.0 + eF) * eF, 1e-12 * fn.kappa(0.0, 0.7));
}

TEST(Lyapunov, Examples) {
    auto g = TimeGrid::uniform(0.0, 50.0, 5000);
    auto y = from_function(g, [](double t) { return std::exp(-t); });
    EXPECT_NEAR(lyapunov_exponent(y, 0.5), -1.0, 1e-10);
    EXPECT_NEAR(endpoint_exponent(y), -1.0, 1e-12);
    auto osc = from_function(g, [](double t) { return std::exp(-t) * (2.0 + std::sin(t)); });
    EXPECT_NEAR(lyapunov_exponent(osc, 0.5), -1.0, 0.02);
    auto zero = from_function(g, [](double t) { return t > 10.0 ? 0.0 : 1.0; });
    EXPECT_THROW((void)lyapunov_exponent(zero), std::invalid_argument);
}

TEST(Lyapunov, ScalarLinearFbm) {
    // y = exp(−t + 0.1 B_t).
    auto sys = linear_young_system(Mat::Constant(1, 1, -1.0), {Mat::Constant(1, 1, 0.1)});
    auto g = TimeGrid::uniform(0.0, 100.0, 1u << 14);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto x = sample_fbm(0.7, g, 1, seed);
        auto y = solve_yde(sys, x, Vec::Constant(1, 1.0), YoungScheme::milstein);
        EXPECT_NEAR(lyapunov_exponent(y), -1.0, 0.05) << "seed " << seed;
    }
}

TEST(Lyapunov, ErrorShrinksWithHorizon) {
    auto sys = linear_young_system(Mat::Constant(1, 1, -1.0), {Mat::Constant(1, 1, 0.5)});
    std::vector<double> errs;
    for (double T : {25.0, 50.0, 100.0}) {
        auto g = TimeGrid::uniform(0.0, T, static_cast<std::size_t>(T) * 64);
        double acc = 0.0;
        for (std::uint64_t seed = 0; seed < 40; ++seed) {
            auto x = sample_fbm(0.7, g, 1, 500 + seed);
            acc += std::abs(lyapunov_exponent(solve_yde(sys, x, Vec::Constant(1, 1.0), YoungScheme::milstein)) + 1.0);
        }
        errs.push_back(acc / 40.0);
    }
    EXPECT_GT(errs[0], errs[1]);
    EXPECT_GT(errs[1], errs[2]);
}

TEST(MonteCarlo, Examples) {
    auto fn = make_functionals(-Mat::Identity(1, 1), 0.0, 0.1, HFunction{}, 2.5, 1.0);
    auto one = mc_expectation(McFunctional::one, 0.5, 2.5, 200, 3, fn);
    EXPECT_EQ(one.estimate, 1.0);
    EXPECT_EQ(one.std_error, 0.0);
    auto pw = mc_expectation(McFunctional::pvar_power, 0.5, 2.5, 10000, 3, fn);
    EXPECT_TRUE(std::isfinite(pw.estimate));
    EXPECT_LT(pw.std_error / pw.estimate, 0.05);
    auto a = mc_expectation(McFunctional::pvar_power, 0.5, 2.5, 300, 3, fn);
    auto b = mc_expectation(McFunctional::pvar_power, 0.5, 2.5, 300, 3, fn);
    EXPECT_EQ(a.estimate, b.estimate);
    EXPECT_THROW((void)mc_expectation(McFunctional::one, 0.5, 2.5, 99, 3, fn), std::invalid_argument);

    auto fy = make_functionals(-Mat::Identity(1, 1), 0.0, 0.1, HFunction{}, 1.5, 1.0);
    for (auto f : {McFunctional::pvar_times_kappa, McFunctional::kappa1, McFunctional::F_exp}) {
        auto e = mc_expectation(f, 0.7, 1.5, 500, 4, fy);
        EXPECT_TRUE(std::isfinite(e.estimate));
        EXPECT_GT(e.estimate, 0.0);
    }
}

TEST(MonteCarlo, SamplesMatchIndependentPVariation) {
    const auto v = pvar_samples(0.75, 1.4, 1, 100, 11);
    const auto grid = TimeGrid::uniform(0.0, 1.0, kMcGrid);
    const FbmSampler sampler(0.75, kMcGrid);
    for (std::size_t i = 0; i < v.size(); ++i)
        EXPECT_NEAR(v[i], naive_pvar(sampler.sample(grid, 1, derive_seed(11, i)), 1.4), 1e-12 * v[i]);
}

TEST(CriterionLinearYoung, Examples) {
    const Mat A = -Mat::Identity(2, 2);
    auto zero = criterion_linear_young(A, {Mat::Zero(2, 2)}, 1.4, 0.75, 1, 200);
    EXPECT_EQ(zero.rhs, 0.0);
    EXPECT_TRUE(zero.satisfied);
    EXPECT_EQ(zero.lhs, 1.0);

    const Mat C = test_C();
    auto r1 = criterion_linear_young(A, {C}, 1.4, 0.75, 1, 200);
    auto r2 = criterion_linear_young(A, {2.0 * C}, 1.4, 0.75, 1, 200);
    const double K = 1.0 / (1.0 - std::exp2(1.0 - 2.0 / 1.4));
    const double coef = 1.0 + 4.0 * K * 1.0 + 8.0 * K + std::pow(8.0 * K, 1.4);
    for (auto* r : {&r1, &r2}) {
        const double cn = r == &r1 ? spectral_norm(C) : 2.0 * spectral_norm(C);
        EXPECT_NEAR(r->rhs, coef * cn * std::pow(r->moment.estimate, 1.0 / 2.4), 1e-12 * r->rhs);
    }
    EXPECT_NEAR(r2.rhs, 2.0 * r1.rhs, 1e-12 * r2.rhs);
    EXPECT_THROW((void)criterion_linear_young(A, {C}, 1.4, 0.4, 1, 200), std::invalid_argument);
    EXPECT_THROW((void)criterion_linear_young(A, {C}, 1.2, 0.75, 1, 200), std::invalid_argument);
}

TEST(CriterionLinearYoung, ThresholdAnchor) {
    const Mat A = -Mat::Identity(2, 2);
    const Mat C = test_C();
    auto r = criterion_linear_young(A, {C}, 1.4, 0.75, 20240, 10000);
    // Moment recomputed from the raw samples.
    const auto v = pvar_samples(0.75, 1.4, 1, 10000, 20240);
    double s = 0.0;
    for (double x : v) s += std::pow(x, 2.4);
    EXPECT_NEAR(r.moment.estimate, s / 10000.0, 1e-12 * r.moment.estimate);
    EXPECT_NEAR(r.threshold, 0.0039514087132832467, 1e-12);
    for (double f : {0.1, 0.5, 0.99}) {
        const Mat Cs = C * (f * r.threshold / spectral_norm(C));
        EXPECT_TRUE(criterion_linear_young_from_samples(A, {Cs}, 1.4, 0.75, v).satisfied);
    }
    const Mat Cb = C * (1.01 * r.threshold / spectral_norm(C));
    EXPECT_FALSE(criterion_linear_young_from_samples(A, {Cb}, 1.4, 0.75, v).satisfied);
}

TEST(CriterionGeneral, Examples) {
    const Mat A = -Mat::Identity(2, 2);
    SystemSpec quiet{A, {Mat::Zero(2, 2)}, HFunction{0.1, 0.2}, "linear"};
    auto r = criterion_general(quiet, 0.7, StabilityMode::young, 1, 1.5, 0.35, 200);
    EXPECT_NEAR(r.predicted_rate, 1.0 - 0.3, 1e-14);
    EXPECT_TRUE(r.local_hypothesis);
    EXPECT_TRUE(r.global_hypothesis);

    SystemSpec lin{A, {test_C()}, HFunction{}, "linear"};
    auto y = criterion_general(lin, 0.7, StabilityMode::young, 1, 1.5, 0.35, 200);
    EXPECT_EQ(y.eps_local, y.eps_global);
    auto rr = criterion_general(lin, 0.4, StabilityMode::rough_linear, 1, 1.5, 0.35, 100);
    EXPECT_EQ(rr.eps_local, rr.eps_global);

    SystemSpec hot{A, {test_C()}, HFunction{2.0, 0.0}, "linear"};
    auto h = criterion_general(hot, 0.7, StabilityMode::young, 1, 1.5, 0.35, 200);
    EXPECT_FALSE(h.local_hypothesis);
    EXPECT_FALSE(h.global_hypothesis);
    EXPECT_FALSE(h.global_satisfied);
}

TEST(CriterionGeneral, ThresholdsAreFixedPoints) {
    SystemSpec s{-Mat::Identity(2, 2), {test_C()}, HFunction{0.1, 0.2}, "linear"};
    auto r = criterion_general(s, 0.7, StabilityMode::young, 5, 1.5, 0.35, 300);
    ASSERT_GT(r.eps_global, 0.0);
    auto at = [&](double c) {
        SystemSpec t = s;
        t.C = {test_C() * (c / spectral_norm(test_C()))};
        return criterion_general(t, 0.7, StabilityMode::young, 5, 1.5, 0.35, 300);
    };
    auto below = at(0.999 * r.eps_global);
    auto above = at(1.001 * r.eps_global);
    EXPECT_LT(below.noise * below.E_kappa.estimate, 0.7);
    EXPECT_GT(above.noise * above.E_kappa.estimate, 0.7);
    EXPECT_TRUE(below.global_satisfied);
    EXPECT_FALSE(above.global_satisfied);
    EXPECT_LE(r.eps_global, r.eps_local);
}

TEST(CriterionGeneral, PredictedRateBoundsMeasuredExponents) {
    // f(y) = h(‖y‖)y with C_f = 0.3, noise below the global threshold.
    const Mat A = -Mat::Identity(2, 2);
    SystemSpec probe{A, {test_C()}, HFunction{0.0, 0.3}, "linear"};
    ExperimentConfig cfg;
    cfg.master_seed = 77;
    cfg.mc_samples = 300;
    auto base = criterion_general(probe, 0.7, StabilityMode::young, experiment_mc_seed(cfg), 1.5, 0.35, cfg.mc_samples);
    cfg.system = probe;
    cfg.system.C = {test_C() * (0.5 * base.eps_global / spectral_norm(test_C()))};
    cfg.H = 0.7;
    cfg.T = 30.0;
    cfg.n = 3000;
    cfg.count = 100;
    auto rep = run_stability_experiment(cfg);
    ASSERT_TRUE(rep.general_criterion);
    const double lam = rep.general_criterion->predicted_rate;
    EXPECT_GT(lam, 0.0);
    EXPECT_TRUE(rep.general_criterion->global_satisfied);
    for (const auto& s : rep.seeds) EXPECT_LE(s.exponent, -lam + 0.02);
    EXPECT_EQ(rep.classification, Classification::globally_exp_stable);
}

TEST(Angular, ScalarIsExact) {
    auto sys = linear_young_system(Mat::Constant(1, 1, -1.0), {Mat::Constant(1, 1, 0.5)});
    auto x = sample_fbm(0.7, TimeGrid::uniform(0.0, 2.0, 1024), 1, 3);
    // The log-norm route is exact here: ℓ_t = log 2 − t + 0.5 x_t. The direct route carries the
    // Milstein error, which the consistency report absorbs.
    for (double s : {1.0, -1.0}) {
        auto r = angular_log_decomposition(sys, x, Vec::Constant(1, 2.0 * s));
        for (std::size_t k = 0; k <= x.n(); ++k) {
            EXPECT_EQ(r.theta.at(k)(0), s);
            const double exact = std::log(2.0) - x.grid()[k] + 0.5 * x.at(k)(0);
            EXPECT_NEAR(r.lognorm.at(k)(0), exact, 1e-12);
        }
        EXPECT_TRUE(r.consistency.consistent());
    }
    EXPECT_THROW((void)angular_log_decomposition(sys, x, Vec::Zero(1)), std::invalid_argument);
}

TEST(Angular, ZeroDriverSlopeInRayleighRange) {
    Mat A(2, 2);
    A << -1.0, 0.5, 0.5, -2.0;  // symmetric, so normal
    const auto sd = lambda_A(A);
    auto sys = linear_young_system(A, {Mat::Identity(2, 2)});
    auto g = TimeGrid::uniform(0.0, 5.0, 5000);
    auto r = angular_log_decomposition(sys, SampledPath(g, Mat::Zero(1, 5001)), Vec::Ones(2));
    for (std::size_t k = 0; k < g.n(); ++k) {
        const double slope = (r.lognorm.at(k + 1)(0) - r.lognorm.at(k)(0)) / g.dt(k);
        EXPECT_GE(slope, -sd.A_norm - 1e-9);
        EXPECT_LE(slope, -sd.lambda_A + 1e-9);
    }
}

TEST(Angular, SphereAndReconstructionUnderRefinement) {
    Mat A(2, 2);
    A << -1.0, 0.3, -0.2, -1.5;
    Mat C1(2, 2), C2(2, 2);
    C1 << 0.2, -0.1, 0.05, 0.1;
    C2 << 0.0, 0.3, -0.3, 0.0;
    Vec y0(2);
    y0 << 1.0, -0.5;
    auto ys = linear_young_system(0.1 * A, {0.1 * C1, 0.1 * C2}, HFunction{0.1, 0.2});
    std::vector<double> dev;
    for (std::size_t n : {1u << 12, 1u << 14}) {
        auto x = sample_fbm(0.7, TimeGrid::uniform(0.0, 1.0, n), 2, 0);
        auto r = angular_log_decomposition(ys, x, y0);
        EXPECT_TRUE(r.consistency.consistent());
        dev.push_back(r.consistency.max_theta_norm_dev);
    }
    EXPECT_LT(dev[1], dev[0]);
    EXPECT_LE(dev[1], 1e-6);

    auto rs = rough_linear_system(A, {C1, C2});
    auto x = sample_fbm(0.4, TimeGrid::uniform(0.0, 1.0, 1u << 14), 2, 0);
    for (const auto& L : {lift_piecewise_linear(x, 0.4), lift_ito_type(x)}) {
        auto r = angular_log_decomposition(rs, L, y0);
        EXPECT_TRUE(r.consistency.consistent());
        EXPECT_LE(r.consistency.max_theta_norm_dev, 1e-4);
    }
}

TEST(Angular, TanhFamilyAndUnderflow) {
    auto sys = tanh_young_system(-Mat::Identity(2, 2), {0.3 * Mat::Identity(2, 2)});
    auto x = sample_fbm(0.7, TimeGrid::uniform(0.0, 1.0, 2048), 1, 2);
    auto r = angular_log_decomposition(sys, x, Vec::Ones(2));
    EXPECT_TRUE(r.consistency.consistent());

    auto fast = linear_young_system(Mat::Constant(1, 1, -2000.0), {Mat::Zero(1, 1)});
    auto g = TimeGrid::uniform(0.0, 1.0, 2000);
    try {
        (void)angular_log_decomposition(fast, SampledPath(g, Mat::Zero(1, 2001)), Vec::Ones(1));
        FAIL();
    } catch (const BlowUpError& e) {
        EXPECT_GT(e.index(), 0u);
    }
}

TEST(Gronwall, Examples) {
    auto c0 = discrete_gronwall(2.0, {0.0, 0.0, 0.0});
    for (double b : c0) EXPECT_EQ(b, 2.0);
    auto geo = discrete_gronwall(1.0, std::vector<double>(10, 0.5));
    EXPECT_NEAR(geo.back(), std::pow(1.5, 10), 1e-12);
    EXPECT_THROW((void)discrete_gronwall(1.0, {0.1, -0.1}), std::invalid_argument);
}

TEST(Gronwall, SolverRespectsBound) {
    const Mat A = -Mat::Identity(2, 2);
    auto sys = linear_young_system(A, {0.05 * test_C()}, HFunction{0.0, 0.2});
    auto fn = make_functionals(A, sys.C_f, sys.C_g, sys.h, 1.5, 1.0);
    auto g = TimeGrid::uniform(0.0, 10.0, 1280);
    std::size_t violations = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto x = sample_fbm(0.7, g, 1, 900 + seed);
        auto y = solve_yde(sys, x, Vec::Ones(2), YoungScheme::milstein);
        violations += gronwall_check(fn, x, y).violations;
    }
    EXPECT_EQ(violations, 0u);
}

TEST(LogBound, HoldsPathwise) {
    const Mat A = -Mat::Identity(2, 2);
    auto sys = linear_young_system(A, {0.2 * test_C()}, HFunction{0.05, 0.2});
    auto fn = make_functionals(A, sys.C_f, sys.C_g, sys.h, 1.5, 1.0);
    auto g = TimeGrid::uniform(0.0, 8.0, 1024);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto x = sample_fbm(0.7, g, 1, seed);
        auto y = solve_yde(sys, x, Vec::Ones(2), YoungScheme::milstein);
        auto c = log_bound_check(fn, 1.0, x, y);
        EXPECT_EQ(c.violations, 0u);
        EXPECT_EQ(c.points, 1024u);
    }
}

TEST(Gamma, RunningMeanStabilizes) {
    // κ₁ contains e^{2F(1,z)}, so the ergodic mean settles at 100 blocks only for weak coupling.
    const Mat A = -0.02 * Mat::Identity(1, 1);
    auto fn = make_functionals(A, 0.0, 1e-3, HFunction{}, 1.5, 0.02);
    std::size_t settled = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        auto x = sample_fbm(0.7, TimeGrid::uniform(0.0, 100.0, 100 * 128), 1, seed);
        auto r = gamma_running_mean(fn, x);
        ASSERT_EQ(r.size(), 100u);
        double gap = 0.0;
        for (std::size_t n = 74; n < 100; ++n) gap = std::max(gap, std::abs(r[n] - r[99]) / r[99]);
        settled += gap < 0.10;
    }
    EXPECT_GE(settled, 40u);
}

TEST(LocalRadius, ComputedAndPositive) {
    const Mat A = -Mat::Identity(1, 1);
    const HFunction h{0.05, 0.25};
    auto probe = make_functionals(A, 0.3, 1e-60, h, 1.5, 1.0);
    const double Ek = mc_expectation(McFunctional::kappa1, 0.7, 1.5, 1000, 6, probe).estimate;
    auto fn = make_functionals(A, 0.3, 0.1 * 0.95 / Ek, h, 1.5, 1.0);
    auto x = sample_fbm(0.7, TimeGrid::uniform(0.0, 20.0, 20 * 64), 1, 8);
    auto r = local_radius(fn, 1.0, Ek, x);
    EXPECT_NEAR(r.epsilon, 0.5 * 0.95 / (1.0 + Ek), 1e-15);
    EXPECT_GT(r.delta, 0.0);
    ASSERT_TRUE(r.found);
    EXPECT_GT(r.radius, 0.0);
    EXPECT_LE(r.radius, r.delta * (1.0 + 1e-12));
    // λ_A ≤ h(0): no radius.
    auto bad = make_functionals(A, 2.0, 1e-3, HFunction{2.0, 0.0}, 1.5, 1.0);
    EXPECT_FALSE(local_radius(bad, 1.0, 1.0, x).found);
}

TEST(PhiBound, RoughLinearHolds) {
    auto sys = rough_linear_system(-Mat::Identity(2, 2), {0.05 * test_C()});
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto x = sample_fbm(0.4, TimeGrid::uniform(0.0, 4.0, 512), 1, seed);
        auto chk = phi_bound_check(sys, lift_piecewise_linear(x, 0.4), 0.35, 0.375);
        EXPECT_TRUE(chk.passed) << chk.log_norm << " " << chk.log_bound;
    }
}

TEST(Experiment, NoiselessStableSystem) {
    Mat A(2, 2);
    A << -1.0, 0.0, 0.0, -2.0;
    ExperimentConfig cfg;
    cfg.system = SystemSpec{A, {Mat::Zero(2, 2)}, HFunction{}, "linear"};
    cfg.T = 20.0;
    cfg.n = 20000;
    cfg.count = 4;
    cfg.y0_magnitudes = {0.1, 1.0, 10.0};
    cfg.run_criteria = false;
    auto rep = run_stability_experiment(cfg);
    EXPECT_NEAR(rep.measured_exponent, -1.0, 1e-3);
    EXPECT_EQ(rep.classification, Classification::globally_exp_stable);
    EXPECT_EQ(rep.seeds.size(), 12u);

    Mat bad(2, 2);
    bad << 0.5, 0.0, 0.0, -1.0;
    cfg.system.A = bad;
    EXPECT_THROW((void)run_stability_experiment(cfg), std::invalid_argument);
}

TEST(Experiment, UnstableAndDeterministic) {
    ExperimentConfig cfg;
    cfg.system = SystemSpec{-0.1 * Mat::Identity(1, 1), {Mat::Constant(1, 1, 0.5)}, HFunction{0.5, 0.0}, "linear"};
    cfg.T = 10.0;
    cfg.n = 1000;
    cfg.count = 8;
    cfg.run_criteria = false;
    auto a = run_stability_experiment(cfg);
    EXPECT_EQ(a.classification, Classification::unstable);
    auto b = run_stability_experiment(cfg);
    for (std::size_t i = 0; i < a.seeds.size(); ++i) EXPECT_EQ(a.seeds[i].exponent, b.seeds[i].exponent);
    EXPECT_THROW((void)parse_mode("ito"), std::invalid_argument);
}
