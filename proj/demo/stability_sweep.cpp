// Sweep the noise strength of dy = -y dt + C y dx through the linear criterion threshold.
#include "roughstab/roughstab.hpp"

#include <cstdio>

using namespace roughstab;

int main() {
    const double H = 0.75, p = 1.4;
    const Mat A = -Mat::Identity(2, 2);
    Mat dir(2, 2);
    dir << 0.4, 1.0, -0.3, 0.2;
    dir /= spectral_norm(dir);
    const auto samples = pvar_samples(H, p, 1, 2000, 2024);
    const double thr = criterion_linear_young_from_samples(A, {dir}, p, H, samples).threshold;
    std::printf("criterion threshold ||C||* = %.4e\n", thr);
    std::printf("%10s %10s %10s %12s\n", "||C||", "criterion", "neg.frac", "median exp");
    for (double k : {0.5, 2.0, 100.0, 1000.0}) {
        ExperimentConfig cfg;
        cfg.system = SystemSpec{A, {k * thr * dir}, {}, "linear"};
        cfg.H = H;
        cfg.p = p;
        cfg.T = 20;
        cfg.n = 4000;
        cfg.count = 20;
        cfg.master_seed = 1;
        cfg.mc_samples = 200;
        cfg.run_criteria = false;
        const auto rep = run_stability_experiment(cfg);
        const bool sat = criterion_linear_young_from_samples(A, {k * thr * dir}, p, H, samples).satisfied;
        std::printf("%10.3e %10s %10.2f %12.4f\n", k * thr, sat ? "yes" : "no", rep.fraction_negative,
                    rep.measured_exponent);
    }
    return 0;
}
