// Sample a driver, lift it, measure it and solve a scalar linear equation against its closed form.
#include "roughstab/roughstab.hpp"

#include <cstdio>

using namespace roughstab;

int main() {
    const double H = 0.4, alpha = 0.35;
    const auto x = sample_fbm(H, TimeGrid::uniform(0.0, 1.0, 4096), 1, 42);
    const auto L = lift_piecewise_linear(x, H);
    std::printf("rough seminorm (alpha=%.2f): %.4f\n", alpha, rough_seminorm(L, alpha, 0.0, 1.0));
    std::printf("3-variation: %.4f\n", p_variation(x, 3.0, 0.0, 1.0));
    std::printf("greedy steps at gamma=0.5: %zu\n", greedy_times(L, 0.5, alpha, 0.0, 1.0).count());

    // dy = -y dt + 0.5 y dx, so y_t = exp(-t + 0.5 x_t)
    const auto sys = rough_linear_system(Mat::Constant(1, 1, -1.0), {Mat::Constant(1, 1, 0.5)});
    const auto sol = solve_linear_rde(sys, L, Vec::Ones(1));
    const double exact = std::exp(-1.0 + 0.5 * x.at(x.n())(0));
    std::printf("y(1) = %.8f, closed form %.8f\n", sol.trajectory.at(x.n())(0), exact);

    // Long-horizon exponent of a Young equation
    const auto xl = sample_fbm(0.7, TimeGrid::uniform(0.0, 50.0, 1 << 14), 1, 7);
    const auto ys = linear_young_system(Mat::Constant(1, 1, -1.0), {Mat::Constant(1, 1, 0.1)});
    std::printf("Lyapunov exponent: %.4f (expected -1)\n",
                lyapunov_exponent(solve_yde(ys, xl, Vec::Ones(1), YoungScheme::milstein)));
    return 0;
}
