#pragma once

// Shared aliases, small linear-algebra helpers and error types.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <thread>
#include <stdexcept>
#include <string>
#include <vector>

namespace roughstab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr const char* kVersion = "0.1.0";

/// Raised when a trajectory leaves the finite range (NaN/Inf) or collapses to zero norm.
class BlowUpError : public std::runtime_error {
public:
    BlowUpError(const std::string& what, std::size_t index)
        : std::runtime_error(what + " at grid index " + std::to_string(index)), index_(index) {}
    [[nodiscard]] std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// Raised when ‖y_t‖ underflows to zero while integrating the angular/log-norm system.
class UnderflowError : public BlowUpError {
public:
    UnderflowError(const std::string& what, std::size_t index) : BlowUpError(what, index) {}
};

/// Notices (fallbacks, coarsening) go to std::clog; tests can silence them.
inline bool& notices_enabled() {
    static bool enabled = true;
    return enabled;
}

inline void notice(const std::string& msg) {
    if (notices_enabled()) std::clog << "[roughstab] " << msg << '\n';
}

/// a ⊗ b as the matrix a b^T, the orientation used by Chen's relation throughout.
[[nodiscard]] inline Mat outer(const Vec& a, const Vec& b) { return a * b.transpose(); }

[[nodiscard]] inline Mat sym(const Mat& m) { return 0.5 * (m + m.transpose()); }

[[nodiscard]] inline double spectral_norm(const Mat& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues()(0);
}

/// Norm of the collection C = (C_1, ..., C_m): sqrt(sum_j ||C_j||_2^2).
[[nodiscard]] inline double collection_norm(const std::vector<Mat>& cs) {
    double s = 0.0;
    for (const auto& c : cs) {
        const double n = spectral_norm(c);
        s += n * n;
    }
    return std::sqrt(s);
}

[[nodiscard]] inline bool all_finite(const Mat& m) { return m.allFinite(); }

/// Stable 64-bit FNV-1a, used for manifest and config hashes.
[[nodiscard]] inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

[[nodiscard]] inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return out;
}

/// splitmix64 step; derives independent per-item seeds from a master seed.
[[nodiscard]] inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Worker count from ROUGHSTAB_THREADS (default 1).
[[nodiscard]] inline std::size_t thread_count() {
    const char* env = std::getenv("ROUGHSTAB_THREADS");
    if (!env) return 1;
    const long v = std::strtol(env, nullptr, 10);
    return v > 0 ? static_cast<std::size_t>(v) : 1;
}

/// fn(i) for i in [0, count), striped over workers. Callers write results by index, so the
/// outcome does not depend on scheduling. The first exception is rethrown.
template <class F>
void parallel_for(std::size_t count, F&& fn) {
    const std::size_t workers = std::min(thread_count(), std::max<std::size_t>(count, 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < count; i += workers) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace roughstab
