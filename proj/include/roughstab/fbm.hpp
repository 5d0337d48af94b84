#pragma once

// Fractional Brownian motion on uniform grids by circulant embedding of the increment covariance.

#include "roughstab/paths.hpp"

#include <unsupported/Eigen/FFT>

#include <complex>
#include <random>

namespace roughstab {

/// Autocovariance of unit-step fractional Gaussian noise at lag k.
[[nodiscard]] inline double fgn_autocov(double H, std::size_t k) {
    const double h2 = 2.0 * H;
    const double kk = static_cast<double>(k);
    if (k == 0) return 1.0;
    return 0.5 * (std::pow(kk + 1.0, h2) - 2.0 * std::pow(kk, h2) + std::pow(kk - 1.0, h2));
}

/// Engine for component c of a sample keyed by seed.
[[nodiscard]] inline std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffULL), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream & 0xffffffffULL), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

/// Reusable sampler for a fixed (H, n); the spectral factor is computed once.
class FbmSampler {
public:
    static constexpr std::size_t kMinSpectral = 16;

    FbmSampler(double H, std::size_t n) : H_(H), n_(n) {
        if (!(H > 0.0 && H < 1.0)) throw std::invalid_argument("sample_fbm: Hurst index must lie in (0,1)");
        if (n < 1) throw std::invalid_argument("sample_fbm: need at least one interval");
        if (n < kMinSpectral || !build_spectral()) build_cholesky();
    }

    [[nodiscard]] bool spectral() const { return spectral_; }

    /// Unit-step fGn of length n for one component.
    [[nodiscard]] Vec noise(std::mt19937_64& eng) const {
        std::normal_distribution<double> nd(0.0, 1.0);
        if (!spectral_) {
            Vec z(static_cast<Eigen::Index>(n_));
            for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = nd(eng);
            return chol_ * z;
        }
        const std::size_t M = 2 * n_;
        std::vector<std::complex<double>> a(M), w;
        for (std::size_t k = 0; k < M; ++k) {
            const double xi = nd(eng);
            const double eta = nd(eng);
            a[k] = sqrt_eig_[k] * std::complex<double>(xi, eta);
        }
        Eigen::FFT<double> fft;
        fft.fwd(w, a);
        Vec out(static_cast<Eigen::Index>(n_));
        for (std::size_t k = 0; k < n_; ++k) out(static_cast<Eigen::Index>(k)) = w[k].real();
        return out;
    }

    /// One path on a uniform grid, m components, B_{t0} = 0.
    [[nodiscard]] SampledPath sample(const TimeGrid& grid, std::size_t dim, std::uint64_t seed) const {
        if (!grid.is_uniform()) throw std::invalid_argument("uniform grid required for spectral sampling");
        if (grid.n() != n_) throw std::invalid_argument("FbmSampler: grid size does not match sampler");
        if (dim < 1) throw std::invalid_argument("sample_fbm: dimension must be >= 1");
        const double scale = std::pow(grid.step(), H_);
        Mat vals = Mat::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(n_ + 1));
        for (std::size_t c = 0; c < dim; ++c) {
            auto eng = make_engine(seed, c);
            const Vec z = noise(eng);
            double acc = 0.0;
            for (std::size_t k = 0; k < n_; ++k) {
                acc += scale * z(static_cast<Eigen::Index>(k));
                vals(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(k + 1)) = acc;
            }
        }
        return SampledPath(grid, std::move(vals));
    }

private:
    bool build_spectral() {
        const std::size_t M = 2 * n_;
        std::vector<std::complex<double>> c(M), lam;
        for (std::size_t k = 0; k <= n_; ++k) c[k] = fgn_autocov(H_, k);
        for (std::size_t k = 1; k < n_; ++k) c[M - k] = c[k];
        Eigen::FFT<double> fft;
        fft.fwd(lam, c);
        double lmax = 0.0;
        for (const auto& v : lam) lmax = std::max(lmax, v.real());
        sqrt_eig_.resize(M);
        for (std::size_t k = 0; k < M; ++k) {
            double l = lam[k].real();
            if (l < 0.0) {
                if (l < -1e-10 * lmax) {
                    notice("circulant embedding has a negative eigenvalue; falling back to dense Cholesky");
                    return false;
                }
                l = 0.0;
            }
            sqrt_eig_[k] = std::sqrt(l / static_cast<double>(M));
        }
        spectral_ = true;
        return true;
    }

    void build_cholesky() {
        const auto n = static_cast<Eigen::Index>(n_);
        Mat cov(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                cov(i, j) = fgn_autocov(H_, static_cast<std::size_t>(std::abs(i - j)));
        Eigen::LLT<Mat> llt(cov);
        if (llt.info() != Eigen::Success) throw std::runtime_error("sample_fbm: covariance not positive definite");
        chol_ = llt.matrixL();
        spectral_ = false;
    }

    double H_;
    std::size_t n_;
    bool spectral_ = false;
    std::vector<double> sqrt_eig_;
    Mat chol_;
};

/// m independent fBm components with exact increment covariance.
[[nodiscard]] inline SampledPath sample_fbm(double H, const TimeGrid& grid, std::size_t dim, std::uint64_t seed) {
    if (!(H > 0.0 && H < 1.0)) throw std::invalid_argument("sample_fbm: Hurst index must lie in (0,1)");
    if (!grid.is_uniform()) throw std::invalid_argument("uniform grid required for spectral sampling");
    return FbmSampler(H, grid.n()).sample(grid, dim, seed);
}

}  // namespace roughstab
