#pragma once

// Seeded generators for probe vectors, complements and test operators.
// Every stream is derived from a root seed with `split`, so independent
// consumers never share state and results do not depend on call order.

#include "hustab/numcore.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace hustab
{

/// splitmix64 finalizer; used to derive child seeds.
inline std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Rng
{
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

    std::uint64_t seed() const { return seed_; }

    /// Independent child stream; same (seed, stream) always yields the same child.
    Rng split(std::uint64_t stream) const { return Rng(mix64(seed_ ^ mix64(stream + 0x5851f42d4c957f2dULL))); }

    /// Fresh 64-bit value; advances the stream (unlike split).
    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1), 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    Index index(Index n) { return static_cast<Index>(engine_() % static_cast<std::uint64_t>(n)); }

    /// Standard normal via Box–Muller (portable across standard libraries).
    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0)
            u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    Complex complex_normal() { return {normal() / std::numbers::sqrt2, normal() / std::numbers::sqrt2}; }

    /// Uniform on the closed unit disc.
    Complex unit_disc()
    {
        const double r = std::sqrt(uniform());
        const double angle = 2.0 * std::numbers::pi * uniform();
        return std::polar(r, angle);
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

inline Mat random_gaussian(Index rows, Index cols, Rng& rng)
{
    Mat a(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i)
            a(i, j) = rng.complex_normal();
    return a;
}

inline Vec random_vector(Index n, Rng& rng)
{
    return random_gaussian(n, 1, rng).col(0);
}

/// Haar-distributed unitary via QR of a complex Gaussian with phase correction.
inline Mat random_unitary(Index n, Rng& rng)
{
    const Mat g = random_gaussian(n, n, rng);
    Eigen::HouseholderQR<Mat> qr(g);
    Mat q = qr.householderQ();
    const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index j = 0; j < n; ++j) {
        const double mag = std::abs(r(j, j));
        if (mag > 0.0)
            q.col(j) *= r(j, j) / mag;
    }
    return q;
}

/// m×n operator of exact rank `rank` with singular values drawn from [sigma_lo, sigma_hi].
inline Mat random_matrix_with_rank(Index rows, Index cols, Index rank, Rng& rng, double sigma_lo = 0.2,
                                   double sigma_hi = 3.0)
{
    const Mat u = random_unitary(rows, rng);
    const Mat v = random_unitary(cols, rng);
    Mat a = Mat::Zero(rows, cols);
    for (Index k = 0; k < rank; ++k)
        a += rng.uniform(sigma_lo, sigma_hi) * u.col(k) * v.col(k).adjoint();
    return a;
}

}  // namespace hustab
