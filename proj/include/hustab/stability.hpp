#pragma once

// Reduced minimum modulus, Hyers–Ulam stability constant and the explicit
// witnesses x0 = (I − T†T)x behind it.

#include "hustab/numcore.hpp"
#include "hustab/pinv.hpp"
#include "hustab/random.hpp"
#include "hustab/subspace.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace hustab
{

inline constexpr double infinity = std::numeric_limits<double>::infinity();

/// Smallest singular value above the rank cutoff; +inf for the zero operator.
inline double reduced_min_modulus(const Mat& t, const Tolerances& tol = {})
{
    const Svd s = svd(t);
    const Index r = rank_from_svd(s, t.rows(), t.cols(), tol);
    return r == 0 ? infinity : s.singular_values(r - 1);
}

struct StabilityReport
{
    double gamma = infinity;
    double k_t = 0.0;
    Mat t_dagger;
    Index rank = 0;
    bool witness_checked = false;
    double max_witness_ratio = 0.0;
    Index witness_samples = 0;
    bool witnesses_in_null_space = true;

    /// K_T·γ(T); NaN when undefined (zero operator).
    double product() const
    {
        if (rank == 0)
            return std::numeric_limits<double>::quiet_NaN();
        return k_t * gamma;
    }
};

struct Witness
{
    Vec x0;
    double ratio = 0.0;  ///< ‖x − x0‖ / ‖Tx‖, 0 when Tx = 0
};

inline Witness stability_witness_with(const Mat& t, const Mat& t_dagger, const Vec& x)
{
    require(x.size() == t.cols(), ErrorKind::ShapeMismatch, "witness input outside the domain");
    const Vec tx = t * x;
    const Vec recovered = t_dagger * tx;  // x − x0 = T†Tx
    Witness w{x - recovered, 0.0};
    const double image = tx.norm();
    if (image > 0.0)
        w.ratio = recovered.norm() / image;
    return w;
}

inline Witness stability_witness(const Mat& t, const Vec& x, const Tolerances& tol = {})
{
    return stability_witness_with(t, pinv_svd(t, tol), x);
}

/// Probe vectors for the supremum of ‖x − x0‖/‖Tx‖.
///
/// Half are isotropic Gaussians. The rest cluster around the right singular
/// vector of the smallest nonzero singular value, where the supremum is
/// attained, with a random null-space component added.
inline Mat witness_probes(const Mat& t, Index count, Rng& rng, const Tolerances& tol = {})
{
    const Index n = t.cols();
    Mat probes(n, count);
    const Svd s = svd(t);
    const Index r = rank_from_svd(s, t.rows(), t.cols(), tol);
    const Mat v = s.vstar.adjoint();
    for (Index j = 0; j < count; ++j) {
        Vec x = random_vector(n, rng);
        if (j % 2 == 1 && r > 0) {
            const double spread = std::pow(10.0, -rng.uniform(0.0, 5.0));
            Vec directed = v.col(r - 1) * std::polar(1.0, rng.uniform(0.0, 2.0 * std::numbers::pi));
            directed += spread * x;
            if (r < n)
                directed += v.rightCols(n - r) * random_vector(n - r, rng);
            x = directed;
        }
        probes.col(j) = x;
    }
    return probes;
}

inline StabilityReport stability_constant(const Mat& t, const Tolerances& tol = {}, Index witness_samples = 0,
                                          std::uint64_t seed = 0)
{
    StabilityReport rep;
    rep.rank = rank_tol(t, tol);
    rep.gamma = reduced_min_modulus(t, tol);
    rep.t_dagger = pinv_svd(t, tol);
    rep.k_t = spectral_norm(rep.t_dagger);
    if (witness_samples > 0) {
        Rng rng = Rng(seed).split(0x77697463);
        const Mat probes = witness_probes(t, witness_samples, rng, tol);
        const Subspace kernel = null_space(t, tol);
        for (Index j = 0; j < probes.cols(); ++j) {
            const Vec x = probes.col(j);
            const Witness w = stability_witness_with(t, rep.t_dagger, x);
            rep.max_witness_ratio = std::max(rep.max_witness_ratio, w.ratio);
            if (kernel.residual(w.x0).norm() > tol.eq(x.norm()))
                rep.witnesses_in_null_space = false;
        }
        rep.witness_checked = true;
        rep.witness_samples = witness_samples;
    }
    return rep;
}

/// Exact solution x0 of Tx0 = y within k_t·eps of an eps-approximate solution x.
inline Vec epsilon_approximate_solve(const Mat& t, const Vec& y, const Vec& x, double eps,
                                     const Tolerances& tol = {})
{
    require(y.size() == t.rows() && x.size() == t.cols(), ErrorKind::ShapeMismatch,
            "approximate solve operands have wrong sizes");
    require(eps > 0.0, ErrorKind::Infeasible, "eps must be positive");
    if (!contains(range_space(t, tol), y, tol))
        throw Error(ErrorKind::Infeasible, "right-hand side is not in R(T)");
    const Vec defect = t * x - y;
    if (defect.norm() > eps)
        throw Error(ErrorKind::Infeasible, "x is not an eps-approximate solution");
    return x - pinv_svd(t, tol) * defect;
}

}  // namespace hustab
