#pragma once

// Random problem instances shared by the self-test, the acceptance suite and
// the unit tests: operators with a prescribed rank profile, oblique
// generalized inverses with bounded obliqueness, and perturbations that
// either keep or raise the rank.

#include "hustab/geninv.hpp"
#include "hustab/numcore.hpp"
#include "hustab/projector.hpp"
#include "hustab/random.hpp"
#include "hustab/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace hustab
{

enum class RankProfile
{
    Full,
    Deficient,
    Zero,
};

struct OperatorShape
{
    Index rows = 1;
    Index cols = 1;
    Index rank = 1;
};

/// Shape with 1 ≤ rows ≤ max_rows, 1 ≤ cols ≤ max_cols and the requested profile.
/// Deficient falls back to Zero on 1×n / m×1 shapes where no intermediate rank exists.
inline OperatorShape random_shape(Rng& rng, RankProfile profile, Index max_rows = 16, Index max_cols = 12)
{
    OperatorShape s;
    s.rows = 1 + rng.index(max_rows);
    s.cols = 1 + rng.index(max_cols);
    const Index full = std::min(s.rows, s.cols);
    switch (profile) {
    case RankProfile::Full: s.rank = full; break;
    case RankProfile::Deficient: s.rank = full > 1 ? 1 + rng.index(full - 1) : 0; break;
    case RankProfile::Zero: s.rank = 0; break;
    }
    return s;
}

inline Mat random_operator(Rng& rng, const OperatorShape& shape)
{
    return random_matrix_with_rank(shape.rows, shape.cols, shape.rank, rng);
}

/// Oblique generalized inverse whose projectors both have norm ≤ max_obliqueness.
inline GenInverse random_bounded_geninv(const Mat& t, Rng& rng, const Tolerances& tol = {},
                                        double max_obliqueness = 1e3)
{
    for (int attempt = 0; attempt < 64; ++attempt) {
        GenInverse g = geninv_random(t, rng.next_u64(), tol);
        if (g.p.obliqueness() <= max_obliqueness && g.q.obliqueness() <= max_obliqueness)
            return g;
    }
    return geninv_orthogonal(t, tol);
}

enum class PerturbationKind
{
    RangePreserving,  ///< T·M + Q⊥E, so R(δT) ⊆ R(T)
    NullPreserving,   ///< E·T†T, so N(T) ⊆ N(δT)
    RankJumping,      ///< includes a block from N(T) into R(T)^⊥
};

/// δT of the given kind scaled so that ‖δT‖·‖T⁺‖ = gate.
///
/// RankJumping needs N(T) and R(T)^⊥ both non-trivial; the jump block maps
/// N(T) into R(T)^⊥ and is mixed with a range-preserving part.
inline Mat random_perturbation(const GenInverse& g, PerturbationKind kind, double gate, Rng& rng,
                               const Tolerances& tol = {})
{
    const Mat& t = g.t;
    const Index m = t.rows();
    const Index n = t.cols();
    const Subspace range = range_space(t, tol);
    const Subspace kernel = null_space(t, tol);
    const Mat onto_range = orthogonal_projector(range).matrix;
    Mat delta;
    switch (kind) {
    case PerturbationKind::RangePreserving:
        delta = t * random_gaussian(n, n, rng) + onto_range * random_gaussian(m, n, rng);
        break;
    case PerturbationKind::NullPreserving:
        delta = random_gaussian(m, n, rng) * orthogonal_projector(orthogonal_complement(kernel)).matrix;
        break;
    case PerturbationKind::RankJumping: {
        const Subspace range_perp = orthogonal_complement(range);
        require(kernel.dim() > 0 && range_perp.dim() > 0, ErrorKind::ShapeMismatch,
                "rank jump needs a non-trivial kernel and co-range");
        const Mat jump =
            range_perp.basis() * random_gaussian(range_perp.dim(), kernel.dim(), rng) * kernel.basis().adjoint();
        delta = jump / spectral_norm(jump) + 0.5 * rng.uniform() * onto_range * random_gaussian(m, n, rng) /
                                                 std::sqrt(static_cast<double>(m * n));
        break;
    }
    }
    const double norm = spectral_norm(delta);
    if (norm == 0.0)
        return delta;
    const double t_plus_norm = spectral_norm(g.t_plus);
    return delta * (gate / (t_plus_norm > 0.0 ? norm * t_plus_norm : norm));
}

}  // namespace hustab
