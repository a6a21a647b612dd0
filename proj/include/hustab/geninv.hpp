#pragma once

// Generalized inverses induced by a choice of complements
// X = N(T) ⊕ N(T)^c and Y = R(T) ⊕ R(T)^c.

#include "hustab/numcore.hpp"
#include "hustab/projector.hpp"
#include "hustab/subspace.hpp"

#include <array>

namespace hustab
{

/// Residuals ‖TST − T‖, ‖STS − S‖, ‖(ST)² − ST‖ and the thresholded verdict.
struct AxiomCheck
{
    std::array<double, 3> residuals{};
    bool ok = false;
};

inline AxiomCheck check_axioms(const Mat& t, const Mat& s, const Tolerances& tol = {})
{
    require(s.rows() == t.cols() && s.cols() == t.rows(), ErrorKind::ShapeMismatch,
            "generalized inverse candidate has incompatible shape");
    const Mat st = s * t;
    AxiomCheck out;
    out.residuals = {spectral_norm(t * st - t), spectral_norm(st * s - s), spectral_norm(st * st - st)};
    const double scale = std::max(spectral_norm(t), spectral_norm(s));
    out.ok = out.residuals[0] <= tol.eq(scale) && out.residuals[1] <= tol.eq(scale) &&
             out.residuals[2] <= tol.eq(scale);
    return out;
}

struct GenInverse
{
    Mat t;
    Mat t_plus;
    Projector p;  ///< onto N(T) along N(T)^c
    Projector q;  ///< onto R(T) along R(T)^c
    std::array<double, 3> axiom_residuals{};
};

/// Builds the unique T⁺ with T⁺T = I − P and TT⁺ = Q for the given complements.
///
/// `null_complement` must complement N(T) in the domain, `range_complement`
/// must complement R(T) in the codomain. Columns are assembled one at a time:
/// project e_j with Q, take its coordinates in the range basis, and pull them
/// back through T restricted to `null_complement`.
inline GenInverse geninv_from_complements(const Mat& t, const Subspace& null_complement,
                                          const Subspace& range_complement, const Tolerances& tol = {})
{
    require(null_complement.ambient_dim() == t.cols() && range_complement.ambient_dim() == t.rows(),
            ErrorKind::ShapeMismatch, "complements live in the wrong spaces");
    const Subspace kernel = null_space(t, tol);
    const Subspace range = range_space(t, tol);
    Projector p = oblique_projector(kernel, null_complement, tol);
    Projector q = oblique_projector(range, range_complement, tol);

    // T|_{N(T)^c} in coordinates: null_complement basis -> range basis.
    const Mat& nc = null_complement.basis();
    const Mat restricted = range.basis().adjoint() * (t * nc);
    const Mat restricted_inv = solve_inverse(restricted, tol);

    Mat t_plus = Mat::Zero(t.cols(), t.rows());
    for (Index j = 0; j < t.rows(); ++j) {
        const Vec qe = q.matrix.col(j);
        const Vec coords = range.basis().adjoint() * qe;
        t_plus.col(j) = nc * (restricted_inv * coords);
    }

    GenInverse g{t, std::move(t_plus), std::move(p), std::move(q), {}};
    g.axiom_residuals = check_axioms(g.t, g.t_plus, tol).residuals;
    return g;
}

/// Generalized inverse from orthogonal complements; coincides with T†.
inline GenInverse geninv_orthogonal(const Mat& t, const Tolerances& tol = {})
{
    return geninv_from_complements(t, orthogonal_complement(null_space(t, tol)),
                                   orthogonal_complement(range_space(t, tol)), tol);
}

/// Generalized inverse from seeded oblique complements of N(T) and R(T).
inline GenInverse geninv_random(const Mat& t, std::uint64_t seed, const Tolerances& tol = {})
{
    const Rng root(seed);
    return geninv_from_complements(t, random_complement(null_space(t, tol), root.split(1).seed(), tol),
                                   random_complement(range_space(t, tol), root.split(2).seed(), tol), tol);
}

}  // namespace hustab
