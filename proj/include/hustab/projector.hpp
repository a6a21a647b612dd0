#pragma once

#include "hustab/numcore.hpp"
#include "hustab/subspace.hpp"

namespace hustab
{

/// Idempotent operator with range `onto` and null space `along`.
struct Projector
{
    Mat matrix;
    Subspace onto;
    Subspace along;

    /// ‖P‖; equals 1 exactly for non-trivial orthogonal projectors.
    double obliqueness() const { return spectral_norm(matrix); }
};

/// Projector onto `onto` along `along`, from one inversion of [onto | along].
inline Projector oblique_projector(const Subspace& onto, const Subspace& along, const Tolerances& tol = {})
{
    if (!are_complementary(onto, along, tol))
        throw Error(ErrorKind::NotComplementary, "onto/along do not form a direct sum decomposition");
    const Index n = onto.ambient_dim();
    const Index k = onto.dim();
    if (k == 0)
        return {Mat::Zero(n, n), onto, along};
    if (k == n)
        return {identity(n), onto, along};
    Mat joined(n, n);
    joined << onto.basis(), along.basis();
    Mat coords;
    try {
        coords = solve_inverse(joined, tol);
    } catch (const Error& e) {
        throw Error(ErrorKind::NotComplementary, std::string("basis concatenation not invertible: ") + e.what());
    }
    // Keep the `onto` coordinates, drop the `along` ones.
    return {onto.basis() * coords.topRows(k), onto, along};
}

inline Projector orthogonal_projector(const Subspace& s)
{
    const Index n = s.ambient_dim();
    Mat m = s.dim() == 0 ? Mat::Zero(n, n) : Mat(s.basis() * s.basis().adjoint());
    return {std::move(m), s, orthogonal_complement(s)};
}

/// I − (P − P*)², the operator inverted when orthogonalizing an idempotent P.
inline Mat skew_bracket(const Mat& p)
{
    const Mat skew = p - p.adjoint();
    return identity(p.rows()) - skew * skew;
}

/// {I − (P − P*)²}⁻¹ for an idempotent P.
inline Mat skew_bracket_inverse(const Mat& p, const Tolerances& tol = {})
{
    return solve_inverse(skew_bracket(p), tol);
}

/// Orthogonal projector onto R(P) for any idempotent P: P P* [I − (P − P*)²]⁻¹.
inline Mat orthogonalize_idempotent(const Mat& p, const Tolerances& tol = {})
{
    return p * p.adjoint() * skew_bracket_inverse(p, tol);
}

inline Projector orthogonalize(const Projector& p, const Tolerances& tol = {})
{
    return {orthogonalize_idempotent(p.matrix, tol), p.onto, orthogonal_complement(p.onto)};
}

/// Both orderings of the orthogonalization formula plus the commutation
/// residual ‖PP*·K − K·PP*‖ with K = I − (P − P*)².
struct OrthogonalizationForms
{
    Mat right;  ///< P P* K⁻¹
    Mat left;   ///< K⁻¹ P P*
    double commutation_residual = 0.0;
};

inline OrthogonalizationForms orthogonalization_forms(const Mat& p, const Tolerances& tol = {})
{
    const Mat ppstar = p * p.adjoint();
    const Mat bracket = skew_bracket(p);
    const Mat inv = solve_inverse(bracket, tol);
    return {ppstar * inv, inv * ppstar, spectral_norm(ppstar * bracket - bracket * ppstar)};
}

}  // namespace hustab
