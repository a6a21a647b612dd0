#pragma once

// Subspaces of C^n held as orthonormal bases. Oblique decompositions are
// expressed through projectors (projector.hpp); the bases here are always
// orthonormal.

#include "hustab/numcore.hpp"
#include "hustab/random.hpp"

#include <cstdint>

namespace hustab
{

class Subspace
{
public:
    /// Wraps a basis whose columns are already orthonormal.
    static Subspace from_orthonormal(Mat basis) { return Subspace(std::move(basis)); }

    static Subspace trivial(Index ambient_dim) { return Subspace(Mat(ambient_dim, 0)); }

    static Subspace full(Index ambient_dim) { return Subspace(identity(ambient_dim)); }

    /// Column span of `vectors`; dependent directions (per tol.rank_rel) are dropped.
    static Subspace span(const Mat& vectors, const Tolerances& tol = {})
    {
        if (vectors.cols() == 0)
            return trivial(vectors.rows());
        const Svd s = svd(vectors);
        const Index r = rank_from_svd(s, vectors.rows(), vectors.cols(), tol);
        return Subspace(s.u.leftCols(r));
    }

    Index ambient_dim() const { return basis_.rows(); }
    Index dim() const { return basis_.cols(); }
    const Mat& basis() const { return basis_; }

    /// Residual of projecting `v` onto this subspace.
    Vec residual(const Vec& v) const
    {
        if (dim() == 0)
            return v;
        return v - basis_ * (basis_.adjoint() * v);
    }

private:
    explicit Subspace(Mat basis) : basis_(std::move(basis)) {}

    Mat basis_;
};

inline Subspace null_space(const Mat& t, const Tolerances& tol = {})
{
    const Svd s = svd(t);
    const Index r = rank_from_svd(s, t.rows(), t.cols(), tol);
    return Subspace::from_orthonormal(s.vstar.adjoint().rightCols(t.cols() - r));
}

inline Subspace range_space(const Mat& t, const Tolerances& tol = {})
{
    const Svd s = svd(t);
    const Index r = rank_from_svd(s, t.rows(), t.cols(), tol);
    return Subspace::from_orthonormal(s.u.leftCols(r));
}

inline Subspace orthogonal_complement(const Subspace& s)
{
    const Index n = s.ambient_dim();
    if (s.dim() == 0)
        return Subspace::full(n);
    // Trailing left singular vectors of an orthonormal basis span its complement.
    const Svd f = svd(s.basis());
    return Subspace::from_orthonormal(f.u.rightCols(n - s.dim()));
}

/// A complement of `s` that is generically not orthogonal to it.
///
/// Starts from the orthogonal complement and tilts each of its vectors by
/// 0.5 times a random combination (unit-disc coefficients) of the basis of
/// `s`. The tilted vectors project onto s^⊥ as the original complement, so
/// the sum with `s` stays direct.
inline Subspace random_complement(const Subspace& s, std::uint64_t seed, const Tolerances& tol = {})
{
    const Subspace perp = orthogonal_complement(s);
    if (perp.dim() == 0 || s.dim() == 0)
        return perp;
    Rng rng = Rng(seed).split(0x636f6d70);
    Mat coeffs(s.dim(), perp.dim());
    for (Index j = 0; j < coeffs.cols(); ++j)
        for (Index i = 0; i < coeffs.rows(); ++i)
            coeffs(i, j) = 0.5 * rng.unit_disc();
    const Mat tilted = perp.basis() + s.basis() * coeffs;
    return Subspace::span(tilted, tol);
}

inline bool intersection_is_trivial(const Subspace& a, const Subspace& b, const Tolerances& tol = {})
{
    require(a.ambient_dim() == b.ambient_dim(), ErrorKind::ShapeMismatch, "subspaces live in different spaces");
    if (a.dim() == 0 || b.dim() == 0)
        return true;
    Mat joined(a.ambient_dim(), a.dim() + b.dim());
    joined << a.basis(), b.basis();
    return rank_tol(joined, tol) == a.dim() + b.dim();
}

/// Largest distance from a unit vector of `b` to the subspace `a`.
inline double containment_gap(const Subspace& a, const Subspace& b)
{
    if (b.dim() == 0)
        return 0.0;
    if (a.dim() == 0)
        return 1.0;
    return spectral_norm(b.basis() - a.basis() * (a.basis().adjoint() * b.basis()));
}

inline bool subspace_equal(const Subspace& a, const Subspace& b, const Tolerances& tol = {})
{
    require(a.ambient_dim() == b.ambient_dim(), ErrorKind::ShapeMismatch, "subspaces live in different spaces");
    if (a.dim() != b.dim())
        return false;
    return containment_gap(a, b) <= tol.eq() && containment_gap(b, a) <= tol.eq();
}

inline bool contains(const Subspace& s, const Vec& v, const Tolerances& tol = {})
{
    require(v.size() == s.ambient_dim(), ErrorKind::ShapeMismatch, "vector outside ambient space");
    return s.residual(v).norm() <= tol.eq(v.norm());
}

/// Direct-sum test: trivial intersection and dimensions filling the space.
inline bool are_complementary(const Subspace& a, const Subspace& b, const Tolerances& tol = {})
{
    return a.ambient_dim() == b.ambient_dim() && a.dim() + b.dim() == a.ambient_dim() &&
           intersection_is_trivial(a, b, tol);
}

}  // namespace hustab
