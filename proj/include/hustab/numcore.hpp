#pragma once

// Dense complex matrix substrate shared by every other header: error type,
// tolerances, SVD, tolerant rank, spectral norm and guarded inversion.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace hustab
{

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RealVec = Eigen::VectorXd;
using Index = Eigen::Index;

enum class ErrorKind
{
    NonConvergence,
    Singular,
    NotComplementary,
    GateFailed,
    ConditionFailed,
    Infeasible,
    BoundViolated,
    ShapeMismatch,
    ParseError,
};

inline const char* to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::Singular: return "Singular";
    case ErrorKind::NotComplementary: return "NotComplementary";
    case ErrorKind::GateFailed: return "GateFailed";
    case ErrorKind::ConditionFailed: return "ConditionFailed";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::BoundViolated: return "BoundViolated";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::ParseError: return "ParseError";
    }
    return "Unknown";
}

class Error : public std::runtime_error
{
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Numerical thresholds used for every rank, equality and invertibility decision.
struct Tolerances
{
    double rank_rel = 1e-10;  ///< relative singular-value cutoff
    double eq_abs = 1e-8;     ///< matrix-equality tolerance, scaled by max(1, operand norm)
    double cond_max = 1e12;   ///< largest condition number accepted by solve_inverse

    bool valid() const
    {
        return rank_rel > 0.0 && rank_rel < 1.0 && eq_abs > 0.0 && cond_max > 0.0;
    }

    /// Equality threshold for quantities whose natural magnitude is `scale`.
    double eq(double scale = 1.0) const { return eq_abs * std::max(1.0, scale); }
};

struct Svd
{
    Mat u;                    ///< m×m unitary
    RealVec singular_values;  ///< non-increasing, length min(m, n)
    Mat vstar;                ///< n×n unitary

    double sigma_max() const { return singular_values.size() ? singular_values(0) : 0.0; }
};

inline bool all_finite(const Mat& a)
{
    return a.allFinite();
}

inline void require(bool condition, ErrorKind kind, const std::string& what)
{
    if (!condition)
        throw Error(kind, what);
}

inline Mat identity(Index n)
{
    return Mat::Identity(n, n);
}

inline Mat adjoint(const Mat& a)
{
    return a.adjoint();
}

inline Svd svd(const Mat& a)
{
    require(all_finite(a), ErrorKind::NonConvergence, "svd input contains non-finite entries");
    Svd out;
    if (a.rows() == 0 || a.cols() == 0) {
        out.u = identity(a.rows());
        out.vstar = identity(a.cols());
        out.singular_values = RealVec::Zero(0);
        return out;
    }
    Eigen::JacobiSVD<Mat> jacobi(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    out.u = jacobi.matrixU();
    out.singular_values = jacobi.singularValues();
    out.vstar = jacobi.matrixV().adjoint();
    require(out.u.allFinite() && out.vstar.allFinite() && out.singular_values.allFinite(),
            ErrorKind::NonConvergence, "Jacobi SVD produced non-finite factors");
    return out;
}

/// Singular-value cutoff below which a value counts as an exact zero.
inline double rank_cutoff(const Svd& s, Index rows, Index cols, const Tolerances& tol)
{
    return tol.rank_rel * s.sigma_max() * static_cast<double>(std::max(rows, cols));
}

inline Index rank_from_svd(const Svd& s, Index rows, Index cols, const Tolerances& tol)
{
    const double cutoff = rank_cutoff(s, rows, cols, tol);
    Index r = 0;
    for (Index i = 0; i < s.singular_values.size(); ++i)
        if (s.singular_values(i) > cutoff)
            ++r;
    return r;
}

inline Index rank_tol(const Mat& a, const Tolerances& tol = {})
{
    if (a.rows() == 0 || a.cols() == 0)
        return 0;
    return rank_from_svd(svd(a), a.rows(), a.cols(), tol);
}

inline double spectral_norm(const Mat& a)
{
    if (a.rows() == 0 || a.cols() == 0)
        return 0.0;
    return svd(a).sigma_max();
}

inline double vector_norm(const Vec& v)
{
    return v.norm();
}

/// Inverse of a square matrix, refused when σ_max/σ_min exceeds tol.cond_max.
inline Mat solve_inverse(const Mat& a, const Tolerances& tol = {})
{
    require(a.rows() == a.cols(), ErrorKind::ShapeMismatch, "solve_inverse needs a square operand");
    if (a.rows() == 0)
        return Mat(0, 0);
    const Svd s = svd(a);
    const double smin = s.singular_values(s.singular_values.size() - 1);
    const double smax = s.sigma_max();
    if (!(smin > 0.0) || smax / smin > tol.cond_max)
        throw Error(ErrorKind::Singular,
                    "condition estimate " + std::to_string(smin > 0.0 ? smax / smin : INFINITY) +
                        " exceeds cond_max");
    return a.partialPivLu().inverse();
}

/// Spectral-norm distance, the equality measure used throughout.
inline double distance(const Mat& a, const Mat& b)
{
    return spectral_norm(a - b);
}

inline bool approx_equal(const Mat& a, const Mat& b, const Tolerances& tol = {})
{
    if (a.rows() != b.rows() || a.cols() != b.cols())
        return false;
    return distance(a, b) <= tol.eq(std::max(spectral_norm(a), spectral_norm(b)));
}

}  // namespace hustab
