#pragma once

// Moore–Penrose inverse three ways: from a generalized inverse by
// orthogonalizing its projectors, from a generalized inverse by the closed
// bracket formula, and from the SVD.

#include "hustab/geninv.hpp"
#include "hustab/numcore.hpp"
#include "hustab/projector.hpp"

#include <array>
#include <string_view>

namespace hustab
{

enum class PinvMethod
{
    Formula21,
    Formula23,
    SvdOracle,
};

inline std::string_view to_string(PinvMethod m)
{
    switch (m) {
    case PinvMethod::Formula21: return "Formula21";
    case PinvMethod::Formula23: return "Formula23";
    case PinvMethod::SvdOracle: return "SvdOracle";
    }
    return "Unknown";
}

/// Residuals ‖TXT − T‖, ‖XTX − X‖, ‖(TX)* − TX‖, ‖(XT)* − XT‖.
inline std::array<double, 4> penrose_residuals(const Mat& t, const Mat& x)
{
    const Mat tx = t * x;
    const Mat xt = x * t;
    return {spectral_norm(tx * t - t), spectral_norm(xt * x - x), spectral_norm(tx.adjoint() - tx),
            spectral_norm(xt.adjoint() - xt)};
}

struct MoorePenrose
{
    Mat t;
    Mat t_dagger;
    PinvMethod method = PinvMethod::SvdOracle;
    std::array<double, 4> residuals{};

    bool satisfies_penrose(const Tolerances& tol = {}) const
    {
        const double scale = std::max(spectral_norm(t), spectral_norm(t_dagger));
        for (double r : residuals)
            if (!(r <= tol.eq(scale)))
                return false;
        return true;
    }
};

inline MoorePenrose make_moore_penrose(const Mat& t, Mat t_dagger, PinvMethod method)
{
    MoorePenrose out{t, std::move(t_dagger), method, {}};
    out.residuals = penrose_residuals(out.t, out.t_dagger);
    return out;
}

/// V Σ⁺ U* with reciprocals only above the rank cutoff.
inline Mat pinv_svd(const Mat& t, const Tolerances& tol = {})
{
    const Svd s = svd(t);
    const Index r = rank_from_svd(s, t.rows(), t.cols(), tol);
    Mat out = Mat::Zero(t.cols(), t.rows());
    for (Index k = 0; k < r; ++k)
        out += (1.0 / s.singular_values(k)) * s.vstar.row(k).adjoint() * s.u.col(k).adjoint();
    return out;
}

inline MoorePenrose pinv_oracle(const Mat& t, const Tolerances& tol = {})
{
    return make_moore_penrose(t, pinv_svd(t, tol), PinvMethod::SvdOracle);
}

/// T† = [I − P⊥_{N(T)}] T⁺ P⊥_{R(T)}, each orthogonal projector obtained by
/// orthogonalizing the oblique projector that came with T⁺.
inline MoorePenrose pinv_from_geninv_21(const GenInverse& g, const Tolerances& tol = {})
{
    const Mat null_perp = orthogonalize(g.p, tol).matrix;
    const Mat range_perp = orthogonalize(g.q, tol).matrix;
    Mat t_dagger = (identity(g.t.cols()) - null_perp) * g.t_plus * range_perp;
    return make_moore_penrose(g.t, std::move(t_dagger), PinvMethod::Formula21);
}

/// {I − [ST − (ST)*]²}⁻¹ (ST)* S (TS)* {I − [TS − (TS)*]²}⁻¹ for any
/// generalized inverse S of T. In finite dimensions (ST)** = ST.
inline Mat moore_penrose_from_inner_inverse(const Mat& t, const Mat& s, const Tolerances& tol = {})
{
    const Mat st = s * t;
    const Mat ts = t * s;
    return skew_bracket_inverse(st, tol) * st.adjoint() * s * ts.adjoint() * skew_bracket_inverse(ts, tol);
}

inline MoorePenrose pinv_from_geninv_23(const GenInverse& g, const Tolerances& tol = {})
{
    return make_moore_penrose(g.t, moore_penrose_from_inner_inverse(g.t, g.t_plus, tol), PinvMethod::Formula23);
}

inline MoorePenrose pinv(const GenInverse& g, PinvMethod method, const Tolerances& tol = {})
{
    switch (method) {
    case PinvMethod::Formula21: return pinv_from_geninv_21(g, tol);
    case PinvMethod::Formula23: return pinv_from_geninv_23(g, tol);
    case PinvMethod::SvdOracle: break;
    }
    return pinv_oracle(g.t, tol);
}

}  // namespace hustab
