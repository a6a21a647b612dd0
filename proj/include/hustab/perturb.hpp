#pragma once

// Perturbations T̄ = T + δT of an operator with a known generalized inverse T⁺:
// the B = T⁺(I + δT T⁺)⁻¹ construction, the equivalent conditions under which
// B is a generalized inverse of T̄, the closed-form T̄†, the two special cases
// N(T) ⊆ N(δT) and R(δT) ⊆ R(T), the Lipschitz bound on ‖T̄† − T†‖, and
// continuity sweeps of the stability constant along a ray s·δT.

#include "hustab/geninv.hpp"
#include "hustab/numcore.hpp"
#include "hustab/pinv.hpp"
#include "hustab/projector.hpp"
#include "hustab/random.hpp"
#include "hustab/subspace.hpp"

#include <algorithm>
#include <cstdint>
#include <future>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

namespace hustab
{

/// Constants of ‖δT x‖ ≤ a‖x‖ + b‖Tx‖.
struct TBound
{
    double a = 0.0;
    double b = 0.0;
};

struct Perturbation
{
    Mat t;
    Mat delta_t;
    Mat t_bar;
    double a = 0.0;
    double b = 0.0;
    GenInverse g;
    double gate = 0.0;                ///< a‖T⁺‖ + b‖TT⁺‖
    bool bound_sampled_only = false;  ///< (a, b) were user supplied and only checked on samples
};

inline double gate_value(const GenInverse& g, TBound bound)
{
    return bound.a * spectral_norm(g.t_plus) + bound.b * spectral_norm(g.t * g.t_plus);
}

namespace detail
{

inline Perturbation assemble_perturbation(const Mat& t, const Mat& delta_t, const GenInverse& g, TBound bound,
                                          bool sampled_only, const Tolerances& tol)
{
    require(t.rows() == delta_t.rows() && t.cols() == delta_t.cols(), ErrorKind::ShapeMismatch,
            "delta_t shape differs from t");
    require(g.t.rows() == t.rows() && g.t.cols() == t.cols() && approx_equal(g.t, t, tol), ErrorKind::ShapeMismatch,
            "generalized inverse belongs to a different operator");
    Perturbation p{t, delta_t, t + delta_t, bound.a, bound.b, g, gate_value(g, bound), sampled_only};
    if (!(p.gate < 1.0))
        throw Error(ErrorKind::GateFailed, "a‖T⁺‖ + b‖TT⁺‖ = " + std::to_string(p.gate) + " is not below 1");
    return p;
}

}  // namespace detail

/// Bounded perturbation with the exact constants (a, b) = (‖δT‖, 0).
inline Perturbation make_perturbation(const Mat& t, const Mat& delta_t, const GenInverse& g,
                                      const Tolerances& tol = {})
{
    return detail::assemble_perturbation(t, delta_t, g, {spectral_norm(delta_t), 0.0}, false, tol);
}

/// Perturbation with caller-chosen T-bound constants, verified on `samples`
/// random vectors only. Throws BoundViolated on a counterexample.
inline Perturbation make_perturbation(const Mat& t, const Mat& delta_t, const GenInverse& g, TBound bound,
                                      std::uint64_t seed, const Tolerances& tol = {}, Index samples = 1000)
{
    require(bound.a >= 0.0 && bound.b >= 0.0, ErrorKind::BoundViolated, "T-bound constants must be non-negative");
    Rng rng = Rng(seed).split(0x74626e64);
    for (Index k = 0; k < samples; ++k) {
        const Vec x = random_vector(t.cols(), rng);
        const double lhs = (delta_t * x).norm();
        const double rhs = bound.a * x.norm() + bound.b * (t * x).norm();
        if (lhs > rhs + tol.eq(rhs))
            throw Error(ErrorKind::BoundViolated, "sampled vector violates ‖δTx‖ ≤ a‖x‖ + b‖Tx‖");
    }
    return detail::assemble_perturbation(t, delta_t, g, bound, true, tol);
}

/// (I + δT T⁺)⁻¹.
inline Mat banach_inverse(const Perturbation& p, const Tolerances& tol = {})
{
    return solve_inverse(identity(p.t.rows()) + p.delta_t * p.g.t_plus, tol);
}

inline Mat build_b(const Perturbation& p, const Tolerances& tol = {})
{
    return p.g.t_plus * banach_inverse(p, tol);
}

enum class Condition
{
    C1_B_is_geninv,
    C2_range_pullback,
    C3_nullspace_mapped,
    C4_trivial_intersection,
    C4p_nullspace_pullback,
    RankEqual,
    DimNullEqual,
    CodimRangeEqual,
};

inline constexpr Condition all_conditions[] = {
    Condition::C1_B_is_geninv,          Condition::C2_range_pullback, Condition::C3_nullspace_mapped,
    Condition::C4_trivial_intersection, Condition::C4p_nullspace_pullback, Condition::RankEqual,
    Condition::DimNullEqual,            Condition::CodimRangeEqual,
};

inline std::string_view to_string(Condition c)
{
    switch (c) {
    case Condition::C1_B_is_geninv: return "C1_B_is_geninv";
    case Condition::C2_range_pullback: return "C2_range_pullback";
    case Condition::C3_nullspace_mapped: return "C3_nullspace_mapped";
    case Condition::C4_trivial_intersection: return "C4_trivial_intersection";
    case Condition::C4p_nullspace_pullback: return "C4p_nullspace_pullback";
    case Condition::RankEqual: return "RankEqual";
    case Condition::DimNullEqual: return "DimNullEqual";
    case Condition::CodimRangeEqual: return "CodimRangeEqual";
    }
    return "Unknown";
}

struct ConditionReport
{
    std::map<Condition, bool> verdicts;
    AxiomCheck b_axioms;            ///< check_axioms(T̄, B)
    bool equivalence_held = false;  ///< C1 = C2 = C3 = C4 = C4p
    bool rank_criteria_held = false;  ///< C4 = RankEqual = DimNullEqual = CodimRangeEqual

    bool operator[](Condition c) const { return verdicts.at(c); }
};

/// R(T̄) ∩ N(T⁺) = {0}.
inline bool trivial_intersection_condition(const Perturbation& p, const Tolerances& tol = {})
{
    return intersection_is_trivial(range_space(p.t_bar, tol), null_space(p.g.t_plus, tol), tol);
}

/// Evaluates every condition from its own definition and records whether the
/// equivalences hold.
inline ConditionReport check_conditions(const Perturbation& p, const Tolerances& tol = {})
{
    ConditionReport rep;
    const Mat b = build_b(p, tol);
    const Mat pullback = banach_inverse(p, tol);
    const Subspace range_t = range_space(p.t, tol);
    const Subspace range_t_bar = range_space(p.t_bar, tol);
    const Subspace kernel_t = null_space(p.t, tol);
    const Subspace kernel_t_bar = null_space(p.t_bar, tol);

    rep.b_axioms = check_axioms(p.t_bar, b, tol);
    rep.verdicts[Condition::C1_B_is_geninv] = rep.b_axioms.ok;

    rep.verdicts[Condition::C2_range_pullback] =
        subspace_equal(Subspace::span(pullback * range_t_bar.basis(), tol), range_t, tol);

    bool mapped = true;
    const Mat mapped_kernel = pullback * p.t_bar * kernel_t.basis();
    for (Index j = 0; j < mapped_kernel.cols() && mapped; ++j)
        mapped = contains(range_t, mapped_kernel.col(j), tol);
    rep.verdicts[Condition::C3_nullspace_mapped] = mapped;

    rep.verdicts[Condition::C4_trivial_intersection] =
        intersection_is_trivial(range_t_bar, null_space(p.g.t_plus, tol), tol);

    const Mat kernel_pullback = solve_inverse(identity(p.t.cols()) + p.g.t_plus * p.delta_t, tol);
    rep.verdicts[Condition::C4p_nullspace_pullback] =
        subspace_equal(Subspace::span(kernel_pullback * kernel_t.basis(), tol), kernel_t_bar, tol);

    const Index rank_t = range_t.dim();
    const Index rank_t_bar = range_t_bar.dim();
    rep.verdicts[Condition::RankEqual] = rank_t == rank_t_bar;
    rep.verdicts[Condition::DimNullEqual] = kernel_t.dim() == kernel_t_bar.dim();
    rep.verdicts[Condition::CodimRangeEqual] = (p.t.rows() - rank_t) == (p.t_bar.rows() - rank_t_bar);

    const bool c4 = rep[Condition::C4_trivial_intersection];
    rep.equivalence_held = rep[Condition::C1_B_is_geninv] == c4 && rep[Condition::C2_range_pullback] == c4 &&
                           rep[Condition::C3_nullspace_mapped] == c4 && rep[Condition::C4p_nullspace_pullback] == c4;
    rep.rank_criteria_held = rep[Condition::RankEqual] == c4 && rep[Condition::DimNullEqual] == c4 &&
                             rep[Condition::CodimRangeEqual] == c4;
    return rep;
}

/// Closed-form T̄† from B: with E = B T̄ and F = T̄ B,
/// T̄† = {I − [E − E*]²}⁻¹ E* B F* {I − [F − F*]²}⁻¹.
inline Mat perturbed_pinv(const Perturbation& p, const Tolerances& tol = {})
{
    if (!trivial_intersection_condition(p, tol))
        throw Error(ErrorKind::ConditionFailed, "R(T̄) meets N(T⁺); B is not a generalized inverse of T̄");
    const Mat b = build_b(p, tol);
    const Mat e = b * p.t_bar;
    const Mat f = p.t_bar * b;
    return skew_bracket_inverse(e, tol) * e.adjoint() * b * f.adjoint() * skew_bracket_inverse(f, tol);
}

enum class CorollaryCase
{
    NullPreserving,
    RangePreserving,
    Neither,
};

inline std::string_view to_string(CorollaryCase c)
{
    switch (c) {
    case CorollaryCase::NullPreserving: return "NullPreserving";
    case CorollaryCase::RangePreserving: return "RangePreserving";
    case CorollaryCase::Neither: return "Neither";
    }
    return "Unknown";
}

struct CorollaryReport
{
    bool null_preserving = false;   ///< N(T) ⊆ N(δT)
    bool range_preserving = false;  ///< R(δT) ⊆ R(T)
    std::optional<Mat> null_formula;
    std::optional<Mat> range_formula;
    bool kernel_unchanged = true;  ///< N(T̄) = N(T), checked when null_preserving
    bool range_unchanged = true;   ///< R(T̄) = R(T), checked when range_preserving

    /// NullPreserving takes precedence when both containments hold.
    CorollaryCase classification() const
    {
        if (null_preserving)
            return CorollaryCase::NullPreserving;
        if (range_preserving)
            return CorollaryCase::RangePreserving;
        return CorollaryCase::Neither;
    }
};

inline bool null_preserving(const Perturbation& p, const Tolerances& tol = {})
{
    const Subspace kernel = null_space(p.t, tol);
    if (kernel.dim() == 0)
        return true;
    return spectral_norm(p.delta_t * kernel.basis()) <= tol.eq(spectral_norm(p.delta_t));
}

inline bool range_preserving(const Perturbation& p, const Tolerances& tol = {})
{
    const Projector onto_range = orthogonal_projector(range_space(p.t, tol));
    const Mat outside = p.delta_t - onto_range.matrix * p.delta_t;
    return spectral_norm(outside) <= tol.eq(spectral_norm(p.delta_t));
}

/// Specialized T̄† formulas for the two containment cases.
///
/// N(T) ⊆ N(δT) keeps the domain-side factor of the unperturbed T⁺T;
/// R(δT) ⊆ R(T) keeps the codomain-side factor of TT⁺.
inline CorollaryReport corollary_special_cases(const Perturbation& p, const Tolerances& tol = {})
{
    CorollaryReport rep;
    rep.null_preserving = null_preserving(p, tol);
    rep.range_preserving = range_preserving(p, tol);
    if (!rep.null_preserving && !rep.range_preserving)
        return rep;

    const Mat b = build_b(p, tol);
    const Mat& t_plus = p.g.t_plus;
    if (rep.null_preserving) {
        rep.kernel_unchanged = subspace_equal(null_space(p.t_bar, tol), null_space(p.t, tol), tol);
        const Mat st = t_plus * p.t;
        const Mat f = p.t_bar * b;
        rep.null_formula =
            skew_bracket_inverse(st, tol) * st.adjoint() * b * f.adjoint() * skew_bracket_inverse(f, tol);
    }
    if (rep.range_preserving) {
        rep.range_unchanged = subspace_equal(range_space(p.t_bar, tol), range_space(p.t, tol), tol);
        const Mat e = b * p.t_bar;
        const Mat ts = p.t * t_plus;
        rep.range_formula =
            skew_bracket_inverse(e, tol) * e.adjoint() * b * ts.adjoint() * skew_bracket_inverse(ts, tol);
    }
    return rep;
}

struct LipschitzCheck
{
    double bound = 0.0;       ///< (‖T̄†‖² + ‖T̄†‖‖T†‖ + ‖T†‖²)‖δT‖
    double difference = 0.0;  ///< ‖T̄† − T†‖
    bool holds = false;
};

inline LipschitzCheck lipschitz_check(const Perturbation& p, const Mat& t_bar_dagger, const Mat& t_dagger,
                                      const Tolerances& tol = {})
{
    const double nb = spectral_norm(t_bar_dagger);
    const double nt = spectral_norm(t_dagger);
    LipschitzCheck out;
    out.bound = (nb * nb + nb * nt + nt * nt) * spectral_norm(p.delta_t);
    out.difference = spectral_norm(t_bar_dagger - t_dagger);
    out.holds = out.difference <= out.bound + tol.eq_abs;
    return out;
}

inline LipschitzCheck lipschitz_check(const Perturbation& p, const Tolerances& tol = {})
{
    return lipschitz_check(p, perturbed_pinv(p, tol), pinv_svd(p.t, tol), tol);
}

/// Everything known about one perturbation, as surfaced by the CLI.
struct PerturbReport
{
    ConditionReport conditions;
    Mat b_matrix;
    std::optional<Mat> t_bar_dagger;  ///< closed form; absent when the conditions fail
    double k_t = 0.0;
    double k_t_bar = 0.0;     ///< ‖T̄†‖ (closed form when available, else SVD)
    double pinv_delta = 0.0;  ///< ‖T̄† − T†‖
    double oracle_delta = 0.0;  ///< ‖closed form − SVD pseudoinverse of T̄‖, 0 without closed form
    LipschitzCheck lipschitz;
    CorollaryReport corollary;
};

inline PerturbReport analyze_perturbation(const Perturbation& p, const Tolerances& tol = {})
{
    PerturbReport rep;
    rep.conditions = check_conditions(p, tol);
    rep.b_matrix = build_b(p, tol);
    const Mat t_dagger = pinv_svd(p.t, tol);
    const Mat oracle = pinv_svd(p.t_bar, tol);
    rep.k_t = spectral_norm(t_dagger);
    Mat t_bar_dagger = oracle;
    if (rep.conditions[Condition::C4_trivial_intersection]) {
        rep.t_bar_dagger = perturbed_pinv(p, tol);
        t_bar_dagger = *rep.t_bar_dagger;
        rep.oracle_delta = spectral_norm(t_bar_dagger - oracle);
    }
    rep.k_t_bar = spectral_norm(t_bar_dagger);
    rep.pinv_delta = spectral_norm(t_bar_dagger - t_dagger);
    rep.lipschitz = lipschitz_check(p, t_bar_dagger, t_dagger, tol);
    rep.corollary = corollary_special_cases(p, tol);
    return rep;
}

enum class SweepVerdict
{
    Continuous,
    Divergent,
    Mixed,
};

inline std::string_view to_string(SweepVerdict v)
{
    switch (v) {
    case SweepVerdict::Continuous: return "Continuous";
    case SweepVerdict::Divergent: return "Divergent";
    case SweepVerdict::Mixed: return "Mixed";
    }
    return "Unknown";
}

struct SweepRow
{
    double scale = 0.0;
    bool rank_equal = false;
    bool formula_used = false;  ///< T̄† from the closed form rather than the SVD
    double k_t_bar = 0.0;
    double k_delta = 0.0;  ///< |K_T̄ − K_T|
    double k_t_bar_times_scale = 0.0;
    double pinv_delta = 0.0;
    double lipschitz_bound = 0.0;
    bool lipschitz_holds = false;
};

struct SweepTable
{
    double k_t = 0.0;
    std::vector<SweepRow> rows;
    SweepVerdict verdict = SweepVerdict::Mixed;
    double max_k_delta_ratio = 0.0;  ///< max |K_T̄ − K_T| / s over rank-preserving rows
};

namespace detail
{

inline SweepRow sweep_row(const Mat& t, const Mat& direction, double scale, const GenInverse& g,
                          const Mat& t_dagger, double k_t, const Tolerances& tol)
{
    const Perturbation p = make_perturbation(t, scale * direction, g, tol);
    SweepRow row;
    row.scale = scale;
    row.rank_equal = rank_tol(p.t_bar, tol) == rank_tol(p.t, tol);
    Mat t_bar_dagger;
    if (trivial_intersection_condition(p, tol)) {
        t_bar_dagger = perturbed_pinv(p, tol);
        row.formula_used = true;
    } else {
        t_bar_dagger = pinv_svd(p.t_bar, tol);
    }
    row.k_t_bar = spectral_norm(t_bar_dagger);
    row.k_delta = std::abs(row.k_t_bar - k_t);
    row.k_t_bar_times_scale = row.k_t_bar * scale;
    const LipschitzCheck lip = lipschitz_check(p, t_bar_dagger, t_dagger, tol);
    row.pinv_delta = lip.difference;
    row.lipschitz_bound = lip.bound;
    row.lipschitz_holds = lip.holds;
    return row;
}

}  // namespace detail

/// Evaluates T + s·direction for each scale s (decreasing, positive).
///
/// Rows are computed independently, so `parallel` only changes wall time.
inline SweepTable continuity_sweep(const Mat& t, const Mat& direction, const std::vector<double>& scales,
                                   const GenInverse& g, const Tolerances& tol = {}, bool parallel = false)
{
    require(!scales.empty(), ErrorKind::ShapeMismatch, "sweep needs at least one scale");
    for (std::size_t i = 0; i < scales.size(); ++i) {
        require(scales[i] > 0.0, ErrorKind::ShapeMismatch, "sweep scales must be positive");
        require(i == 0 || scales[i] < scales[i - 1], ErrorKind::ShapeMismatch, "sweep scales must decrease");
    }
    // Gate at the largest scale covers the rest.
    (void)make_perturbation(t, scales.front() * direction, g, tol);

    SweepTable table;
    const Mat t_dagger = pinv_svd(t, tol);
    table.k_t = spectral_norm(t_dagger);
    table.rows.resize(scales.size());
    if (parallel) {
        std::vector<std::future<SweepRow>> pending;
        pending.reserve(scales.size());
        for (double s : scales)
            pending.push_back(std::async(std::launch::async, [&, s] {
                return detail::sweep_row(t, direction, s, g, t_dagger, table.k_t, tol);
            }));
        for (std::size_t i = 0; i < pending.size(); ++i)
            table.rows[i] = pending[i].get();
    } else {
        for (std::size_t i = 0; i < scales.size(); ++i)
            table.rows[i] = detail::sweep_row(t, direction, scales[i], g, t_dagger, table.k_t, tol);
    }

    const auto preserved = std::count_if(table.rows.begin(), table.rows.end(), [](const SweepRow& r) {
        return r.rank_equal;
    });
    if (preserved == static_cast<std::ptrdiff_t>(table.rows.size()))
        table.verdict = SweepVerdict::Continuous;
    else if (preserved == 0)
        table.verdict = SweepVerdict::Divergent;
    else
        table.verdict = SweepVerdict::Mixed;
    for (const SweepRow& r : table.rows)
        if (r.rank_equal)
            table.max_k_delta_ratio = std::max(table.max_k_delta_ratio, r.k_delta / r.scale);
    return table;
}

}  // namespace hustab
