#include "hustab/instances.hpp"
#include "hustab/perturb.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace
{

using namespace hustab;
using hustab::test::diag;
using hustab::test::mat;

Perturbation diag_case(const Mat& delta)
{
    const Mat t = diag({1, 0});
    return make_perturbation(t, delta, geninv_orthogonal(t));
}

TEST(MakePerturbation, Examples)
{
    Rng rng(4);
    const Mat t = random_matrix_with_rank(4, 3, 2, rng);
    const Perturbation zero = make_perturbation(t, Mat::Zero(4, 3), geninv_random(t, 5));
    EXPECT_EQ(zero.a, 0.0);
    EXPECT_EQ(zero.gate, 0.0);
    EXPECT_EQ(zero.t_bar, t);

    const Perturbation half = diag_case(diag({0.5, 0}));
    EXPECT_NEAR(half.a, 0.5, 1e-15);
    EXPECT_EQ(half.b, 0.0);
    EXPECT_NEAR(half.gate, 0.5, 1e-15);
    EXPECT_FALSE(half.bound_sampled_only);

    try {
        (void)diag_case(diag({2, 0}));
        FAIL() << "expected GateFailed";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::GateFailed);
    }
}

TEST(MakePerturbation, SampledTBound)
{
    Rng rng(6);
    const Mat t = random_matrix_with_rank(5, 4, 2, rng);
    const GenInverse g = geninv_orthogonal(t);
    const Mat delta = 0.1 * random_gaussian(5, 4, rng) / spectral_norm(g.t_plus);
    const double a = spectral_norm(delta);

    const Perturbation p = make_perturbation(t, delta, g, TBound{a, 0.0}, 1);
    EXPECT_TRUE(p.bound_sampled_only);
    EXPECT_NEAR(p.gate, a * spectral_norm(g.t_plus), 1e-14);

    // b > 0 enters the gate through ‖TT⁺‖.
    const Perturbation pb = make_perturbation(t, delta, g, TBound{a, 0.2}, 1);
    EXPECT_NEAR(pb.gate, a * spectral_norm(g.t_plus) + 0.2 * spectral_norm(t * g.t_plus), 1e-14);

    try {
        (void)make_perturbation(t, delta, g, TBound{0.1 * a, 0.0}, 1);
        FAIL() << "expected BoundViolated";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::BoundViolated);
    }
}

TEST(BuildB, Examples)
{
    Rng rng(8);
    const Mat t = random_matrix_with_rank(4, 5, 2, rng);
    const GenInverse g = geninv_random(t, 3);
    EXPECT_MAT_NEAR(build_b(make_perturbation(t, Mat::Zero(4, 5), g)), g.t_plus, 1e-15);

    for (double s : {0.1, 0.5, 0.9})
        EXPECT_MAT_NEAR(build_b(diag_case(diag({s, 0}))), diag({1.0 / (1.0 + s), 0}), 1e-15);

    const double eps = 0.3;
    const Perturbation scalar = make_perturbation(identity(3), eps * identity(3), geninv_orthogonal(identity(3)));
    EXPECT_MAT_NEAR(build_b(scalar), identity(3) / (1.0 + eps), 1e-15);
}

TEST(CheckConditions, ZeroPerturbation)
{
    Rng rng(9);
    const Mat t = random_matrix_with_rank(5, 4, 2, rng);
    const ConditionReport rep = check_conditions(make_perturbation(t, Mat::Zero(5, 4), geninv_random(t, 7)));
    for (Condition c : all_conditions)
        EXPECT_TRUE(rep[c]) << to_string(c);
    EXPECT_TRUE(rep.equivalence_held);
    EXPECT_TRUE(rep.rank_criteria_held);
}

TEST(CheckConditions, ScalarFamilies)
{
    // R(T̄) = span{e1} misses N(T⁺) = span{e2}.
    const ConditionReport keep = check_conditions(diag_case(diag({0.3, 0})));
    EXPECT_TRUE(keep[Condition::RankEqual]);
    EXPECT_TRUE(keep[Condition::C4_trivial_intersection]);
    EXPECT_TRUE(keep.equivalence_held);

    // R(T̄) = C² meets N(T⁺) = span{e2}.
    const ConditionReport jump = check_conditions(diag_case(diag({0, 0.3})));
    for (Condition c : all_conditions)
        EXPECT_FALSE(jump[c]) << to_string(c);
    EXPECT_TRUE(jump.equivalence_held);
    EXPECT_TRUE(jump.rank_criteria_held);
}

TEST(PerturbedPinv, Examples)
{
    Rng rng(10);
    const Mat t = random_matrix_with_rank(4, 5, 2, rng);
    const GenInverse g = geninv_random(t, 11);
    EXPECT_MAT_NEAR(perturbed_pinv(make_perturbation(t, Mat::Zero(4, 5), g)), pinv_from_geninv_23(g).t_dagger,
                    1e-12);

    for (double s : {0.1, 0.5, 0.9})
        EXPECT_MAT_NEAR(perturbed_pinv(diag_case(diag({s, 0}))), diag({1.0 / (1.0 + s), 0}), 1e-14);

    const Mat t64 = random_matrix_with_rank(6, 4, 2, rng);
    const GenInverse g64 = geninv_orthogonal(t64);
    const Mat delta = random_perturbation(g64, PerturbationKind::RangePreserving, 0.4, rng);
    const Perturbation p = make_perturbation(t64, delta, g64);
    EXPECT_LT(spectral_norm(delta) * spectral_norm(pinv_svd(t64)), 0.5);
    EXPECT_EQ(rank_tol(p.t_bar), 2);
    EXPECT_MAT_NEAR(perturbed_pinv(p), pinv_svd(p.t_bar), 1e-10);
}

TEST(PerturbedPinv, RefusesWhenConditionsFail)
{
    try {
        (void)perturbed_pinv(diag_case(diag({0, 0.5})));
        FAIL() << "expected ConditionFailed";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ConditionFailed);
    }
}

TEST(CorollarySpecialCases, Examples)
{
    Rng rng(12);
    const Mat t = random_matrix_with_rank(4, 4, 2, rng);
    const Perturbation none = make_perturbation(t, Mat::Zero(4, 4), geninv_random(t, 13));
    const CorollaryReport both = corollary_special_cases(none);
    EXPECT_TRUE(both.null_preserving);
    EXPECT_TRUE(both.range_preserving);
    ASSERT_TRUE(both.null_formula && both.range_formula);
    EXPECT_MAT_NEAR(*both.null_formula, perturbed_pinv(none), 1e-12);
    EXPECT_MAT_NEAR(*both.range_formula, perturbed_pinv(none), 1e-12);

    // N(δT) = span{e2} ⊇ N(T); R(δT) = span{e2} ⊄ R(T).
    const CorollaryReport null_case = corollary_special_cases(diag_case(mat({{0, 0}, {0.3, 0}})));
    EXPECT_EQ(null_case.classification(), CorollaryCase::NullPreserving);
    EXPECT_FALSE(null_case.range_preserving);
    EXPECT_TRUE(null_case.kernel_unchanged);

    // R(δT) = span{e1} = R(T); δT e2 ≠ 0.
    const CorollaryReport range_case = corollary_special_cases(diag_case(mat({{0.3, 0.3}, {0, 0}})));
    EXPECT_EQ(range_case.classification(), CorollaryCase::RangePreserving);
    EXPECT_FALSE(range_case.null_preserving);
    EXPECT_TRUE(range_case.range_unchanged);

    EXPECT_EQ(corollary_special_cases(diag_case(diag({0, 0.3}))).classification(), CorollaryCase::Neither);
}

TEST(LipschitzCheck, Examples)
{
    Rng rng(14);
    const Mat t = random_matrix_with_rank(3, 5, 2, rng);
    const LipschitzCheck zero = lipschitz_check(make_perturbation(t, Mat::Zero(3, 5), geninv_random(t, 1)));
    EXPECT_EQ(zero.bound, 0.0);
    EXPECT_LE(zero.difference, 1e-12);
    EXPECT_TRUE(zero.holds);

    const double eps = 0.25;
    const LipschitzCheck scalar =
        lipschitz_check(make_perturbation(identity(2), eps * identity(2), geninv_orthogonal(identity(2))));
    const double inv = 1.0 / (1.0 + eps);
    EXPECT_NEAR(scalar.difference, eps / (1.0 + eps), 1e-15);
    EXPECT_NEAR(scalar.bound, (inv * inv + inv + 1.0) * eps, 1e-15);
    EXPECT_TRUE(scalar.holds);
}

TEST(ContinuitySweep, RankPreservingDirection)
{
    const Mat t = diag({1, 0});
    const SweepTable table = continuity_sweep(t, diag({1, 0}), {0.5, 0.25, 0.125}, geninv_orthogonal(t));
    EXPECT_EQ(table.verdict, SweepVerdict::Continuous);
    EXPECT_NEAR(table.k_t, 1.0, 1e-15);
    for (const SweepRow& row : table.rows) {
        EXPECT_TRUE(row.rank_equal);
        EXPECT_TRUE(row.formula_used);
        EXPECT_NEAR(row.k_t_bar, 1.0 / (1.0 + row.scale), 1e-14);
        EXPECT_TRUE(row.lipschitz_holds);
    }
}

TEST(ContinuitySweep, RankJumpingDirection)
{
    const Mat t = diag({1, 0});
    const SweepTable table = continuity_sweep(t, diag({0, 1}), {0.5, 0.25, 0.125}, geninv_orthogonal(t));
    EXPECT_EQ(table.verdict, SweepVerdict::Divergent);
    for (const SweepRow& row : table.rows) {
        EXPECT_FALSE(row.rank_equal);
        EXPECT_FALSE(row.formula_used);
        EXPECT_NEAR(row.k_t_bar, 1.0 / row.scale, 1e-13);
        EXPECT_NEAR(row.k_t_bar_times_scale, 1.0, 1e-14);
    }
}

TEST(ContinuitySweep, ZeroDirectionAndValidation)
{
    const Mat t = diag({2, 0});
    const GenInverse g = geninv_orthogonal(t);
    const SweepTable table = continuity_sweep(t, Mat::Zero(2, 2), {0.5, 0.25}, g);
    EXPECT_EQ(table.verdict, SweepVerdict::Continuous);
    for (const SweepRow& row : table.rows) {
        EXPECT_NEAR(row.k_t_bar, table.k_t, 1e-15);
        EXPECT_LE(row.pinv_delta, 1e-15);
    }
    EXPECT_THROW((void)continuity_sweep(t, diag({1, 0}), {0.25, 0.5}, g), Error);
    EXPECT_THROW((void)continuity_sweep(t, diag({1, 0}), {}, g), Error);
    EXPECT_THROW((void)continuity_sweep(t, diag({1, 0}), {3.0}, g), Error);
}

TEST(ContinuitySweep, ParallelMatchesSequentialBitwise)
{
    Rng rng(15);
    const Mat t = random_matrix_with_rank(5, 4, 2, rng);
    const GenInverse g = random_bounded_geninv(t, rng);
    const Mat dir = random_perturbation(g, PerturbationKind::RankJumping, 0.5, rng);
    const std::vector<double> scales{1.0, 0.5, 0.25, 0.125, 0.0625};
    const SweepTable seq = continuity_sweep(t, dir, scales, g, {}, false);
    const SweepTable par = continuity_sweep(t, dir, scales, g, {}, true);
    ASSERT_EQ(seq.rows.size(), par.rows.size());
    for (std::size_t i = 0; i < seq.rows.size(); ++i) {
        EXPECT_EQ(seq.rows[i].k_t_bar, par.rows[i].k_t_bar);
        EXPECT_EQ(seq.rows[i].pinv_delta, par.rows[i].pinv_delta);
        EXPECT_EQ(seq.rows[i].lipschitz_bound, par.rows[i].lipschitz_bound);
    }
}

class PerturbProperties : public ::testing::Test
{
protected:
    /// Operator with non-trivial kernel and co-range, so rank jumps are possible.
    Mat deficient_operator()
    {
        const Index m = 2 + rng.index(8);
        const Index n = 2 + rng.index(8);
        return random_matrix_with_rank(m, n, 1 + rng.index(std::min(m, n) - 1), rng);
    }

    Rng rng{271828};
    Tolerances tol;
};

TEST_F(PerturbProperties, EquivalentConditionsAgree)
{
    for (int k = 0; k < 60; ++k) {
        const Mat t = deficient_operator();
        const GenInverse g = random_bounded_geninv(t, rng, tol);
        const auto kind = static_cast<PerturbationKind>(k % 3);
        const Perturbation p = make_perturbation(t, random_perturbation(g, kind, rng.uniform(0.05, 0.6), rng), g, tol);
        const ConditionReport rep = check_conditions(p, tol);
        EXPECT_TRUE(rep.equivalence_held) << "instance " << k;
        EXPECT_TRUE(rep.rank_criteria_held) << "instance " << k;
        EXPECT_EQ(rep[Condition::C4_trivial_intersection], kind != PerturbationKind::RankJumping);
    }
}

TEST_F(PerturbProperties, BAndClosedFormOnPreservingInstances)
{
    for (int k = 0; k < 40; ++k) {
        const Mat t = deficient_operator();
        const GenInverse g = random_bounded_geninv(t, rng, tol);
        const auto kind = k % 2 ? PerturbationKind::RangePreserving : PerturbationKind::NullPreserving;
        const Perturbation p = make_perturbation(t, random_perturbation(g, kind, rng.uniform(0.05, 0.6), rng), g, tol);
        const Mat b = build_b(p, tol);
        EXPECT_LE(spectral_norm(b * p.t_bar * b - b), 1e-8);
        EXPECT_TRUE(subspace_equal(range_space(b, tol), range_space(g.t_plus, tol), tol));
        EXPECT_TRUE(subspace_equal(null_space(b, tol), null_space(g.t_plus, tol), tol));
        EXPECT_TRUE(check_axioms(p.t_bar, b, tol).ok);

        const Mat closed = perturbed_pinv(p, tol);
        EXPECT_LE(distance(closed, pinv_svd(p.t_bar, tol)), 1e-7);
        EXPECT_TRUE(lipschitz_check(p, tol).holds);

        const CorollaryReport cor = corollary_special_cases(p, tol);
        if (kind == PerturbationKind::NullPreserving) {
            ASSERT_TRUE(cor.null_formula);
            EXPECT_TRUE(cor.kernel_unchanged);
            EXPECT_LE(distance(*cor.null_formula, closed), 1e-7);
        } else {
            ASSERT_TRUE(cor.range_formula);
            EXPECT_TRUE(cor.range_unchanged);
            EXPECT_LE(distance(*cor.range_formula, closed), 1e-7);
        }
    }
}

TEST_F(PerturbProperties, AnalyzeReportIsConsistent)
{
    for (int k = 0; k < 20; ++k) {
        const Mat t = deficient_operator();
        const GenInverse g = random_bounded_geninv(t, rng, tol);
        const auto kind = static_cast<PerturbationKind>(k % 3);
        const Perturbation p = make_perturbation(t, random_perturbation(g, kind, 0.3, rng), g, tol);
        const PerturbReport rep = analyze_perturbation(p, tol);
        EXPECT_EQ(rep.t_bar_dagger.has_value(), kind != PerturbationKind::RankJumping);
        EXPECT_LE(rep.oracle_delta, 1e-7);
        EXPECT_TRUE(rep.lipschitz.holds);
        EXPECT_NEAR(rep.k_t_bar, spectral_norm(pinv_svd(p.t_bar, tol)), 1e-7);
    }
}

}  // namespace
