#include "hustab/random.hpp"
#include "hustab/subspace.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace
{

using namespace hustab;
using hustab::test::diag;
using hustab::test::mat;
using hustab::test::vec;

const double r2 = 1.0 / std::sqrt(2.0);

Subspace span_of(std::initializer_list<std::initializer_list<Complex>> columns_as_rows)
{
    return Subspace::span(mat(columns_as_rows).transpose());
}

TEST(NullSpace, Examples)
{
    EXPECT_EQ(null_space(identity(3)).dim(), 0);
    const Subspace full = null_space(Mat::Zero(2, 3));
    EXPECT_EQ(full.dim(), 3);
    EXPECT_TRUE(subspace_equal(full, Subspace::full(3)));
    const Subspace e2 = null_space(mat({{1, 0}, {0, 0}}));
    EXPECT_TRUE(subspace_equal(e2, span_of({{0, 1}})));
}

TEST(RangeSpace, Examples)
{
    EXPECT_TRUE(subspace_equal(range_space(identity(3)), Subspace::full(3)));
    EXPECT_EQ(range_space(Mat::Zero(2, 2)).dim(), 0);
    const Subspace r = range_space(mat({{1, 1}, {1, 1}}));
    EXPECT_EQ(r.dim(), 1);
    EXPECT_TRUE(subspace_equal(r, span_of({{r2, r2}})));
}

TEST(OrthogonalComplement, Examples)
{
    EXPECT_TRUE(subspace_equal(orthogonal_complement(span_of({{1, 0}})), span_of({{0, 1}})));
    EXPECT_TRUE(subspace_equal(orthogonal_complement(Subspace::trivial(3)), Subspace::full(3)));
    const Subspace c = orthogonal_complement(span_of({{r2, r2}}));
    EXPECT_TRUE(subspace_equal(c, span_of({{r2, -r2}})));
    EXPECT_LE((c.basis().adjoint() * span_of({{r2, r2}}).basis()).norm(), 1e-15);
}

TEST(RandomComplement, Examples)
{
    EXPECT_EQ(random_complement(Subspace::full(4), 3).dim(), 0);
    EXPECT_TRUE(subspace_equal(random_complement(Subspace::trivial(3), 3), Subspace::full(3)));

    const Subspace e2 = span_of({{0, 1}});
    const Subspace c = random_complement(e2, 9);
    ASSERT_EQ(c.dim(), 1);
    // c = span{(1, α)} with α ≠ 0.
    const Vec b = c.basis().col(0);
    ASSERT_GT(std::abs(b(0)), 0.0);
    EXPECT_GT(std::abs(b(1) / b(0)), 1e-6);
    EXPECT_TRUE(are_complementary(e2, c));
}

TEST(RandomComplement, IsDeterministicPerSeed)
{
    const Subspace s = span_of({{1, 0, 0}, {0, 1, 1}});
    EXPECT_EQ(random_complement(s, 42).basis(), random_complement(s, 42).basis());
    EXPECT_FALSE(subspace_equal(random_complement(s, 42), random_complement(s, 43)));
}

TEST(IntersectionIsTrivial, Examples)
{
    EXPECT_TRUE(intersection_is_trivial(span_of({{1, 0}}), span_of({{0, 1}})));
    EXPECT_FALSE(intersection_is_trivial(span_of({{1, 0}}), span_of({{1, 0}})));
    EXPECT_TRUE(intersection_is_trivial(span_of({{1, 0}}), span_of({{r2, r2}})));
    EXPECT_TRUE(intersection_is_trivial(Subspace::trivial(2), Subspace::full(2)));
}

TEST(SubspaceEqual, Examples)
{
    EXPECT_TRUE(subspace_equal(span_of({{1, 0}}), span_of({{-1, 0}})));
    EXPECT_FALSE(subspace_equal(span_of({{1, 0}}), span_of({{0, 1}})));
    EXPECT_TRUE(subspace_equal(range_space(mat({{1, 1}, {1, 1}})), span_of({{r2, r2}})));
    EXPECT_FALSE(subspace_equal(span_of({{1, 0, 0}}), Subspace::full(3)));
    EXPECT_THROW((void)subspace_equal(Subspace::full(2), Subspace::full(3)), Error);
}

TEST(Contains, Examples)
{
    EXPECT_TRUE(contains(Subspace::full(3), vec({1, Complex(2, 3), -7})));
    EXPECT_TRUE(contains(Subspace::trivial(2), vec({0, 0})));
    EXPECT_FALSE(contains(Subspace::trivial(2), vec({1, 0})));
    EXPECT_TRUE(contains(span_of({{r2, r2}}), vec({2, 2})));
    EXPECT_FALSE(contains(span_of({{r2, r2}}), vec({2, 2.001})));
}

class SubspaceProperties : public ::testing::Test
{
protected:
    Rng rng{8675309};
    Tolerances tol;
};

TEST_F(SubspaceProperties, RankNullity)
{
    for (int k = 0; k < 40; ++k) {
        const Index m = 1 + rng.index(9), n = 1 + rng.index(9);
        const Mat t = random_matrix_with_rank(m, n, rng.index(std::min(m, n) + 1), rng);
        EXPECT_EQ(null_space(t, tol).dim() + rank_tol(t, tol), n);
        const Subspace kernel = null_space(t, tol);
        if (kernel.dim() > 0) {
            EXPECT_LE(spectral_norm(t * kernel.basis()), tol.eq(spectral_norm(t)));
            EXPECT_MAT_NEAR(kernel.basis().adjoint() * kernel.basis(), identity(kernel.dim()), 1e-12);
        }
    }
}

TEST_F(SubspaceProperties, DoubleComplementIsIdentity)
{
    for (int k = 0; k < 30; ++k) {
        const Index n = 1 + rng.index(8);
        const Subspace s = Subspace::span(random_gaussian(n, rng.index(n + 1), rng));
        EXPECT_TRUE(subspace_equal(orthogonal_complement(orthogonal_complement(s)), s, tol));
    }
}

TEST_F(SubspaceProperties, RandomComplementIsObliqueComplement)
{
    int oblique = 0;
    for (int k = 0; k < 40; ++k) {
        const Index n = 2 + rng.index(8);
        const Subspace s = Subspace::span(random_gaussian(n, 1 + rng.index(n - 1), rng));
        const Subspace c = random_complement(s, rng.split(k).seed(), tol);
        EXPECT_EQ(s.dim() + c.dim(), n);
        EXPECT_TRUE(intersection_is_trivial(s, c, tol));
        if ((s.basis().adjoint() * c.basis()).norm() > 1e-3)
            ++oblique;
    }
    EXPECT_EQ(oblique, 40);
}

TEST_F(SubspaceProperties, RangeContainsImages)
{
    for (int k = 0; k < 30; ++k) {
        const Index m = 1 + rng.index(9), n = 1 + rng.index(9);
        const Mat t = random_matrix_with_rank(m, n, rng.index(std::min(m, n) + 1), rng);
        EXPECT_TRUE(contains(range_space(t, tol), t * random_vector(n, rng), tol));
    }
}

}  // namespace
