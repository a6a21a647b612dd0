#pragma once

#include "hustab/numcore.hpp"

#include <gtest/gtest.h>

#include <initializer_list>

namespace hustab::test
{

inline Mat mat(std::initializer_list<std::initializer_list<Complex>> rows)
{
    const auto m = static_cast<Index>(rows.size());
    const auto n = static_cast<Index>(rows.begin()->size());
    Mat a(m, n);
    Index i = 0;
    for (const auto& row : rows) {
        Index j = 0;
        for (const Complex& v : row)
            a(i, j++) = v;
        ++i;
    }
    return a;
}

inline Vec vec(std::initializer_list<Complex> entries)
{
    Vec v(static_cast<Index>(entries.size()));
    Index i = 0;
    for (const Complex& e : entries)
        v(i++) = e;
    return v;
}

inline Mat diag(std::initializer_list<double> entries)
{
    const auto n = static_cast<Index>(entries.size());
    Mat a = Mat::Zero(n, n);
    Index i = 0;
    for (double e : entries) {
        a(i, i) = e;
        ++i;
    }
    return a;
}

inline ::testing::AssertionResult mat_near(const Mat& actual, const Mat& expected, double tol)
{
    if (actual.rows() != expected.rows() || actual.cols() != expected.cols())
        return ::testing::AssertionFailure()
               << "shape " << actual.rows() << "x" << actual.cols() << " vs " << expected.rows() << "x"
               << expected.cols();
    const double err = actual.rows() * actual.cols() == 0 ? 0.0 : (actual - expected).cwiseAbs().maxCoeff();
    if (err <= tol)
        return ::testing::AssertionSuccess();
    return ::testing::AssertionFailure() << "max entry error " << err << " > " << tol << "\nactual:\n"
                                         << actual << "\nexpected:\n"
                                         << expected;
}

}  // namespace hustab::test

#define EXPECT_MAT_NEAR(actual, expected, tol) EXPECT_TRUE(::hustab::test::mat_near((actual), (expected), (tol)))
