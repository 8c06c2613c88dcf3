#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "oblique/errors.hpp"
#include "oblique/mode_matrix.hpp"

using oblique::ModeMatrix;

TEST(ModeMatrix, InitializerListIsRowMajor) {
    ModeMatrix m{{1, 2, 3}, {4, 5, 6}};
    EXPECT_EQ(m.rows(), 2u);
    EXPECT_EQ(m.cols(), 3u);
    EXPECT_EQ(m(1, 0), 4.0);
    EXPECT_EQ(m.values()[2], 3.0);
}

TEST(ModeMatrix, RaggedInitializerThrows) {
    EXPECT_THROW((ModeMatrix{{1, 2}, {3}}), oblique::UsageError);
}

TEST(ModeMatrix, FromRowMajorChecksSize) {
    const double v[] = {1, 2, 3};
    EXPECT_THROW(ModeMatrix::from_row_major(2, 2, v), oblique::UsageError);
    EXPECT_EQ(ModeMatrix::from_row_major(1, 3, v)(0, 2), 3.0);
}

TEST(ModeMatrix, Statistics) {
    ModeMatrix m{{-3, 1}, {2, 0.5}};
    EXPECT_EQ(m.max_abs(), 3.0);
    EXPECT_EQ(m.min_value(), -3.0);
    EXPECT_EQ(m.max_value(), 2.0);
    m += 1.0;
    EXPECT_EQ(m(0, 0), -2.0);
    EXPECT_TRUE(m.all_finite());
    m(1, 1) = std::numeric_limits<double>::infinity();
    EXPECT_FALSE(m.all_finite());
}

TEST(ModeMatrix, MaxAbsDiff) {
    ModeMatrix a{{0, 1}}, b{{0.5, -1}};
    EXPECT_EQ(oblique::max_abs_diff(a, b), 2.0);
    EXPECT_THROW(oblique::max_abs_diff(a, ModeMatrix(2, 1)), oblique::UsageError);
}
