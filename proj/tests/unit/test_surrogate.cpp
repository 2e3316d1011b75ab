#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "gramqubo/rng.hpp"
#include "gramqubo/surrogate.hpp"
#include "oracles.hpp"

using namespace gramqubo;

namespace {

FeatureMatrix random_features(Rng& rng, int n, int d) {
    FeatureMatrix fm;
    fm.values = Matrix(n, d + 1);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) fm.values(i, j) = std::abs(rng.normal());
        fm.values(i, d) = 1.0;
    }
    return fm;
}

Matrix random_matrix(Rng& rng, int r, int c, double scale) {
    Matrix m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = scale * rng.normal();
    return m;
}

oracle::Mat to_rows(const Matrix& m) {
    oracle::Mat out = oracle::zeros(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
    return out;
}

}  // namespace

TEST(Gram, MatchesLoopOracleAndIsSymmetric) {
    Rng rng(1);
    const auto fm = random_features(rng, 40, 6);
    const Gram g = gram(fm, 0.25);
    const auto expect = oracle::gram(to_rows(fm.values));
    for (int a = 0; a < 7; ++a)
        for (int b = 0; b < 7; ++b) {
            EXPECT_NEAR(g.g(a, b), expect[a][b], 1e-12);
            EXPECT_EQ(g.g(a, b), g.g(b, a));
        }
}

TEST(Gram, RegularizationSkipsBias) {
    Rng rng(2);
    const auto fm = random_features(rng, 10, 3);
    const Gram g = gram(fm, 0.5);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            const double extra = (a == b && a < 3) ? 0.5 : 0.0;
            EXPECT_DOUBLE_EQ(g.g_lambda(a, b), g.g(a, b) + extra);
        }
    EXPECT_DOUBLE_EQ(g.g(3, 3), 1.0);
}

TEST(Gram, RejectsEmptyInputAndNegativeLambda) {
    FeatureMatrix empty;
    empty.values = Matrix(0, 3);
    EXPECT_THROW(gram(empty, 0.1), std::invalid_argument);
    Rng rng(3);
    EXPECT_THROW(gram(random_features(rng, 4, 2), -1.0), std::invalid_argument);
}

TEST(Softmax, RowsSumToOneAndIgnoreShift) {
    Rng rng(4);
    const Matrix z = random_matrix(rng, 20, 5, 3.0);
    const Matrix p = softmax_rows(z);
    const Matrix shifted = softmax_rows((z.array() + 1000.0).matrix());
    for (int i = 0; i < 20; ++i) {
        EXPECT_NEAR(p.row(i).sum(), 1.0, 1e-12);
        for (int c = 0; c < 5; ++c) {
            EXPECT_GT(p(i, c), 0.0);
            EXPECT_NEAR(p(i, c), shifted(i, c), 1e-12);
        }
    }
}

TEST(Softmax, ExtremeLogitsStayFinite) {
    Matrix z(1, 3);
    z << 800.0, -800.0, 0.0;
    const Matrix p = softmax_rows(z);
    EXPECT_DOUBLE_EQ(p(0, 0), 1.0);
    EXPECT_TRUE(std::isfinite(p(0, 1)));
}

TEST(Softmax, NonFiniteLogitsThrow) {
    Matrix z(1, 2);
    z << std::numeric_limits<double>::quiet_NaN(), 0.0;
    EXPECT_THROW(softmax_rows(z), std::domain_error);
    z << std::numeric_limits<double>::infinity(), 0.0;
    EXPECT_THROW(softmax_rows(z), std::domain_error);
}

TEST(Residual, RowsOfAllResidualsSumToZero) {
    Rng rng(5);
    const Matrix p = softmax_rows(random_matrix(rng, 8, 4, 1.0));
    const std::vector<Label> y{0, 1, 2, 3, 0, 1, 2, 3};
    const Matrix yh = one_hot(y, 4);
    Vector total = Vector::Zero(8);
    for (std::size_t c = 0; c < 4; ++c) total += class_residual(p, yh, c);
    EXPECT_LT(total.cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_THROW(one_hot(std::vector<Label>{4}, 4), std::invalid_argument);
}

TEST(CrossEntropy, MatchesLogSumExpOracle) {
    Rng rng(6);
    const auto fm = random_features(rng, 30, 4);
    const Matrix w = random_matrix(rng, 5, 3, 0.7);
    std::vector<Label> y;
    std::vector<std::size_t> ys;
    for (int i = 0; i < 30; ++i) {
        y.push_back(static_cast<Label>(i % 3));
        ys.push_back(static_cast<std::size_t>(i % 3));
    }
    const double got = mean_cross_entropy(softmax_probs(fm.values, w), one_hot(y, 3), w, 0.01);
    const double expect = oracle::cross_entropy(to_rows(fm.values), ys, to_rows(w), 0.01);
    EXPECT_NEAR(got, expect, 1e-12);
}

TEST(CrossEntropy, UniformPredictionGivesLogC) {
    Rng rng(7);
    const auto fm = random_features(rng, 12, 3);
    const Matrix w = Matrix::Zero(4, 10);
    std::vector<Label> y(12, 3);
    EXPECT_NEAR(mean_cross_entropy(softmax_probs(fm.values, w), one_hot(y, 10), w, 0.1), std::log(10.0), 1e-12);
}

TEST(ClassGradient, SmallCaseAgainstCentralDifferences) {
    Rng rng(8);
    const auto fm = random_features(rng, 25, 3);
    Matrix w = random_matrix(rng, 4, 3, 0.5);
    std::vector<Label> y;
    for (int i = 0; i < 25; ++i) y.push_back(static_cast<Label>((i * 5) % 3));
    const Matrix yh = one_hot(y, 3);
    const double lambda = 0.05;
    const Matrix pi = softmax_probs(fm.values, w);
    for (std::size_t c = 0; c < 3; ++c) {
        const Vector g = class_gradient(fm.values, class_residual(pi, yh, c), w.col(static_cast<Eigen::Index>(c)), lambda);
        for (int a = 0; a < 4; ++a) {
            const double h = 1e-5;
            Matrix wp = w, wm = w;
            wp(a, static_cast<Eigen::Index>(c)) += h;
            wm(a, static_cast<Eigen::Index>(c)) -= h;
            const double fd = (mean_cross_entropy(softmax_probs(fm.values, wp), yh, wp, lambda) -
                               mean_cross_entropy(softmax_probs(fm.values, wm), yh, wm, lambda)) /
                              (2 * h);
            EXPECT_NEAR(g(a), fd, 1e-8);
        }
    }
}

TEST(SurrogateValue, HandComputed) {
    Matrix g(2, 2);
    g << 2.0, 1.0, 1.0, 4.0;
    Vector grad(2), u(2);
    grad << -1.0, 0.5;
    u << 1.0, -2.0;
    // 0.5 * (2 - 4 + 16) + (-1 - 1) = 7 - 2
    EXPECT_DOUBLE_EQ(surrogate_value(g, grad, u), 5.0);
}
