#include <gtest/gtest.h>

#include <Eigen/Cholesky>

#include <cmath>
#include <sstream>
#include <vector>

#include "gramqubo/encoding.hpp"
#include "gramqubo/qubo.hpp"
#include "gramqubo/rng.hpp"
#include "gramqubo/surrogate.hpp"
#include "oracles.hpp"

using namespace gramqubo;

namespace {

Eigen::MatrixXd random_psd(Rng& rng, int n) {
    Eigen::MatrixXd a(n + 3, n);
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
    return a.transpose() * a / static_cast<double>(a.rows());
}

Eigen::VectorXd random_vector(Rng& rng, int n, double scale = 1.0) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = scale * rng.normal();
    return v;
}

QuboProblem random_problem(Rng& rng, std::size_t n) {
    QuboProblem p(n);
    for (std::size_t i = 0; i < n; ++i) {
        p.linear(static_cast<Eigen::Index>(i)) = rng.normal();
        for (std::size_t j = i; j < n; ++j) {
            const double v = rng.normal();
            p.quadratic(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
            p.quadratic(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
        }
    }
    return p;
}

oracle::Mat rows_of(const Eigen::MatrixXd& m) {
    oracle::Mat out = oracle::zeros(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
    return out;
}

oracle::Vec vec_of(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

BitVector random_bits(Rng& rng, std::size_t n) {
    BitVector b(n);
    for (auto& x : b) x = static_cast<std::uint8_t>(rng.below(2));
    return b;
}

}  // namespace

TEST(BuildClassQubo, SizeAndSymmetry) {
    Rng rng(1);
    const auto g = random_psd(rng, 4);
    const auto q = build_class_qubo(g, random_vector(rng, 4), precision_vector(3, 0.5));
    ASSERT_EQ(q.size(), 12U);
    EXPECT_TRUE(q.quadratic.isApprox(q.quadratic.transpose(), 0.0));
    EXPECT_EQ(nonzero_pairs(q), pair_count(12));
}

TEST(BuildClassQubo, EnergyTracksSurrogateUpToConstant) {
    Rng rng(2);
    const int params = 3;
    const auto g = random_psd(rng, params);
    const auto grad = random_vector(rng, params);
    const auto p = precision_vector(4, 0.5);
    const auto q = build_class_qubo(g, grad, p);
    for (int t = 0; t < 30; ++t) {
        const auto b = random_bits(rng, 12);
        const double lhs = evaluate(q, b) + 2.0 * q.offset;
        const double rhs = 2.0 * surrogate_value(g, grad, decode(b, p));
        EXPECT_NEAR(lhs, rhs, 1e-10);
    }
}

TEST(BuildClassQubo, EnergyMatchesOrderedPairOracle) {
    Rng rng(3);
    const auto q = build_class_qubo(random_psd(rng, 3), random_vector(rng, 3), precision_vector(3, 0.5));
    const auto q2 = rows_of(q.quadratic);
    const auto q1 = vec_of(q.linear);
    for (int t = 0; t < 20; ++t) {
        const auto b = random_bits(rng, 9);
        EXPECT_NEAR(evaluate(q, b), oracle::qubo_energy(q2, q1, b), 1e-12);
    }
}

TEST(BuildClassQubo, DiagonalModeDecouplesParameters) {
    Rng rng(4);
    const auto q = build_class_qubo(random_psd(rng, 3), random_vector(rng, 3), precision_vector(2, 0.5), true);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
            if (i / 2 != j / 2) {
                EXPECT_EQ(q.quadratic(i, j), 0.0);
            }
        }
    EXPECT_EQ(nonzero_pairs(q), 3U);
}

TEST(BuildClassQubo, MinimizerApproximatesContinuousStep) {
    // With fine precision the best encoded update is the representable point
    // nearest (in the G metric) to the Newton step -G^{-1} g.
    Eigen::MatrixXd g(2, 2);
    g << 2.0, 0.3, 0.3, 1.0;
    Eigen::VectorXd grad(2);
    grad << -0.4, 0.2;
    const auto p = precision_vector(8, 0.5);
    const auto best = brute_force_min(build_class_qubo(g, grad, p));
    const Eigen::VectorXd u = decode(best.bits, p);
    const Eigen::VectorXd newton = -g.ldlt().solve(grad);
    EXPECT_LT((u - newton).cwiseAbs().maxCoeff(), 4 * p.resolution());
}

TEST(BuildClassQubo, ShapeMismatchThrows) {
    EXPECT_THROW(build_class_qubo(Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Zero(2), precision_vector(2, 0.5)),
                 std::invalid_argument);
}

TEST(Normalize, MaxCoefficientBecomesOneAndScaleRecorded) {
    Rng rng(5);
    auto q = random_problem(rng, 6);
    q.linear *= 40.0;
    q.offset = 3.0;
    const auto n = normalize(q);
    const double s = std::max(q.quadratic.cwiseAbs().maxCoeff(), q.linear.cwiseAbs().maxCoeff());
    EXPECT_DOUBLE_EQ(n.scale, s);
    EXPECT_DOUBLE_EQ(std::max(n.quadratic.cwiseAbs().maxCoeff(), n.linear.cwiseAbs().maxCoeff()), 1.0);
    EXPECT_DOUBLE_EQ(n.offset, 3.0 / s);
    const auto nn = normalize(n);
    EXPECT_DOUBLE_EQ(nn.scale, s);
}

TEST(Normalize, ZeroProblemUnchanged) {
    const auto n = normalize(QuboProblem(4));
    EXPECT_EQ(n.scale, 1.0);
    EXPECT_EQ(n.linear.cwiseAbs().sum(), 0.0);
}

TEST(BruteForce, MatchesEnumerationOracle) {
    Rng rng(6);
    for (int t = 0; t < 20; ++t) {
        const std::size_t n = 2 + rng.below(9);
        const auto q = random_problem(rng, n);
        const auto expect = oracle::brute_force(rows_of(q.quadratic), vec_of(q.linear));
        const auto got = brute_force_min(q);
        EXPECT_NEAR(got.energy, expect.energy, 1e-9);
        bool found = false;
        for (const auto& b : expect.argmins) found = found || b == got.bits;
        EXPECT_TRUE(found);
    }
}

TEST(BruteForce, TiesResolveToLowestCode) {
    QuboProblem q(3);
    const auto best = brute_force_min(q);
    EXPECT_EQ(best.bits, (BitVector{0, 0, 0}));
    QuboProblem q2(2);
    q2.linear << -1.0, -1.0;
    q2.quadratic << 0.0, 0.5, 0.5, 0.0;
    // b=(1,0), (0,1) and (1,1) all reach -1.
    EXPECT_EQ(brute_force_min(q2).bits, (BitVector{1, 0}));
}

TEST(BruteForce, SizeLimit) { EXPECT_THROW(brute_force_min(QuboProblem(25)), std::invalid_argument); }

TEST(PairCount, TableValues) {
    EXPECT_EQ(pair_count(95), 4465U);
    EXPECT_EQ(pair_count(190), 17955U);
    EXPECT_EQ(pair_count(285), 40470U);
    EXPECT_EQ(pair_count(380), 72010U);
    EXPECT_EQ(pair_count(1), 0U);
    EXPECT_EQ(pair_count(0), 0U);
}

TEST(QuboText, SingleVariableExample) {
    std::istringstream in("1\n0 0 -1\n");
    const auto q = read_qubo_text(in);
    ASSERT_EQ(q.size(), 1U);
    EXPECT_EQ(evaluate(q, BitVector{1}), -1.0);
    EXPECT_EQ(brute_force_min(q).bits, BitVector{1});
}

TEST(QuboText, RoundTripPreservesEnergies) {
    Rng rng(7);
    auto q = random_problem(rng, 7);
    q.offset = -1.25;
    q = normalize(q);
    std::stringstream buf;
    write_qubo_text(buf, q);
    const auto back = read_qubo_text(buf);
    EXPECT_DOUBLE_EQ(back.offset, q.offset);
    EXPECT_DOUBLE_EQ(back.scale, q.scale);
    for (int t = 0; t < 30; ++t) {
        const auto b = random_bits(rng, 7);
        EXPECT_NEAR(evaluate(back, b), evaluate(q, b), 1e-12);
    }
}

TEST(QuboText, CommentsAndAccumulation) {
    std::istringstream in("# header\n\n3\n0 1 2\n0 1 2\n# mid\n2 2 -0.5\n");
    const auto q = read_qubo_text(in);
    EXPECT_DOUBLE_EQ(evaluate(q, BitVector{1, 1, 0}), 4.0);
    EXPECT_DOUBLE_EQ(evaluate(q, BitVector{0, 0, 1}), -0.5);
}

TEST(QuboText, ErrorsNameTheLine) {
    const std::vector<std::pair<std::string, std::size_t>> cases = {
        {"2\n0 0 1\n0 5 1\n", 3}, {"2\n1 0 1\n", 2}, {"x\n", 1}, {"2\n0 1\n", 2}, {"2\n0 1 nan\n", 2}, {"# only\n", 1}};
    for (const auto& [text, line] : cases) {
        std::istringstream in(text);
        try {
            read_qubo_text(in);
            ADD_FAILURE() << "no error for: " << text;
        } catch (const QuboParseError& e) {
            EXPECT_EQ(e.line(), line) << text;
            EXPECT_NE(std::string(e.what()).find("line " + std::to_string(line)), std::string::npos);
        }
    }
}
