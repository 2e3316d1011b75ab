// Invariant checks over randomized instances. The acceptance binary runs
// this executable as a whole and times it.

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <set>

#include "gramqubo/annealer.hpp"
#include "gramqubo/encoding.hpp"
#include "gramqubo/experiment.hpp"
#include "gramqubo/metrics.hpp"
#include "gramqubo/qubo.hpp"
#include "gramqubo/rng.hpp"
#include "gramqubo/surrogate.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace gramqubo;

namespace {

FeatureMatrix random_features(Rng& rng, int n, int d) {
    FeatureMatrix fm;
    fm.values = Matrix(n, d + 1);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) fm.values(i, j) = std::max(0.0, rng.normal() + 0.3);
        fm.values(i, d) = 1.0;
    }
    return fm;
}

QuboProblem dense_problem(Rng& rng, std::size_t n) {
    QuboProblem p(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        p.linear(ii) = rng.normal();
        for (std::size_t j = i; j < n; ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            p.quadratic(ii, jj) = p.quadratic(jj, ii) = rng.normal();
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

TEST(Property, GramIsPositiveSemidefinite) {
    Rng rng(101);
    for (int t = 0; t < 100; ++t) {
        const int n = 3 + static_cast<int>(rng.below(60));
        const int d = 1 + static_cast<int>(rng.below(24));
        const Gram g = gram(random_features(rng, n, d), 0.001);
        const Eigen::SelfAdjointEigenSolver<Matrix> eig(g.g);
        const double tol = 1e-12 * std::max(1.0, g.g.trace());
        EXPECT_GE(eig.eigenvalues().minCoeff(), -tol) << "instance " << t;
        for (int k = 0; k < 10; ++k) {
            Vector v(d + 1);
            for (int j = 0; j <= d; ++j) v(j) = rng.normal();
            EXPECT_GE(v.dot(g.g_lambda * v), -tol);
        }
    }
}

TEST(Property, EncodingBoundsSymmetryAndResolution) {
    for (std::size_t k = 1; k <= 24; ++k) {
        const auto p = precision_vector(k, 0.5);
        double sum = 0.0;
        for (double v : p.values()) sum += v;
        EXPECT_NEAR(sum, 0.5, 1e-15);
        EXPECT_NEAR(p.resolution(), 0.5 / (std::ldexp(1.0, static_cast<int>(k)) - 1.0), 1e-18);
    }
    EXPECT_NEAR(precision_vector(5, 0.5).resolution(), 0.016129032258, 1e-12);
    EXPECT_NEAR(precision_vector(20, 0.5).resolution(), 4.768e-7, 1e-10);

    Rng rng(102);
    for (std::size_t k : {5U, 10U, 15U, 20U}) {
        const auto p = precision_vector(k, 0.5);
        for (int t = 0; t < 200; ++t) {
            BitVector b = random_bits(rng, 4 * k), nb(b.size());
            for (std::size_t i = 0; i < b.size(); ++i) nb[i] = 1 - b[i];
            const auto u = decode(b, p);
            const auto v = decode(nb, p);
            for (int j = 0; j < 4; ++j) {
                EXPECT_LE(std::abs(u(j)), 0.5 + 1e-15);
                EXPECT_GE(std::abs(u(j)), p.resolution() * (1 - 1e-9));
                EXPECT_NEAR(u(j), -v(j), 1e-15);
            }
        }
    }
}

TEST(Property, QuboEnergyIsAffineInSurrogate) {
    Rng rng(103);
    for (int inst = 0; inst < 20; ++inst) {
        const int d = 1 + static_cast<int>(rng.below(4));
        const std::size_t k = 2 + rng.below(5);
        const Gram g = gram(random_features(rng, 30, d), 0.001);
        Vector grad(d + 1);
        for (int j = 0; j <= d; ++j) grad(j) = 0.3 * rng.normal();
        const auto p = precision_vector(k, 0.5);
        const QuboProblem q = build_class_qubo(g.g_lambda, grad, p);
        double first = 0.0;
        for (int t = 0; t < 100; ++t) {
            const auto b = random_bits(rng, q.size());
            const double gap = oracle::qubo_energy(rows_of(q.quadratic), vec_of(q.linear), b) -
                               2.0 * surrogate_value(g.g_lambda, grad, decode(b, p));
            if (t == 0) first = gap;
            EXPECT_NEAR(gap, first, 1e-8) << "instance " << inst;
        }
        EXPECT_NEAR(first, -2.0 * q.offset, 1e-8);
    }
}

TEST(Property, NormalizationKeepsEveryMinimizer) {
    Rng rng(104);
    for (std::size_t n = 1; n <= 12; ++n) {
        for (int rep = 0; rep < 3; ++rep) {
            QuboProblem q = dense_problem(rng, n);
            q.linear *= 1.0 + 50.0 * rng.uniform();
            const QuboProblem s = normalize(q);
            const auto a = oracle::brute_force(rows_of(q.quadratic), vec_of(q.linear), 1e-9 * s.scale);
            const auto b = oracle::brute_force(rows_of(s.quadratic), vec_of(s.linear), 1e-9);
            EXPECT_EQ(a.argmins, b.argmins) << "n=" << n;
            EXPECT_NEAR(a.energy / s.scale, b.energy, 1e-9);
        }
    }
}

TEST(Property, AnnealerFindsExactOptimaOnSmallDenseProblems) {
    Rng rng(105);
    int hits = 0;
    for (int t = 0; t < 100; ++t) {
        const QuboProblem q = normalize(dense_problem(rng, 16));
        const auto exact = oracle::brute_force(rows_of(q.quadratic), vec_of(q.linear));
        AnnealConfig cfg;
        cfg.seed = mix_seed(2024, static_cast<std::uint64_t>(t));
        const Sample s = anneal(q, cfg);
        if (s.energy <= exact.energy + 1e-9) ++hits;
    }
    RecordProperty("exact_hits", hits);
    EXPECT_GE(hits, 95);
}

TEST(Property, GradientMatchesCentralDifferences) {
    Rng rng(106);
    for (int inst = 0; inst < 10; ++inst) {
        const int n = 40, d = 3 + static_cast<int>(rng.below(5));
        const std::size_t c_count = 2 + rng.below(4);
        const auto fm = random_features(rng, n, d);
        Matrix w(d + 1, static_cast<Eigen::Index>(c_count));
        for (int i = 0; i < w.size(); ++i) w.data()[i] = 0.5 * rng.normal();
        std::vector<Label> y;
        for (int i = 0; i < n; ++i) y.push_back(rng.below(c_count));
        const Matrix yh = one_hot(y, c_count);
        const double lambda = 0.001;
        const Matrix pi = softmax_probs(fm.values, w);
        auto loss = [&](const Matrix& m) { return mean_cross_entropy(softmax_probs(fm.values, m), yh, m, lambda); };
        for (std::size_t c = 0; c < c_count; ++c) {
            const auto col = static_cast<Eigen::Index>(c);
            const Vector g = class_gradient(fm.values, class_residual(pi, yh, c), w.col(col), lambda);
            Vector fd(d + 1);
            for (int a = 0; a <= d; ++a) {
                const double h = 1e-6;
                Matrix wp = w, wm = w;
                wp(a, col) += h;
                wm(a, col) -= h;
                fd(a) = (loss(wp) - loss(wm)) / (2 * h);
            }
            EXPECT_LE((g - fd).norm() / std::max(g.norm(), 1e-12), 1e-5) << "instance " << inst << " class " << c;
        }
    }
}

TEST(Property, MetricsAgainstHandValuesAndBinaryFormula) {
    ConfusionMatrix two(2);
    two.at(0, 0) = 2;
    two.at(0, 1) = 1;
    two.at(1, 0) = 1;
    two.at(1, 1) = 2;
    const auto r = report(two);
    EXPECT_NEAR(r.kappa, 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(r.mcc, 1.0 / 3.0, 1e-15);

    ConfusionMatrix three(3);
    const std::uint64_t cells[3][3] = {{3, 1, 0}, {0, 2, 2}, {1, 0, 1}};
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b) three.at(a, b) = cells[a][b];
    EXPECT_NEAR(report(three).kappa, 0.26 / 0.66, 1e-15);
    EXPECT_NEAR(report(three).mcc, 26.0 / std::sqrt(66.0 * 64.0), 1e-15);

    Rng rng(107);
    for (int t = 0; t < 1000; ++t) {
        ConfusionMatrix cm(2);
        for (std::size_t a = 0; a < 2; ++a)
            for (std::size_t b = 0; b < 2; ++b) cm.at(a, b) = rng.below(1000);
        if (cm.total() == 0) continue;
        const double tn = static_cast<double>(cm.at(0, 0)), fp = static_cast<double>(cm.at(0, 1));
        const double fn = static_cast<double>(cm.at(1, 0)), tp = static_cast<double>(cm.at(1, 1));
        EXPECT_NEAR(report(cm).mcc, oracle::binary_mcc(tp, tn, fp, fn), 1e-12);
    }
}

TEST(Property, DigitsRunsAreBitIdenticalAcrossThreadCounts) {
    if (!fs::exists(testsupport::data_dir() / "digits.csv")) GTEST_SKIP() << "digits.csv not prepared";
    RunConfig cfg = default_run_config();
    cfg.data_dir = testsupport::data_dir();
    cfg.data = dataset_preset("digits", cfg.data_dir);
    cfg.train.iterations = 20;
    cfg.train.anneal.num_sweeps = 100;
    cfg.train.threads = 1;
    const auto serial = run_training(cfg);
    cfg.train.threads = 4;
    const auto parallel = run_training(cfg);
    EXPECT_EQ(history_csv(serial.record), history_csv(parallel.record));
    EXPECT_EQ(serial.record.final_weights, parallel.record.final_weights);
    cfg.train.threads = 1;
    const auto repeat = run_training(cfg);
    EXPECT_EQ(history_csv(serial.record), history_csv(repeat.record));
}
