#include "gramqubo/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gramqubo {

Gram gram(const FeatureMatrix& x_aug, double lambda) {
    const Eigen::Index n = x_aug.values.rows();
    const Eigen::Index p = x_aug.values.cols();
    if (n < 1) {
        throw std::invalid_argument("gram: feature matrix has no rows");
    }
    if (lambda < 0.0) {
        throw std::invalid_argument("gram: lambda must be nonnegative");
    }
    // Lower-triangle rank update mirrored to the upper half keeps G exactly symmetric.
    Matrix lower = Matrix::Zero(p, p);
    lower.selfadjointView<Eigen::Lower>().rankUpdate(x_aug.values.transpose(), 1.0 / static_cast<double>(n));
    Gram out;
    out.g = lower.selfadjointView<Eigen::Lower>();
    out.lambda = lambda;
    out.g_lambda = out.g;
    for (Eigen::Index i = 0; i + 1 < p; ++i) {
        out.g_lambda(i, i) += lambda;
    }
    return out;
}

Matrix softmax_rows(const Matrix& logits) {
    if (!logits.allFinite()) {
        throw std::domain_error("softmax: non-finite logits");
    }
    Matrix pi(logits.rows(), logits.cols());
    for (Eigen::Index n = 0; n < logits.rows(); ++n) {
        const double m = logits.row(n).maxCoeff();
        double sum = 0.0;
        for (Eigen::Index c = 0; c < logits.cols(); ++c) {
            const double e = std::exp(logits(n, c) - m);
            pi(n, c) = e;
            sum += e;
        }
        pi.row(n) /= sum;
    }
    return pi;
}

Matrix softmax_probs(const Matrix& x_aug, const Matrix& w_aug) {
    if (x_aug.cols() != w_aug.rows()) {
        throw std::invalid_argument("softmax_probs: X_aug has " + std::to_string(x_aug.cols()) +
                                    " columns but W_aug has " + std::to_string(w_aug.rows()) + " rows");
    }
    return softmax_rows(x_aug * w_aug);
}

Matrix one_hot(std::span<const Label> labels, std::size_t num_classes) {
    Matrix y = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(num_classes));
    for (std::size_t n = 0; n < labels.size(); ++n) {
        if (labels[n] >= num_classes) {
            throw std::invalid_argument("one_hot: label out of range");
        }
        y(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(labels[n])) = 1.0;
    }
    return y;
}

Vector class_residual(const Matrix& pi, const Matrix& y_onehot, std::size_t c) {
    const auto col = static_cast<Eigen::Index>(c);
    if (col >= pi.cols() || pi.rows() != y_onehot.rows() || pi.cols() != y_onehot.cols()) {
        throw std::invalid_argument("class_residual: shape mismatch or class out of range");
    }
    return y_onehot.col(col) - pi.col(col);
}

Vector class_gradient(const Matrix& x_aug, const Vector& r_c, const Vector& w_c, double lambda) {
    if (x_aug.rows() != r_c.size() || x_aug.cols() != w_c.size()) {
        throw std::invalid_argument("class_gradient: shape mismatch");
    }
    Vector g = -(x_aug.transpose() * r_c) / static_cast<double>(x_aug.rows());
    const Eigen::Index weights = w_c.size() - 1;
    g.head(weights) += lambda * w_c.head(weights);
    return g;
}

double mean_cross_entropy(const Matrix& pi, const Matrix& y_onehot, const Matrix& w_aug, double lambda) {
    if (pi.rows() != y_onehot.rows() || pi.cols() != y_onehot.cols()) {
        throw std::invalid_argument("mean_cross_entropy: shape mismatch");
    }
    constexpr double kFloor = std::numeric_limits<double>::min();
    double nll = 0.0;
    for (Eigen::Index n = 0; n < pi.rows(); ++n) {
        for (Eigen::Index c = 0; c < pi.cols(); ++c) {
            if (y_onehot(n, c) != 0.0) {
                nll -= y_onehot(n, c) * std::log(std::max(pi(n, c), kFloor));
            }
        }
    }
    nll /= static_cast<double>(pi.rows());
    const double reg = w_aug.topRows(w_aug.rows() - 1).squaredNorm();
    return 0.5 * lambda * reg + nll;
}

double surrogate_value(const Matrix& curvature, const Vector& gradient, const Vector& u) {
    return 0.5 * u.dot(curvature * u) + gradient.dot(u);
}

}  // namespace gramqubo
