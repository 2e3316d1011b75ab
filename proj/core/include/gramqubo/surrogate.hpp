#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Core>

#include "gramqubo/data.hpp"
#include "gramqubo/features.hpp"

namespace gramqubo {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Prediction-independent curvature proxy of the head: G = X_aug^T X_aug / N.
/// g_lambda adds lambda to every diagonal entry except the bias one.
struct Gram {
    Matrix g;
    Matrix g_lambda;
    double lambda = 0.0;
};

Gram gram(const FeatureMatrix& x_aug, double lambda);

/// Row-wise softmax of X_aug W_aug, computed with max subtraction.
/// Throws std::domain_error on non-finite logits.
Matrix softmax_probs(const Matrix& x_aug, const Matrix& w_aug);

/// Row-wise softmax of a precomputed logit matrix.
Matrix softmax_rows(const Matrix& logits);

Matrix one_hot(std::span<const Label> labels, std::size_t num_classes);

/// r_c = y_c - pi_c
Vector class_residual(const Matrix& pi, const Matrix& y_onehot, std::size_t c);

/// g_c = -X_aug^T r_c / N + lambda [w_c; 0]. w_c is the full augmented
/// column; its last (bias) entry is not regularized.
Vector class_gradient(const Matrix& x_aug, const Vector& r_c, const Vector& w_c, double lambda);

/// (lambda/2) * sum of squared non-bias weights + mean of -log pi_true.
double mean_cross_entropy(const Matrix& pi, const Matrix& y_onehot, const Matrix& w_aug, double lambda);

/// q(u) = 1/2 u^T G u + g^T u
double surrogate_value(const Matrix& curvature, const Vector& gradient, const Vector& u);

}  // namespace gramqubo
