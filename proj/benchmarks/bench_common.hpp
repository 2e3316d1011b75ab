#pragma once

#include "gramqubo/qubo.hpp"
#include "gramqubo/rng.hpp"

// A random positive definite 19x19 curvature and gradient, the shape of one
// class subproblem for 18 features plus bias.
inline std::pair<Eigen::MatrixXd, Eigen::VectorXd> random_class_problem(std::uint64_t seed) {
    gramqubo::Rng rng(seed);
    constexpr int params = 19;
    Eigen::MatrixXd a(64, params);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
    Eigen::MatrixXd g = a.transpose() * a / 64.0;
    g.diagonal().array() += 1e-3;
    Eigen::VectorXd grad(params);
    for (Eigen::Index i = 0; i < params; ++i) grad(i) = 0.1 * rng.normal();
    return {g, grad};
}
