#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "gramqubo/annealer.hpp"
#include "gramqubo/data.hpp"
#include "gramqubo/features.hpp"
#include "gramqubo/surrogate.hpp"

namespace gramqubo {

struct TrainConfig {
    std::size_t iterations = 1000;
    std::size_t bits = 20;
    double delta_max = 0.5;
    double lambda = 0.001;
    /// Sweeps, reads and beta range; the seed is replaced per solve by one
    /// derived from (seed, iteration, class).
    AnnealConfig anneal;
    double step_alpha = 1.0;
    std::size_t eval_every = 10;
    std::uint64_t seed = 42;
    bool diagonal_mode = false;
    /// Full-batch gradient descent step for the classical baseline.
    double learning_rate = 0.1;
    /// Standard deviation of the initial head weights; biases start at 0.
    double init_std = 0.01;
    /// Worker threads for the per-class solves. Results do not depend on it.
    std::size_t threads = 1;

    void validate() const;
};

struct HistoryEntry {
    std::size_t iteration = 0;
    double loss = 0.0;
    double train_accuracy = 0.0;
    std::optional<double> test_accuracy;
};

/// Wall-clock seconds per phase.
struct PhaseTimings {
    double features = 0.0;
    double gram = 0.0;
    double surrogate = 0.0;
    double solve = 0.0;
    double evaluation = 0.0;
    double total = 0.0;
};

struct RunRecord {
    /// One entry per iteration, measured after that iteration's update.
    std::vector<HistoryEntry> history;
    Matrix initial_weights;
    Matrix final_weights;
    double initial_loss = 0.0;
    PhaseTimings timings;
    /// Fraction of updates after which the loss was higher than before.
    double loss_increase_fraction = 0.0;
};

/// Inputs of one per-class subproblem; all references are shared read-only.
struct ClassStep {
    std::size_t iteration;
    std::size_t class_index;
    const Matrix& g_lambda;
    const Vector& gradient;
};

/// Maps a class subproblem to a continuous update u_c of length d+1.
using UpdateSolver = std::function<Vector(const ClassStep&)>;

/// Normalized head QUBO, annealed with a seed derived from (seed, iteration,
/// class), decoded back to an update.
UpdateSolver qubo_update_solver(const TrainConfig& cfg);

/// Initial head: N(0, init_std^2) weights, zero biases.
Matrix init_head(std::size_t feature_dim, std::size_t num_classes, double init_std, std::uint64_t seed);

/// Iterative per-class QUBO training of the classifier head.
RunRecord train_qubo(const Dataset& dataset, const FrozenConv& conv, const TrainConfig& cfg);

/// Same outer loop with a caller-supplied per-class solver.
RunRecord train_with_solver(const Dataset& dataset, const FrozenConv& conv, const TrainConfig& cfg,
                            const UpdateSolver& solver);

/// Full-batch gradient descent on the same features and objective.
RunRecord train_classical(const Dataset& dataset, const FrozenConv& conv, const TrainConfig& cfg);

/// Row-wise argmax of X_aug W_aug; ties go to the lowest class index.
std::vector<Label> predict(const Matrix& x_aug, const Matrix& w_aug);

/// Fraction of consecutive pairs with losses[t+1] > losses[t]. Needs at least two values.
double loss_increase_fraction(std::span<const double> losses);

double accuracy(std::span<const Label> truth, std::span<const Label> predicted);

}  // namespace gramqubo
