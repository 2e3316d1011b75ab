#include "gramqubo/trainer.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "gramqubo/encoding.hpp"
#include "gramqubo/qubo.hpp"
#include "gramqubo/rng.hpp"

namespace gramqubo {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// Runs fn(c) for every class; with more than one thread the classes are
// claimed from a shared counter. Each call writes only its own slot.
template <class Fn>
void for_each_class(std::size_t classes, std::size_t threads, Fn&& fn) {
    if (threads <= 1 || classes <= 1) {
        for (std::size_t c = 0; c < classes; ++c) fn(c);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (std::size_t c = next++; c < classes; c = next++) {
            try {
                fn(c);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        const std::size_t count = std::min(threads, classes);
        pool.reserve(count);
        for (std::size_t t = 0; t < count; ++t) pool.emplace_back(worker);
    }
    if (error) std::rethrow_exception(error);
}

std::vector<Label> argmax_rows(const Matrix& logits) {
    std::vector<Label> out(static_cast<std::size_t>(logits.rows()));
    for (Eigen::Index n = 0; n < logits.rows(); ++n) {
        Eigen::Index best = 0;
        for (Eigen::Index c = 1; c < logits.cols(); ++c) {
            if (logits(n, c) > logits(n, best)) best = c;
        }
        out[static_cast<std::size_t>(n)] = static_cast<Label>(best);
    }
    return out;
}

struct Prepared {
    FeatureMatrix train;
    FeatureMatrix test;
    Matrix y;
    Matrix w;
};

Prepared prepare(const Dataset& dataset, const FrozenConv& conv, const TrainConfig& cfg, RunRecord& rec) {
    cfg.validate();
    if (dataset.num_classes < 2) {
        throw std::invalid_argument("training needs at least two classes");
    }
    if (dataset.train_images.empty()) {
        throw std::invalid_argument("training set is empty");
    }
    const auto start = Clock::now();
    Prepared p;
    p.train = extract_features(conv, dataset.train_images);
    p.test = extract_features(conv, dataset.test_images);
    rec.timings.features = seconds_since(start);
    p.y = one_hot(dataset.train_labels, dataset.num_classes);
    p.w = init_head(p.train.dim(), dataset.num_classes, cfg.init_std, cfg.seed);
    rec.initial_weights = p.w;
    return p;
}

class Recorder {
public:
    Recorder(const Dataset& dataset, const Prepared& p, const TrainConfig& cfg, RunRecord& rec)
        : dataset_(dataset), p_(p), cfg_(cfg), rec_(rec) {
        rec_.history.reserve(cfg.iterations);
    }

    // Loss and train accuracy for the current weights; returns the probabilities.
    Matrix measure(const Matrix& w, double& loss, double& train_acc) const {
        const Matrix logits = p_.train.values * w;
        Matrix pi = softmax_rows(logits);
        loss = mean_cross_entropy(pi, p_.y, w, cfg_.lambda);
        train_acc = accuracy(dataset_.train_labels, argmax_rows(logits));
        return pi;
    }

    void record(std::size_t iteration, const Matrix& w, double loss, double train_acc) {
        HistoryEntry e;
        e.iteration = iteration;
        e.loss = loss;
        e.train_accuracy = train_acc;
        if (!dataset_.test_images.empty() &&
            (iteration % cfg_.eval_every == 0 || iteration == cfg_.iterations)) {
            e.test_accuracy = accuracy(dataset_.test_labels, predict(p_.test.values, w));
        }
        rec_.history.push_back(e);
    }

private:
    const Dataset& dataset_;
    const Prepared& p_;
    const TrainConfig& cfg_;
    RunRecord& rec_;
};

void finish(RunRecord& rec, const Matrix& w, Clock::time_point start) {
    rec.final_weights = w;
    std::vector<double> losses;
    losses.reserve(rec.history.size() + 1);
    losses.push_back(rec.initial_loss);
    for (const auto& h : rec.history) losses.push_back(h.loss);
    rec.loss_increase_fraction = loss_increase_fraction(losses);
    rec.timings.total = seconds_since(start);
}

}  // namespace

void TrainConfig::validate() const {
    if (iterations < 1) throw std::invalid_argument("TrainConfig: iterations must be at least 1");
    if (bits < 1) throw std::invalid_argument("TrainConfig: bits must be at least 1");
    if (!(delta_max > 0.0)) throw std::invalid_argument("TrainConfig: delta_max must be positive");
    if (lambda < 0.0) throw std::invalid_argument("TrainConfig: lambda must be nonnegative");
    if (eval_every < 1) throw std::invalid_argument("TrainConfig: eval_every must be at least 1");
    if (!(init_std >= 0.0)) throw std::invalid_argument("TrainConfig: init_std must be nonnegative");
    if (learning_rate < 0.0) throw std::invalid_argument("TrainConfig: learning_rate must be nonnegative");
    anneal.validate();
}

Matrix init_head(std::size_t feature_dim, std::size_t num_classes, double init_std, std::uint64_t seed) {
    Rng rng(mix_seed(seed, 0x4845414455ULL));
    Matrix w = Matrix::Zero(static_cast<Eigen::Index>(feature_dim + 1), static_cast<Eigen::Index>(num_classes));
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
        for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(feature_dim); ++j) {
            w(j, c) = init_std * rng.normal();
        }
    }
    return w;
}

UpdateSolver qubo_update_solver(const TrainConfig& cfg) {
    const PrecisionVector p(cfg.bits, cfg.delta_max);
    return [cfg, p](const ClassStep& step) {
        const QuboProblem problem = normalize(build_class_qubo(step.g_lambda, step.gradient, p, cfg.diagonal_mode));
        AnnealConfig anneal = cfg.anneal;
        anneal.seed = mix_seed(cfg.seed, step.iteration, step.class_index);
        const Sample s = gramqubo::anneal(problem, anneal);
        return Vector(decode(s.bits, p));
    };
}

RunRecord train_with_solver(const Dataset& dataset, const FrozenConv& conv, const TrainConfig& cfg,
                            const UpdateSolver& solver) {
    const auto start = Clock::now();
    RunRecord rec;
    Prepared p = prepare(dataset, conv, cfg, rec);
    Recorder recorder(dataset, p, cfg, rec);

    auto phase = Clock::now();
    const Gram g = gram(p.train, cfg.lambda);
    rec.timings.gram = seconds_since(phase);

    const std::size_t classes = dataset.num_classes;
    const std::size_t params = p.train.dim() + 1;
    double loss = 0.0;
    double train_acc = 0.0;
    Matrix pi = recorder.measure(p.w, loss, train_acc);
    rec.initial_loss = loss;

    std::vector<Vector> gradients(classes);
    Matrix update(static_cast<Eigen::Index>(params), static_cast<Eigen::Index>(classes));
    for (std::size_t t = 1; t <= cfg.iterations; ++t) {
        phase = Clock::now();
        for (std::size_t c = 0; c < classes; ++c) {
            const Vector r = class_residual(pi, p.y, c);
            gradients[c] = class_gradient(p.train.values, r, p.w.col(static_cast<Eigen::Index>(c)), cfg.lambda);
        }
        rec.timings.surrogate += seconds_since(phase);

        phase = Clock::now();
        for_each_class(classes, cfg.threads, [&](std::size_t c) {
            const Vector u = solver(ClassStep{t, c, g.g_lambda, gradients[c]});
            if (u.size() != static_cast<Eigen::Index>(params)) {
                throw std::runtime_error("update solver returned a vector of the wrong length");
            }
            update.col(static_cast<Eigen::Index>(c)) = u;
        });
        rec.timings.solve += seconds_since(phase);

        // All columns move together, after every class has been solved.
        p.w += cfg.step_alpha * update;

        phase = Clock::now();
        pi = recorder.measure(p.w, loss, train_acc);
        recorder.record(t, p.w, loss, train_acc);
        rec.timings.evaluation += seconds_since(phase);
    }
    finish(rec, p.w, start);
    return rec;
}

RunRecord train_qubo(const Dataset& dataset, const FrozenConv& conv, const TrainConfig& cfg) {
    return train_with_solver(dataset, conv, cfg, qubo_update_solver(cfg));
}

RunRecord train_classical(const Dataset& dataset, const FrozenConv& conv, const TrainConfig& cfg) {
    const auto start = Clock::now();
    RunRecord rec;
    Prepared p = prepare(dataset, conv, cfg, rec);
    Recorder recorder(dataset, p, cfg, rec);

    double loss = 0.0;
    double train_acc = 0.0;
    Matrix pi = recorder.measure(p.w, loss, train_acc);
    rec.initial_loss = loss;

    const auto n = static_cast<double>(p.train.samples());
    const Eigen::Index weights = p.w.rows() - 1;
    for (std::size_t t = 1; t <= cfg.iterations; ++t) {
        auto phase = Clock::now();
        Matrix grad = -(p.train.values.transpose() * (p.y - pi)) / n;
        grad.topRows(weights) += cfg.lambda * p.w.topRows(weights);
        p.w -= cfg.learning_rate * grad;
        rec.timings.surrogate += seconds_since(phase);

        phase = Clock::now();
        pi = recorder.measure(p.w, loss, train_acc);
        recorder.record(t, p.w, loss, train_acc);
        rec.timings.evaluation += seconds_since(phase);
    }
    finish(rec, p.w, start);
    return rec;
}

std::vector<Label> predict(const Matrix& x_aug, const Matrix& w_aug) {
    if (x_aug.cols() != w_aug.rows()) {
        throw std::invalid_argument("predict: shape mismatch");
    }
    return argmax_rows(x_aug * w_aug);
}

double loss_increase_fraction(std::span<const double> losses) {
    if (losses.size() < 2) {
        throw std::invalid_argument("loss_increase_fraction: need at least two losses");
    }
    std::size_t up = 0;
    for (std::size_t t = 0; t + 1 < losses.size(); ++t) {
        if (losses[t + 1] > losses[t]) ++up;
    }
    return static_cast<double>(up) / static_cast<double>(losses.size() - 1);
}

double accuracy(std::span<const Label> truth, std::span<const Label> predicted) {
    if (truth.size() != predicted.size()) {
        throw std::invalid_argument("accuracy: length mismatch");
    }
    if (truth.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] == predicted[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

}  // namespace gramqubo
