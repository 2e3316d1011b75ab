#include "gramqubo/annealer.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gramqubo/rng.hpp"

namespace gramqubo {

void AnnealConfig::validate() const {
    if (num_sweeps < 1) throw std::invalid_argument("anneal: num_sweeps must be at least 1");
    if (num_reads < 1) throw std::invalid_argument("anneal: num_reads must be at least 1");
    if (!(beta_min > 0.0) || !std::isfinite(beta_min)) {
        throw std::invalid_argument("anneal: beta_min must be positive");
    }
    if (!(beta_max > beta_min) || !std::isfinite(beta_max)) {
        throw std::invalid_argument("anneal: beta_max must exceed beta_min");
    }
}

LocalFieldState::LocalFieldState(const QuboProblem& problem, BitVector bits)
    : problem_(&problem), bits_(std::move(bits)) {
    const std::size_t n = problem.size();
    if (bits_.size() != n) {
        throw std::invalid_argument("LocalFieldState: bit count does not match problem size");
    }
    diag_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        diag_[i] = problem.quadratic(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
    }
    fields_ = recomputed_fields();
    energy_ = evaluate(problem, bits_);
}

std::vector<double> LocalFieldState::recomputed_fields() const {
    const std::size_t n = bits_.size();
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        double acc = problem_->linear(ii);
        for (std::size_t j = 0; j < n; ++j) {
            if (bits_[j]) acc += 2.0 * problem_->quadratic(ii, static_cast<Eigen::Index>(j));
        }
        f[i] = acc;
    }
    return f;
}

void LocalFieldState::flip(std::size_t i) {
    const std::size_t n = bits_.size();
    energy_ += flip_delta(i);
    const double step = bits_[i] ? -2.0 : 2.0;
    bits_[i] ^= 1U;
    // Q is symmetric, so column i (contiguous in column-major storage) is row i.
    const double* col = problem_->quadratic.data() + i * n;
    double* f = fields_.data();
    for (std::size_t j = 0; j < n; ++j) {
        f[j] += step * col[j];
    }
}

std::vector<double> beta_schedule(const AnnealConfig& cfg) {
    cfg.validate();
    std::vector<double> betas(cfg.num_sweeps);
    if (cfg.num_sweeps == 1) {
        betas[0] = cfg.beta_max;
        return betas;
    }
    const double log_ratio = std::log(cfg.beta_max / cfg.beta_min);
    const auto last = static_cast<double>(cfg.num_sweeps - 1);
    for (std::size_t s = 0; s < cfg.num_sweeps; ++s) {
        betas[s] = cfg.beta_min * std::exp(log_ratio * static_cast<double>(s) / last);
    }
    betas.back() = cfg.beta_max;
    return betas;
}

AnnealReport anneal_detailed(const QuboProblem& problem, const AnnealConfig& cfg) {
    cfg.validate();
    const std::size_t n = problem.size();
    if (n == 0) {
        throw std::invalid_argument("anneal: empty problem");
    }
    const auto betas = beta_schedule(cfg);

    AnnealReport report;
    report.read_energies.reserve(cfg.num_reads);
    bool have_best = false;
    std::vector<std::size_t> order(n);

    for (std::size_t r = 0; r < cfg.num_reads; ++r) {
        Rng rng(mix_seed(cfg.seed, r));
        BitVector start(n);
        for (auto& b : start) {
            b = static_cast<std::uint8_t>(rng.next() >> 63);
        }
        LocalFieldState state(problem, std::move(start));
        double read_best = state.energy();
        BitVector read_best_bits = state.bits();

        std::iota(order.begin(), order.end(), std::size_t{0});
        for (const double beta : betas) {
            rng.shuffle(std::span(order));
            for (const std::size_t i : order) {
                const double delta = state.flip_delta(i);
                if (delta > 0.0) {
                    const double x = beta * delta;
                    if (x > 40.0 || rng.uniform() >= std::exp(-x)) continue;
                }
                state.flip(i);
                ++report.accepted_flips;
                if (state.energy() < read_best) {
                    read_best = state.energy();
                    read_best_bits = state.bits();
                }
            }
        }

        const double exact = evaluate(problem, read_best_bits);
        report.read_energies.push_back(exact);
        if (!have_best || exact < report.best.energy) {
            report.best.bits = std::move(read_best_bits);
            report.best.energy = exact;
            have_best = true;
        }
    }
    return report;
}

Sample anneal(const QuboProblem& problem, const AnnealConfig& cfg) { return anneal_detailed(problem, cfg).best; }

}  // namespace gramqubo
