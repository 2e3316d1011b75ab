#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gramqubo/qubo.hpp"

namespace gramqubo {

struct AnnealConfig {
    std::size_t num_sweeps = 1000;
    std::size_t num_reads = 1;
    double beta_min = 0.01;
    double beta_max = 3.0;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Bits plus cached fields f_i = q_i + 2 sum_j Q_ij b_j, so the energy change
/// of a single flip is available in O(1) and an accepted flip costs O(n).
class LocalFieldState {
public:
    LocalFieldState(const QuboProblem& problem, BitVector bits);

    /// E(flip(b, i)) - E(b)
    double flip_delta(std::size_t i) const {
        const double f = fields_[i];
        const double d = diag_[i];
        return bits_[i] ? d - f : d + f;
    }

    void flip(std::size_t i);

    double energy() const { return energy_; }
    const BitVector& bits() const { return bits_; }
    std::span<const double> fields() const { return fields_; }
    std::size_t size() const { return bits_.size(); }

    /// Fields recomputed from scratch for the current bits.
    std::vector<double> recomputed_fields() const;

private:
    const QuboProblem* problem_;
    BitVector bits_;
    std::vector<double> fields_;
    std::vector<double> diag_;
    double energy_ = 0.0;
};

/// Geometric inverse-temperature ramp from beta_min to beta_max, one value per sweep.
std::vector<double> beta_schedule(const AnnealConfig& cfg);

struct AnnealReport {
    Sample best;
    /// Best energy found by each read.
    std::vector<double> read_energies;
    std::size_t accepted_flips = 0;
};

/// Metropolis simulated annealing. Each read starts from uniform random bits
/// and performs num_sweeps sweeps; a sweep proposes one flip per variable in a
/// fresh random order. The lowest-energy state visited over all reads is
/// returned. Read r draws from a stream seeded by (seed, r).
Sample anneal(const QuboProblem& problem, const AnnealConfig& cfg);

AnnealReport anneal_detailed(const QuboProblem& problem, const AnnealConfig& cfg);

}  // namespace gramqubo
