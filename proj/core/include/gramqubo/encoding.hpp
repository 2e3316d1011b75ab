#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace gramqubo {

/// Bits grouped K per parameter, parameter-major: bit k of parameter j is at j*K + k.
using BitVector = std::vector<std::uint8_t>;

/// Powers-of-two precision weights p_k = delta_max * 2^k / (2^K - 1), k = 0..K-1.
/// They sum to delta_max, so u = p^T (2b - 1) spans [-delta_max, +delta_max]
/// in steps of 2 p_0, symmetric about zero and never exactly zero.
class PrecisionVector {
public:
    PrecisionVector(std::size_t bits, double delta_max);

    std::size_t bits() const { return values_.size(); }
    double delta_max() const { return delta_max_; }
    std::span<const double> values() const { return values_; }
    double operator[](std::size_t k) const { return values_[k]; }
    /// Smallest representable magnitude, p_0.
    double resolution() const { return values_.front(); }

private:
    std::vector<double> values_;
    double delta_max_;
};

PrecisionVector precision_vector(std::size_t bits, double delta_max);

/// u_j = sum_k p_k (2 b_{j,k} - 1) for every parameter j.
Eigen::VectorXd decode(std::span<const std::uint8_t> bits, const PrecisionVector& p);

double min_magnitude(const PrecisionVector& p);

}  // namespace gramqubo
