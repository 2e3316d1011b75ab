#include "gramqubo/encoding.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace gramqubo {

PrecisionVector::PrecisionVector(std::size_t bits, double delta_max) : delta_max_(delta_max) {
    if (bits == 0) {
        throw std::invalid_argument("precision_vector: K must be at least 1");
    }
    if (bits > 52) {
        throw std::invalid_argument("precision_vector: K above 52 exceeds double resolution");
    }
    if (!(delta_max > 0.0) || !std::isfinite(delta_max)) {
        throw std::invalid_argument("precision_vector: delta_max must be positive and finite");
    }
    const double denom = std::ldexp(1.0, static_cast<int>(bits)) - 1.0;
    values_.resize(bits);
    for (std::size_t k = 0; k < bits; ++k) {
        values_[k] = delta_max * std::ldexp(1.0, static_cast<int>(k)) / denom;
    }
}

PrecisionVector precision_vector(std::size_t bits, double delta_max) { return PrecisionVector(bits, delta_max); }

Eigen::VectorXd decode(std::span<const std::uint8_t> bits, const PrecisionVector& p) {
    const std::size_t k = p.bits();
    if (bits.size() % k != 0) {
        throw std::invalid_argument("decode: " + std::to_string(bits.size()) + " bits is not a multiple of K=" +
                                    std::to_string(k));
    }
    const std::size_t params = bits.size() / k;
    Eigen::VectorXd u(static_cast<Eigen::Index>(params));
    for (std::size_t j = 0; j < params; ++j) {
        double acc = 0.0;
        for (std::size_t b = 0; b < k; ++b) {
            acc += bits[j * k + b] ? p[b] : -p[b];
        }
        u(static_cast<Eigen::Index>(j)) = acc;
    }
    return u;
}

double min_magnitude(const PrecisionVector& p) { return p.resolution(); }

}  // namespace gramqubo
