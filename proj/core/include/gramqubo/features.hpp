#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "gramqubo/data.hpp"

namespace gramqubo {

/// Single valid convolution (stride 1, no padding) followed by s x s max pooling.
struct ConvSpec {
    std::size_t input_h = 8;
    std::size_t input_w = 8;
    std::size_t kernel = 3;
    std::size_t filters = 2;
    std::size_t pool = 2;

    void validate() const;
    std::size_t pooled_h() const { return (input_h - kernel + 1) / pool; }
    std::size_t pooled_w() const { return (input_w - kernel + 1) / pool; }
};

/// Number of flattened features: pooled_h * pooled_w * filters.
std::size_t feature_dim(const ConvSpec& spec);

/// Randomly initialized, never-trained convolution filters.
class FrozenConv {
public:
    /// weights are laid out filter-major, each filter a row-major k x k kernel.
    FrozenConv(ConvSpec spec, std::vector<double> weights, std::vector<double> biases, std::uint64_t seed = 0);

    const ConvSpec& spec() const { return spec_; }
    std::uint64_t init_seed() const { return seed_; }
    std::span<const double> weights() const { return weights_; }
    std::span<const double> biases() const { return biases_; }
    std::span<const double> kernel(std::size_t filter) const;
    std::size_t parameter_count() const { return weights_.size() + biases_.size(); }

private:
    ConvSpec spec_;
    std::vector<double> weights_;
    std::vector<double> biases_;
    std::uint64_t seed_;
};

/// He-normal kernels (std sqrt(2/k^2)), zero biases.
FrozenConv init_frozen_conv(const ConvSpec& spec, std::uint64_t seed);

/// N x (d+1) features; the last column is the constant bias input 1.
struct FeatureMatrix {
    Eigen::MatrixXd values;

    std::size_t samples() const { return static_cast<std::size_t>(values.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(values.cols()) - 1; }
};

/// Conv + bias, ReLU, max-pool, flatten in (pooled row, pooled col, filter)
/// order, then append the bias column.
FeatureMatrix extract_features(const FrozenConv& conv, std::span<const RawImage> images);

/// Features of one image without the bias entry.
std::vector<double> image_features(const FrozenConv& conv, const RawImage& image);

}  // namespace gramqubo
