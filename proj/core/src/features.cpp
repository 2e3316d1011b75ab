#include "gramqubo/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "gramqubo/rng.hpp"

namespace gramqubo {

void ConvSpec::validate() const {
    if (kernel < 1 || pool < 1 || filters < 1) {
        throw std::invalid_argument("ConvSpec: kernel, pool and filters must be at least 1");
    }
    if (input_h < kernel || input_w < kernel) {
        throw std::invalid_argument("ConvSpec: kernel larger than input");
    }
    if (input_h - kernel + 1 < pool || input_w - kernel + 1 < pool) {
        throw std::invalid_argument("ConvSpec: pooling window larger than the convolution output");
    }
}

std::size_t feature_dim(const ConvSpec& spec) {
    spec.validate();
    return spec.pooled_h() * spec.pooled_w() * spec.filters;
}

FrozenConv::FrozenConv(ConvSpec spec, std::vector<double> weights, std::vector<double> biases, std::uint64_t seed)
    : spec_(spec), weights_(std::move(weights)), biases_(std::move(biases)), seed_(seed) {
    spec_.validate();
    if (weights_.size() != spec_.filters * spec_.kernel * spec_.kernel) {
        throw std::invalid_argument("FrozenConv: expected " + std::to_string(spec_.filters * spec_.kernel * spec_.kernel) +
                                    " weights, got " + std::to_string(weights_.size()));
    }
    if (biases_.size() != spec_.filters) {
        throw std::invalid_argument("FrozenConv: expected one bias per filter");
    }
}

std::span<const double> FrozenConv::kernel(std::size_t filter) const {
    const std::size_t kk = spec_.kernel * spec_.kernel;
    return std::span<const double>(weights_).subspan(filter * kk, kk);
}

FrozenConv init_frozen_conv(const ConvSpec& spec, std::uint64_t seed) {
    spec.validate();
    const std::size_t kk = spec.kernel * spec.kernel;
    const double stddev = std::sqrt(2.0 / static_cast<double>(kk));
    Rng rng(seed);
    std::vector<double> weights(spec.filters * kk);
    for (auto& w : weights) {
        w = stddev * rng.normal();
    }
    return FrozenConv(spec, std::move(weights), std::vector<double>(spec.filters, 0.0), seed);
}

std::vector<double> image_features(const FrozenConv& conv, const RawImage& image) {
    const ConvSpec& s = conv.spec();
    if (image.height != s.input_h || image.width != s.input_w) {
        throw std::invalid_argument("extract_features: image is " + std::to_string(image.height) + "x" +
                                    std::to_string(image.width) + ", conv expects " + std::to_string(s.input_h) +
                                    "x" + std::to_string(s.input_w));
    }
    const std::size_t oh = s.input_h - s.kernel + 1;
    const std::size_t ow = s.input_w - s.kernel + 1;
    const std::size_t ph = s.pooled_h();
    const std::size_t pw = s.pooled_w();

    // activations[(r * ow + c) * filters + f], post-ReLU
    std::vector<double> act(oh * ow * s.filters);
    for (std::size_t f = 0; f < s.filters; ++f) {
        const auto k = conv.kernel(f);
        const double bias = conv.biases()[f];
        for (std::size_t r = 0; r < oh; ++r) {
            for (std::size_t c = 0; c < ow; ++c) {
                double acc = bias;
                for (std::size_t i = 0; i < s.kernel; ++i) {
                    for (std::size_t j = 0; j < s.kernel; ++j) {
                        acc += k[i * s.kernel + j] * image.at(r + i, c + j);
                    }
                }
                act[(r * ow + c) * s.filters + f] = std::max(acc, 0.0);
            }
        }
    }

    std::vector<double> out(ph * pw * s.filters);
    for (std::size_t pr = 0; pr < ph; ++pr) {
        for (std::size_t pc = 0; pc < pw; ++pc) {
            for (std::size_t f = 0; f < s.filters; ++f) {
                double m = -std::numeric_limits<double>::infinity();
                for (std::size_t i = 0; i < s.pool; ++i) {
                    for (std::size_t j = 0; j < s.pool; ++j) {
                        m = std::max(m, act[((pr * s.pool + i) * ow + pc * s.pool + j) * s.filters + f]);
                    }
                }
                out[(pr * pw + pc) * s.filters + f] = m;
            }
        }
    }
    return out;
}

FeatureMatrix extract_features(const FrozenConv& conv, std::span<const RawImage> images) {
    const std::size_t d = feature_dim(conv.spec());
    FeatureMatrix fm;
    fm.values.resize(static_cast<Eigen::Index>(images.size()), static_cast<Eigen::Index>(d + 1));
    for (std::size_t n = 0; n < images.size(); ++n) {
        const auto row = image_features(conv, images[n]);
        const auto r = static_cast<Eigen::Index>(n);
        for (std::size_t j = 0; j < d; ++j) {
            fm.values(r, static_cast<Eigen::Index>(j)) = row[j];
        }
        fm.values(r, static_cast<Eigen::Index>(d)) = 1.0;
    }
    return fm;
}

}  // namespace gramqubo
