#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gramqubo {

/// Raised by the dataset loaders. offset() is the byte offset (binary
/// formats) or 1-based line number (CSV) where the problem was found.
class DataError : public std::runtime_error {
public:
    DataError(const std::string& what, std::uint64_t offset)
        : std::runtime_error(what), offset_(offset) {}

    std::uint64_t offset() const noexcept { return offset_; }

private:
    std::uint64_t offset_;
};

/// Grayscale image, row-major, intensities in [0, 1].
struct RawImage {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> pixels;

    RawImage() = default;
    RawImage(std::size_t h, std::size_t w, double fill = 0.0) : height(h), width(w), pixels(h * w, fill) {}

    double at(std::size_t row, std::size_t col) const { return pixels[row * width + col]; }
    double& at(std::size_t row, std::size_t col) { return pixels[row * width + col]; }
};

using Label = std::size_t;

struct LabeledImages {
    std::vector<RawImage> images;
    std::vector<Label> labels;

    std::size_t size() const { return images.size(); }
};

struct SubsampleSpec {
    std::size_t train_per_class = 100;
    std::size_t test_per_class = 50;
    std::uint64_t seed = 42;
};

/// Prepared train/test split of 8x8 images.
struct Dataset {
    std::string name;
    std::size_t num_classes = 0;
    std::vector<RawImage> train_images;
    std::vector<Label> train_labels;
    std::vector<RawImage> test_images;
    std::vector<Label> test_labels;
};

LabeledImages load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path);

/// CIFAR-10 binary batch; RGB is reduced to BT.601 luminance.
LabeledImages load_cifar10(const std::filesystem::path& batch_path);

/// 64 integer pixels in [0,16] followed by a label in [0,10), one row per line.
LabeledImages load_digits_csv(const std::filesystem::path& path);

/// Area-weighted box average onto an 8x8 grid.
RawImage downsample_to_8x8(const RawImage& img);

/// Downsample every image that is not already 8x8.
void downsample_all(LabeledImages& set);

/// Keep labels in [first, first + count) and shift them to start at 0.
/// EMNIST letters A-J is remap_label_range(set, 1, 10).
LabeledImages remap_label_range(const LabeledImages& set, Label first, std::size_t count);

/// Draws train and test from a single pool: per class, one seeded shuffle,
/// train taken first and test from the following indices.
Dataset subsample(const LabeledImages& pool, const SubsampleSpec& spec, std::size_t num_classes,
                  std::string name = {});

/// Draws train from the official train split and test from the official test split.
Dataset subsample(const LabeledImages& train, const LabeledImages& test, const SubsampleSpec& spec,
                  std::size_t num_classes, std::string name = {});

/// Indices selected per class from `labels`: first `take` entries of a
/// seeded shuffle after skipping `skip`. Exposed for testing determinism.
std::vector<std::size_t> select_per_class(std::span<const Label> labels, std::size_t num_classes,
                                          std::size_t skip, std::size_t take, std::uint64_t seed);

}  // namespace gramqubo
