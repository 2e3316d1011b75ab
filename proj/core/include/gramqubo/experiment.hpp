#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gramqubo/data.hpp"
#include "gramqubo/features.hpp"
#include "gramqubo/metrics.hpp"
#include "gramqubo/trainer.hpp"

namespace gramqubo {

namespace fs = std::filesystem;

/// Where a dataset lives and how to turn it into a Dataset.
///
/// Formats: "digits_csv" (path), "idx" (train_images/train_labels, optional
/// test_images/test_labels; without a test pair the train files are one pool)
/// and "cifar10" (train_batches, test_batch).
struct DatasetSource {
    std::string name = "digits";
    std::string format = "digits_csv";
    fs::path path;
    fs::path train_images;
    fs::path train_labels;
    fs::path test_images;
    fs::path test_labels;
    std::vector<fs::path> train_batches;
    fs::path test_batch;
    std::size_t num_classes = 10;
    /// Labels in [label_offset, label_offset + num_classes) are kept and shifted to 0.
    Label label_offset = 0;
    /// Transpose raw images before downsampling (EMNIST stores them transposed).
    bool transpose = false;
    std::size_t train_per_class = 100;
    std::size_t test_per_class = 54;
};

/// Named layouts under data_dir: digits, mnist, mnist-pool, fashion, kmnist,
/// emnist (letters A-J) and cifar10.
DatasetSource dataset_preset(std::string_view name, const fs::path& data_dir);

enum class Method { qubo, classical };

std::string_view to_string(Method m);

struct RunConfig {
    Method method = Method::qubo;
    DatasetSource data;
    ConvSpec conv;
    TrainConfig train;
    fs::path data_dir = "data";
};

/// Defaults for a single run: sklearn-digits settings with 1000 sweeps.
RunConfig default_run_config();

/// Applies a flat JSON object on top of `base`. Relative paths resolve against
/// base_dir. A "dataset" key naming a preset is applied before the other keys.
/// Unknown keys are rejected.
RunConfig parse_run_config(std::string_view json_text, const fs::path& base_dir, RunConfig base);

RunConfig load_run_config(const fs::path& file, RunConfig base = default_run_config());

/// Full effective configuration as pretty-printed JSON, paths absolute.
std::string run_config_to_json(const RunConfig& cfg);

/// Loads, filters, subsamples (seeded by the run seed) and downsamples to 8x8.
Dataset load_dataset(const DatasetSource& source, std::uint64_t seed);

struct Evaluation {
    MetricReport test;
    ConfusionMatrix test_confusion{0};
    double train_accuracy = 0.0;
    /// Test-set class probabilities, one row per test image.
    Matrix test_probabilities;
    std::vector<Label> test_predictions;
};

Evaluation evaluate_head(const Dataset& dataset, const FrozenConv& conv, const Matrix& w_aug);

struct RunOutcome {
    Dataset dataset;
    FrozenConv conv;
    RunRecord record;
    Evaluation eval;
};

/// Dataset load, frozen-conv init and training for one configuration.
RunOutcome run_training(const RunConfig& cfg);

/// Writes config.json, history.csv, weights.csv, conv.csv, predictions.csv and
/// metrics.json into a sibling staging directory, then renames it to `out`.
/// metrics.json is what marks a run directory as complete.
void write_run_dir(const fs::path& out, const RunConfig& cfg, const RunOutcome& outcome);

bool run_dir_complete(const fs::path& dir);

std::string history_csv(const RunRecord& rec);
std::string metrics_json(const RunConfig& cfg, const RunOutcome& outcome);

Matrix read_weights_csv(const fs::path& file);
FrozenConv read_conv_csv(const fs::path& file, const ConvSpec& spec);

/// Recomputes metrics from a saved run directory; the dataset comes from its
/// config.json unless `source` is given.
Evaluation evaluate_run_dir(const fs::path& dir, const std::optional<DatasetSource>& source = std::nullopt);

struct QuboSize {
    std::size_t bits;
    std::size_t variables;
    std::size_t pairs;
};

std::vector<QuboSize> qubo_sizes(std::size_t feature_dim, std::span<const std::size_t> bits);

/// One line per K: "K=<k> vars=<n> pairs=<n(n-1)/2>" with thousands separators on pairs.
std::string format_sizes(std::size_t feature_dim, std::span<const std::size_t> bits);

std::string format_percent(double fraction);

}  // namespace gramqubo
