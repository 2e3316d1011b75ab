#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gramqubo/experiment.hpp"

namespace gramqubo {

/// A method in a benchmark grid: "classical" or "qubo<K>".
struct MethodSpec {
    Method method = Method::qubo;
    std::size_t bits = 20;

    std::string id() const;
};

MethodSpec parse_method(std::string_view id);

struct BenchmarkSpec {
    /// Dataset presets or inline sources resolved against the base config's data_dir.
    std::vector<DatasetSource> datasets;
    std::vector<std::uint64_t> seeds;
    std::vector<MethodSpec> methods;
    RunConfig base;
    std::size_t jobs = 1;

    void validate() const;
};

/// Grid defaults: 100 sweeps and one read per class solve.
RunConfig benchmark_base_config();

/// JSON form:
///   {"datasets": ["digits", {"dataset": "mnist", ...}], "seeds": [42, 43],
///    "methods": ["classical", "qubo20"], "jobs": 2, "base": {flat run config}}
BenchmarkSpec parse_benchmark_spec(std::string_view json_text, const fs::path& base_dir);
BenchmarkSpec load_benchmark_spec(const fs::path& file);

struct GridRun {
    std::string dataset;
    std::string method;
    std::uint64_t seed = 0;
    fs::path dir;
    /// "done", "skipped" (already complete) or "failed: <reason>".
    std::string status;
    RunConfig config;
};

std::vector<GridRun> plan_grid(const BenchmarkSpec& spec, const fs::path& out);

/// Runs every incomplete cell (up to spec.jobs at once), then writes runs.csv,
/// aggregate.csv and per_class_recall.csv under `out`. Progress goes to `log`.
std::vector<GridRun> run_benchmark(const BenchmarkSpec& spec, const fs::path& out, std::ostream& log);

struct AggregateRow {
    std::string dataset;
    std::string method;
    std::string metric;
    std::size_t n = 0;
    double mean = 0.0;
    double std = 0.0;
};

/// Mean and population standard deviation of each metric over the completed
/// seeds of each (dataset, method) cell, read back from metrics.json.
std::vector<AggregateRow> aggregate_runs(const std::vector<GridRun>& runs);

/// Per-class recall aggregates: metric names are "recall_class_<c>".
std::vector<AggregateRow> aggregate_per_class_recall(const std::vector<GridRun>& runs);

void write_aggregate_csv(const fs::path& file, const std::vector<AggregateRow>& rows);

/// Dataset x method table of "mean ± std" accuracy, in percent.
std::string summary_table(const std::vector<AggregateRow>& rows, std::string_view metric = "accuracy");

}  // namespace gramqubo
