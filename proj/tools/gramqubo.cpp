#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gramqubo/annealer.hpp"
#include "gramqubo/benchmark_grid.hpp"
#include "gramqubo/experiment.hpp"
#include "gramqubo/qubo.hpp"

namespace gq = gramqubo;

namespace {

struct RunFlags {
    std::string config;
    std::string out;
    std::string dataset;
    std::string data_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> bits;
    std::optional<std::size_t> sweeps;
    std::optional<std::size_t> reads;
    std::optional<std::size_t> iterations;
    std::optional<std::size_t> threads;
    bool dry_run = false;
    bool force = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& f, bool with_anneal) {
    cmd->add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
    cmd->add_option("--out", f.out, "Run directory to create");
    cmd->add_option("--dataset", f.dataset,
                    "Dataset preset: digits, mnist, mnist-pool, fashion, kmnist, emnist, cifar10");
    cmd->add_option("--data-dir", f.data_dir, "Directory holding the dataset presets");
    cmd->add_option("--seed", f.seed, "Run seed (data subsample, conv init, training)");
    cmd->add_option("--iterations", f.iterations, "Outer iterations T");
    if (with_anneal) {
        cmd->add_option("--bits", f.bits, "Bits per weight K");
        cmd->add_option("--sweeps", f.sweeps, "Annealing sweeps per class solve");
        cmd->add_option("--reads", f.reads, "Annealing reads per class solve");
        cmd->add_option("--jobs,--threads", f.threads, "Threads for the per-class solves");
    }
    cmd->add_flag("--dry-run", f.dry_run, "Print the resolved configuration and QUBO size, then exit");
    cmd->add_flag("--force", f.force, "Replace an existing run directory");
}

gq::RunConfig resolve_config(const RunFlags& f, gq::Method method) {
    gq::RunConfig cfg = gq::default_run_config();
    if (!f.data_dir.empty()) {
        cfg.data_dir = f.data_dir;
        cfg.data = gq::dataset_preset(cfg.data.name, cfg.data_dir);
    }
    if (!f.config.empty()) cfg = gq::load_run_config(f.config, cfg);
    if (!f.dataset.empty()) cfg.data = gq::dataset_preset(f.dataset, cfg.data_dir);
    cfg.method = method;
    if (f.seed) cfg.train.seed = *f.seed;
    if (f.bits) cfg.train.bits = *f.bits;
    if (f.sweeps) cfg.train.anneal.num_sweeps = *f.sweeps;
    if (f.reads) cfg.train.anneal.num_reads = *f.reads;
    if (f.iterations) cfg.train.iterations = *f.iterations;
    if (f.threads) cfg.train.threads = *f.threads;
    cfg.conv.validate();
    cfg.train.validate();
    return cfg;
}

void print_metrics(const gq::MetricReport& m) {
    std::cout << "accuracy  " << gq::format_percent(m.accuracy) << "%\n"
              << "precision " << gq::format_percent(m.macro_precision) << "%\n"
              << "recall    " << gq::format_percent(m.macro_recall) << "%\n"
              << "f1        " << gq::format_percent(m.macro_f1) << "%\n"
              << "kappa     " << gq::format_percent(m.kappa) << "%\n"
              << "mcc       " << gq::format_percent(m.mcc) << "%\n";
}

int cmd_train(const RunFlags& f, gq::Method method) {
    const gq::RunConfig cfg = resolve_config(f, method);
    if (f.dry_run) {
        std::cout << gq::run_config_to_json(cfg);
        if (method == gq::Method::qubo) {
            gq::ConvSpec spec = cfg.conv;
            const std::size_t d = gq::feature_dim(spec);
            const std::size_t n = (d + 1) * cfg.train.bits;
            std::cout << "feature dim d=" << d << ", per-class QUBO n=" << n << " variables, "
                      << gq::pair_count(n) << " pairs\n";
        }
        return 0;
    }
    if (f.out.empty()) throw CLI::ValidationError("--out", "an output directory is required unless --dry-run");
    const gq::fs::path out(f.out);
    if (gq::fs::exists(out) && !f.force) {
        throw std::runtime_error(out.string() + " already exists (use --force to replace it)");
    }
    const gq::RunOutcome outcome = gq::run_training(cfg);
    gq::write_run_dir(out, cfg, outcome);
    std::cout << "run written to " << out.string() << "\n";
    std::cout << "final loss " << std::setprecision(4)
              << (outcome.record.history.empty() ? outcome.record.initial_loss : outcome.record.history.back().loss)
              << ", loss increased after " << gq::format_percent(outcome.record.loss_increase_fraction)
              << "% of updates, " << std::fixed << std::setprecision(1) << outcome.record.timings.total << " s\n"
              << std::defaultfloat;
    print_metrics(outcome.eval.test);
    return 0;
}

int cmd_benchmark(const std::string& spec_path, const std::string& out, std::optional<std::size_t> jobs) {
    gq::BenchmarkSpec spec = gq::load_benchmark_spec(spec_path);
    if (jobs) spec.jobs = *jobs;
    const auto runs = gq::run_benchmark(spec, out, std::cerr);
    const auto rows = gq::aggregate_runs(runs);
    std::cout << "test accuracy (%), mean ± std over seeds\n" << gq::summary_table(rows);
    const auto failed = std::count_if(runs.begin(), runs.end(), [](const gq::GridRun& r) {
        return r.status.starts_with("failed");
    });
    if (failed > 0) {
        std::cerr << failed << " run(s) failed; see " << (gq::fs::path(out) / "runs.csv").string() << "\n";
        return 1;
    }
    return 0;
}

struct SolveFlags {
    std::string file;
    bool exact = false;
    bool normalize = false;
    gq::AnnealConfig anneal{.num_sweeps = 1000, .num_reads = 10};
};

int cmd_solve(const SolveFlags& f) {
    std::ifstream in(f.file);
    if (!in) throw std::runtime_error("cannot open " + f.file);
    gq::QuboProblem problem = gq::read_qubo_text(in);
    if (f.normalize) problem = gq::normalize(std::move(problem));

    auto print_bits = [](const gq::BitVector& bits) {
        std::string s;
        for (auto b : bits) s += b ? '1' : '0';
        return s;
    };
    std::cout << std::setprecision(12);
    if (f.exact) {
        if (problem.size() > 24) throw std::runtime_error("--exact supports at most 24 variables");
        const gq::Sample best = gq::brute_force_min(problem);
        std::cout << "bits " << print_bits(best.bits) << "\n"
                  << "energy " << best.energy << "\n"
                  << "energy+offset " << best.energy + problem.offset << "\n"
                  << "exact yes\n";
        return 0;
    }
    const gq::AnnealReport rep = gq::anneal_detailed(problem, f.anneal);
    const auto& e = rep.read_energies;
    const double lo = *std::min_element(e.begin(), e.end());
    const double hi = *std::max_element(e.begin(), e.end());
    double mean = 0.0;
    for (double v : e) mean += v;
    mean /= static_cast<double>(e.size());
    const auto hits = std::count_if(e.begin(), e.end(), [&](double v) { return v <= lo + 1e-9 * (1.0 + std::abs(lo)); });
    std::cout << "bits " << print_bits(rep.best.bits) << "\n"
              << "energy " << rep.best.energy << "\n"
              << "energy+offset " << rep.best.energy + problem.offset << "\n"
              << "reads " << e.size() << ", best " << lo << ", mean " << mean << ", worst " << hi
              << ", reads at best " << hits << "\n"
              << "accepted flips " << rep.accepted_flips << "\n"
              << "exact no\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Train a classifier head by per-class QUBO solves with simulated annealing"};
    app.require_subcommand(1);

    RunFlags train_flags;
    auto* train = app.add_subcommand("train", "Train with per-class QUBO updates and write a run directory");
    add_run_flags(train, train_flags, true);

    RunFlags base_flags;
    auto* baseline = app.add_subcommand("baseline", "Train the classical gradient-descent baseline");
    add_run_flags(baseline, base_flags, false);

    std::string bench_spec;
    std::string bench_out;
    std::optional<std::size_t> bench_jobs;
    auto* bench = app.add_subcommand("benchmark", "Run a dataset x method x seed grid and aggregate it");
    bench->add_option("--config,--spec", bench_spec, "Benchmark JSON")->required()->check(CLI::ExistingFile);
    bench->add_option("--out", bench_out, "Output directory")->required();
    bench->add_option("--jobs", bench_jobs, "Training runs executed concurrently");

    SolveFlags solve_flags;
    auto* solve = app.add_subcommand("solve", "Minimize a QUBO text file");
    solve->add_option("file", solve_flags.file, "QUBO text file")->required();
    solve->add_flag("--exact", solve_flags.exact, "Exhaustive search instead of annealing (n <= 24)");
    solve->add_flag("--normalize", solve_flags.normalize, "Scale coefficients to max magnitude 1 first");
    solve->add_option("--sweeps", solve_flags.anneal.num_sweeps, "Sweeps per read")->capture_default_str();
    solve->add_option("--reads", solve_flags.anneal.num_reads, "Independent reads")->capture_default_str();
    solve->add_option("--seed", solve_flags.anneal.seed, "Annealer seed")->capture_default_str();

    std::size_t sizes_d = 18;
    std::vector<std::size_t> sizes_bits{5, 10, 15, 20};
    auto* sizes = app.add_subcommand("sizes", "Print per-class QUBO sizes for feature dimension d");
    sizes->add_option("--d", sizes_d, "Feature dimension without the bias")->capture_default_str();
    sizes->add_option("--bits", sizes_bits, "Bit precisions")->delimiter(',')->capture_default_str();

    std::string eval_dir;
    std::string eval_dataset;
    std::string eval_data_dir;
    auto* eval = app.add_subcommand("eval", "Recompute test metrics from a saved run directory");
    eval->add_option("run", eval_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
    eval->add_option("--dataset", eval_dataset, "Evaluate on this preset instead of the recorded dataset");
    eval->add_option("--data-dir", eval_data_dir, "Directory holding the dataset presets");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) return cmd_train(train_flags, gq::Method::qubo);
        if (*baseline) return cmd_train(base_flags, gq::Method::classical);
        if (*bench) return cmd_benchmark(bench_spec, bench_out, bench_jobs);
        if (*solve) return cmd_solve(solve_flags);
        if (*sizes) {
            std::cout << gq::format_sizes(sizes_d, sizes_bits);
            return 0;
        }
        if (*eval) {
            std::optional<gq::DatasetSource> source;
            if (!eval_dataset.empty()) {
                source = gq::dataset_preset(eval_dataset, eval_data_dir.empty() ? "data" : eval_data_dir);
            }
            const gq::Evaluation ev = gq::evaluate_run_dir(eval_dir, source);
            print_metrics(ev.test);
            std::cout << "train accuracy " << gq::format_percent(ev.train_accuracy) << "%\n";
            return 0;
        }
    } catch (const gq::QuboParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
