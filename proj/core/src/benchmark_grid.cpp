#include "gramqubo/benchmark_grid.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace gramqubo {

using nlohmann::json;

namespace {

const std::vector<std::string> kMetrics = {"accuracy", "precision", "recall", "f1", "kappa", "mcc"};

std::string read_text(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string mean_std_percent(double mean, double sd) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(1) << 100.0 * mean << " ± " << 100.0 * sd;
    return ss.str();
}

// Cells keep the first-seen order of datasets and methods.
template <class Extract>
std::vector<AggregateRow> aggregate_by(const std::vector<GridRun>& runs, Extract extract) {
    struct Cell {
        std::string dataset, method;
        std::vector<std::pair<std::string, std::vector<double>>> series;
    };
    std::vector<Cell> cells;
    for (const auto& run : runs) {
        if (!run_dir_complete(run.dir)) continue;
        const json m = json::parse(read_text(run.dir / "metrics.json"));
        auto it = std::find_if(cells.begin(), cells.end(),
                               [&](const Cell& c) { return c.dataset == run.dataset && c.method == run.method; });
        if (it == cells.end()) {
            cells.push_back({run.dataset, run.method, {}});
            it = std::prev(cells.end());
        }
        for (auto& [name, value] : extract(m)) {
            auto s = std::find_if(it->series.begin(), it->series.end(),
                                  [&](const auto& e) { return e.first == name; });
            if (s == it->series.end()) {
                it->series.push_back({name, {}});
                s = std::prev(it->series.end());
            }
            s->second.push_back(value);
        }
    }
    std::vector<AggregateRow> rows;
    for (const auto& cell : cells) {
        for (const auto& [name, values] : cell.series) {
            AggregateRow row{cell.dataset, cell.method, name, values.size(), 0.0, 0.0};
            for (double v : values) row.mean += v;
            row.mean /= static_cast<double>(values.size());
            double ss = 0.0;
            for (double v : values) ss += (v - row.mean) * (v - row.mean);
            row.std = std::sqrt(ss / static_cast<double>(values.size()));
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

}  // namespace

std::string MethodSpec::id() const {
    return method == Method::classical ? "classical" : "qubo" + std::to_string(bits);
}

MethodSpec parse_method(std::string_view id) {
    if (id == "classical") return {Method::classical, 0};
    if (id.starts_with("qubo") && id.size() > 4) {
        const std::string digits(id.substr(4));
        if (std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
            const auto k = static_cast<std::size_t>(std::stoul(digits));
            if (k >= 1 && k <= 52) return {Method::qubo, k};
        }
    }
    throw std::invalid_argument("unknown method '" + std::string(id) + "' (expected classical or qubo<K>)");
}

void BenchmarkSpec::validate() const {
    if (datasets.empty()) throw std::invalid_argument("benchmark: at least one dataset is required");
    if (seeds.empty()) throw std::invalid_argument("benchmark: at least one seed is required");
    if (methods.empty()) throw std::invalid_argument("benchmark: at least one method is required");
    if (jobs == 0) throw std::invalid_argument("benchmark: jobs must be at least 1");
}

RunConfig benchmark_base_config() {
    RunConfig cfg = default_run_config();
    cfg.train.anneal.num_sweeps = 100;
    cfg.train.anneal.num_reads = 1;
    return cfg;
}

BenchmarkSpec parse_benchmark_spec(std::string_view json_text, const fs::path& base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("benchmark: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("benchmark: top level must be an object");
    for (const auto& [key, value] : j.items()) {
        if (key != "datasets" && key != "seeds" && key != "methods" && key != "jobs" && key != "base") {
            throw std::invalid_argument("benchmark: unknown key '" + key + "'");
        }
    }

    BenchmarkSpec spec;
    spec.base = benchmark_base_config();
    if (j.contains("base")) spec.base = parse_run_config(j["base"].dump(), base_dir, spec.base);

    for (const auto& d : j.value("datasets", json::array())) {
        if (d.is_string()) {
            spec.datasets.push_back(dataset_preset(d.get<std::string>(), spec.base.data_dir));
        } else if (d.is_object()) {
            spec.datasets.push_back(parse_run_config(d.dump(), base_dir, spec.base).data);
        } else {
            throw std::invalid_argument("benchmark: datasets entries must be names or objects");
        }
    }
    for (const auto& s : j.value("seeds", json::array())) {
        if (!s.is_number_unsigned()) throw std::invalid_argument("benchmark: seeds must be nonnegative integers");
        spec.seeds.push_back(s.get<std::uint64_t>());
    }
    for (const auto& m : j.value("methods", json::array())) {
        if (!m.is_string()) throw std::invalid_argument("benchmark: methods must be strings");
        spec.methods.push_back(parse_method(m.get<std::string>()));
    }
    if (j.contains("jobs")) {
        if (!j["jobs"].is_number_unsigned()) throw std::invalid_argument("benchmark: jobs must be a positive integer");
        spec.jobs = j["jobs"].get<std::size_t>();
    }
    spec.validate();
    return spec;
}

BenchmarkSpec load_benchmark_spec(const fs::path& file) {
    return parse_benchmark_spec(read_text(file), file.parent_path());
}

std::vector<GridRun> plan_grid(const BenchmarkSpec& spec, const fs::path& out) {
    spec.validate();
    std::vector<GridRun> runs;
    for (const auto& data : spec.datasets) {
        for (const auto& method : spec.methods) {
            std::map<std::uint64_t, int> repeats;
            for (const auto seed : spec.seeds) {
                GridRun run;
                run.dataset = data.name;
                run.method = method.id();
                run.seed = seed;
                // A seed listed twice gets its own directory so the two runs can be compared.
                std::string leaf = "seed_" + std::to_string(seed);
                if (const int k = ++repeats[seed]; k > 1) leaf += "_" + std::to_string(k);
                run.dir = out / data.name / run.method / leaf;
                run.config = spec.base;
                run.config.data = data;
                run.config.method = method.method;
                if (method.method == Method::qubo) run.config.train.bits = method.bits;
                run.config.train.seed = seed;
                runs.push_back(std::move(run));
            }
        }
    }
    return runs;
}

std::vector<GridRun> run_benchmark(const BenchmarkSpec& spec, const fs::path& out, std::ostream& log) {
    std::vector<GridRun> runs = plan_grid(spec, out);
    fs::create_directories(out);

    std::mutex log_mutex;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < runs.size(); i = next++) {
            GridRun& run = runs[i];
            const std::string label = run.dataset + "/" + run.method + "/seed_" + std::to_string(run.seed);
            if (run_dir_complete(run.dir)) {
                run.status = "skipped";
                std::lock_guard lock(log_mutex);
                log << "[skip] " << label << " (already complete)\n" << std::flush;
                continue;
            }
            {
                std::lock_guard lock(log_mutex);
                log << "[run ] " << label << '\n' << std::flush;
            }
            try {
                const RunOutcome outcome = run_training(run.config);
                write_run_dir(run.dir, run.config, outcome);
                run.status = "done";
                std::lock_guard lock(log_mutex);
                log << "[done] " << label << " test accuracy " << format_percent(outcome.eval.test.accuracy)
                    << "% in " << std::fixed << std::setprecision(1) << outcome.record.timings.total << " s\n"
                    << std::defaultfloat << std::flush;
            } catch (const std::exception& e) {
                run.status = std::string("failed: ") + e.what();
                std::lock_guard lock(log_mutex);
                log << "[fail] " << label << ": " << e.what() << '\n' << std::flush;
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        const std::size_t n = std::min(spec.jobs, runs.size());
        for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
        worker();
    }

    std::ofstream status(out / "runs.csv");
    status << "dataset,method,seed,dir,status\n";
    for (const auto& run : runs) {
        status << csv_field(run.dataset) << ',' << run.method << ',' << run.seed << ',' << csv_field(run.dir.string())
               << ',' << csv_field(run.status) << '\n';
    }
    write_aggregate_csv(out / "aggregate.csv", aggregate_runs(runs));
    write_aggregate_csv(out / "per_class_recall.csv", aggregate_per_class_recall(runs));
    return runs;
}

std::vector<AggregateRow> aggregate_runs(const std::vector<GridRun>& runs) {
    return aggregate_by(runs, [](const json& m) {
        std::vector<std::pair<std::string, double>> out;
        for (const auto& name : kMetrics) out.emplace_back(name, m.at(name).get<double>());
        return out;
    });
}

std::vector<AggregateRow> aggregate_per_class_recall(const std::vector<GridRun>& runs) {
    return aggregate_by(runs, [](const json& m) {
        std::vector<std::pair<std::string, double>> out;
        const auto& recall = m.at("per_class_recall");
        for (std::size_t c = 0; c < recall.size(); ++c) {
            out.emplace_back("recall_class_" + std::to_string(c), recall[c].get<double>());
        }
        return out;
    });
}

void write_aggregate_csv(const fs::path& file, const std::vector<AggregateRow>& rows) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << "dataset,method,metric,n,mean,std,formatted\n" << std::setprecision(17);
    for (const auto& r : rows) {
        out << csv_field(r.dataset) << ',' << r.method << ',' << r.metric << ',' << r.n << ',' << r.mean << ','
            << r.std << ',' << mean_std_percent(r.mean, r.std) << '\n';
    }
}

std::string summary_table(const std::vector<AggregateRow>& rows, std::string_view metric) {
    std::vector<std::string> datasets, methods;
    std::map<std::pair<std::string, std::string>, std::string> cells;
    for (const auto& r : rows) {
        if (r.metric != metric) continue;
        if (std::find(datasets.begin(), datasets.end(), r.dataset) == datasets.end()) datasets.push_back(r.dataset);
        if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
        cells[{r.dataset, r.method}] = mean_std_percent(r.mean, r.std);
    }
    std::ostringstream out;
    out << std::left << std::setw(12) << "dataset";
    for (const auto& m : methods) out << std::setw(16) << m;
    out << '\n';
    for (const auto& d : datasets) {
        out << std::setw(12) << d;
        for (const auto& m : methods) {
            const auto it = cells.find({d, m});
            // "±" is two bytes in UTF-8, so pad by one more to keep columns aligned.
            const std::string text = it == cells.end() ? "-" : it->second;
            const std::size_t width = it == cells.end() ? 16 : 17;
            out << std::setw(static_cast<int>(width)) << text;
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace gramqubo
