#include "gramqubo/experiment.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace gramqubo {

using nlohmann::json;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    if (p.empty()) return {};
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

std::string absolute_string(const fs::path& p) {
    if (p.empty()) return {};
    return fs::absolute(p).lexically_normal().string();
}

template <class T>
T get_number(const json& j, const std::string& key) {
    if (!j.is_number()) {
        throw std::invalid_argument("config: '" + key + "' must be a number");
    }
    if constexpr (std::is_integral_v<T>) {
        if (!j.is_number_integer() || (j.is_number_integer() && j.get<long long>() < 0)) {
            throw std::invalid_argument("config: '" + key + "' must be a nonnegative integer");
        }
    }
    return j.get<T>();
}

std::string get_string(const json& j, const std::string& key) {
    if (!j.is_string()) throw std::invalid_argument("config: '" + key + "' must be a string");
    return j.get<std::string>();
}

bool get_bool(const json& j, const std::string& key) {
    if (!j.is_boolean()) throw std::invalid_argument("config: '" + key + "' must be true or false");
    return j.get<bool>();
}

std::string read_text(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& file, const std::string& text) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + file.string());
}

void require_file(const fs::path& p, const std::string& what) {
    if (p.empty()) throw std::invalid_argument("dataset: " + what + " path is not set");
    if (!fs::is_regular_file(p)) throw std::runtime_error("dataset: " + what + " not found: " + p.string());
}

void transpose_all(LabeledImages& set) {
    for (auto& img : set.images) {
        RawImage t(img.width, img.height);
        for (std::size_t r = 0; r < img.height; ++r) {
            for (std::size_t c = 0; c < img.width; ++c) t.at(c, r) = img.at(r, c);
        }
        img = std::move(t);
    }
}

void downsample_dataset(Dataset& ds) {
    for (auto* images : {&ds.train_images, &ds.test_images}) {
        for (auto& img : *images) {
            if (img.height != 8 || img.width != 8) img = downsample_to_8x8(img);
        }
    }
}

json metrics_to_json(const MetricReport& m) {
    return json{{"accuracy", m.accuracy}, {"precision", m.macro_precision}, {"recall", m.macro_recall},
                {"f1", m.macro_f1},       {"kappa", m.kappa},               {"mcc", m.mcc},
                {"per_class_recall", m.per_class_recall}};
}

std::string with_thousands(std::size_t v) {
    std::string digits = std::to_string(v);
    std::string out;
    for (std::size_t i = 0; i < digits.size(); ++i) {
        if (i > 0 && (digits.size() - i) % 3 == 0) out += ',';
        out += digits[i];
    }
    return out;
}

}  // namespace

DatasetSource dataset_preset(std::string_view name, const fs::path& data_dir) {
    DatasetSource s;
    s.name = std::string(name);
    s.train_per_class = 100;
    s.test_per_class = 50;
    auto mnist_like = [&](const std::string& dir) {
        s.format = "idx";
        s.train_images = data_dir / dir / "train-images-idx3-ubyte";
        s.train_labels = data_dir / dir / "train-labels-idx1-ubyte";
        s.test_images = data_dir / dir / "t10k-images-idx3-ubyte";
        s.test_labels = data_dir / dir / "t10k-labels-idx1-ubyte";
    };
    if (name == "digits") {
        s.format = "digits_csv";
        s.path = data_dir / "digits.csv";
        s.test_per_class = 54;
    } else if (name == "mnist") {
        mnist_like("mnist");
    } else if (name == "mnist-pool") {
        s.format = "idx";
        s.train_images = data_dir / "mnist" / "pool-images-idx3-ubyte";
        s.train_labels = data_dir / "mnist" / "pool-labels-idx1-ubyte";
    } else if (name == "fashion") {
        mnist_like("fashion");
    } else if (name == "kmnist") {
        mnist_like("kmnist");
    } else if (name == "emnist") {
        s.format = "idx";
        s.train_images = data_dir / "emnist" / "emnist-letters-train-images-idx3-ubyte";
        s.train_labels = data_dir / "emnist" / "emnist-letters-train-labels-idx1-ubyte";
        s.test_images = data_dir / "emnist" / "emnist-letters-test-images-idx3-ubyte";
        s.test_labels = data_dir / "emnist" / "emnist-letters-test-labels-idx1-ubyte";
        s.label_offset = 1;
        s.transpose = true;
    } else if (name == "cifar10") {
        s.format = "cifar10";
        for (int b = 1; b <= 5; ++b) {
            s.train_batches.push_back(data_dir / "cifar10" / ("data_batch_" + std::to_string(b) + ".bin"));
        }
        s.test_batch = data_dir / "cifar10" / "test_batch.bin";
    } else {
        throw std::invalid_argument("unknown dataset preset '" + std::string(name) +
                                    "' (known: digits, mnist, mnist-pool, fashion, kmnist, emnist, cifar10)");
    }
    return s;
}

std::string_view to_string(Method m) { return m == Method::qubo ? "qubo" : "classical"; }

RunConfig default_run_config() {
    RunConfig cfg;
    cfg.data = dataset_preset("digits", cfg.data_dir);
    cfg.train.anneal.num_sweeps = 1000;
    cfg.train.anneal.num_reads = 1;
    return cfg;
}

RunConfig parse_run_config(std::string_view json_text, const fs::path& base_dir, RunConfig cfg) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");

    if (j.contains("data_dir")) cfg.data_dir = resolve(base_dir, get_string(j["data_dir"], "data_dir"));
    if (j.contains("dataset")) {
        const std::string name = get_string(j["dataset"], "dataset");
        cfg.data = dataset_preset(name, cfg.data_dir);
    }

    auto& d = cfg.data;
    auto& t = cfg.train;
    for (const auto& [key, value] : j.items()) {
        if (key == "data_dir" || key == "dataset") continue;
        if (key == "method") {
            const std::string m = get_string(value, key);
            if (m == "qubo") cfg.method = Method::qubo;
            else if (m == "classical") cfg.method = Method::classical;
            else throw std::invalid_argument("config: method must be 'qubo' or 'classical'");
        } else if (key == "name") d.name = get_string(value, key);
        else if (key == "format") d.format = get_string(value, key);
        else if (key == "path") d.path = resolve(base_dir, get_string(value, key));
        else if (key == "train_images") d.train_images = resolve(base_dir, get_string(value, key));
        else if (key == "train_labels") d.train_labels = resolve(base_dir, get_string(value, key));
        else if (key == "test_images") d.test_images = resolve(base_dir, get_string(value, key));
        else if (key == "test_labels") d.test_labels = resolve(base_dir, get_string(value, key));
        else if (key == "test_batch") d.test_batch = resolve(base_dir, get_string(value, key));
        else if (key == "train_batches") {
            if (!value.is_array()) throw std::invalid_argument("config: 'train_batches' must be a list");
            d.train_batches.clear();
            for (const auto& b : value) d.train_batches.push_back(resolve(base_dir, get_string(b, key)));
        } else if (key == "num_classes") d.num_classes = get_number<std::size_t>(value, key);
        else if (key == "label_offset") d.label_offset = get_number<std::size_t>(value, key);
        else if (key == "transpose") d.transpose = get_bool(value, key);
        else if (key == "train_per_class") d.train_per_class = get_number<std::size_t>(value, key);
        else if (key == "test_per_class") d.test_per_class = get_number<std::size_t>(value, key);
        else if (key == "seed") t.seed = get_number<std::uint64_t>(value, key);
        else if (key == "iterations") t.iterations = get_number<std::size_t>(value, key);
        else if (key == "bits") t.bits = get_number<std::size_t>(value, key);
        else if (key == "delta_max") t.delta_max = get_number<double>(value, key);
        else if (key == "lambda") t.lambda = get_number<double>(value, key);
        else if (key == "sweeps") t.anneal.num_sweeps = get_number<std::size_t>(value, key);
        else if (key == "reads") t.anneal.num_reads = get_number<std::size_t>(value, key);
        else if (key == "beta_min") t.anneal.beta_min = get_number<double>(value, key);
        else if (key == "beta_max") t.anneal.beta_max = get_number<double>(value, key);
        else if (key == "eval_every") t.eval_every = get_number<std::size_t>(value, key);
        else if (key == "step_alpha") t.step_alpha = get_number<double>(value, key);
        else if (key == "diagonal_mode") t.diagonal_mode = get_bool(value, key);
        else if (key == "learning_rate") t.learning_rate = get_number<double>(value, key);
        else if (key == "init_std") t.init_std = get_number<double>(value, key);
        else if (key == "threads") t.threads = get_number<std::size_t>(value, key);
        else if (key == "kernel") cfg.conv.kernel = get_number<std::size_t>(value, key);
        else if (key == "filters") cfg.conv.filters = get_number<std::size_t>(value, key);
        else if (key == "pool") cfg.conv.pool = get_number<std::size_t>(value, key);
        else if (key == "version") continue;
        else throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    cfg.conv.validate();
    t.validate();
    return cfg;
}

RunConfig load_run_config(const fs::path& file, RunConfig base) {
    return parse_run_config(read_text(file), file.parent_path(), std::move(base));
}

std::string run_config_to_json(const RunConfig& cfg) {
    const auto& d = cfg.data;
    const auto& t = cfg.train;
    json j;
    j["version"] = 1;
    j["method"] = std::string(to_string(cfg.method));
    j["name"] = d.name;
    j["format"] = d.format;
    j["data_dir"] = absolute_string(cfg.data_dir);
    j["path"] = absolute_string(d.path);
    j["train_images"] = absolute_string(d.train_images);
    j["train_labels"] = absolute_string(d.train_labels);
    j["test_images"] = absolute_string(d.test_images);
    j["test_labels"] = absolute_string(d.test_labels);
    j["train_batches"] = json::array();
    for (const auto& b : d.train_batches) j["train_batches"].push_back(absolute_string(b));
    j["test_batch"] = absolute_string(d.test_batch);
    j["num_classes"] = d.num_classes;
    j["label_offset"] = d.label_offset;
    j["transpose"] = d.transpose;
    j["train_per_class"] = d.train_per_class;
    j["test_per_class"] = d.test_per_class;
    j["seed"] = t.seed;
    j["iterations"] = t.iterations;
    j["bits"] = t.bits;
    j["delta_max"] = t.delta_max;
    j["lambda"] = t.lambda;
    j["sweeps"] = t.anneal.num_sweeps;
    j["reads"] = t.anneal.num_reads;
    j["beta_min"] = t.anneal.beta_min;
    j["beta_max"] = t.anneal.beta_max;
    j["eval_every"] = t.eval_every;
    j["step_alpha"] = t.step_alpha;
    j["diagonal_mode"] = t.diagonal_mode;
    j["learning_rate"] = t.learning_rate;
    j["init_std"] = t.init_std;
    j["threads"] = t.threads;
    j["kernel"] = cfg.conv.kernel;
    j["filters"] = cfg.conv.filters;
    j["pool"] = cfg.conv.pool;
    return j.dump(2) + "\n";
}

Dataset load_dataset(const DatasetSource& source, std::uint64_t seed) {
    const SubsampleSpec spec{source.train_per_class, source.test_per_class, seed};
    auto prepare = [&](LabeledImages set) {
        set = remap_label_range(set, source.label_offset, source.num_classes);
        if (source.transpose) transpose_all(set);
        return set;
    };

    Dataset ds;
    if (source.format == "digits_csv") {
        require_file(source.path, "digits CSV");
        ds = subsample(prepare(load_digits_csv(source.path)), spec, source.num_classes, source.name);
    } else if (source.format == "idx") {
        require_file(source.train_images, "train images");
        require_file(source.train_labels, "train labels");
        auto train = prepare(load_idx(source.train_images, source.train_labels));
        if (source.test_images.empty() && source.test_labels.empty()) {
            ds = subsample(train, spec, source.num_classes, source.name);
        } else {
            require_file(source.test_images, "test images");
            require_file(source.test_labels, "test labels");
            auto test = prepare(load_idx(source.test_images, source.test_labels));
            ds = subsample(train, test, spec, source.num_classes, source.name);
        }
    } else if (source.format == "cifar10") {
        if (source.train_batches.empty()) throw std::invalid_argument("dataset: no CIFAR-10 train batches listed");
        LabeledImages train;
        for (const auto& b : source.train_batches) {
            require_file(b, "CIFAR-10 batch");
            auto part = load_cifar10(b);
            std::move(part.images.begin(), part.images.end(), std::back_inserter(train.images));
            train.labels.insert(train.labels.end(), part.labels.begin(), part.labels.end());
        }
        require_file(source.test_batch, "CIFAR-10 test batch");
        ds = subsample(prepare(std::move(train)), prepare(load_cifar10(source.test_batch)), spec, source.num_classes,
                       source.name);
    } else {
        throw std::invalid_argument("dataset: unknown format '" + source.format + "'");
    }
    downsample_dataset(ds);
    return ds;
}

Evaluation evaluate_head(const Dataset& dataset, const FrozenConv& conv, const Matrix& w_aug) {
    Evaluation ev;
    const FeatureMatrix train = extract_features(conv, dataset.train_images);
    ev.train_accuracy = accuracy(dataset.train_labels, predict(train.values, w_aug));
    const FeatureMatrix test = extract_features(conv, dataset.test_images);
    ev.test_predictions = predict(test.values, w_aug);
    ev.test_probabilities = softmax_probs(test.values, w_aug);
    ev.test_confusion = confusion(dataset.test_labels, ev.test_predictions, dataset.num_classes);
    ev.test = report(ev.test_confusion);
    return ev;
}

RunOutcome run_training(const RunConfig& cfg) {
    cfg.train.validate();
    Dataset dataset = load_dataset(cfg.data, cfg.train.seed);
    if (dataset.test_images.empty()) throw std::invalid_argument("dataset has no test images");
    ConvSpec spec = cfg.conv;
    spec.input_h = dataset.train_images.front().height;
    spec.input_w = dataset.train_images.front().width;
    FrozenConv conv = init_frozen_conv(spec, cfg.train.seed);
    RunRecord record = cfg.method == Method::qubo ? train_qubo(dataset, conv, cfg.train)
                                                  : train_classical(dataset, conv, cfg.train);
    Evaluation eval = evaluate_head(dataset, conv, record.final_weights);
    return RunOutcome{std::move(dataset), std::move(conv), std::move(record), std::move(eval)};
}

std::string history_csv(const RunRecord& rec) {
    std::ostringstream out;
    out << "iteration,loss,train_acc,test_acc\n" << std::setprecision(17);
    for (const auto& h : rec.history) {
        out << h.iteration << ',' << h.loss << ',' << h.train_accuracy << ',';
        if (h.test_accuracy) out << *h.test_accuracy;
        out << '\n';
    }
    return out.str();
}

std::string metrics_json(const RunConfig& cfg, const RunOutcome& o) {
    json j = metrics_to_json(o.eval.test);
    const auto& cm = o.eval.test_confusion;
    json rows = json::array();
    for (std::size_t r = 0; r < cm.num_classes(); ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < cm.num_classes(); ++c) row.push_back(cm.at(r, c));
        rows.push_back(row);
    }
    j["confusion"] = rows;
    j["train_accuracy"] = o.eval.train_accuracy;
    j["initial_loss"] = o.record.initial_loss;
    j["final_loss"] = o.record.history.empty() ? o.record.initial_loss : o.record.history.back().loss;
    j["loss_increase_fraction"] = o.record.loss_increase_fraction;
    j["method"] = std::string(to_string(cfg.method));
    j["bits"] = cfg.train.bits;
    j["dataset"] = cfg.data.name;
    j["seed"] = cfg.train.seed;
    j["n_train"] = o.dataset.train_labels.size();
    j["n_test"] = o.dataset.test_labels.size();
    const auto& tm = o.record.timings;
    j["timings"] = json{{"features", tm.features}, {"gram", tm.gram},   {"surrogate", tm.surrogate},
                        {"solve", tm.solve},       {"evaluation", tm.evaluation}, {"total", tm.total}};
    return j.dump(2) + "\n";
}

bool run_dir_complete(const fs::path& dir) { return fs::is_regular_file(dir / "metrics.json"); }

void write_run_dir(const fs::path& out, const RunConfig& cfg, const RunOutcome& o) {
    fs::path staging = out;
    staging += ".partial";
    fs::remove_all(staging);
    fs::create_directories(staging);

    write_text(staging / "config.json", run_config_to_json(cfg));
    write_text(staging / "history.csv", history_csv(o.record));

    {
        std::ostringstream w;
        const Matrix& m = o.record.final_weights;
        for (Eigen::Index c = 0; c < m.cols(); ++c) w << (c ? "," : "") << "class_" << c;
        w << '\n' << std::setprecision(17);
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) w << (c ? "," : "") << m(r, c);
            w << '\n';
        }
        write_text(staging / "weights.csv", w.str());
    }
    {
        std::ostringstream k;
        const auto& spec = o.conv.spec();
        k << "filter";
        for (std::size_t i = 0; i < spec.kernel; ++i) {
            for (std::size_t jj = 0; jj < spec.kernel; ++jj) k << ",w" << i << '_' << jj;
        }
        k << ",bias\n" << std::setprecision(17);
        for (std::size_t f = 0; f < spec.filters; ++f) {
            k << f;
            for (const double v : o.conv.kernel(f)) k << ',' << v;
            k << ',' << o.conv.biases()[f] << '\n';
        }
        write_text(staging / "conv.csv", k.str());
    }
    {
        std::ostringstream p;
        const Matrix& probs = o.eval.test_probabilities;
        p << "index,true,predicted";
        for (Eigen::Index c = 0; c < probs.cols(); ++c) p << ",p" << c;
        p << '\n' << std::setprecision(10);
        for (Eigen::Index n = 0; n < probs.rows(); ++n) {
            const auto i = static_cast<std::size_t>(n);
            p << i << ',' << o.dataset.test_labels[i] << ',' << o.eval.test_predictions[i];
            for (Eigen::Index c = 0; c < probs.cols(); ++c) p << ',' << probs(n, c);
            p << '\n';
        }
        write_text(staging / "predictions.csv", p.str());
    }
    write_text(staging / "metrics.json", metrics_json(cfg, o));

    fs::remove_all(out);
    if (!out.parent_path().empty()) fs::create_directories(out.parent_path());
    fs::rename(staging, out);
}

namespace {

std::vector<std::vector<double>> read_numeric_csv(const fs::path& file, std::string& header) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open " + file.string());
    std::getline(in, header);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
            } catch (const std::exception&) {
                throw std::runtime_error(file.string() + ":" + std::to_string(line_no) + ": bad number '" + cell + "'");
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

Matrix read_weights_csv(const fs::path& file) {
    std::string header;
    const auto rows = read_numeric_csv(file, header);
    if (rows.empty()) throw std::runtime_error(file.string() + ": no weight rows");
    Matrix w(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows.front().size()) throw std::runtime_error(file.string() + ": ragged rows");
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            w(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    return w;
}

FrozenConv read_conv_csv(const fs::path& file, const ConvSpec& spec) {
    std::string header;
    const auto rows = read_numeric_csv(file, header);
    const std::size_t kk = spec.kernel * spec.kernel;
    if (rows.size() != spec.filters) throw std::runtime_error(file.string() + ": expected one row per filter");
    std::vector<double> weights;
    std::vector<double> biases;
    for (const auto& row : rows) {
        if (row.size() != kk + 2) throw std::runtime_error(file.string() + ": wrong column count");
        weights.insert(weights.end(), row.begin() + 1, row.begin() + 1 + static_cast<std::ptrdiff_t>(kk));
        biases.push_back(row.back());
    }
    return FrozenConv(spec, std::move(weights), std::move(biases));
}

Evaluation evaluate_run_dir(const fs::path& dir, const std::optional<DatasetSource>& source) {
    RunConfig cfg = load_run_config(dir / "config.json");
    if (source) cfg.data = *source;
    const Dataset dataset = load_dataset(cfg.data, cfg.train.seed);
    ConvSpec spec = cfg.conv;
    spec.input_h = dataset.train_images.front().height;
    spec.input_w = dataset.train_images.front().width;
    const FrozenConv conv = read_conv_csv(dir / "conv.csv", spec);
    const Matrix w = read_weights_csv(dir / "weights.csv");
    if (static_cast<std::size_t>(w.rows()) != feature_dim(spec) + 1 ||
        static_cast<std::size_t>(w.cols()) != dataset.num_classes) {
        throw std::runtime_error("weights.csv shape does not match the configuration");
    }
    return evaluate_head(dataset, conv, w);
}

std::vector<QuboSize> qubo_sizes(std::size_t feature_dim, std::span<const std::size_t> bits) {
    std::vector<QuboSize> out;
    for (const auto k : bits) {
        const std::size_t n = (feature_dim + 1) * k;
        out.push_back({k, n, pair_count(n)});
    }
    return out;
}

std::string format_sizes(std::size_t feature_dim, std::span<const std::size_t> bits) {
    std::ostringstream out;
    for (const auto& s : qubo_sizes(feature_dim, bits)) {
        out << "K=" << s.bits << " vars=" << s.variables << " pairs=" << with_thousands(s.pairs) << '\n';
    }
    return out.str();
}

std::string format_percent(double fraction) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(1) << 100.0 * fraction;
    return out.str();
}

}  // namespace gramqubo
