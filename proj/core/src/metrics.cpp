#include "gramqubo/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace gramqubo {

std::uint64_t ConfusionMatrix::total() const {
    std::uint64_t t = 0;
    for (auto v : counts_) t += v;
    return t;
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t truth) const {
    std::uint64_t t = 0;
    for (std::size_t p = 0; p < num_classes_; ++p) t += at(truth, p);
    return t;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t predicted) const {
    std::uint64_t t = 0;
    for (std::size_t r = 0; r < num_classes_; ++r) t += at(r, predicted);
    return t;
}

ConfusionMatrix confusion(std::span<const Label> truth, std::span<const Label> predicted, std::size_t num_classes) {
    if (truth.size() != predicted.size()) {
        throw std::invalid_argument("confusion: " + std::to_string(truth.size()) + " labels but " +
                                    std::to_string(predicted.size()) + " predictions");
    }
    ConfusionMatrix cm(num_classes);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] >= num_classes || predicted[i] >= num_classes) {
            throw std::invalid_argument("confusion: label out of range at index " + std::to_string(i));
        }
        ++cm.at(truth[i], predicted[i]);
    }
    return cm;
}

MetricReport report(const ConfusionMatrix& cm) {
    const std::size_t c = cm.num_classes();
    const std::uint64_t total_count = cm.total();
    if (total_count == 0) {
        throw std::invalid_argument("report: empty confusion matrix");
    }
    const auto total = static_cast<double>(total_count);

    MetricReport out;
    out.per_class_recall.resize(c);
    double trace = 0.0;
    double chance = 0.0;
    double sum_pt = 0.0;
    double sum_pp = 0.0;
    double sum_tt = 0.0;
    for (std::size_t k = 0; k < c; ++k) {
        const auto tp = static_cast<double>(cm.at(k, k));
        const auto actual = static_cast<double>(cm.row_sum(k));
        const auto predicted = static_cast<double>(cm.col_sum(k));
        const double precision = predicted > 0.0 ? tp / predicted : 0.0;
        const double recall = actual > 0.0 ? tp / actual : 0.0;
        const double f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
        out.macro_precision += precision;
        out.macro_recall += recall;
        out.macro_f1 += f1;
        out.per_class_recall[k] = recall;
        trace += tp;
        chance += actual * predicted;
        sum_pt += predicted * actual;
        sum_pp += predicted * predicted;
        sum_tt += actual * actual;
    }
    const auto classes = static_cast<double>(c);
    out.macro_precision /= classes;
    out.macro_recall /= classes;
    out.macro_f1 /= classes;
    out.accuracy = trace / total;

    const double p_o = out.accuracy;
    const double p_e = chance / (total * total);
    out.kappa = p_e < 1.0 ? (p_o - p_e) / (1.0 - p_e) : 0.0;

    const double denom = (total * total - sum_pp) * (total * total - sum_tt);
    out.mcc = denom > 0.0 ? (trace * total - sum_pt) / std::sqrt(denom) : 0.0;
    return out;
}

}  // namespace gramqubo
