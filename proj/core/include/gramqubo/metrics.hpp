#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gramqubo/data.hpp"

namespace gramqubo {

/// Rows are true classes, columns are predicted classes.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(std::size_t num_classes)
        : num_classes_(num_classes), counts_(num_classes * num_classes, 0) {}

    std::size_t num_classes() const { return num_classes_; }
    std::uint64_t at(std::size_t truth, std::size_t predicted) const { return counts_[truth * num_classes_ + predicted]; }
    std::uint64_t& at(std::size_t truth, std::size_t predicted) { return counts_[truth * num_classes_ + predicted]; }
    std::uint64_t total() const;
    std::uint64_t row_sum(std::size_t truth) const;
    std::uint64_t col_sum(std::size_t predicted) const;

private:
    std::size_t num_classes_;
    std::vector<std::uint64_t> counts_;
};

ConfusionMatrix confusion(std::span<const Label> truth, std::span<const Label> predicted, std::size_t num_classes);

/// Macro-averaged one-vs-rest metrics plus chance-corrected agreement.
/// Fractions, not percentages.
struct MetricReport {
    double accuracy = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    double kappa = 0.0;
    double mcc = 0.0;
    std::vector<double> per_class_recall;
};

// Zero denominators give 0 for precision, recall, F1 and MCC; kappa is 0 when p_e = 1.
// MCC is the multiclass correlation over the full matrix, which equals the
// binary TP/TN/FP/FN formula when there are two classes.
MetricReport report(const ConfusionMatrix& cm);

}  // namespace gramqubo
