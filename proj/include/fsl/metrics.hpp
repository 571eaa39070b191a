#pragma once

// Confusion matrices and one-vs-rest precision/recall/F1 with macro
// averaging. Degenerate ratios (0/0) are reported as 0.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fsl {

struct ConfusionMatrix {
    std::vector<std::string> class_names;
    // counts[truth][predicted]
    std::vector<std::vector<std::uint64_t>> counts;

    std::size_t num_classes() const noexcept { return class_names.size(); }
    std::uint64_t total() const;
    std::uint64_t trace() const;
    // Rows with support sum to 1; empty rows stay all-zero.
    std::vector<std::vector<double>> normalized() const;

    bool operator==(const ConfusionMatrix&) const = default;
};

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::uint64_t support = 0;

    bool operator==(const ClassMetrics&) const = default;
};

struct MetricsReport {
    double accuracy = 0.0;
    std::vector<ClassMetrics> per_class;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    ConfusionMatrix confusion;

    bool operator==(const MetricsReport&) const = default;
};

// Throws InvalidArgument on empty input ("no samples"), length mismatch or a
// label outside the class order.
ConfusionMatrix confusion(std::span<const std::size_t> truths, std::span<const std::size_t> predictions,
                          std::vector<std::string> class_names);

// Throws InvalidArgument for an empty matrix.
MetricsReport report(const ConfusionMatrix& matrix);

}  // namespace fsl
