#include "fsl/metrics.hpp"

#include "fsl/error.hpp"

namespace fsl {

std::uint64_t ConfusionMatrix::total() const {
    std::uint64_t n = 0;
    for (const auto& row : counts)
        for (auto v : row) n += v;
    return n;
}

std::uint64_t ConfusionMatrix::trace() const {
    std::uint64_t n = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) n += counts[i][i];
    return n;
}

std::vector<std::vector<double>> ConfusionMatrix::normalized() const {
    std::vector<std::vector<double>> out(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        std::uint64_t row_total = 0;
        for (auto v : counts[i]) row_total += v;
        out[i].assign(counts[i].size(), 0.0);
        if (row_total == 0) continue;
        for (std::size_t j = 0; j < counts[i].size(); ++j) {
            out[i][j] = static_cast<double>(counts[i][j]) / static_cast<double>(row_total);
        }
    }
    return out;
}

ConfusionMatrix confusion(std::span<const std::size_t> truths, std::span<const std::size_t> predictions,
                          std::vector<std::string> class_names) {
    if (truths.empty()) throw InvalidArgument("no samples");
    if (truths.size() != predictions.size()) {
        throw InvalidArgument("confusion: " + std::to_string(truths.size()) + " truths vs " +
                              std::to_string(predictions.size()) + " predictions");
    }
    const std::size_t c = class_names.size();
    ConfusionMatrix m{std::move(class_names), std::vector<std::vector<std::uint64_t>>(c, std::vector<std::uint64_t>(c, 0))};
    for (std::size_t i = 0; i < truths.size(); ++i) {
        if (truths[i] >= c || predictions[i] >= c) {
            throw InvalidArgument("confusion: label outside the " + std::to_string(c) + "-class order");
        }
        ++m.counts[truths[i]][predictions[i]];
    }
    return m;
}

namespace {

double ratio(std::uint64_t num, std::uint64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

MetricsReport report(const ConfusionMatrix& matrix) {
    const std::uint64_t total = matrix.total();
    if (total == 0 || matrix.num_classes() == 0) throw InvalidArgument("no samples");
    const std::size_t c = matrix.num_classes();
    MetricsReport r;
    r.confusion = matrix;
    r.accuracy = ratio(matrix.trace(), total);
    r.per_class.resize(c);
    for (std::size_t k = 0; k < c; ++k) {
        std::uint64_t tp = matrix.counts[k][k], fp = 0, fn = 0;
        for (std::size_t j = 0; j < c; ++j) {
            if (j == k) continue;
            fp += matrix.counts[j][k];
            fn += matrix.counts[k][j];
        }
        ClassMetrics& m = r.per_class[k];
        m.support = tp + fn;
        m.precision = ratio(tp, tp + fp);
        m.recall = ratio(tp, tp + fn);
        const double denom = m.precision + m.recall;
        m.f1 = denom == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / denom;
        r.macro_precision += m.precision;
        r.macro_recall += m.recall;
        r.macro_f1 += m.f1;
    }
    r.macro_precision /= static_cast<double>(c);
    r.macro_recall /= static_cast<double>(c);
    r.macro_f1 /= static_cast<double>(c);
    return r;
}

}  // namespace fsl
