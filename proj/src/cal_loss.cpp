#include "fsl/cal_loss.hpp"

#include <algorithm>
#include <cmath>

namespace fsl {

namespace {

template <typename T>
double row_distance(std::span<const T> a, std::span<const T> b) {
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double diff = static_cast<double>(a[k]) - static_cast<double>(b[k]);
        acc += diff * diff;
    }
    return std::sqrt(acc);
}

double relu(double x) { return x > 0.0 ? x : 0.0; }

}  // namespace

template <typename T>
CalTerms cal_terms(std::span<const T> prototype, const Tensor<T>& positives, const Tensor<T>& negatives) {
    if (positives.rank() != 2 || positives.size() == 0) throw InvalidArgument("cal_terms: empty positive set");
    if (negatives.rank() != 2 || negatives.size() == 0) throw InvalidArgument("cal_terms: empty negative set");
    if (positives.dim(1) != prototype.size() || negatives.dim(1) != prototype.size()) {
        throw ShapeError("cal_terms: embedding dims differ from the prototype");
    }
    CalTerms t;
    t.n_pos = positives.dim(0);
    t.n_neg = negatives.dim(0);
    double total = 0.0;
    for (std::size_t j = 0; j < t.n_pos; ++j) {
        const double d = row_distance<T>(positives.row(j), prototype);
        total += d;
        t.max_positive = std::max(t.max_positive, d);
    }
    t.central = total / static_cast<double>(t.n_pos);
    t.min_negative = row_distance<T>(negatives.row(0), prototype);
    for (std::size_t k = 1; k < t.n_neg; ++k) {
        t.min_negative = std::min(t.min_negative, row_distance<T>(negatives.row(k), prototype));
    }
    return t;
}

double cal_class_loss(const CalTerms& terms, double margin) {
    return relu(terms.max_positive - terms.min_negative + margin) + relu(terms.max_positive - terms.central);
}

double cal_loss(std::span<const CalTerms> per_class, double margin) {
    if (margin < 0.0) throw InvalidArgument("CAL margin must be >= 0, got " + std::to_string(margin));
    if (per_class.empty()) throw InvalidArgument("cal_loss: no classes");
    double total = 0.0;
    for (const CalTerms& t : per_class) total += cal_class_loss(t, margin);
    return total / static_cast<double>(per_class.size());
}

LossBreakdown combined_loss(double ce, double l_ca, double margin) {
    if (!std::isfinite(ce) || !std::isfinite(l_ca)) throw NumericError("combined_loss: non-finite input");
    if (ce < 0.0 || l_ca < 0.0) throw InvalidArgument("combined_loss: loss terms must be >= 0");
    return LossBreakdown{ce, l_ca, ce + l_ca, margin};
}

template <typename T>
CalNodes<T> build_cal_loss(Graph<T>& graph, NodeId support, NodeId prototypes,
                           const std::vector<std::vector<std::size_t>>& support_groups, T margin) {
    if (margin < T{0}) throw InvalidArgument("CAL margin must be >= 0");
    const std::size_t n_way = support_groups.size();
    if (n_way < 2) throw InvalidArgument("CAL needs at least two classes for negatives");
    if (graph.value(prototypes).dim(0) != n_way) throw ShapeError("CAL: prototype count differs from class groups");

    // dist[s, c] = |support_s - prototype_c|
    const NodeId dist = graph.distance(support, prototypes);
    const std::size_t rows = graph.value(support).dim(0);

    CalNodes<T> out{};
    NodeId total = 0;
    for (std::size_t i = 0; i < n_way; ++i) {
        std::vector<std::size_t> pos, neg;
        std::vector<char> is_pos(rows, 0);
        for (std::size_t r : support_groups[i]) is_pos.at(r) = 1;
        for (std::size_t r = 0; r < rows; ++r) (is_pos[r] ? pos : neg).push_back(r * n_way + i);
        if (pos.empty() || neg.empty()) throw InvalidArgument("CAL: class without positives or negatives");

        const NodeId pos_d = graph.gather(dist, std::move(pos));
        const NodeId neg_d = graph.gather(dist, std::move(neg));
        const NodeId central = graph.mean(pos_d);
        const NodeId dmax = graph.reduce_max(pos_d);
        const NodeId dmin = graph.reduce_min(neg_d);
        const NodeId margin_term = graph.relu(graph.add_scalar(graph.sub(dmax, dmin), margin));
        const NodeId spread_term = graph.relu(graph.sub(dmax, central));
        const NodeId class_loss = graph.add(margin_term, spread_term);
        total = i == 0 ? class_loss : graph.add(total, class_loss);
        out.central.push_back(central);
        out.max_positive.push_back(dmax);
        out.min_negative.push_back(dmin);
    }
    out.loss = graph.scale(total, T{1} / static_cast<T>(n_way));
    return out;
}

template CalTerms cal_terms(std::span<const float>, const Tensor<float>&, const Tensor<float>&);
template CalTerms cal_terms(std::span<const double>, const Tensor<double>&, const Tensor<double>&);
template CalNodes<float> build_cal_loss(Graph<float>&, NodeId, NodeId, const std::vector<std::vector<std::size_t>>&,
                                        float);
template CalNodes<double> build_cal_loss(Graph<double>&, NodeId, NodeId, const std::vector<std::vector<std::size_t>>&,
                                         double);

}  // namespace fsl
