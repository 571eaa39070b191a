#include "fsl/protonet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fsl/kernels.hpp"

namespace fsl {

template <typename T>
PrototypeSet<T> compute_prototypes(const std::vector<Tensor<T>>& groups, std::vector<std::size_t> classes) {
    if (groups.empty()) throw InvalidArgument("compute_prototypes: no class groups");
    if (classes.empty()) {
        classes.resize(groups.size());
        std::iota(classes.begin(), classes.end(), std::size_t{0});
    }
    if (classes.size() != groups.size()) throw InvalidArgument("compute_prototypes: class list/group count differ");
    const std::size_t d = groups[0].rank() == 2 ? groups[0].dim(1) : 0;
    Tensor<T> matrix(Shape{groups.size(), std::max<std::size_t>(d, 1)});
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const Tensor<T>& grp = groups[g];
        if (grp.rank() != 2 || grp.size() == 0) {
            throw InvalidArgument("compute_prototypes: class group " + std::to_string(g) + " is empty");
        }
        if (grp.dim(1) != d) throw ShapeError("compute_prototypes: embedding dims differ between groups");
        // sorted column sums
        std::vector<T> column(grp.dim(0));
        const T n = static_cast<T>(grp.dim(0));
        for (std::size_t k = 0; k < d; ++k) {
            for (std::size_t r = 0; r < grp.dim(0); ++r) column[r] = grp[r * d + k];
            std::sort(column.begin(), column.end());
            T total{0};
            for (T v : column) total += v;
            matrix[g * d + k] = total / n;
        }
    }
    return {std::move(classes), std::move(matrix)};
}

template <typename T>
Tensor<T> sq_euclidean(const Tensor<T>& queries, const Tensor<T>& prototypes) {
    return kernels::sq_euclidean(queries, prototypes);
}

template <typename T>
std::vector<QueryPrediction<T>> classify(const Tensor<T>& queries, const Tensor<T>& prototypes) {
    const Tensor<T> dist = kernels::sq_euclidean(queries, prototypes);
    Tensor<T> neg = dist;
    for (auto& v : neg.vec()) v = -v;
    const Tensor<T> probs = kernels::softmax_rows(neg);
    const std::size_t q = dist.dim(0);
    std::vector<QueryPrediction<T>> out(q);
    for (std::size_t i = 0; i < q; ++i) {
        auto drow = dist.row(i);
        auto prow = probs.row(i);
        out[i].distances.assign(drow.begin(), drow.end());
        out[i].probabilities.assign(prow.begin(), prow.end());
        out[i].predicted = kernels::argmin(out[i].distances);
    }
    return out;
}

template <typename T>
T ce_loss(const std::vector<QueryPrediction<T>>& predictions, std::span<const std::size_t> labels) {
    if (predictions.empty()) throw InvalidArgument("ce_loss: no predictions");
    if (labels.size() != predictions.size()) throw InvalidArgument("ce_loss: label count differs from predictions");
    T total{0};
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const auto& p = predictions[i].probabilities;
        if (labels[i] >= p.size()) {
            throw InvalidArgument("ce_loss: label " + std::to_string(labels[i]) + " outside the " +
                                  std::to_string(p.size()) + "-class order");
        }
        total -= std::log(std::max(p[labels[i]], static_cast<T>(kLogFloor)));
    }
    return total / static_cast<T>(predictions.size());
}

std::vector<std::vector<std::size_t>> EpisodeLayout::support_groups() const {
    std::vector<std::vector<std::size_t>> groups(n_way);
    for (std::size_t c = 0; c < n_way; ++c)
        for (std::size_t j = 0; j < k_shot; ++j) groups[c].push_back(c * k_shot + j);
    return groups;
}

std::vector<std::size_t> EpisodeLayout::support_rows_list() const {
    std::vector<std::size_t> rows(support_rows());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return rows;
}

std::vector<std::size_t> EpisodeLayout::query_rows_list() const {
    std::vector<std::size_t> rows(query_rows());
    std::iota(rows.begin(), rows.end(), support_rows());
    return rows;
}

std::vector<std::size_t> EpisodeLayout::query_labels() const {
    std::vector<std::size_t> labels;
    labels.reserve(query_rows());
    for (std::size_t c = 0; c < n_way; ++c) labels.insert(labels.end(), q_query, c);
    return labels;
}

template <typename T>
ProtoHeadNodes<T> build_proto_head(Graph<T>& graph, NodeId embeddings, const EpisodeLayout& layout) {
    if (graph.value(embeddings).rank() != 2 || graph.value(embeddings).dim(0) != layout.rows()) {
        throw ShapeError("episode embeddings " + shape_str(graph.value(embeddings).shape()) + " do not match a " +
                         std::to_string(layout.rows()) + "-row episode layout");
    }
    ProtoHeadNodes<T> h{};
    h.support = graph.gather_rows(embeddings, layout.support_rows_list());
    h.queries = graph.gather_rows(embeddings, layout.query_rows_list());
    h.prototypes = graph.group_mean(h.support, layout.support_groups());
    h.distances = graph.sq_distance(h.queries, h.prototypes);
    const NodeId logits = graph.scale(h.distances, T{-1});
    h.ce = graph.softmax_cross_entropy(logits, layout.query_labels(), static_cast<T>(kLogFloor));
    return h;
}

#define FSL_INSTANTIATE(T)                                                                                  \
    template PrototypeSet<T> compute_prototypes(const std::vector<Tensor<T>>&, std::vector<std::size_t>); \
    template Tensor<T> sq_euclidean(const Tensor<T>&, const Tensor<T>&);                                  \
    template std::vector<QueryPrediction<T>> classify(const Tensor<T>&, const Tensor<T>&);                \
    template T ce_loss(const std::vector<QueryPrediction<T>>&, std::span<const std::size_t>);             \
    template ProtoHeadNodes<T> build_proto_head(Graph<T>&, NodeId, const EpisodeLayout&);

FSL_INSTANTIATE(float)
FSL_INSTANTIATE(double)
#undef FSL_INSTANTIATE

}  // namespace fsl
