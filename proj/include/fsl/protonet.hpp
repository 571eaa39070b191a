#pragma once

// Prototypical classification head. Classification uses squared Euclidean
// distance; probabilities are softmax(-distance) with max subtraction.

#include <span>
#include <vector>

#include "fsl/autodiff.hpp"

namespace fsl {

inline constexpr double kLogFloor = 1e-12;

template <typename T>
struct PrototypeSet {
    std::vector<std::size_t> classes;
    Tensor<T> matrix;  // [n_way x D], row i is the prototype of classes[i]
};

template <typename T>
struct QueryPrediction {
    std::vector<T> probabilities;
    std::vector<T> distances;
    std::size_t predicted = 0;  // argmin distance, lowest position on ties
};

// Row i of the result is the mean of groups[i] ([K_i x D]). classes defaults
// to 0..n-1 when empty.
template <typename T>
PrototypeSet<T> compute_prototypes(const std::vector<Tensor<T>>& groups, std::vector<std::size_t> classes = {});

// [Q x C] with entry (q, c) = sum_d (x_qd - p_cd)^2.
template <typename T>
Tensor<T> sq_euclidean(const Tensor<T>& queries, const Tensor<T>& prototypes);

template <typename T>
std::vector<QueryPrediction<T>> classify(const Tensor<T>& queries, const Tensor<T>& prototypes);

// Mean over queries of -log(max(p_label, kLogFloor)). labels are positions
// in the prototype order.
template <typename T>
T ce_loss(const std::vector<QueryPrediction<T>>& predictions, std::span<const std::size_t> labels);

// Row layout of an episode batch: the n_way support groups of k_shot rows
// (class-major) followed by the n_way query groups of q_query rows.
struct EpisodeLayout {
    std::size_t n_way = 0;
    std::size_t k_shot = 0;
    std::size_t q_query = 0;

    std::size_t support_rows() const noexcept { return n_way * k_shot; }
    std::size_t query_rows() const noexcept { return n_way * q_query; }
    std::size_t rows() const noexcept { return support_rows() + query_rows(); }

    std::vector<std::vector<std::size_t>> support_groups() const;
    std::vector<std::size_t> query_rows_list() const;
    std::vector<std::size_t> support_rows_list() const;
    // Position label of every query row.
    std::vector<std::size_t> query_labels() const;
};

template <typename T>
struct ProtoHeadNodes {
    NodeId prototypes;
    NodeId support;
    NodeId queries;
    NodeId distances;  // squared, [n_way*q_query x n_way]
    NodeId ce;
};

// Builds prototypes, distances and cross-entropy on top of an embedding node
// laid out as described by layout.
template <typename T>
ProtoHeadNodes<T> build_proto_head(Graph<T>& graph, NodeId embeddings, const EpisodeLayout& layout);

}  // namespace fsl
