#pragma once

// Tape-based reverse-mode differentiation over dense tensors.
//
// A Graph records nodes in creation order, so parents always precede their
// children and the tape is acyclic by construction. backward() walks the
// tape in reverse, visiting only nodes that reach the loss.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fsl/tensor.hpp"

namespace fsl {

using NodeId = std::size_t;
using ParamId = std::size_t;

enum class OpKind {
    Input,
    Parameter,
    MatMul,
    Add,
    Sub,
    AddRowBias,
    Relu,
    Square,
    Scale,
    AddScalar,
    Sum,
    Mean,
    Reshape,
    Conv2d,
    MaxPool2d,
    Gather,
    GatherRows,
    GroupMean,
    SqDistance,
    Distance,
    ReduceMax,
    ReduceMin,
    SoftmaxCrossEntropy,
};

const char* to_string(OpKind kind);

template <typename T>
struct Parameter {
    std::string name;
    Tensor<T> value;
};

// Owns the trainable tensors of a model. Ids are dense indices.
template <typename T>
class ParameterStore {
public:
    ParamId add(std::string name, Tensor<T> value) {
        params_.push_back({std::move(name), std::move(value)});
        return params_.size() - 1;
    }

    std::size_t size() const noexcept { return params_.size(); }
    Tensor<T>& value(ParamId id) { return params_.at(id).value; }
    const Tensor<T>& value(ParamId id) const { return params_.at(id).value; }
    const std::string& name(ParamId id) const { return params_.at(id).name; }

    std::vector<Parameter<T>>& entries() noexcept { return params_; }
    const std::vector<Parameter<T>>& entries() const noexcept { return params_; }

    std::size_t numel() const {
        std::size_t n = 0;
        for (const auto& p : params_) n += p.value.size();
        return n;
    }

    // Order-sensitive FNV-1a over names, shapes and raw bytes.
    std::uint64_t checksum() const;

private:
    std::vector<Parameter<T>> params_;
};

// Gradient per parameter, indexed by ParamId.
template <typename T>
using Gradients = std::vector<Tensor<T>>;

template <typename T>
class Graph {
public:
    // With check_finite set, any NaN/Inf in a forward value or adjoint throws
    // NumericError naming the node.
    explicit Graph(const ParameterStore<T>* params = nullptr, bool check_finite = false);

    NodeId input(Tensor<T> value);
    NodeId parameter(ParamId id);

    NodeId matmul(NodeId a, NodeId b);
    NodeId add(NodeId a, NodeId b);
    NodeId sub(NodeId a, NodeId b);
    // x [N x M] plus bias [M] broadcast over rows.
    NodeId add_row_bias(NodeId x, NodeId bias);
    // relu'(0) is taken as 0.
    NodeId relu(NodeId x);
    NodeId square(NodeId x);
    NodeId scale(NodeId x, T factor);
    NodeId add_scalar(NodeId x, T offset);
    NodeId sum(NodeId x);
    NodeId mean(NodeId x);
    NodeId reshape(NodeId x, Shape shape);

    // x [B,C,H,W], weight [O,C,3,3], bias [O]; stride 1, zero padding 1.
    NodeId conv2d_3x3(NodeId x, NodeId weight, NodeId bias);
    // 2x2 window, stride 2, trailing odd row/column dropped.
    NodeId max_pool_2x2(NodeId x);

    // Flat-index gather into a rank-1 result.
    NodeId gather(NodeId x, std::vector<std::size_t> flat_indices);
    NodeId gather_rows(NodeId x, std::vector<std::size_t> rows);
    // Row g of the result is the mean of the rows of x listed in groups[g].
    NodeId group_mean(NodeId x, std::vector<std::vector<std::size_t>> groups);

    // Pairwise distances between rows: a [Q x D], b [C x D] -> [Q x C].
    NodeId sq_distance(NodeId a, NodeId b);
    // Unsquared; the derivative at zero distance is taken as 0.
    NodeId distance(NodeId a, NodeId b);

    // Scalar reductions; the gradient flows to the first extremal entry.
    NodeId reduce_max(NodeId x);
    NodeId reduce_min(NodeId x);

    // Mean over rows of -log(max(softmax(logits)[label], floor)).
    NodeId softmax_cross_entropy(NodeId logits, std::vector<std::size_t> labels, T log_floor);

    const Tensor<T>& value(NodeId id) const { return nodes_.at(id).value; }
    const Tensor<T>& adjoint(NodeId id) const { return nodes_.at(id).adjoint; }
    OpKind kind(NodeId id) const { return nodes_.at(id).kind; }
    std::size_t size() const noexcept { return nodes_.size(); }

    // Reverse sweep from a scalar loss. Returns a gradient for every
    // parameter in the store; parameters off every path get zeros.
    Gradients<T> backward(NodeId loss);

    // Hash of every discrete branch taken during the forward pass (relu
    // masks, pooling/argmax winners, distance guards, log floor clamps).
    // Two parameter points with equal signatures lie in the same smooth piece.
    std::uint64_t decision_signature() const noexcept { return signature_; }

private:
    struct Node {
        OpKind kind;
        std::vector<NodeId> parents;
        Tensor<T> value;
        Tensor<T> adjoint;
        ParamId param = 0;
        std::function<void(Graph&, NodeId)> backward;
    };

    NodeId push(OpKind kind, std::vector<NodeId> parents, Tensor<T> value,
                std::function<void(Graph&, NodeId)> backward);
    Tensor<T>& grad_of(NodeId id);
    void record(std::uint64_t decision);
    void check_node(NodeId id, const Tensor<T>& t, const char* phase) const;
    NodeId reduce_extreme(NodeId x, bool take_max);

    const ParameterStore<T>* params_;
    bool check_finite_;
    std::vector<Node> nodes_;
    std::uint64_t signature_ = 1469598103934665603ULL;
};

// Runs the reverse sweep of an already-built graph.
template <typename T>
Gradients<T> forward_backward(Graph<T>& graph, NodeId loss) {
    return graph.backward(loss);
}

extern template class Graph<float>;
extern template class Graph<double>;
extern template class ParameterStore<float>;
extern template class ParameterStore<double>;

}  // namespace fsl
