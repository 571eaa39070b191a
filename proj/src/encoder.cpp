#include "fsl/encoder.hpp"

#include <cmath>
#include <random>

#include "fsl/io/fseb.hpp"

namespace fsl {

const char* to_string(EncoderKind kind) {
    switch (kind) {
        case EncoderKind::Mlp: return "mlp";
        case EncoderKind::ConvToy: return "conv-toy";
        case EncoderKind::FrozenProjection: return "frozen-projection";
    }
    return "unknown";
}

EncoderKind encoder_kind_from_string(const std::string& name) {
    if (name == "mlp") return EncoderKind::Mlp;
    if (name == "conv-toy") return EncoderKind::ConvToy;
    if (name == "frozen-projection") return EncoderKind::FrozenProjection;
    throw InvalidArgument("unknown encoder kind '" + name + "'");
}

namespace {

struct ParamSlot {
    std::string name;
    Shape shape;
    std::size_t fan_in;  // 0 for biases
};

std::vector<ParamSlot> layout(const EncoderSpec& spec) {
    std::vector<ParamSlot> slots;
    switch (spec.kind) {
        case EncoderKind::Mlp: {
            std::size_t in = spec.input_shape[0];
            for (std::size_t i = 0; i < spec.hidden.size(); ++i) {
                const std::size_t out = spec.hidden[i];
                slots.push_back({"fc" + std::to_string(i) + ".weight", {in, out}, in});
                slots.push_back({"fc" + std::to_string(i) + ".bias", {out}, 0});
                in = out;
            }
            slots.push_back({"head.weight", {in, spec.embedding_dim}, in});
            slots.push_back({"head.bias", {spec.embedding_dim}, 0});
            break;
        }
        case EncoderKind::ConvToy: {
            std::size_t c = spec.input_shape[0], h = spec.input_shape[1], w = spec.input_shape[2];
            for (std::size_t i = 0; i < spec.hidden.size(); ++i) {
                const std::size_t o = spec.hidden[i];
                slots.push_back({"conv" + std::to_string(i) + ".weight", {o, c, 3, 3}, c * 9});
                slots.push_back({"conv" + std::to_string(i) + ".bias", {o}, 0});
                c = o;
                h /= 2;
                w /= 2;
            }
            const std::size_t flat = c * h * w;
            slots.push_back({"head.weight", {flat, spec.embedding_dim}, flat});
            slots.push_back({"head.bias", {spec.embedding_dim}, 0});
            break;
        }
        case EncoderKind::FrozenProjection: {
            const std::size_t in = spec.input_shape[0];
            slots.push_back({"proj.weight", {in, spec.embedding_dim}, in});
            slots.push_back({"proj.bias", {spec.embedding_dim}, 0});
            break;
        }
    }
    return slots;
}

}  // namespace

void EncoderSpec::validate() const {
    if (embedding_dim < 2) {
        throw InvalidArgument("embedding dim must be >= 2, got " + std::to_string(embedding_dim));
    }
    for (std::size_t d : input_shape) {
        if (d == 0) throw InvalidArgument("input shape has a zero dimension: " + shape_str(input_shape));
    }
    for (std::size_t w : hidden) {
        if (w == 0) throw InvalidArgument("hidden widths must be positive");
    }
    switch (kind) {
        case EncoderKind::Mlp:
        case EncoderKind::FrozenProjection:
            if (input_shape.size() != 1) {
                throw InvalidArgument(std::string(to_string(kind)) + " encoder needs a rank-1 input shape, got " +
                                      shape_str(input_shape));
            }
            if (kind == EncoderKind::FrozenProjection && !hidden.empty()) {
                throw InvalidArgument("frozen-projection encoder takes no hidden layers");
            }
            break;
        case EncoderKind::ConvToy: {
            if (input_shape.size() != 3) {
                throw InvalidArgument("conv-toy encoder needs a [C,H,W] input shape, got " + shape_str(input_shape));
            }
            if (hidden.empty()) throw InvalidArgument("conv-toy encoder needs at least one block");
            std::size_t h = input_shape[1], w = input_shape[2];
            for (std::size_t i = 0; i < hidden.size(); ++i) {
                if (h < 2 || w < 2) {
                    throw InvalidArgument("conv-toy block " + std::to_string(i) + " receives a " + std::to_string(h) +
                                          "x" + std::to_string(w) + " map, too small to pool");
                }
                h /= 2;
                w /= 2;
            }
            break;
        }
    }
    if (init == InitScheme::Identity &&
        (kind != EncoderKind::FrozenProjection || input_shape[0] != embedding_dim)) {
        throw InvalidArgument("identity init requires a square frozen projection");
    }
}

EncoderSpec conv_toy_reference(Shape image_shape, std::size_t embedding_dim, std::uint64_t seed) {
    EncoderSpec spec;
    spec.kind = EncoderKind::ConvToy;
    spec.input_shape = std::move(image_shape);
    spec.embedding_dim = embedding_dim;
    spec.hidden = {64, 64, 64, 64};
    spec.seed = seed;
    return spec;
}

template <typename T>
Encoder<T>::Encoder(EncoderSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    std::mt19937_64 rng(spec_.seed);
    for (const ParamSlot& slot : layout(spec_)) {
        Tensor<T> value(slot.shape);
        if (slot.fan_in > 0) {
            if (spec_.init == InitScheme::Identity) {
                for (std::size_t i = 0; i < slot.shape[0]; ++i) value.at(i, i) = T{1};
            } else {
                const double limit = std::sqrt(6.0 / static_cast<double>(slot.fan_in));
                std::uniform_real_distribution<double> dist(-limit, limit);
                for (auto& v : value.vec()) v = static_cast<T>(dist(rng));
            }
        }
        params_.add(slot.name, std::move(value));
    }
}

template <typename T>
Encoder<T>::Encoder(EncoderSpec spec, ParameterStore<T> params) : spec_(std::move(spec)), params_(std::move(params)) {
    spec_.validate();
    const auto slots = layout(spec_);
    if (slots.size() != params_.size()) {
        throw ShapeError("encoder expects " + std::to_string(slots.size()) + " parameters, got " +
                         std::to_string(params_.size()));
    }
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i].name != params_.name(i) || slots[i].shape != params_.value(i).shape()) {
            throw ShapeError("parameter " + std::to_string(i) + " is '" + params_.name(i) + "' " +
                             shape_str(params_.value(i).shape()) + ", expected '" + slots[i].name + "' " +
                             shape_str(slots[i].shape));
        }
    }
}

template <typename T>
void Encoder<T>::check_batch(const Tensor<T>& batch) const {
    if (batch.rank() != 2 || batch.dim(1) != spec_.input_numel()) {
        throw ShapeError("encoder expects [B x " + std::to_string(spec_.input_numel()) + "] input, got " +
                         shape_str(batch.shape()));
    }
}

template <typename T>
NodeId Encoder<T>::forward(Graph<T>& graph, NodeId batch) const {
    check_batch(graph.value(batch));
    const std::size_t b = graph.value(batch).dim(0);
    ParamId next = 0;
    auto linear = [&](NodeId x) {
        const NodeId w = graph.parameter(next++);
        const NodeId bias = graph.parameter(next++);
        return graph.add_row_bias(graph.matmul(x, w), bias);
    };

    switch (spec_.kind) {
        case EncoderKind::Mlp: {
            NodeId x = batch;
            for (std::size_t i = 0; i < spec_.hidden.size(); ++i) x = graph.relu(linear(x));
            return linear(x);
        }
        case EncoderKind::ConvToy: {
            NodeId x = graph.reshape(batch, {b, spec_.input_shape[0], spec_.input_shape[1], spec_.input_shape[2]});
            for (std::size_t i = 0; i < spec_.hidden.size(); ++i) {
                const NodeId w = graph.parameter(next++);
                const NodeId bias = graph.parameter(next++);
                x = graph.max_pool_2x2(graph.relu(graph.conv2d_3x3(x, w, bias)));
            }
            const std::size_t flat = graph.value(x).size() / b;
            return linear(graph.reshape(x, {b, flat}));
        }
        case EncoderKind::FrozenProjection:
            return linear(batch);
    }
    throw InvalidArgument("unhandled encoder kind");
}

template <typename T>
Tensor<T> Encoder<T>::embed(const Tensor<T>& batch) const {
    check_batch(batch);
    Graph<T> graph(&params_);
    const NodeId out = forward(graph, graph.input(batch));
    return graph.value(out);
}

template <typename T>
Tensor<T> gather_frozen(const FrozenEmbeddingStore& store, std::span<const std::string> ids) {
    if (ids.empty()) throw InvalidArgument("empty batch");
    const std::size_t d = store.source_dim();
    Tensor<T> out(Shape{ids.size(), d});
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const std::vector<float>* v = store.find(ids[i]);
        if (v == nullptr) throw InvalidArgument("unknown sample id '" + ids[i] + "'");
        for (std::size_t k = 0; k < d; ++k) out[i * d + k] = static_cast<T>((*v)[k]);
    }
    return out;
}

template <typename T>
Tensor<T> embed_frozen(const Encoder<T>& encoder, const FrozenEmbeddingStore& store,
                       std::span<const std::string> ids) {
    if (encoder.spec().kind != EncoderKind::FrozenProjection) {
        throw InvalidArgument("embed_frozen requires a frozen-projection encoder");
    }
    if (encoder.spec().input_shape[0] != store.source_dim()) {
        throw ShapeError("store dim " + std::to_string(store.source_dim()) + " does not match encoder input " +
                         shape_str(encoder.spec().input_shape));
    }
    return encoder.embed(gather_frozen<T>(store, ids));
}

FrozenEmbeddingStore load_frozen(const std::string& path) {
    return io::read_embedding_store(path);
}

template class Encoder<float>;
template class Encoder<double>;
template Tensor<float> gather_frozen(const FrozenEmbeddingStore&, std::span<const std::string>);
template Tensor<double> gather_frozen(const FrozenEmbeddingStore&, std::span<const std::string>);
template Tensor<float> embed_frozen(const Encoder<float>&, const FrozenEmbeddingStore&, std::span<const std::string>);
template Tensor<double> embed_frozen(const Encoder<double>&, const FrozenEmbeddingStore&,
                                     std::span<const std::string>);

}  // namespace fsl
