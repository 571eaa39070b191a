#pragma once

// Embedding networks standing in for pre-trained backbones.
//
//   mlp               [D] -> hidden... (relu) -> embedding
//   conv-toy          [C,H,W] -> blocks of {conv3x3, relu, maxpool 2x2}
//                     -> flatten -> linear -> embedding
//   frozen-projection precomputed [source_dim] vector -> linear -> embedding
//
// Parameters are drawn He-uniform, U(-sqrt(6/fan_in), sqrt(6/fan_in)), from a
// mt19937_64 seeded with spec.seed. Biases start at zero.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fsl/autodiff.hpp"
#include "fsl/embedding_store.hpp"

namespace fsl {

enum class EncoderKind { Mlp, ConvToy, FrozenProjection };
enum class InitScheme { HeUniform, Identity };

const char* to_string(EncoderKind kind);
EncoderKind encoder_kind_from_string(const std::string& name);

struct EncoderSpec {
    EncoderKind kind = EncoderKind::Mlp;
    // mlp: {D}; conv-toy: {C, H, W}; frozen-projection: {source_dim}
    Shape input_shape;
    std::size_t embedding_dim = 128;
    // mlp: hidden widths; conv-toy: output channels per block.
    std::vector<std::size_t> hidden;
    std::uint64_t seed = 0;
    // Identity is only valid for a square frozen projection.
    InitScheme init = InitScheme::HeUniform;

    void validate() const;
    std::size_t input_numel() const { return shape_numel(input_shape); }
    bool operator==(const EncoderSpec&) const = default;
};

// The reference 4-block, 64-channel backbone on the given image shape.
EncoderSpec conv_toy_reference(Shape image_shape, std::size_t embedding_dim = 128, std::uint64_t seed = 0);

template <typename T>
class Encoder {
public:
    // Validates the spec and initializes parameters (init_encoder).
    explicit Encoder(EncoderSpec spec);
    // Adopts existing parameters, checking names and shapes against the spec.
    Encoder(EncoderSpec spec, ParameterStore<T> params);

    const EncoderSpec& spec() const noexcept { return spec_; }
    ParameterStore<T>& params() noexcept { return params_; }
    const ParameterStore<T>& params() const noexcept { return params_; }

    // batch: [B x input_numel] rows. Returns a [B x embedding_dim] node.
    NodeId forward(Graph<T>& graph, NodeId batch) const;

    Tensor<T> embed(const Tensor<T>& batch) const;

    std::size_t output_dim() const noexcept { return spec_.embedding_dim; }

private:
    void check_batch(const Tensor<T>& batch) const;

    EncoderSpec spec_;
    ParameterStore<T> params_;
};

template <typename T>
Encoder<T> init_encoder(const EncoderSpec& spec) {
    return Encoder<T>(spec);
}

// Rows of the store for the given ids, in order. Throws InvalidArgument
// naming the first unknown id.
template <typename T>
Tensor<T> gather_frozen(const FrozenEmbeddingStore& store, std::span<const std::string> ids);

// Frozen-projection embedding straight from store ids.
template <typename T>
Tensor<T> embed_frozen(const Encoder<T>& encoder, const FrozenEmbeddingStore& store,
                       std::span<const std::string> ids);

// Reads an FSEB file.
FrozenEmbeddingStore load_frozen(const std::string& path);

extern template class Encoder<float>;
extern template class Encoder<double>;

}  // namespace fsl
