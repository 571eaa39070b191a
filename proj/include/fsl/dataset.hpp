#pragma once

#include <memory>
#include <span>
#include <vector>

#include "fsl/episodes.hpp"
#include "fsl/tensor.hpp"

namespace fsl {

// An index over a shared, immutable float payload. Splits share the payload
// and differ only in their index.
struct Dataset {
    DatasetIndex index;
    Shape sample_shape;
    std::shared_ptr<const std::vector<float>> payload;
    bool normalized = false;

    // Throws InvalidArgument unless every sample range is in bounds, sized
    // like sample_shape, and disjoint from the others.
    void validate() const;

    std::size_t sample_numel() const { return shape_numel(sample_shape); }

    // [positions.size() x sample_numel] batch, one row per referenced sample.
    template <typename T>
    Tensor<T> rows(std::span<const std::size_t> positions) const {
        const std::size_t n = sample_numel();
        Tensor<T> out(Shape{positions.size(), n});
        for (std::size_t i = 0; i < positions.size(); ++i) {
            const SampleRecord& s = index.sample(positions[i]);
            const float* src = payload->data() + s.offset;
            for (std::size_t k = 0; k < n; ++k) out[i * n + k] = static_cast<T>(src[k]);
        }
        return out;
    }

    Dataset with_index(DatasetIndex other) const { return Dataset{std::move(other), sample_shape, payload, normalized}; }
};

}  // namespace fsl
