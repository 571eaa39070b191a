#pragma once

#include <cstdint>
#include <vector>

#include "fsl/autodiff.hpp"

namespace fsl {

template <typename T>
struct AdamState {
    std::vector<Tensor<T>> first_moment;
    std::vector<Tensor<T>> second_moment;
    std::uint64_t step = 0;
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    // Zero moments shaped like the store's parameters.
    static AdamState for_params(const ParameterStore<T>& params, double learning_rate = 1e-4);
};

// One bias-corrected Adam update of every parameter; increments step.
// Throws ShapeError if grads or moments disagree with the parameter shapes.
template <typename T>
void adam_step(ParameterStore<T>& params, const Gradients<T>& grads, AdamState<T>& state);

}  // namespace fsl
