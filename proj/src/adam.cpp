#include "fsl/adam.hpp"

#include <cmath>

namespace fsl {

template <typename T>
AdamState<T> AdamState<T>::for_params(const ParameterStore<T>& params, double learning_rate) {
    AdamState state;
    state.learning_rate = learning_rate;
    for (const auto& p : params.entries()) {
        state.first_moment.emplace_back(p.value.shape());
        state.second_moment.emplace_back(p.value.shape());
    }
    return state;
}

template <typename T>
void adam_step(ParameterStore<T>& params, const Gradients<T>& grads, AdamState<T>& state) {
    const std::size_t n = params.size();
    if (grads.size() != n || state.first_moment.size() != n || state.second_moment.size() != n) {
        throw ShapeError("adam_step: " + std::to_string(n) + " parameters, " + std::to_string(grads.size()) +
                         " gradients, " + std::to_string(state.first_moment.size()) + " moment slots");
    }
    for (std::size_t i = 0; i < n; ++i) {
        const Shape& s = params.value(i).shape();
        if (grads[i].shape() != s || state.first_moment[i].shape() != s || state.second_moment[i].shape() != s) {
            throw ShapeError("adam_step: shape mismatch for parameter '" + params.name(i) + "' " + shape_str(s));
        }
    }

    const std::uint64_t t = state.step + 1;
    const double b1 = state.beta1, b2 = state.beta2;
    const double correction1 = 1.0 - std::pow(b1, static_cast<double>(t));
    const double correction2 = 1.0 - std::pow(b2, static_cast<double>(t));
    for (std::size_t i = 0; i < n; ++i) {
        Tensor<T>& w = params.value(i);
        Tensor<T>& m = state.first_moment[i];
        Tensor<T>& v = state.second_moment[i];
        const Tensor<T>& g = grads[i];
        for (std::size_t k = 0; k < w.size(); ++k) {
            const double gk = g[k];
            const double mk = b1 * m[k] + (1.0 - b1) * gk;
            const double vk = b2 * v[k] + (1.0 - b2) * gk * gk;
            m[k] = static_cast<T>(mk);
            v[k] = static_cast<T>(vk);
            const double m_hat = mk / correction1;
            const double v_hat = vk / correction2;
            w[k] = static_cast<T>(w[k] - state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon));
        }
    }
    state.step = t;
}

template struct AdamState<float>;
template struct AdamState<double>;
template void adam_step(ParameterStore<float>&, const Gradients<float>&, AdamState<float>&);
template void adam_step(ParameterStore<double>&, const Gradients<double>&, AdamState<double>&);

}  // namespace fsl
