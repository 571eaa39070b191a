#pragma once

// Central finite-difference gradient oracle, evaluated in double precision.

#include <cstdint>
#include <functional>
#include <vector>

#include "fsl/tensor.hpp"

namespace fsl {

using ScalarFn = std::function<double(const TensorD&)>;

// (f(x + h e_i) - f(x - h e_i)) / 2h for every coordinate i.
TensorD finite_diff_grad(const ScalarFn& loss_fn, const TensorD& params, double h);

// A loss evaluation paired with the discrete-branch signature of the
// forward pass that produced it (see Graph::decision_signature).
struct SignedValue {
    double value;
    std::uint64_t signature;
};

using SignedScalarFn = std::function<SignedValue(const TensorD&)>;

struct CheckedGradient {
    TensorD gradient;
    // 1 where x - h, x and x + h took different branches, i.e. a kink lies
    // within h of the coordinate and the difference quotient is unreliable.
    std::vector<unsigned char> near_kink;
};

CheckedGradient finite_diff_grad_checked(const SignedScalarFn& loss_fn, const TensorD& params, double h);

// |analytic - numeric| <= atol + rtol * |numeric|
inline bool gradients_close(double analytic, double numeric, double rtol, double atol) {
    const double diff = analytic > numeric ? analytic - numeric : numeric - analytic;
    const double mag = numeric < 0 ? -numeric : numeric;
    return diff <= atol + rtol * mag;
}

}  // namespace fsl
