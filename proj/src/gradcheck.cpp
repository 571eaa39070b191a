#include "fsl/gradcheck.hpp"

namespace fsl {

TensorD finite_diff_grad(const ScalarFn& loss_fn, const TensorD& params, double h) {
    if (!(h > 0.0)) throw InvalidArgument("finite_diff_grad: step h must be positive");
    TensorD grad(params.shape());
    TensorD probe = params;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double x = params[i];
        probe[i] = x + h;
        const double up = loss_fn(probe);
        probe[i] = x - h;
        const double down = loss_fn(probe);
        probe[i] = x;
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

CheckedGradient finite_diff_grad_checked(const SignedScalarFn& loss_fn, const TensorD& params, double h) {
    if (!(h > 0.0)) throw InvalidArgument("finite_diff_grad: step h must be positive");
    CheckedGradient out{TensorD(params.shape()), std::vector<unsigned char>(params.size(), 0)};
    const std::uint64_t base = loss_fn(params).signature;
    TensorD probe = params;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double x = params[i];
        probe[i] = x + h;
        const SignedValue up = loss_fn(probe);
        probe[i] = x - h;
        const SignedValue down = loss_fn(probe);
        probe[i] = x;
        out.gradient[i] = (up.value - down.value) / (2.0 * h);
        out.near_kink[i] = up.signature != base || down.signature != base;
    }
    return out;
}

}  // namespace fsl
