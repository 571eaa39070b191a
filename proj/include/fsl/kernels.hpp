#pragma once

// Plain (non-differentiable) dense kernels shared by the graph ops and the
// pure protonet functions.

#include <algorithm>
#include <cmath>
#include <limits>

#include "fsl/tensor.hpp"

namespace fsl::kernels {

template <typename T>
void require_matrix(const Tensor<T>& t, const char* what) {
    if (t.rank() != 2) {
        throw ShapeError(std::string(what) + " must be a matrix, got shape " + shape_str(t.shape()));
    }
}

// out[i,j] = sum_k a[i,k] * b[k,j]
template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
    require_matrix(a, "matmul lhs");
    require_matrix(b, "matmul rhs");
    const std::size_t n = a.dim(0), k = a.dim(1), m = b.dim(1);
    if (b.dim(0) != k) {
        throw ShapeError("matmul inner dimensions differ: " + shape_str(a.shape()) + " x " +
                         shape_str(b.shape()));
    }
    Tensor<T> out(Shape{n, m});
    for (std::size_t i = 0; i < n; ++i) {
        T* orow = &out[i * m];
        for (std::size_t p = 0; p < k; ++p) {
            const T av = a[i * k + p];
            if (av == T{0}) continue;
            const T* brow = &b[p * m];
            for (std::size_t j = 0; j < m; ++j) orow[j] += av * brow[j];
        }
    }
    return out;
}

// Pairwise squared Euclidean distances: out[q,c] = sum_d (x[q,d] - p[c,d])^2.
template <typename T>
Tensor<T> sq_euclidean(const Tensor<T>& x, const Tensor<T>& p) {
    require_matrix(x, "distance lhs");
    require_matrix(p, "distance rhs");
    if (x.dim(1) != p.dim(1)) {
        throw ShapeError("distance operands differ in embedding dim: " + shape_str(x.shape()) +
                         " vs " + shape_str(p.shape()));
    }
    const std::size_t q = x.dim(0), c = p.dim(0), d = x.dim(1);
    Tensor<T> out(Shape{q, c});
    for (std::size_t i = 0; i < q; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
            T acc{0};
            for (std::size_t k = 0; k < d; ++k) {
                const T diff = x[i * d + k] - p[j * d + k];
                acc += diff * diff;
            }
            out[i * c + j] = acc;
        }
    }
    return out;
}

template <typename T>
Tensor<T> euclidean(const Tensor<T>& x, const Tensor<T>& p) {
    Tensor<T> out = sq_euclidean(x, p);
    for (auto& v : out.vec()) v = std::sqrt(v);
    return out;
}

// Row-wise softmax with max subtraction.
template <typename T>
Tensor<T> softmax_rows(const Tensor<T>& logits) {
    require_matrix(logits, "softmax input");
    Tensor<T> out(logits.shape());
    const std::size_t n = logits.dim(0), c = logits.dim(1);
    for (std::size_t i = 0; i < n; ++i) {
        T mx = -std::numeric_limits<T>::infinity();
        for (std::size_t j = 0; j < c; ++j) mx = std::max(mx, logits[i * c + j]);
        T total{0};
        for (std::size_t j = 0; j < c; ++j) {
            const T e = std::exp(logits[i * c + j] - mx);
            out[i * c + j] = e;
            total += e;
        }
        for (std::size_t j = 0; j < c; ++j) out[i * c + j] /= total;
    }
    return out;
}

// First index of the maximum (lowest index wins ties).
template <typename Range>
std::size_t argmax(const Range& values) {
    std::size_t best = 0;
    std::size_t i = 0;
    for (auto it = std::begin(values); it != std::end(values); ++it, ++i) {
        if (*it > *(std::begin(values) + best)) best = i;
    }
    return best;
}

template <typename Range>
std::size_t argmin(const Range& values) {
    std::size_t best = 0;
    std::size_t i = 0;
    for (auto it = std::begin(values); it != std::end(values); ++it, ++i) {
        if (*it < *(std::begin(values) + best)) best = i;
    }
    return best;
}

}  // namespace fsl::kernels
