#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fsl/error.hpp"

namespace fsl {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_numel(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ',';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

// Dense row-major array. T is float for training and double for verification.
template <typename T>
class Tensor {
public:
    using value_type = T;

    Tensor() : shape_{0} {}

    explicit Tensor(Shape shape, T fill = T{0}) : shape_(std::move(shape)) {
        check_shape(shape_);
        data_.assign(shape_numel(shape_), fill);
    }

    Tensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
        check_shape(shape_);
        if (shape_numel(shape_) != data_.size()) {
            throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                             " does not match shape " + shape_str(shape_));
        }
    }

    static Tensor scalar(T v) { return Tensor(Shape{1}, std::vector<T>{v}); }

    static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<T> data) {
        return Tensor(Shape{rows, cols}, std::move(data));
    }

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t size() const noexcept { return data_.size(); }
    std::size_t dim(std::size_t i) const { return shape_.at(i); }

    std::size_t rows() const { return shape_.at(0); }
    // Product of all trailing dimensions.
    std::size_t cols() const { return rank() == 0 ? 0 : data_.size() / shape_[0]; }

    std::span<T> data() noexcept { return data_; }
    std::span<const T> data() const noexcept { return data_; }
    std::vector<T>& vec() noexcept { return data_; }
    const std::vector<T>& vec() const noexcept { return data_; }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    T& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
    const T& at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

    std::span<T> row(std::size_t r) { return std::span<T>(data_).subspan(r * cols(), cols()); }
    std::span<const T> row(std::size_t r) const {
        return std::span<const T>(data_).subspan(r * cols(), cols());
    }

    T item() const {
        if (data_.size() != 1) {
            throw ShapeError("item() on tensor of shape " + shape_str(shape_));
        }
        return data_[0];
    }

    Tensor reshaped(Shape shape) const {
        if (shape_numel(shape) != data_.size()) {
            throw ShapeError("cannot reshape " + shape_str(shape_) + " to " + shape_str(shape));
        }
        return Tensor(std::move(shape), data_);
    }

    template <typename U>
    Tensor<U> cast() const {
        std::vector<U> out(data_.begin(), data_.end());
        return Tensor<U>(shape_, std::move(out));
    }

    bool all_finite() const {
        for (T v : data_) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }

    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

    bool operator==(const Tensor& other) const = default;

private:
    static void check_shape(const Shape& shape) {
        if (shape.empty()) throw ShapeError("tensor shape must have at least one dimension");
        for (std::size_t d : shape) {
            if (d == 0) throw ShapeError("tensor dimensions must be positive, got " + shape_str(shape));
        }
    }

    Shape shape_;
    std::vector<T> data_;
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

}  // namespace fsl
