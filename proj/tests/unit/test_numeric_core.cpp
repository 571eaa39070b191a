#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fsl/adam.hpp"
#include "fsl/autodiff.hpp"
#include "fsl/gradcheck.hpp"
#include "fsl/kernels.hpp"

using namespace fsl;

namespace {

ParameterStore<double> store_with(TensorD value) {
    ParameterStore<double> s;
    s.add("x", std::move(value));
    return s;
}

TensorD random_tensor(Shape shape, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    TensorD t(std::move(shape));
    for (auto& v : t.vec()) v = n(rng);
    return t;
}

// Differentiates a unary-builder graph against central differences.
void expect_op_gradient(const std::function<NodeId(Graph<double>&, NodeId)>& build, const TensorD& x0) {
    auto store = store_with(x0);
    auto evaluate = [&](const TensorD& x) -> SignedValue {
        store.value(0) = x;
        Graph<double> g(&store);
        const NodeId loss = build(g, g.parameter(0));
        return {g.value(loss).item(), g.decision_signature()};
    };
    store.value(0) = x0;
    Graph<double> g(&store);
    const NodeId loss = build(g, g.parameter(0));
    const Gradients<double> grads = g.backward(loss);
    const CheckedGradient numeric = finite_diff_grad_checked(evaluate, x0, 1e-6);
    std::size_t checked = 0;
    for (std::size_t i = 0; i < x0.size(); ++i) {
        if (numeric.near_kink[i]) continue;
        ++checked;
        EXPECT_TRUE(gradients_close(grads[0][i], numeric.gradient[i], 1e-5, 1e-7))
            << "coordinate " << i << ": analytic " << grads[0][i] << " numeric " << numeric.gradient[i];
    }
    EXPECT_GT(checked, 0u);
}

}  // namespace

TEST(Tensor, ShapeAndDataMustAgree) {
    EXPECT_THROW(TensorD(Shape{2, 2}, std::vector<double>{1, 2, 3}), ShapeError);
    EXPECT_THROW(TensorD(Shape{2, 0}), ShapeError);
    TensorD t = TensorD::matrix(2, 3, {1, 2, 3, 4, 5, 6});
    EXPECT_EQ(t.at(1, 2), 6);
    EXPECT_EQ(t.row(1)[0], 4);
    EXPECT_THROW(t.reshaped({4}), ShapeError);
    EXPECT_EQ(t.reshaped({3, 2}).dim(0), 3u);
}

TEST(Tensor, FiniteCheck) {
    TensorD t(Shape{3}, 1.0);
    EXPECT_TRUE(t.all_finite());
    t[1] = std::nan("");
    EXPECT_FALSE(t.all_finite());
}

TEST(Kernels, SoftmaxIsStableForLargeLogits) {
    const TensorD p = kernels::softmax_rows(TensorD::matrix(1, 2, {1000.0, 1000.0}));
    EXPECT_DOUBLE_EQ(p[0], 0.5);
    EXPECT_DOUBLE_EQ(p[1], 0.5);
}

TEST(Kernels, ArgExtremaPickFirst) {
    const std::vector<double> v{1, 3, 3, 0, 0};
    EXPECT_EQ(kernels::argmax(v), 1u);
    EXPECT_EQ(kernels::argmin(v), 3u);
}

TEST(ForwardBackward, SumOfSquares) {
    auto store = store_with(TensorD(Shape{2}, std::vector<double>{1, 2}));
    Graph<double> g(&store);
    const NodeId loss = g.sum(g.square(g.parameter(0)));
    const Gradients<double> grads = forward_backward(g, loss);
    EXPECT_DOUBLE_EQ(grads[0][0], 2.0);
    EXPECT_DOUBLE_EQ(grads[0][1], 4.0);
}

TEST(ForwardBackward, SumGivesOnes) {
    std::mt19937_64 rng(3);
    auto store = store_with(random_tensor({3, 4}, rng));
    Graph<double> g(&store);
    const Gradients<double> grads = g.backward(g.sum(g.parameter(0)));
    for (double v : grads[0].vec()) EXPECT_EQ(v, 1.0);
}

TEST(ForwardBackward, UnusedParameterGetsZeros) {
    ParameterStore<double> store;
    store.add("used", TensorD(Shape{2}, 1.0));
    store.add("unused", TensorD(Shape{3}, 5.0));
    Graph<double> g(&store);
    const Gradients<double> grads = g.backward(g.sum(g.parameter(0)));
    ASSERT_EQ(grads.size(), 2u);
    EXPECT_EQ(grads[1].shape(), Shape{3});
    for (double v : grads[1].vec()) EXPECT_EQ(v, 0.0);
}

TEST(ForwardBackward, NonScalarLossIsRejected) {
    auto store = store_with(TensorD(Shape{2}, 1.0));
    Graph<double> g(&store);
    EXPECT_THROW(g.backward(g.square(g.parameter(0))), ShapeError);
}

TEST(ForwardBackward, NanIsReportedWithNode) {
    auto store = store_with(TensorD(Shape{2}, std::vector<double>{1.0, std::nan("")}));
    Graph<double> g(&store, true);
    try {
        g.square(g.parameter(0));
        FAIL() << "expected NumericError";
    } catch (const NumericError& e) {
        EXPECT_NE(std::string(e.what()).find("node"), std::string::npos) << e.what();
    }
}

TEST(ForwardBackward, AdjointShapesMatchValues) {
    std::mt19937_64 rng(5);
    ParameterStore<double> store;
    store.add("w", random_tensor({3, 2}, rng));
    store.add("b", random_tensor({2}, rng));
    Graph<double> g(&store);
    const NodeId x = g.input(random_tensor({4, 3}, rng));
    const NodeId y = g.relu(g.add_row_bias(g.matmul(x, g.parameter(0)), g.parameter(1)));
    const NodeId loss = g.mean(g.square(y));
    g.backward(loss);
    for (NodeId n = 0; n < g.size(); ++n) EXPECT_EQ(g.adjoint(n).shape(), g.value(n).shape()) << n;
}

TEST(ForwardBackward, ReluSubgradientAtZeroIsZero) {
    auto store = store_with(TensorD(Shape{3}, std::vector<double>{-1.0, 0.0, 2.0}));
    Graph<double> g(&store);
    const Gradients<double> grads = g.backward(g.sum(g.relu(g.parameter(0))));
    EXPECT_EQ(grads[0][0], 0.0);
    EXPECT_EQ(grads[0][1], 0.0);
    EXPECT_EQ(grads[0][2], 1.0);
}

TEST(ForwardBackward, DistanceGradientAtZeroIsZero) {
    auto store = store_with(TensorD::matrix(1, 2, {1.0, 2.0}));
    Graph<double> g(&store);
    const NodeId p = g.parameter(0);
    const NodeId d = g.distance(p, g.input(TensorD::matrix(1, 2, {1.0, 2.0})));
    EXPECT_EQ(g.value(d)[0], 0.0);
    const Gradients<double> grads = g.backward(g.sum(d));
    EXPECT_EQ(grads[0][0], 0.0);
    EXPECT_EQ(grads[0][1], 0.0);
}

TEST(OpGradients, Elementwise) {
    std::mt19937_64 rng(11);
    const TensorD x = random_tensor({3, 4}, rng);
    expect_op_gradient([](Graph<double>& g, NodeId p) { return g.sum(g.square(g.relu(p))); }, x);
    expect_op_gradient([](Graph<double>& g, NodeId p) { return g.mean(g.add_scalar(g.scale(g.square(p), 3.0), 1.0)); },
                       x);
    expect_op_gradient([](Graph<double>& g, NodeId p) { return g.sum(g.square(g.sub(p, g.scale(p, 0.25)))); }, x);
    expect_op_gradient([](Graph<double>& g, NodeId p) { return g.sum(g.square(g.add(p, p))); }, x);
}

TEST(OpGradients, MatmulAndBias) {
    std::mt19937_64 rng(12);
    const TensorD x = random_tensor({3, 4}, rng);
    const TensorD w = random_tensor({4, 2}, rng);
    const TensorD b = random_tensor({2}, rng);
    expect_op_gradient(
        [&](Graph<double>& g, NodeId p) {
            return g.sum(g.square(g.add_row_bias(g.matmul(p, g.input(w)), g.input(b))));
        },
        x);
    expect_op_gradient(
        [&](Graph<double>& g, NodeId p) {
            return g.sum(g.square(g.add_row_bias(g.matmul(g.input(x.reshaped({3, 4})), g.input(w)), g.reshape(p, {2}))));
        },
        b);
}

TEST(OpGradients, ConvAndPool) {
    std::mt19937_64 rng(13);
    const TensorD x = random_tensor({2, 2, 5, 5}, rng);
    const TensorD w = random_tensor({3, 2, 3, 3}, rng);
    const TensorD b = random_tensor({3}, rng);
    expect_op_gradient(
        [&](Graph<double>& g, NodeId p) {
            return g.sum(g.square(g.max_pool_2x2(g.conv2d_3x3(p, g.input(w), g.input(b)))));
        },
        x);
    expect_op_gradient(
        [&](Graph<double>& g, NodeId p) { return g.sum(g.square(g.conv2d_3x3(g.input(x), p, g.input(b)))); }, w);
    expect_op_gradient(
        [&](Graph<double>& g, NodeId p) { return g.sum(g.square(g.conv2d_3x3(g.input(x), g.input(w), p))); }, b);
}

TEST(OpGradients, ConvMatchesDirectSum) {
    TensorD x(Shape{1, 1, 3, 3});
    for (std::size_t i = 0; i < 9; ++i) x[i] = static_cast<double>(i + 1);
    TensorD w(Shape{1, 1, 3, 3}, 1.0);
    Graph<double> g;
    const NodeId y = g.conv2d_3x3(g.input(x), g.input(w), g.input(TensorD(Shape{1}, 0.5)));
    // centre sees all nine inputs, the corner (0,0) sees 1,2,4,5
    EXPECT_DOUBLE_EQ(g.value(y)[4], 45.5);
    EXPECT_DOUBLE_EQ(g.value(y)[0], 12.5);
    const NodeId pooled = g.max_pool_2x2(y);
    EXPECT_EQ(g.value(pooled).shape(), (Shape{1, 1, 1, 1}));
    EXPECT_DOUBLE_EQ(g.value(pooled)[0], 45.5);
}

TEST(OpGradients, GatherAndGroupMean) {
    std::mt19937_64 rng(14);
    const TensorD x = random_tensor({5, 3}, rng);
    expect_op_gradient(
        [](Graph<double>& g, NodeId p) {
            return g.sum(g.square(g.group_mean(p, {{0, 1}, {2, 3, 4}})));
        },
        x);
    expect_op_gradient([](Graph<double>& g, NodeId p) { return g.sum(g.square(g.gather_rows(p, {4, 0, 0}))); }, x);
    expect_op_gradient([](Graph<double>& g, NodeId p) { return g.sum(g.square(g.gather(p, {1, 7, 7, 14}))); }, x);
}

TEST(OpGradients, DistancesAndReductions) {
    std::mt19937_64 rng(15);
    const TensorD x = random_tensor({4, 3}, rng);
    const TensorD c = random_tensor({2, 3}, rng);
    expect_op_gradient([&](Graph<double>& g, NodeId p) { return g.sum(g.sq_distance(p, g.input(c))); }, x);
    expect_op_gradient([&](Graph<double>& g, NodeId p) { return g.sum(g.distance(p, g.input(c))); }, x);
    expect_op_gradient([&](Graph<double>& g, NodeId p) { return g.reduce_max(g.distance(p, g.input(c))); }, x);
    expect_op_gradient([&](Graph<double>& g, NodeId p) { return g.reduce_min(g.distance(g.input(c), p)); }, x);
}

TEST(OpGradients, SoftmaxCrossEntropy) {
    std::mt19937_64 rng(16);
    const TensorD logits = random_tensor({4, 3}, rng);
    expect_op_gradient(
        [](Graph<double>& g, NodeId p) { return g.softmax_cross_entropy(p, {0, 2, 1, 1}, 1e-12); }, logits);
}

TEST(OpGradients, CrossEntropyValue) {
    Graph<double> g;
    const NodeId ce = g.softmax_cross_entropy(g.input(TensorD::matrix(1, 4, {0, 0, 0, 0})), {2}, 1e-12);
    EXPECT_NEAR(g.value(ce).item(), std::log(4.0), 1e-15);
}

TEST(DecisionSignature, TracksReluMask) {
    auto store = store_with(TensorD(Shape{2}, std::vector<double>{1.0, -1.0}));
    auto signature = [&](double a) {
        store.value(0)[1] = a;
        Graph<double> g(&store);
        g.relu(g.parameter(0));
        return g.decision_signature();
    };
    EXPECT_EQ(signature(-1.0), signature(-2.0));
    EXPECT_NE(signature(-1.0), signature(1.0));
}

TEST(Adam, FirstStepMovesByLearningRate) {
    ParameterStore<double> store;
    store.add("p", TensorD::scalar(1.0));
    auto state = AdamState<double>::for_params(store);
    adam_step(store, Gradients<double>{TensorD::scalar(0.1)}, state);
    EXPECT_NEAR(store.value(0)[0] - 1.0, -1e-4, 1e-10);
    EXPECT_EQ(state.step, 1u);
}

TEST(Adam, ZeroGradientLeavesParameters) {
    ParameterStore<double> store;
    store.add("p", TensorD(Shape{3}, std::vector<double>{1, -2, 3}));
    auto state = AdamState<double>::for_params(store);
    const TensorD before = store.value(0);
    adam_step(store, Gradients<double>{TensorD(Shape{3})}, state);
    EXPECT_EQ(store.value(0), before);
}

TEST(Adam, ConstantGradientStepBound) {
    ParameterStore<double> store;
    store.add("p", TensorD(Shape{2}, std::vector<double>{0.5, 0.5}));
    auto state = AdamState<double>::for_params(store, 1e-3);
    for (int s = 0; s < 2; ++s) {
        const TensorD before = store.value(0);
        adam_step(store, Gradients<double>{TensorD(Shape{2}, std::vector<double>{0.3, -7.0})}, state);
        for (std::size_t i = 0; i < 2; ++i) EXPECT_LE(std::abs(store.value(0)[i] - before[i]), 1e-3 * (1 + 1e-6));
    }
    EXPECT_EQ(state.step, 2u);
}

TEST(Adam, ShapeMismatchIsRejected) {
    ParameterStore<double> store;
    store.add("p", TensorD(Shape{2}));
    auto state = AdamState<double>::for_params(store);
    EXPECT_THROW(adam_step(store, Gradients<double>{TensorD(Shape{3})}, state), ShapeError);
    EXPECT_THROW(adam_step(store, Gradients<double>{}, state), ShapeError);
}

TEST(FiniteDiff, Square) {
    const TensorD g = finite_diff_grad([](const TensorD& x) { return x[0] * x[0]; }, TensorD::scalar(3.0), 1e-5);
    EXPECT_NEAR(g[0], 6.0, 1e-6);
}

TEST(FiniteDiff, Constant) {
    const TensorD g = finite_diff_grad([](const TensorD&) { return 4.0; }, TensorD(Shape{3}, 1.0), 1e-5);
    for (double v : g.vec()) EXPECT_EQ(v, 0.0);
}

TEST(FiniteDiff, ReluFlatRegion) {
    const TensorD g =
        finite_diff_grad([](const TensorD& x) { return std::max(0.0, x[0]); }, TensorD::scalar(-1.0), 1e-5);
    EXPECT_EQ(g[0], 0.0);
}

TEST(FiniteDiff, RejectsNonPositiveStep) {
    EXPECT_THROW(finite_diff_grad([](const TensorD&) { return 0.0; }, TensorD::scalar(0.0), 0.0), InvalidArgument);
}

TEST(ParameterStore, ChecksumTracksValues) {
    ParameterStore<float> a;
    a.add("w", TensorF(Shape{2}, 1.0f));
    ParameterStore<float> b = a;
    EXPECT_EQ(a.checksum(), b.checksum());
    b.value(0)[1] = 1.5f;
    EXPECT_NE(a.checksum(), b.checksum());
}

TEST(ForwardBackward, ReluPropagatesNan) {
    Graph<double> g;
    const NodeId y = g.relu(g.input(TensorD(Shape{2}, std::vector<double>{std::nan(""), -1.0})));
    EXPECT_TRUE(std::isnan(g.value(y)[0]));
    EXPECT_EQ(g.value(y)[1], 0.0);
}
