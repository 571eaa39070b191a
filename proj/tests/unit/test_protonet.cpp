#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fsl/kernels.hpp"
#include "fsl/protonet.hpp"

using namespace fsl;

TEST(Prototypes, SingleSupportIsItself) {
    const auto p = compute_prototypes<double>({TensorD::matrix(1, 3, {1, -2, 5})});
    EXPECT_EQ(p.matrix, TensorD::matrix(1, 3, {1, -2, 5}));
    EXPECT_EQ(p.classes, (std::vector<std::size_t>{0}));
}

TEST(Prototypes, OppositeSupportsCancel) {
    const auto p = compute_prototypes<double>({TensorD::matrix(2, 2, {1.5, -3, -1.5, 3})});
    EXPECT_EQ(p.matrix, TensorD::matrix(1, 2, {0, 0}));
}

TEST(Prototypes, ElementwiseMean) {
    const auto p = compute_prototypes<double>({TensorD::matrix(2, 2, {1, 3, 3, 1})}, {7});
    EXPECT_EQ(p.matrix, TensorD::matrix(1, 2, {2, 2}));
    EXPECT_EQ(p.classes, (std::vector<std::size_t>{7}));
}

TEST(Prototypes, Errors) {
    EXPECT_THROW(compute_prototypes<double>({}), InvalidArgument);
    EXPECT_THROW(compute_prototypes<double>({TensorD::matrix(1, 2, {1, 2}), TensorD::matrix(1, 3, {1, 2, 3})}),
                 ShapeError);
}

TEST(SqEuclidean, Values) {
    EXPECT_EQ(sq_euclidean(TensorD::matrix(1, 2, {0, 0}), TensorD::matrix(1, 2, {3, 4}))[0], 25.0);
    EXPECT_EQ(sq_euclidean(TensorD::matrix(1, 2, {1, 7}), TensorD::matrix(1, 2, {1, 7}))[0], 0.0);
    const TensorD x = TensorD::matrix(2, 2, {1, 2, -1, 0.5});
    const TensorD p = TensorD::matrix(1, 2, {0.25, 3});
    const TensorD d = sq_euclidean(x, p);
    const TensorD d2 = sq_euclidean(TensorD::matrix(2, 2, {2, 4, -2, 1}), TensorD::matrix(1, 2, {0.5, 6}));
    for (std::size_t i = 0; i < 2; ++i) EXPECT_DOUBLE_EQ(d2[i], 4 * d[i]);
    EXPECT_THROW(sq_euclidean(x, TensorD::matrix(1, 3, {1, 2, 3})), ShapeError);
}

TEST(Classify, Equidistant) {
    const auto two = classify(TensorD::matrix(1, 2, {0, 0}), TensorD::matrix(2, 2, {1, 0, -1, 0}));
    EXPECT_DOUBLE_EQ(two[0].probabilities[0], 0.5);
    EXPECT_DOUBLE_EQ(two[0].probabilities[1], 0.5);
    const auto four = classify(TensorD::matrix(1, 2, {0, 0}), TensorD::matrix(4, 2, {1, 0, -1, 0, 0, 1, 0, -1}));
    for (double p : four[0].probabilities) EXPECT_DOUBLE_EQ(p, 0.25);
}

TEST(Classify, LogThreeGap) {
    // squared distances 0 and ln 3
    const auto r = classify(TensorD::matrix(1, 1, {0}), TensorD::matrix(2, 1, {0, std::sqrt(std::log(3.0))}));
    EXPECT_NEAR(r[0].probabilities[0], 0.75, 1e-15);
    EXPECT_NEAR(r[0].probabilities[1], 0.25, 1e-15);
    EXPECT_EQ(r[0].predicted, 0u);
}

TEST(CrossEntropy, Values) {
    QueryPrediction<double> sure{{1.0, 0.0}, {0, 1}, 0};
    const std::vector<std::size_t> zero{0};
    EXPECT_EQ(ce_loss<double>({sure}, zero), 0.0);
    QueryPrediction<double> uniform{{0.25, 0.25, 0.25, 0.25}, {1, 1, 1, 1}, 0};
    const std::vector<std::size_t> two{2};
    EXPECT_NEAR(ce_loss<double>({uniform}, two), std::log(4.0), 1e-15);
    QueryPrediction<double> half{{0.5, 0.5}, {1, 1}, 0};
    QueryPrediction<double> quarter{{0.25, 0.75}, {1, 1}, 1};
    const std::vector<std::size_t> labels{0, 0};
    EXPECT_NEAR(ce_loss<double>({half, quarter}, labels), (std::log(2.0) + std::log(4.0)) / 2, 1e-15);
    EXPECT_NEAR(ce_loss<double>({half, quarter}, labels), 1.0397, 1e-4);
}

TEST(CrossEntropy, FloorAndLabelRange) {
    QueryPrediction<double> wrong{{1.0, 0.0}, {0, 1}, 0};
    const std::vector<std::size_t> one{1};
    EXPECT_NEAR(ce_loss<double>({wrong}, one), -std::log(kLogFloor), 1e-9);
    const std::vector<std::size_t> bad{2};
    EXPECT_THROW(ce_loss<double>({wrong}, bad), InvalidArgument);
}

TEST(Layout, Rows) {
    const EpisodeLayout l{2, 3, 2};
    EXPECT_EQ(l.rows(), 10u);
    EXPECT_EQ(l.support_groups(), (std::vector<std::vector<std::size_t>>{{0, 1, 2}, {3, 4, 5}}));
    EXPECT_EQ(l.query_rows_list(), (std::vector<std::size_t>{6, 7, 8, 9}));
    EXPECT_EQ(l.query_labels(), (std::vector<std::size_t>{0, 0, 1, 1}));
}

TEST(ProtoHead, MatchesPureFunctions) {
    const EpisodeLayout l{2, 2, 1};
    const TensorD emb = TensorD::matrix(6, 2, {0, 0, 2, 0, 5, 5, 5, 7, 1, 0.5, 4, 6});
    Graph<double> g;
    const auto head = build_proto_head(g, g.input(emb), l);
    const auto protos = compute_prototypes<double>({TensorD::matrix(2, 2, {0, 0, 2, 0}), TensorD::matrix(2, 2, {5, 5, 5, 7})});
    EXPECT_EQ(g.value(head.prototypes), protos.matrix);
    const TensorD queries = TensorD::matrix(2, 2, {1, 0.5, 4, 6});
    EXPECT_EQ(g.value(head.distances), sq_euclidean(queries, protos.matrix));
    const std::vector<std::size_t> labels{0, 1};
    EXPECT_NEAR(g.value(head.ce).item(), ce_loss(classify(queries, protos.matrix), labels), 1e-14);
}

TEST(Classify, DistanceOffsetStable) {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> normal(0.0, 3.0);
    TensorD dist(Shape{20, 5});
    for (auto& v : dist.vec()) v = std::abs(normal(rng));
    for (double offset : {1.0, 250.0, 1e4}) {
        TensorD a = dist, b = dist;
        for (auto& v : a.vec()) v = -v;
        for (auto& v : b.vec()) v = -(v + offset);
        const TensorD pa = kernels::softmax_rows(a), pb = kernels::softmax_rows(b);
        for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_NEAR(pa[i], pb[i], 1e-12);
    }
}

// plain instead of squared distance: labels agree, probabilities do not
TEST(Classify, PlainDistanceSensitivity) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> normal(0.0, 1.0);
    TensorD protos(Shape{4, 6}), queries(Shape{50, 6});
    for (auto& v : protos.vec()) v = 2.0 * normal(rng);
    for (auto& v : queries.vec()) v = 2.0 * normal(rng);
    const auto preds = classify(queries, protos);
    double max_gap = 0.0;
    for (const auto& p : preds) {
        TensorD logits(Shape{1, p.distances.size()});
        for (std::size_t c = 0; c < p.distances.size(); ++c) logits[c] = -std::sqrt(p.distances[c]);
        const TensorD plain = kernels::softmax_rows(logits);
        EXPECT_EQ(kernels::argmax(plain.row(0)), p.predicted);
        for (std::size_t c = 0; c < p.distances.size(); ++c) max_gap = std::max(max_gap, std::abs(plain[c] - p.probabilities[c]));
    }
    EXPECT_GT(max_gap, 0.05);
}

TEST(Prototypes, FloatPermutationWithinTolerance) {
    std::mt19937_64 rng(12);
    std::normal_distribution<float> normal(0.0f, 10.0f);
    TensorF g(Shape{9, 7});
    for (auto& v : g.vec()) v = normal(rng);
    TensorF rev(Shape{9, 7});
    for (std::size_t r = 0; r < 9; ++r) std::copy_n(&g[(8 - r) * 7], 7, &rev[r * 7]);
    const auto a = compute_prototypes<float>({g}), b = compute_prototypes<float>({rev});
    for (std::size_t i = 0; i < 7; ++i) EXPECT_NEAR(a.matrix[i], b.matrix[i], 1e-6);
}
