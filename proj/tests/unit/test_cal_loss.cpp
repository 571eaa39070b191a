#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fsl/cal_loss.hpp"
#include "fsl/protonet.hpp"

using namespace fsl;

namespace {

const std::vector<double> kOrigin{0.0, 0.0};

}  // namespace

TEST(CalTerms, WorkedExample) {
    const TensorD pos = TensorD::matrix(2, 2, {1, 0, 0, 2});
    const TensorD neg = TensorD::matrix(2, 2, {0, -4, 3, 4});
    const CalTerms t = cal_terms<double>(kOrigin, pos, neg);
    EXPECT_EQ(t.central, 1.5);
    EXPECT_EQ(t.max_positive, 2.0);
    EXPECT_EQ(t.min_negative, 4.0);
    EXPECT_EQ(t.n_pos, 2u);
    EXPECT_EQ(t.n_neg, 2u);
}

TEST(CalTerms, PositivesOnPrototype) {
    const CalTerms t = cal_terms<double>(kOrigin, TensorD::matrix(3, 2, {0, 0, 0, 0, 0, 0}), TensorD::matrix(1, 2, {1, 1}));
    EXPECT_EQ(t.central, 0.0);
    EXPECT_EQ(t.max_positive, 0.0);
}

TEST(CalTerms, SinglePositive) {
    const CalTerms t = cal_terms<double>(kOrigin, TensorD::matrix(1, 2, {0.3, -0.7}), TensorD::matrix(1, 2, {1, 1}));
    EXPECT_EQ(t.central, t.max_positive);
}

TEST(CalTerms, EmptySetsAndDims) {
    EXPECT_THROW(cal_terms<double>(kOrigin, TensorD(), TensorD::matrix(1, 2, {1, 1})), InvalidArgument);
    EXPECT_THROW(cal_terms<double>(kOrigin, TensorD::matrix(1, 2, {1, 1}), TensorD()), InvalidArgument);
    EXPECT_THROW(cal_terms<double>(kOrigin, TensorD::matrix(1, 3, {1, 1, 1}), TensorD::matrix(1, 2, {1, 1})),
                 ShapeError);
}

TEST(CalTerms, TranslationInvariant) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n;
    TensorD pos(Shape{4, 3}), neg(Shape{5, 3});
    for (auto& v : pos.vec()) v = n(rng);
    for (auto& v : neg.vec()) v = n(rng);
    std::vector<double> proto(3, 0.0);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t d = 0; d < 3; ++d) proto[d] += pos.at(i, d) / 4;
    const CalTerms a = cal_terms<double>(proto, pos, neg);
    const std::vector<double> shift{2.5, -1.0, 0.25};
    for (std::size_t d = 0; d < 3; ++d) proto[d] += shift[d];
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t d = 0; d < 3; ++d) pos.at(i, d) += shift[d];
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t d = 0; d < 3; ++d) neg.at(i, d) += shift[d];
    const CalTerms b = cal_terms<double>(proto, pos, neg);
    EXPECT_NEAR(a.central, b.central, 1e-12);
    EXPECT_NEAR(a.max_positive, b.max_positive, 1e-12);
    EXPECT_NEAR(a.min_negative, b.min_negative, 1e-12);
}

TEST(CalLoss, HandValues) {
    const CalTerms worked{1.5, 2.0, 4.0, 2, 2};
    EXPECT_EQ(cal_class_loss(worked, 0.5), 0.5);
    EXPECT_EQ(cal_class_loss(CalTerms{1, 1, 1, 1, 1}, 0.0), 0.0);
    EXPECT_EQ(cal_class_loss(CalTerms{3, 3, 2, 1, 1}, 1.0), 2.0);
    const std::vector<CalTerms> both{worked, CalTerms{3, 3, 2, 1, 1}};
    EXPECT_EQ(cal_loss(both, 0.5), (0.5 + 1.5) / 2);
}

TEST(CalLoss, Errors) {
    const std::vector<CalTerms> one{CalTerms{1, 1, 2, 1, 1}};
    EXPECT_THROW(cal_loss(one, -0.1), InvalidArgument);
    EXPECT_THROW(cal_loss({}, 0.5), InvalidArgument);
}

TEST(CombinedLoss, Values) {
    EXPECT_EQ(combined_loss(0.0, 0.0).l_comb, 0.0);
    EXPECT_NEAR(combined_loss(std::log(2.0), 0.5).l_comb, 1.1931, 1e-4);
    const LossBreakdown b = combined_loss(0.731, 0.0, 0.25);
    EXPECT_EQ(b.l_comb, b.ce);
    EXPECT_EQ(b.margin, 0.25);
    EXPECT_THROW(combined_loss(std::nan(""), 0.1), NumericError);
    EXPECT_THROW(combined_loss(0.1, INFINITY), NumericError);
    EXPECT_THROW(combined_loss(-0.1, 0.1), InvalidArgument);
}

TEST(CalGraph, MatchesPureTerms) {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n;
    const EpisodeLayout layout{3, 4, 1};
    TensorD support(Shape{12, 5});
    for (auto& v : support.vec()) v = n(rng);
    Graph<double> g;
    const NodeId s = g.input(support);
    const NodeId protos = g.group_mean(s, layout.support_groups());
    const CalNodes<double> cal = build_cal_loss(g, s, protos, layout.support_groups(), 0.5);

    std::vector<CalTerms> terms;
    for (std::size_t c = 0; c < 3; ++c) {
        TensorD pos(Shape{4, 5}), neg(Shape{8, 5});
        std::size_t r = 0;
        for (std::size_t i = 0; i < 12; ++i) {
            for (std::size_t d = 0; d < 5; ++d) {
                if (i / 4 == c) pos.at(i % 4, d) = support.at(i, d);
                else neg.at(r, d) = support.at(i, d);
            }
            if (i / 4 != c) ++r;
        }
        terms.push_back(cal_terms<double>(g.value(protos).row(c), pos, neg));
        EXPECT_NEAR(g.value(cal.central[c]).item(), terms.back().central, 1e-12);
        EXPECT_NEAR(g.value(cal.max_positive[c]).item(), terms.back().max_positive, 1e-12);
        EXPECT_NEAR(g.value(cal.min_negative[c]).item(), terms.back().min_negative, 1e-12);
    }
    EXPECT_NEAR(g.value(cal.loss).item(), cal_loss(terms, 0.5), 1e-12);
}
