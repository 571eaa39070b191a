#include <gtest/gtest.h>

#include <set>

#include "fsl/episodes.hpp"

using namespace fsl;

namespace {

DatasetIndex make_index(const std::vector<std::size_t>& counts) {
    std::vector<std::string> names;
    std::vector<SampleRecord> samples;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        names.push_back("class" + std::to_string(c));
        for (std::size_t i = 0; i < counts[c]; ++i) {
            samples.push_back({"c" + std::to_string(c) + "-" + std::to_string(i), c, samples.size(), 1});
        }
    }
    return DatasetIndex(names, samples);
}

}  // namespace

TEST(DatasetIndex, RejectsBadClassAndDuplicateIds) {
    EXPECT_THROW(DatasetIndex({"a"}, {{"x", 1, 0, 1}}), InvalidArgument);
    EXPECT_THROW(DatasetIndex({"a"}, {{"x", 0, 0, 1}, {"x", 0, 1, 1}}), InvalidArgument);
    const DatasetIndex idx = make_index({3, 2});
    EXPECT_EQ(idx.counts(), (std::vector<std::size_t>{3, 2}));
    EXPECT_EQ(idx.by_class()[1], (std::vector<std::size_t>{3, 4}));
}

TEST(StratifiedSplit, Proportional) {
    const DatasetIndex idx = make_index({100, 100, 100});
    const auto [train, test] = stratified_split(idx, 0.8, 7);
    EXPECT_EQ(train.counts(), (std::vector<std::size_t>{80, 80, 80}));
    EXPECT_EQ(test.counts(), (std::vector<std::size_t>{20, 20, 20}));
    std::set<std::string> ids;
    for (const auto& s : train.samples()) ids.insert(s.id);
    for (const auto& s : test.samples()) EXPECT_FALSE(ids.count(s.id)) << s.id;
    EXPECT_EQ(ids.size() + test.size(), idx.size());
}

TEST(StratifiedSplit, Deterministic) {
    const DatasetIndex idx = make_index({50, 30});
    EXPECT_EQ(stratified_split(idx, 0.6, 3), stratified_split(idx, 0.6, 3));
    EXPECT_NE(stratified_split(idx, 0.6, 3).first, stratified_split(idx, 0.6, 4).first);
}

TEST(StratifiedSplit, Preconditions) {
    const DatasetIndex idx = make_index({10, 10});
    EXPECT_THROW(stratified_split(idx, 0.0, 1), InvalidArgument);
    EXPECT_THROW(stratified_split(idx, 1.0, 1), InvalidArgument);
    try {
        stratified_split(make_index({10, 1}), 0.5, 1);
        FAIL();
    } catch (const SamplingError& e) {
        EXPECT_NE(std::string(e.what()).find("class1"), std::string::npos) << e.what();
    }
}

TEST(StratifiedSplit, SmallClassKeepsBothSides) {
    const auto [train, test] = stratified_split(make_index({2, 3}), 0.9, 1);
    EXPECT_EQ(train.counts(), (std::vector<std::size_t>{1, 2}));
    EXPECT_EQ(test.counts(), (std::vector<std::size_t>{1, 1}));
}

TEST(SampleEpisode, ReferenceShape) {
    const DatasetIndex idx = make_index({40, 40, 40, 40});
    const EpisodeSpec spec{4, 10, 15, 0};
    std::mt19937_64 rng(1);
    const Episode e = sample_episode(idx, spec, rng);
    EXPECT_EQ(e.classes.size(), 4u);
    std::set<std::size_t> seen;
    std::size_t support = 0, query = 0;
    for (std::size_t c = 0; c < 4; ++c) {
        support += e.support[c].size();
        query += e.query[c].size();
        for (auto p : e.support[c]) seen.insert(p);
        for (auto p : e.query[c]) seen.insert(p);
    }
    EXPECT_EQ(support, 40u);
    EXPECT_EQ(query, 60u);
    EXPECT_EQ(seen.size(), 100u);
    EXPECT_EQ(check_episode(idx, spec, e), "");
}

TEST(SampleEpisode, ExactlyKPlusQUsesEverySample) {
    const DatasetIndex idx = make_index({25, 25, 25, 25});
    const EpisodeSpec spec{4, 10, 15, 0};
    std::mt19937_64 rng(2);
    const Episode e = sample_episode(idx, spec, rng);
    for (std::size_t c = 0; c < 4; ++c) {
        std::set<std::size_t> all(e.support[c].begin(), e.support[c].end());
        all.insert(e.query[c].begin(), e.query[c].end());
        EXPECT_EQ(all.size(), 25u);
    }
    EXPECT_EQ(check_episode(idx, spec, e), "");
}

TEST(SampleEpisode, Deficits) {
    std::mt19937_64 rng(3);
    EXPECT_THROW(sample_episode(make_index({30, 30, 30, 30}), EpisodeSpec{5, 10, 15, 0}, rng), SamplingError);
    try {
        sample_episode(make_index({30, 30, 30, 20}), EpisodeSpec{4, 10, 15, 0}, rng);
        FAIL();
    } catch (const SamplingError& e) {
        EXPECT_NE(std::string(e.what()).find("25"), std::string::npos) << e.what();
    }
}

TEST(SampleEpisode, OnlyEligibleClassesAreChosen) {
    const DatasetIndex idx = make_index({30, 5, 30, 30});
    std::mt19937_64 rng(4);
    for (int i = 0; i < 50; ++i) {
        const Episode e = sample_episode(idx, EpisodeSpec{3, 10, 15, 0}, rng);
        EXPECT_EQ(e.classes, (std::vector<std::size_t>{0, 2, 3}));
    }
}

TEST(SampleEpisode, SpecValidation) {
    EXPECT_THROW((EpisodeSpec{1, 1, 1, 0}.validate()), InvalidArgument);
    EXPECT_THROW((EpisodeSpec{2, 0, 1, 0}.validate()), InvalidArgument);
    EXPECT_THROW((EpisodeSpec{2, 1, 0, 0}.validate()), InvalidArgument);
}

TEST(EpisodeStream, ReplayableAndSeedDependent) {
    const DatasetIndex idx = make_index({40, 40, 40, 40, 40});
    const EpisodeSpec spec{4, 10, 15, 0};
    EXPECT_EQ(episode_stream(idx, spec, 100, 9), episode_stream(idx, spec, 100, 9));
    EXPECT_EQ(episode_stream(idx, spec, 100, 9).size(), 100u);
    EXPECT_TRUE(episode_stream(idx, spec, 0, 9).empty());
    EXPECT_NE(episode_stream(idx, spec, 3, 1), episode_stream(idx, spec, 3, 2));
}

TEST(CheckEpisode, DetectsViolations) {
    const DatasetIndex idx = make_index({30, 30});
    const EpisodeSpec spec{2, 2, 1, 0};
    Episode e{{0, 1}, {{0, 1}, {30, 31}}, {{2}, {32}}};
    EXPECT_EQ(check_episode(idx, spec, e), "");
    Episode overlap = e;
    overlap.query[0] = {1};
    EXPECT_NE(check_episode(idx, spec, overlap), "");
    Episode wrong_class = e;
    wrong_class.support[0][0] = 33;
    EXPECT_NE(check_episode(idx, spec, wrong_class), "");
    Episode dup_class = e;
    dup_class.classes = {0, 0};
    EXPECT_NE(check_episode(idx, spec, dup_class), "");
}
