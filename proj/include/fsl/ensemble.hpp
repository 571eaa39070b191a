#pragma once

// Hard (majority) and soft (mean probability) voting over the per-query
// outputs of several independently trained models. Aggregation is done in
// double precision.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fsl/metrics.hpp"

namespace fsl {

// One model's outputs over an evaluation episode stream. Probabilities and
// labels are indexed by position in the query's episode class list.
struct QueryRecord {
    std::size_t episode = 0;
    std::size_t truth = 0;
    std::vector<double> probabilities;
    std::size_t label = 0;  // argmax of probabilities

    bool operator==(const QueryRecord&) const = default;
};

struct ModelPredictions {
    std::string model_id;
    std::vector<std::string> class_names;
    std::vector<std::vector<std::size_t>> episode_classes;
    std::vector<QueryRecord> queries;
    std::uint64_t episode_seed = 0;

    // Throws InvalidArgument if a probability vector does not sum to 1
    // within 1e-6, a label is not its vector's argmax, or references dangle.
    void validate() const;
    bool operator==(const ModelPredictions&) const = default;
};

// k aligned models. probabilities[q][m] and labels[q][m] are model m's
// output for query q.
struct PredictionMatrix {
    std::vector<std::string> models;
    std::vector<std::string> class_names;
    std::vector<std::vector<std::size_t>> episode_classes;
    std::vector<std::size_t> query_episode;
    std::vector<std::size_t> truths;
    std::vector<std::vector<std::vector<double>>> probabilities;
    std::vector<std::vector<std::size_t>> labels;

    std::size_t num_queries() const noexcept { return truths.size(); }
    std::size_t num_models() const noexcept { return models.size(); }
};

// Throws InvalidArgument when the inputs do not describe the same queries
// (count, episodes, class orders or truths differ).
PredictionMatrix assemble(std::span<const ModelPredictions> models);

struct VoteResult {
    std::size_t label = 0;
    bool tie = false;
};

// Majority label. When several labels share the top count, the one with the
// highest mean probability among them wins, then the lowest position.
// mean_probabilities may be empty, leaving only the lowest-position rule.
VoteResult hard_vote(std::span<const std::size_t> labels, std::span<const double> mean_probabilities = {});

struct SoftVoteResult {
    std::size_t label = 0;
    std::vector<double> mean;
};

// Elementwise mean, argmax with lowest-position tie-break.
SoftVoteResult soft_vote(std::span<const std::vector<double>> probabilities);

struct EnsembleDecision {
    std::size_t hard_label = 0;
    std::size_t soft_label = 0;
    std::vector<double> mean;
    bool tie = false;
};

struct EnsembleReport {
    MetricsReport hard;
    MetricsReport soft;
    std::vector<EnsembleDecision> decisions;
};

EnsembleReport ensemble_evaluate(const PredictionMatrix& matrix);

// Metrics of a single model's hard labels.
MetricsReport model_report(const ModelPredictions& predictions);

}  // namespace fsl
