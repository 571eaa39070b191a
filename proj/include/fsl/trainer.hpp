#pragma once

// Episodic training of one prototypical network with cross-entropy plus the
// optional class-aware loss, and episode-based evaluation.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fsl/adam.hpp"
#include "fsl/cal_loss.hpp"
#include "fsl/dataset.hpp"
#include "fsl/encoder.hpp"
#include "fsl/ensemble.hpp"
#include "fsl/metrics.hpp"
#include "fsl/protonet.hpp"

namespace fsl {

enum class Precision { F32, F64 };

const char* to_string(Precision p);
Precision precision_from_string(const std::string& name);

struct TrainConfig {
    std::size_t epochs = 100;
    // One Adam step per episode.
    std::size_t episodes_per_epoch = 32;
    EpisodeSpec episode;
    double learning_rate = 1e-4;
    double margin = kDefaultMargin;
    bool use_cal = true;
    std::uint64_t seed = 0;
    Precision precision = Precision::F32;
    // NaN/Inf checks on every graph node.
    bool check_finite = false;

    void validate() const;
};

struct EpochRecord {
    LossBreakdown loss;  // means over the epoch's episodes
    double accuracy = 0.0;
};

struct TrainReport {
    std::vector<EpochRecord> epochs;
    double wall_seconds = 0.0;
    std::uint64_t checksum = 0;
};

template <typename T>
struct ProtoModel {
    std::string id;
    Encoder<T> encoder;
    AdamState<T> optimizer;

    explicit ProtoModel(const EncoderSpec& spec, std::string model_id = {})
        : id(std::move(model_id)), encoder(spec), optimizer(AdamState<T>::for_params(encoder.params())) {}
    ProtoModel(std::string model_id, Encoder<T> enc, AdamState<T> opt)
        : id(std::move(model_id)), encoder(std::move(enc)), optimizer(std::move(opt)) {}
};

template <typename T>
struct EpisodeLoss {
    ProtoHeadNodes<T> head;
    std::optional<CalNodes<T>> cal;
    NodeId total;
};

// Support rows (class-major) followed by query rows, one per sample.
template <typename T>
Tensor<T> episode_batch(const Dataset& data, const Episode& episode);

// Encoder forward plus prototypes, cross-entropy and (if use_cal) CAL on one
// episode batch.
template <typename T>
EpisodeLoss<T> build_episode_loss(Graph<T>& graph, const Encoder<T>& encoder, const Tensor<T>& batch,
                                  const EpisodeLayout& layout, bool use_cal, T margin);

// Trains in place. Throws NumericError naming epoch and episode if the loss
// becomes non-finite.
template <typename T>
TrainReport train_model(ProtoModel<T>& model, const Dataset& train, const TrainConfig& config);

// Dmax_p and Dmin_n (support-based, as in CAL) averaged over every class of
// every evaluation episode. ratio = mean_max_positive / mean_min_negative.
struct CompactnessStats {
    double mean_max_positive = 0.0;
    double mean_min_negative = 0.0;
    double ratio = 0.0;
};

struct Evaluation {
    MetricsReport metrics;
    ModelPredictions predictions;
    CompactnessStats compactness;
};

template <typename T>
Evaluation evaluate_model(const ProtoModel<T>& model, const Dataset& test, const EpisodeSpec& spec,
                          std::size_t n_episodes, std::uint64_t seed);

}  // namespace fsl
