#pragma once

// Dataset indexing, stratified splitting and N-way K-shot episode sampling.

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "fsl/error.hpp"

namespace fsl {

struct SampleRecord {
    std::string id;
    std::size_t class_id = 0;
    // Element range of this sample in the dataset payload.
    std::size_t offset = 0;
    std::size_t length = 0;

    bool operator==(const SampleRecord&) const = default;
};

class DatasetIndex {
public:
    DatasetIndex() = default;
    // Throws InvalidArgument if a sample names a class outside the table
    // or sample ids repeat.
    DatasetIndex(std::vector<std::string> class_names, std::vector<SampleRecord> samples);

    const std::vector<std::string>& class_names() const noexcept { return class_names_; }
    const std::vector<SampleRecord>& samples() const noexcept { return samples_; }
    std::size_t num_classes() const noexcept { return class_names_.size(); }
    std::size_t size() const noexcept { return samples_.size(); }
    const SampleRecord& sample(std::size_t i) const { return samples_.at(i); }

    const std::vector<std::size_t>& counts() const noexcept { return counts_; }
    // Sample positions grouped by class id, ascending within each class.
    const std::vector<std::vector<std::size_t>>& by_class() const noexcept { return by_class_; }

    // New index holding the given positions (in the given order).
    DatasetIndex subset(const std::vector<std::size_t>& positions) const;

    bool operator==(const DatasetIndex& other) const {
        return class_names_ == other.class_names_ && samples_ == other.samples_;
    }

private:
    std::vector<std::string> class_names_;
    std::vector<SampleRecord> samples_;
    std::vector<std::size_t> counts_;
    std::vector<std::vector<std::size_t>> by_class_;
};

struct EpisodeSpec {
    std::size_t n_way = 4;
    std::size_t k_shot = 10;
    std::size_t q_query = 15;
    std::uint64_t seed = 0;

    void validate() const;
    std::size_t per_class() const noexcept { return k_shot + q_query; }
};

// Sample references are positions in the DatasetIndex the episode was drawn
// from. classes are sorted ascending, so episode position order follows
// class id order.
struct Episode {
    std::vector<std::size_t> classes;
    std::vector<std::vector<std::size_t>> support;
    std::vector<std::vector<std::size_t>> query;

    bool operator==(const Episode&) const = default;
};

// Per-class proportional split. Each class sends round(count * fraction)
// samples to train, clamped so both sides keep at least one. Both returned
// indices keep the original relative sample order.
std::pair<DatasetIndex, DatasetIndex> stratified_split(const DatasetIndex& index, double train_fraction,
                                                       std::uint64_t seed);

// Uniform choice of n_way classes among those holding at least
// k_shot + q_query samples, then uniform choice without replacement of
// support and query samples within each chosen class.
Episode sample_episode(const DatasetIndex& index, const EpisodeSpec& spec, std::mt19937_64& rng);

// count episodes from one generator seeded with seed.
std::vector<Episode> episode_stream(const DatasetIndex& index, const EpisodeSpec& spec, std::size_t count,
                                    std::uint64_t seed);

// Checks the structural invariants of an episode against its index and spec.
// Returns an empty string when they hold, else a description of the first
// violation.
std::string check_episode(const DatasetIndex& index, const EpisodeSpec& spec, const Episode& episode);

}  // namespace fsl
