#include "fsl/episodes.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

#include "fsl/error.hpp"

namespace fsl {

DatasetIndex::DatasetIndex(std::vector<std::string> class_names, std::vector<SampleRecord> samples)
    : class_names_(std::move(class_names)), samples_(std::move(samples)) {
    counts_.assign(class_names_.size(), 0);
    by_class_.assign(class_names_.size(), {});
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        const SampleRecord& s = samples_[i];
        if (s.class_id >= class_names_.size()) {
            throw InvalidArgument("sample '" + s.id + "' has class id " + std::to_string(s.class_id) +
                                  " outside the class table of " + std::to_string(class_names_.size()));
        }
        if (!seen.insert(s.id).second) throw InvalidArgument("duplicate sample id '" + s.id + "'");
        ++counts_[s.class_id];
        by_class_[s.class_id].push_back(i);
    }
}

DatasetIndex DatasetIndex::subset(const std::vector<std::size_t>& positions) const {
    std::vector<SampleRecord> picked;
    picked.reserve(positions.size());
    for (std::size_t p : positions) picked.push_back(samples_.at(p));
    return DatasetIndex(class_names_, std::move(picked));
}

void EpisodeSpec::validate() const {
    if (n_way < 2) throw InvalidArgument("n_way must be >= 2, got " + std::to_string(n_way));
    if (k_shot < 1) throw InvalidArgument("k_shot must be >= 1");
    if (q_query < 1) throw InvalidArgument("q_query must be >= 1");
}

std::pair<DatasetIndex, DatasetIndex> stratified_split(const DatasetIndex& index, double train_fraction,
                                                       std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw InvalidArgument("train fraction must lie strictly between 0 and 1, got " +
                              std::to_string(train_fraction));
    }
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> train, test;
    for (std::size_t c = 0; c < index.num_classes(); ++c) {
        std::vector<std::size_t> members = index.by_class()[c];
        if (members.empty()) continue;
        if (members.size() < 2) {
            throw SamplingError("class '" + index.class_names()[c] + "' has " + std::to_string(members.size()) +
                                " sample(s); a split needs at least 2");
        }
        std::shuffle(members.begin(), members.end(), rng);
        auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(members.size()) * train_fraction));
        n_train = std::clamp<std::size_t>(n_train, 1, members.size() - 1);
        train.insert(train.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_train));
        test.insert(test.end(), members.begin() + static_cast<std::ptrdiff_t>(n_train), members.end());
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {index.subset(train), index.subset(test)};
}

Episode sample_episode(const DatasetIndex& index, const EpisodeSpec& spec, std::mt19937_64& rng) {
    spec.validate();
    std::vector<std::size_t> eligible;
    std::string short_classes;
    for (std::size_t c = 0; c < index.num_classes(); ++c) {
        if (index.counts()[c] >= spec.per_class()) {
            eligible.push_back(c);
        } else {
            if (!short_classes.empty()) short_classes += ", ";
            short_classes += "'" + index.class_names()[c] + "' has " + std::to_string(index.counts()[c]);
        }
    }
    if (eligible.size() < spec.n_way) {
        std::string msg = std::to_string(spec.n_way) + "-way episode needs " + std::to_string(spec.n_way) +
                          " classes with >= " + std::to_string(spec.per_class()) + " samples, found " +
                          std::to_string(eligible.size());
        if (!short_classes.empty()) msg += " (" + short_classes + ")";
        throw SamplingError(msg);
    }

    // Partial Fisher-Yates: the first n_way slots become a uniform subset.
    for (std::size_t i = 0; i < spec.n_way; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, eligible.size() - 1);
        std::swap(eligible[i], eligible[pick(rng)]);
    }
    Episode ep;
    ep.classes.assign(eligible.begin(), eligible.begin() + static_cast<std::ptrdiff_t>(spec.n_way));
    std::sort(ep.classes.begin(), ep.classes.end());

    for (std::size_t c : ep.classes) {
        std::vector<std::size_t> members = index.by_class()[c];
        for (std::size_t i = 0; i < spec.per_class(); ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, members.size() - 1);
            std::swap(members[i], members[pick(rng)]);
        }
        const auto k = static_cast<std::ptrdiff_t>(spec.k_shot);
        const auto kq = static_cast<std::ptrdiff_t>(spec.per_class());
        ep.support.emplace_back(members.begin(), members.begin() + k);
        ep.query.emplace_back(members.begin() + k, members.begin() + kq);
    }
    return ep;
}

std::vector<Episode> episode_stream(const DatasetIndex& index, const EpisodeSpec& spec, std::size_t count,
                                    std::uint64_t seed) {
    std::vector<Episode> out;
    out.reserve(count);
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < count; ++i) out.push_back(sample_episode(index, spec, rng));
    return out;
}

std::string check_episode(const DatasetIndex& index, const EpisodeSpec& spec, const Episode& episode) {
    if (episode.classes.size() != spec.n_way) return "episode has " + std::to_string(episode.classes.size()) + " classes";
    if (std::set<std::size_t>(episode.classes.begin(), episode.classes.end()).size() != spec.n_way) {
        return "episode classes repeat";
    }
    if (episode.support.size() != spec.n_way || episode.query.size() != spec.n_way) return "group count mismatch";
    std::unordered_set<std::size_t> used;
    for (std::size_t i = 0; i < spec.n_way; ++i) {
        if (episode.support[i].size() != spec.k_shot) return "support group has wrong size";
        if (episode.query[i].size() != spec.q_query) return "query group has wrong size";
        for (const auto* group : {&episode.support[i], &episode.query[i]}) {
            for (std::size_t p : *group) {
                if (p >= index.size()) return "sample reference out of range";
                if (index.sample(p).class_id != episode.classes[i]) return "sample filed under the wrong class";
                if (!used.insert(p).second) return "sample " + index.sample(p).id + " appears twice";
            }
        }
    }
    return {};
}

}  // namespace fsl
