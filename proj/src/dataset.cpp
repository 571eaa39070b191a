#include "fsl/dataset.hpp"

#include <algorithm>

#include "fsl/error.hpp"

namespace fsl {

void Dataset::validate() const {
    if (!payload) throw InvalidArgument("dataset has no payload");
    const std::size_t n = sample_numel();
    std::vector<std::pair<std::size_t, std::size_t>> ranges;
    ranges.reserve(index.size());
    for (const SampleRecord& s : index.samples()) {
        if (s.length != n) {
            throw InvalidArgument("sample '" + s.id + "' has length " + std::to_string(s.length) +
                                  ", sample shape needs " + std::to_string(n));
        }
        if (s.offset > payload->size() || payload->size() - s.offset < s.length) {
            throw InvalidArgument("sample '" + s.id + "' range lies outside the payload");
        }
        ranges.emplace_back(s.offset, s.offset + s.length);
    }
    std::sort(ranges.begin(), ranges.end());
    for (std::size_t i = 1; i < ranges.size(); ++i) {
        if (ranges[i].first < ranges[i - 1].second) throw InvalidArgument("sample payload ranges overlap");
    }
}

}  // namespace fsl
