#pragma once

// Isotropic Gaussian clusters with class means on a regular simplex, so every
// pair of means sits exactly separation * sigma apart.

#include <cstdint>
#include <vector>

#include "fsl/dataset.hpp"

namespace fsl::io {

struct SyntheticSpec {
    std::size_t n_classes = 4;
    std::size_t dim = 16;
    // One entry per class, or a single entry applied to every class.
    std::vector<std::size_t> samples_per_class{100};
    double separation = 6.0;  // in units of sigma
    double sigma = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
    std::size_t count_for(std::size_t cls) const {
        return samples_per_class.size() == 1 ? samples_per_class[0] : samples_per_class[cls];
    }
};

struct SyntheticData {
    Dataset dataset;
    std::vector<std::vector<double>> means;
};

// Samples are stored class-major with ids "c<class>-<n>".
SyntheticData gen_synthetic(const SyntheticSpec& spec);

}  // namespace fsl::io
