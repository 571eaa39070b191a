#include "fsl/io/synthetic.hpp"

#include <cmath>
#include <random>

#include "fsl/error.hpp"

namespace fsl::io {

void SyntheticSpec::validate() const {
    if (n_classes < 2) throw InvalidArgument("synthetic data needs n_classes >= 2");
    if (dim < 2) throw InvalidArgument("synthetic data needs dim >= 2");
    if (dim + 1 < n_classes) {
        throw InvalidArgument("a " + std::to_string(n_classes) + "-class simplex needs dim >= " +
                              std::to_string(n_classes - 1));
    }
    if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
    if (!(separation >= 0.0)) throw InvalidArgument("separation must be >= 0");
    if (samples_per_class.size() != 1 && samples_per_class.size() != n_classes) {
        throw InvalidArgument("samples_per_class needs 1 or n_classes entries");
    }
    for (std::size_t c : samples_per_class) {
        if (c == 0) throw InvalidArgument("every class needs at least one sample");
    }
}

namespace {

// Vertices e_c - centroid of the standard simplex, expressed in an
// orthonormal basis of the hyperplane orthogonal to (1, ..., 1). Pairwise
// distance sqrt(2).
std::vector<std::vector<double>> simplex_vertices(std::size_t n) {
    std::vector<std::vector<double>> basis;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        std::vector<double> v(n, 0.0);
        v[i] = 1.0;
        for (double& x : v) x -= 1.0 / static_cast<double>(n);
        for (const auto& b : basis) {
            double dot = 0.0;
            for (std::size_t k = 0; k < n; ++k) dot += v[k] * b[k];
            for (std::size_t k = 0; k < n; ++k) v[k] -= dot * b[k];
        }
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        for (double& x : v) x /= norm;
        basis.push_back(std::move(v));
    }
    std::vector<std::vector<double>> coords(n, std::vector<double>(n - 1, 0.0));
    for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t b = 0; b + 1 < n; ++b) {
            double dot = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                const double vertex = (k == c ? 1.0 : 0.0) - 1.0 / static_cast<double>(n);
                dot += vertex * basis[b][k];
            }
            coords[c][b] = dot;
        }
    }
    return coords;
}

}  // namespace

SyntheticData gen_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    const auto vertices = simplex_vertices(spec.n_classes);
    const double scale = spec.separation * spec.sigma / std::sqrt(2.0);

    SyntheticData out;
    out.means.assign(spec.n_classes, std::vector<double>(spec.dim, 0.0));
    for (std::size_t c = 0; c < spec.n_classes; ++c)
        for (std::size_t k = 0; k + 1 < spec.n_classes; ++k) out.means[c][k] = scale * vertices[c][k];

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, spec.sigma);
    auto payload = std::make_shared<std::vector<float>>();
    std::vector<std::string> names;
    std::vector<SampleRecord> samples;
    for (std::size_t c = 0; c < spec.n_classes; ++c) {
        names.push_back("class" + std::to_string(c));
        for (std::size_t i = 0; i < spec.count_for(c); ++i) {
            samples.push_back({"c" + std::to_string(c) + "-" + std::to_string(i), c, payload->size(), spec.dim});
            for (std::size_t k = 0; k < spec.dim; ++k) {
                payload->push_back(static_cast<float>(out.means[c][k] + noise(rng)));
            }
        }
    }
    out.dataset.index = DatasetIndex(std::move(names), std::move(samples));
    out.dataset.sample_shape = Shape{spec.dim};
    out.dataset.payload = std::move(payload);
    return out;
}

}  // namespace fsl::io
