#pragma once

// Class-aware loss. For class i with prototype p_i, positives x_ij (its own
// support embeddings) and negatives x_ik (other classes' supports), using
// unsquared Euclidean distance:
//
//   c      = mean_j |x_ij - p_i|
//   Dmax_p = max_j  |x_ij - p_i|
//   Dmin_n = min_k  |x_ik - p_i|
//   L_i    = relu(Dmax_p - Dmin_n + margin) + relu(Dmax_p - c)
//
// The episode loss L_ca is the mean of L_i over the episode's classes and is
// added to the cross-entropy term.

#include <span>
#include <vector>

#include "fsl/autodiff.hpp"

namespace fsl {

inline constexpr double kDefaultMargin = 0.5;

struct CalTerms {
    double central = 0.0;
    double max_positive = 0.0;
    double min_negative = 0.0;
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
};

struct LossBreakdown {
    double ce = 0.0;
    double l_ca = 0.0;
    double l_comb = 0.0;
    double margin = 0.0;
};

// positives [N_pos x D], negatives [N_neg x D], prototype of length D.
template <typename T>
CalTerms cal_terms(std::span<const T> prototype, const Tensor<T>& positives, const Tensor<T>& negatives);

double cal_class_loss(const CalTerms& terms, double margin);

// Mean of cal_class_loss over classes. Throws InvalidArgument for a negative
// margin or an empty class list.
double cal_loss(std::span<const CalTerms> per_class, double margin);

// l_comb = ce + l_ca. Throws NumericError on non-finite input and
// InvalidArgument on negative terms.
LossBreakdown combined_loss(double ce, double l_ca, double margin = kDefaultMargin);

template <typename T>
struct CalNodes {
    NodeId loss;
    std::vector<NodeId> central;
    std::vector<NodeId> max_positive;
    std::vector<NodeId> min_negative;
};

// Differentiable episode CAL. support [S x D] rows grouped by class as in
// support_groups, prototypes [n_way x D]. Needs n_way >= 2.
template <typename T>
CalNodes<T> build_cal_loss(Graph<T>& graph, NodeId support, NodeId prototypes,
                           const std::vector<std::vector<std::size_t>>& support_groups, T margin);

}  // namespace fsl
