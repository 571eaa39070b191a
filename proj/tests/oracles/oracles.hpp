#pragma once

// Independent reference implementations used only by the tests.

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "fsl/gradcheck.hpp"
#include "fsl/trainer.hpp"

namespace oracle {

// Mode of the labels. Ties go to the tied label with the largest summed
// probability over models, then to the smallest label.
inline std::size_t brute_hard_vote(const std::vector<std::size_t>& labels,
                                   const std::vector<std::vector<double>>& probs) {
    std::map<std::size_t, int> count;
    for (std::size_t l : labels) count[l] += 1;
    int top = 0;
    for (const auto& [l, c] : count) top = std::max(top, c);
    std::vector<std::size_t> tied;
    for (const auto& [l, c] : count) {
        if (c == top) tied.push_back(l);
    }
    if (tied.size() == 1 || probs.empty()) return tied.front();
    std::size_t best = tied.front();
    double best_mass = -1.0;
    for (std::size_t l : tied) {
        double mass = 0.0;
        for (const auto& p : probs) mass += p[l];
        mass /= static_cast<double>(probs.size());
        if (mass > best_mass) {
            best_mass = mass;
            best = l;
        }
    }
    return best;
}

inline std::size_t brute_soft_vote(const std::vector<std::vector<double>>& probs) {
    std::vector<double> total(probs.front().size(), 0.0);
    for (const auto& p : probs) {
        for (std::size_t c = 0; c < p.size(); ++c) total[c] += p[c];
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < total.size(); ++c) {
        if (total[c] > total[best]) best = c;
    }
    return best;
}

struct BruteMetrics {
    double accuracy = 0.0;
    std::vector<double> precision, recall, f1;
    double macro_precision = 0.0, macro_recall = 0.0, macro_f1 = 0.0;
};

// Per-sample one-vs-rest tallies, no confusion matrix involved.
inline BruteMetrics brute_metrics(const std::vector<std::size_t>& truths, const std::vector<std::size_t>& preds,
                                  std::size_t n_classes) {
    BruteMetrics m;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < truths.size(); ++i) correct += truths[i] == preds[i];
    m.accuracy = static_cast<double>(correct) / static_cast<double>(truths.size());
    for (std::size_t c = 0; c < n_classes; ++c) {
        double tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < truths.size(); ++i) {
            const bool t = truths[i] == c, p = preds[i] == c;
            tp += t && p;
            fp += !t && p;
            fn += t && !p;
        }
        const double prec = tp + fp > 0 ? tp / (tp + fp) : 0.0;
        const double rec = tp + fn > 0 ? tp / (tp + fn) : 0.0;
        const double f = prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
        m.precision.push_back(prec);
        m.recall.push_back(rec);
        m.f1.push_back(f);
        m.macro_precision += prec / static_cast<double>(n_classes);
        m.macro_recall += rec / static_cast<double>(n_classes);
        m.macro_f1 += f / static_cast<double>(n_classes);
    }
    return m;
}

struct GradCheckResult {
    std::size_t checked = 0;
    std::size_t excluded = 0;
    std::size_t failures = 0;
    double worst_excess = 0.0;  // max of |a - n| - (atol + rtol |n|)
};

// Compares analytic gradients of the episode loss (CE, plus CAL when
// use_cal) against central differences over every encoder parameter.
inline GradCheckResult encoder_gradcheck(const fsl::EncoderSpec& spec, const fsl::EpisodeLayout& layout,
                                         std::uint64_t data_seed, bool use_cal, double margin, double h,
                                         double rtol, double atol) {
    using namespace fsl;
    Encoder<double> encoder(spec);
    std::mt19937_64 rng(data_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    TensorD batch(Shape{layout.rows(), spec.input_numel()});
    for (auto& v : batch.vec()) v = normal(rng);

    std::vector<std::size_t> sizes;
    std::size_t total = 0;
    for (const auto& p : encoder.params().entries()) {
        sizes.push_back(p.value.size());
        total += p.value.size();
    }
    TensorD flat(Shape{total});
    {
        std::size_t k = 0;
        for (const auto& p : encoder.params().entries()) {
            for (double v : p.value.vec()) flat[k++] = v;
        }
    }

    auto load = [&](const TensorD& x) {
        std::size_t k = 0;
        for (auto& p : encoder.params().entries()) {
            for (double& v : p.value.vec()) v = x[k++];
        }
    };
    auto evaluate = [&](const TensorD& x) -> SignedValue {
        load(x);
        Graph<double> graph(&encoder.params());
        const EpisodeLoss<double> loss = build_episode_loss(graph, encoder, batch, layout, use_cal, margin);
        return {graph.value(loss.total).item(), graph.decision_signature()};
    };

    load(flat);
    Graph<double> graph(&encoder.params());
    const EpisodeLoss<double> loss = build_episode_loss(graph, encoder, batch, layout, use_cal, margin);
    const Gradients<double> grads = graph.backward(loss.total);

    const CheckedGradient numeric = finite_diff_grad_checked(evaluate, flat, h);
    GradCheckResult r;
    std::size_t k = 0;
    for (const auto& g : grads) {
        for (double a : g.vec()) {
            if (numeric.near_kink[k]) {
                ++r.excluded;
            } else {
                ++r.checked;
                const double n = numeric.gradient[k];
                const double excess = std::abs(a - n) - (atol + rtol * std::abs(n));
                r.worst_excess = std::max(r.worst_excess, excess);
                if (!gradients_close(a, n, rtol, atol)) ++r.failures;
            }
            ++k;
        }
    }
    return r;
}

}  // namespace oracle
