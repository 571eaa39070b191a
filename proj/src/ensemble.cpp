#include "fsl/ensemble.hpp"

#include <algorithm>
#include <cmath>

#include "fsl/error.hpp"
#include "fsl/kernels.hpp"

namespace fsl {

void ModelPredictions::validate() const {
    for (std::size_t i = 0; i < queries.size(); ++i) {
        const QueryRecord& q = queries[i];
        if (q.episode >= episode_classes.size()) throw InvalidArgument("query " + std::to_string(i) + ": bad episode");
        const auto& classes = episode_classes[q.episode];
        if (q.probabilities.size() != classes.size() || q.truth >= classes.size() || q.label >= classes.size()) {
            throw InvalidArgument("query " + std::to_string(i) + ": size does not match its episode");
        }
        double total = 0.0;
        for (double p : q.probabilities) {
            if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("query " + std::to_string(i) + ": probability out of [0,1]");
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-6) {
            throw InvalidArgument("query " + std::to_string(i) + ": probabilities sum to " + std::to_string(total));
        }
        if (q.label != kernels::argmax(q.probabilities)) {
            throw InvalidArgument("query " + std::to_string(i) + ": label is not the argmax of its probabilities");
        }
    }
    for (const auto& classes : episode_classes) {
        for (std::size_t c : classes) {
            if (c >= class_names.size()) throw InvalidArgument("episode class outside the class table");
        }
    }
}

PredictionMatrix assemble(std::span<const ModelPredictions> models) {
    if (models.empty()) throw InvalidArgument("ensemble needs at least one model");
    const ModelPredictions& ref = models[0];
    PredictionMatrix m;
    m.class_names = ref.class_names;
    m.episode_classes = ref.episode_classes;
    for (const ModelPredictions& p : models) {
        p.validate();
        if (p.class_names != ref.class_names) {
            throw InvalidArgument("model '" + p.model_id + "' has a different class order");
        }
        if (p.episode_classes != ref.episode_classes) {
            throw InvalidArgument("model '" + p.model_id + "' was evaluated on different episodes");
        }
        if (p.queries.size() != ref.queries.size()) {
            throw InvalidArgument("model '" + p.model_id + "' has " + std::to_string(p.queries.size()) +
                                  " queries, expected " + std::to_string(ref.queries.size()));
        }
        for (std::size_t i = 0; i < ref.queries.size(); ++i) {
            if (p.queries[i].episode != ref.queries[i].episode || p.queries[i].truth != ref.queries[i].truth) {
                throw InvalidArgument("model '" + p.model_id + "' query " + std::to_string(i) + " is misaligned");
            }
        }
        m.models.push_back(p.model_id);
    }
    const std::size_t nq = ref.queries.size();
    m.query_episode.resize(nq);
    m.truths.resize(nq);
    m.probabilities.assign(nq, {});
    m.labels.assign(nq, {});
    for (std::size_t i = 0; i < nq; ++i) {
        m.query_episode[i] = ref.queries[i].episode;
        m.truths[i] = ref.queries[i].truth;
        for (const ModelPredictions& p : models) {
            m.probabilities[i].push_back(p.queries[i].probabilities);
            m.labels[i].push_back(p.queries[i].label);
        }
    }
    return m;
}

VoteResult hard_vote(std::span<const std::size_t> labels, std::span<const double> mean_probabilities) {
    if (labels.empty()) throw InvalidArgument("hard_vote: no model labels");
    std::size_t n = mean_probabilities.size();
    for (std::size_t l : labels) {
        if (!mean_probabilities.empty() && l >= n) throw InvalidArgument("hard_vote: label outside the class order");
        if (mean_probabilities.empty()) n = std::max(n, l + 1);
    }
    std::vector<std::size_t> votes(n, 0);
    for (std::size_t l : labels) ++votes[l];
    const std::size_t top = votes[kernels::argmax(votes)];

    VoteResult r;
    bool found = false;
    std::size_t tied = 0;
    for (std::size_t c = 0; c < n; ++c) {
        if (votes[c] != top) continue;
        ++tied;
        if (!found || (!mean_probabilities.empty() && mean_probabilities[c] > mean_probabilities[r.label])) {
            r.label = c;
            found = true;
        }
    }
    r.tie = tied > 1;
    return r;
}

SoftVoteResult soft_vote(std::span<const std::vector<double>> probabilities) {
    if (probabilities.empty()) throw InvalidArgument("soft_vote: no model outputs");
    const std::size_t c = probabilities[0].size();
    if (c == 0) throw InvalidArgument("soft_vote: empty probability vector");
    SoftVoteResult r;
    r.mean.assign(c, 0.0);
    for (const auto& p : probabilities) {
        if (p.size() != c) throw InvalidArgument("soft_vote: probability vectors differ in length");
        for (std::size_t j = 0; j < c; ++j) r.mean[j] += p[j];
    }
    const double k = static_cast<double>(probabilities.size());
    for (double& v : r.mean) v /= k;
    r.label = kernels::argmax(r.mean);
    return r;
}

EnsembleReport ensemble_evaluate(const PredictionMatrix& matrix) {
    const std::size_t nq = matrix.num_queries();
    if (nq == 0) throw InvalidArgument("no samples");
    EnsembleReport out;
    std::vector<std::size_t> truths(nq), hard(nq), soft(nq);
    out.decisions.reserve(nq);
    for (std::size_t i = 0; i < nq; ++i) {
        const auto& classes = matrix.episode_classes.at(matrix.query_episode[i]);
        SoftVoteResult sv = soft_vote(matrix.probabilities[i]);
        const VoteResult hv = hard_vote(matrix.labels[i], sv.mean);
        truths[i] = classes[matrix.truths[i]];
        hard[i] = classes[hv.label];
        soft[i] = classes[sv.label];
        out.decisions.push_back({hv.label, sv.label, std::move(sv.mean), hv.tie});
    }
    out.hard = report(confusion(truths, hard, matrix.class_names));
    out.soft = report(confusion(truths, soft, matrix.class_names));
    return out;
}

MetricsReport model_report(const ModelPredictions& predictions) {
    std::vector<std::size_t> truths, labels;
    truths.reserve(predictions.queries.size());
    labels.reserve(predictions.queries.size());
    for (const QueryRecord& q : predictions.queries) {
        const auto& classes = predictions.episode_classes.at(q.episode);
        truths.push_back(classes.at(q.truth));
        labels.push_back(classes.at(q.label));
    }
    return report(confusion(truths, labels, predictions.class_names));
}

}  // namespace fsl
