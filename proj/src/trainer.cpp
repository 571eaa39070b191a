#include "fsl/trainer.hpp"

#include <chrono>
#include <cmath>

#include "fsl/kernels.hpp"
#include "fsl/log.hpp"

namespace fsl {

const char* to_string(Precision p) {
    return p == Precision::F32 ? "f32" : "f64";
}

Precision precision_from_string(const std::string& name) {
    if (name == "f32" || name == "float32" || name == "32") return Precision::F32;
    if (name == "f64" || name == "float64" || name == "64") return Precision::F64;
    throw InvalidArgument("unknown precision '" + name + "' (expected f32 or f64)");
}

void TrainConfig::validate() const {
    episode.validate();
    if (episodes_per_epoch < 1) throw InvalidArgument("episodes per epoch must be >= 1");
    if (!(learning_rate > 0.0)) throw InvalidArgument("learning rate must be positive");
    if (margin < 0.0) throw InvalidArgument("CAL margin must be >= 0");
}

template <typename T>
Tensor<T> episode_batch(const Dataset& data, const Episode& episode) {
    std::vector<std::size_t> rows;
    for (const auto& g : episode.support) rows.insert(rows.end(), g.begin(), g.end());
    for (const auto& g : episode.query) rows.insert(rows.end(), g.begin(), g.end());
    return data.rows<T>(rows);
}

template <typename T>
EpisodeLoss<T> build_episode_loss(Graph<T>& graph, const Encoder<T>& encoder, const Tensor<T>& batch,
                                  const EpisodeLayout& layout, bool use_cal, T margin) {
    const NodeId emb = encoder.forward(graph, graph.input(batch));
    EpisodeLoss<T> out{build_proto_head(graph, emb, layout), std::nullopt, 0};
    out.total = out.head.ce;
    if (use_cal) {
        out.cal = build_cal_loss(graph, out.head.support, out.head.prototypes, layout.support_groups(), margin);
        out.total = graph.add(out.head.ce, out.cal->loss);
    }
    return out;
}

template <typename T>
TrainReport train_model(ProtoModel<T>& model, const Dataset& train, const TrainConfig& config) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    TrainReport report;
    model.optimizer.learning_rate = config.learning_rate;

    const EpisodeLayout layout{config.episode.n_way, config.episode.k_shot, config.episode.q_query};
    const std::vector<std::size_t> labels = layout.query_labels();
    std::mt19937_64 rng(config.seed);
    ParameterStore<T>& params = model.encoder.params();

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        double ce_sum = 0.0, cal_sum = 0.0;
        std::size_t correct = 0, seen = 0;
        for (std::size_t step = 0; step < config.episodes_per_epoch; ++step) {
            const Episode episode = sample_episode(train.index, config.episode, rng);
            Graph<T> graph(&params, config.check_finite);
            const EpisodeLoss<T> loss = build_episode_loss(graph, model.encoder, episode_batch<T>(train, episode),
                                                           layout, config.use_cal, static_cast<T>(config.margin));
            const double total = graph.value(loss.total).item();
            if (!std::isfinite(total)) {
                throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", episode " +
                                   std::to_string(step));
            }
            ce_sum += graph.value(loss.head.ce).item();
            if (loss.cal) cal_sum += graph.value(loss.cal->loss).item();

            const Tensor<T>& dist = graph.value(loss.head.distances);
            for (std::size_t q = 0; q < labels.size(); ++q) {
                correct += kernels::argmin(dist.row(q)) == labels[q];
            }
            seen += labels.size();

            const Gradients<T> grads = graph.backward(loss.total);
            adam_step(params, grads, model.optimizer);
        }
        const double n = static_cast<double>(config.episodes_per_epoch);
        EpochRecord rec;
        rec.loss = combined_loss(ce_sum / n, cal_sum / n, config.margin);
        rec.accuracy = static_cast<double>(correct) / static_cast<double>(seen);
        report.epochs.push_back(rec);
        log::debug("epoch " + std::to_string(epoch) + " ce=" + std::to_string(rec.loss.ce) +
                   " cal=" + std::to_string(rec.loss.l_ca) + " acc=" + std::to_string(rec.accuracy));
    }
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.checksum = params.checksum();
    return report;
}

template <typename T>
Evaluation evaluate_model(const ProtoModel<T>& model, const Dataset& test, const EpisodeSpec& spec,
                          std::size_t n_episodes, std::uint64_t seed) {
    if (n_episodes == 0) throw InvalidArgument("no evaluation episodes");
    spec.validate();
    const std::vector<Episode> episodes = episode_stream(test.index, spec, n_episodes, seed);

    Evaluation ev;
    ModelPredictions& pred = ev.predictions;
    pred.model_id = model.id;
    pred.class_names = test.index.class_names();
    pred.episode_seed = seed;

    double sum_max = 0.0, sum_min = 0.0;
    std::size_t n_terms = 0;
    const std::size_t k = spec.k_shot, q = spec.q_query, n = spec.n_way;

    for (std::size_t e = 0; e < episodes.size(); ++e) {
        const Episode& episode = episodes[e];
        pred.episode_classes.push_back(episode.classes);
        const TensorD emb = model.encoder.embed(episode_batch<T>(test, episode)).template cast<double>();
        const std::size_t d = emb.dim(1);

        auto rows_of = [&](std::size_t first, std::size_t count) {
            TensorD t(Shape{count, d});
            std::copy_n(&emb[first * d], count * d, &t[0]);
            return t;
        };
        std::vector<TensorD> groups;
        for (std::size_t c = 0; c < n; ++c) groups.push_back(rows_of(c * k, k));
        const PrototypeSet<double> protos = compute_prototypes(groups, episode.classes);

        const TensorD queries = rows_of(n * k, n * q);
        const auto predictions = classify(queries, protos.matrix);
        for (std::size_t i = 0; i < predictions.size(); ++i) {
            QueryRecord rec;
            rec.episode = e;
            rec.truth = i / q;
            rec.probabilities = predictions[i].probabilities;
            rec.label = kernels::argmax(rec.probabilities);
            pred.queries.push_back(std::move(rec));
        }

        for (std::size_t c = 0; c < n; ++c) {
            TensorD negatives(Shape{(n - 1) * k, d});
            std::size_t r = 0;
            for (std::size_t o = 0; o < n; ++o) {
                if (o == c) continue;
                std::copy_n(&emb[o * k * d], k * d, &negatives[r * k * d]);
                ++r;
            }
            const CalTerms t = cal_terms<double>(protos.matrix.row(c), groups[c], negatives);
            sum_max += t.max_positive;
            sum_min += t.min_negative;
            ++n_terms;
        }
    }

    ev.metrics = model_report(pred);
    ev.compactness.mean_max_positive = sum_max / static_cast<double>(n_terms);
    ev.compactness.mean_min_negative = sum_min / static_cast<double>(n_terms);
    ev.compactness.ratio = ev.compactness.mean_max_positive / ev.compactness.mean_min_negative;
    return ev;
}

#define FSL_INSTANTIATE(T)                                                                                        \
    template Tensor<T> episode_batch(const Dataset&, const Episode&);                                             \
    template EpisodeLoss<T> build_episode_loss(Graph<T>&, const Encoder<T>&, const Tensor<T>&, const EpisodeLayout&, \
                                               bool, T);                                                          \
    template TrainReport train_model(ProtoModel<T>&, const Dataset&, const TrainConfig&);                         \
    template Evaluation evaluate_model(const ProtoModel<T>&, const Dataset&, const EpisodeSpec&, std::size_t,      \
                                       std::uint64_t);

FSL_INSTANTIATE(float)
FSL_INSTANTIATE(double)
#undef FSL_INSTANTIATE

}  // namespace fsl
