#include "fsl/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <variant>

#include "CLI11.hpp"
#include "fsl/config.hpp"
#include "fsl/io/checkpoint.hpp"
#include "fsl/io/manifest.hpp"
#include "fsl/io/report.hpp"
#include "fsl/io/synthetic.hpp"
#include "fsl/log.hpp"

namespace fsl::cli {

using nlohmann::json;

namespace {

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<double> margin;
    bool no_cal = false;
    std::optional<std::size_t> n_way, k_shot, q_query, epochs, episodes_per_epoch, embedding_dim;
    std::optional<double> lr;
    std::optional<std::string> encoder;
    std::optional<std::vector<std::size_t>> hidden;
    std::optional<std::string> precision;
    std::optional<std::string> out, report, data, model_id;
    std::optional<std::size_t> episodes, n_seeds;
    std::optional<double> train_fraction;
    std::optional<std::uint64_t> split_seed;
    std::vector<std::string> inputs;
    std::optional<std::size_t> classes, dim;
    std::optional<std::vector<std::size_t>> counts;
    std::optional<double> separation, sigma;
    std::string model;
};

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError(FormatErrorKind::Io, "cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw FormatError(FormatErrorKind::Malformed, "config '" + path + "': " + e.what());
    }
}

bool config_has_train_seed(const json& j) {
    return j.is_object() && j.contains("train") && j.at("train").is_object() && j.at("train").contains("seed");
}

// Layers: base, then the config file, then flags.
RunConfig resolve(const std::string& command, const Flags& f, RunConfig base) {
    RunConfig c = std::move(base);
    if (!f.config.empty()) c = run_config_from_json(read_json_file(f.config), c);
    c.command = command;
    TrainConfig& t = c.train;
    if (f.margin) t.margin = *f.margin;
    if (f.no_cal) t.use_cal = false;
    if (f.n_way) t.episode.n_way = *f.n_way;
    if (f.k_shot) t.episode.k_shot = *f.k_shot;
    if (f.q_query) t.episode.q_query = *f.q_query;
    if (f.epochs) t.epochs = *f.epochs;
    if (f.episodes_per_epoch) t.episodes_per_epoch = *f.episodes_per_epoch;
    if (f.lr) t.learning_rate = *f.lr;
    if (f.precision) t.precision = precision_from_string(*f.precision);
    if (f.encoder) c.encoder.kind = encoder_kind_from_string(*f.encoder);
    if (f.hidden) c.encoder.hidden = *f.hidden;
    if (f.embedding_dim) c.encoder.embedding_dim = *f.embedding_dim;
    if (f.episodes) c.eval_episodes = *f.episodes;
    if (f.n_seeds) c.ablation_seeds = *f.n_seeds;
    if (f.train_fraction) c.train_fraction = *f.train_fraction;
    if (f.split_seed) c.split_seed = *f.split_seed;
    if (f.data) c.data = *f.data;
    if (f.out) c.out = *f.out;
    if (f.report) c.report = *f.report;
    if (!f.inputs.empty()) c.inputs = f.inputs;
    if (f.classes) c.synthetic.n_classes = *f.classes;
    if (f.dim) c.synthetic.dim = *f.dim;
    if (f.counts) c.synthetic.samples_per_class = *f.counts;
    if (f.separation) c.synthetic.separation = *f.separation;
    if (f.sigma) c.synthetic.sigma = *f.sigma;
    return c;
}

void require(const std::string& value, const char* what) {
    if (value.empty()) throw InvalidArgument(std::string("missing ") + what);
}

std::string default_report(const RunConfig& c) {
    return c.report.empty() ? c.out + ".report.json" : c.report;
}

std::pair<Dataset, Dataset> load_split(const RunConfig& c) {
    require(c.data, "--data (dataset manifest)");
    Dataset data = io::load_dataset(c.data);
    auto [train, test] = stratified_split(data.index, c.train_fraction, c.split_seed);
    return {data.with_index(std::move(train)), data.with_index(std::move(test))};
}

EncoderSpec resolve_encoder(const RunConfig& c, const Dataset& data, std::uint64_t seed) {
    EncoderSpec spec = c.encoder;
    if (spec.input_shape.empty()) spec.input_shape = data.sample_shape;
    if (spec.kind == EncoderKind::FrozenProjection) spec.hidden.clear();
    spec.seed = seed;
    return spec;
}

std::string default_model_id(const EncoderSpec& spec, std::uint64_t seed, bool use_cal) {
    return std::string(to_string(spec.kind)) + "-s" + std::to_string(seed) + (use_cal ? "" : "-nocal");
}

template <typename T>
io::ModelResult train_and_save(const RunConfig& c, const Dataset& train, const std::string& id,
                               std::ostream& out) {
    const EncoderSpec spec = resolve_encoder(c, train, c.train.seed);
    ProtoModel<T> model(spec, id);
    io::ModelResult result{id, train_model(model, train, c.train), std::nullopt, std::nullopt};
    io::write_checkpoint(c.out, model, run_config_to_json(c).dump());
    const auto& epochs = result.training->epochs;
    out << "trained " << id << " (" << to_string(c.train.precision) << ", " << epochs.size() << " epochs, "
        << result.training->wall_seconds << " s)";
    if (!epochs.empty()) out << " final episode accuracy " << epochs.back().accuracy;
    out << "\ncheckpoint: " << c.out << "\n";
    return result;
}

int cmd_gen_synth(const Flags& f, std::ostream& out) {
    RunConfig c = resolve("gen-synth", f, {});
    if (f.seed) c.synthetic.seed = *f.seed;
    require(c.out, "--out (manifest path)");
    const io::SyntheticData synth = io::gen_synthetic(c.synthetic);
    io::save_dataset(c.out, synth.dataset);
    out << "wrote " << synth.dataset.index.size() << " samples in " << c.synthetic.n_classes << " classes to "
        << c.out << "\n";
    return 0;
}

int cmd_train(const Flags& f, std::ostream& out) {
    const bool seeded_by_file = !f.config.empty() && config_has_train_seed(read_json_file(f.config));
    if (!f.seed && !seeded_by_file) {
        throw InvalidArgument("train needs an explicit seed (--seed or train.seed in the config)");
    }
    RunConfig c = resolve("train", f, {});
    if (f.seed) c.train.seed = *f.seed;
    c.validate();
    require(c.out, "--out (checkpoint path)");
    auto [train, test] = load_split(c);
    const std::string id = f.model_id.value_or(default_model_id(resolve_encoder(c, train, c.train.seed),
                                                                c.train.seed, c.train.use_cal));
    io::RunReport report{c, {}, std::nullopt, std::nullopt};
    if (c.train.precision == Precision::F32) {
        report.models.push_back(train_and_save<float>(c, train, id, out));
    } else {
        report.models.push_back(train_and_save<double>(c, train, id, out));
    }
    io::write_report(default_report(c), report);
    out << "report: " << default_report(c) << "\n";
    return 0;
}

struct Evaluated {
    Evaluation evaluation;
    RunConfig config;
};

Evaluated evaluate_checkpoint(const std::string& path, const Flags& f, const std::string& command) {
    const io::AnyCheckpoint ckpt = io::read_checkpoint(path);
    RunConfig base;
    const std::string& meta = std::visit([](const auto& c) -> const std::string& { return c.metadata; }, ckpt);
    if (!meta.empty()) {
        try {
            base = run_config_from_json(json::parse(meta));
        } catch (const std::exception& e) {
            log::warn("ignoring unreadable config stored in '" + path + "': " + e.what());
        }
    }
    base.out.clear();
    base.report.clear();
    base.inputs.clear();
    RunConfig c = resolve(command, f, base);
    if (f.seed) c.eval_seed = *f.seed;
    auto [train, test] = load_split(c);
    Evaluation ev = std::visit(
        [&](const auto& cp) { return evaluate_model(cp.model, test, c.train.episode, c.eval_episodes, c.eval_seed); },
        ckpt);
    return {std::move(ev), std::move(c)};
}

int cmd_eval(const Flags& f, std::ostream& out) {
    Evaluated e = evaluate_checkpoint(f.model, f, "eval");
    const RunConfig& c = e.config;
    io::RunReport report{c, {}, std::nullopt, std::nullopt};
    report.models.push_back(
        {e.evaluation.predictions.model_id, std::nullopt, e.evaluation.metrics, e.evaluation.compactness});
    const std::string pred_path = c.out.empty() ? f.model + ".predictions.json" : c.out;
    io::write_predictions(pred_path, e.evaluation.predictions);
    const std::string report_path = c.report.empty() ? pred_path + ".report.json" : c.report;
    io::write_report(report_path, report);
    out << "evaluated " << e.evaluation.predictions.model_id << " over " << c.eval_episodes
        << " episodes: accuracy " << e.evaluation.metrics.accuracy << ", macro F1 " << e.evaluation.metrics.macro_f1
        << "\npredictions: " << pred_path << "\nreport: " << report_path << "\n";
    return 0;
}

bool is_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(FormatErrorKind::Io, "cannot open '" + path + "' for reading");
    char magic[4] = {};
    in.read(magic, 4);
    return in.gcount() == 4 && std::string(magic, 4) == "FSCK";
}

int cmd_ensemble(const Flags& f, std::ostream& out) {
    RunConfig c = resolve("ensemble", f, {});
    if (f.seed) c.eval_seed = *f.seed;
    if (c.inputs.empty()) throw InvalidArgument("ensemble needs at least one --inputs file");
    require(c.out, "--out (report path)");
    std::vector<ModelPredictions> preds;
    for (const std::string& path : c.inputs) {
        if (is_checkpoint(path)) {
            Evaluated e = evaluate_checkpoint(path, f, "ensemble");
            preds.push_back(std::move(e.evaluation.predictions));
        } else {
            preds.push_back(io::read_predictions(path));
        }
    }
    std::stable_sort(preds.begin(), preds.end(),
                     [](const ModelPredictions& a, const ModelPredictions& b) { return a.model_id < b.model_id; });
    const PredictionMatrix matrix = assemble(preds);
    io::RunReport report{c, {}, ensemble_evaluate(matrix), std::nullopt};
    double mean_acc = 0.0;
    for (const ModelPredictions& p : preds) {
        MetricsReport m = model_report(p);
        mean_acc += m.accuracy;
        out << "model " << p.model_id << ": accuracy " << m.accuracy << "\n";
        report.models.push_back({p.model_id, std::nullopt, std::move(m), std::nullopt});
    }
    mean_acc /= static_cast<double>(preds.size());
    io::write_report(c.out, report);
    out << "mean single-model accuracy " << mean_acc << "\nhard vote accuracy " << report.ensemble->hard.accuracy
        << "\nsoft vote accuracy " << report.ensemble->soft.accuracy << "\nreport: " << c.out << "\n";
    return 0;
}

template <typename T>
io::ModelResult ablation_arm(const RunConfig& c, const Dataset& train, const Dataset& test, std::uint64_t seed,
                             bool use_cal) {
    RunConfig arm = c;
    arm.train.seed = seed;
    arm.train.use_cal = use_cal;
    const EncoderSpec spec = resolve_encoder(arm, train, seed);
    ProtoModel<T> model(spec, default_model_id(spec, seed, use_cal));
    TrainReport tr = train_model(model, train, arm.train);
    Evaluation ev = evaluate_model(model, test, arm.train.episode, arm.eval_episodes, arm.eval_seed);
    return {model.id, std::move(tr), std::move(ev.metrics), ev.compactness};
}

int cmd_ablate(const Flags& f, std::ostream& out) {
    RunConfig c = resolve("ablate", f, {});
    if (f.seed) c.train.seed = *f.seed;
    c.validate();
    require(c.out, "--out (report path)");
    if (c.ablation_seeds == 0) throw InvalidArgument("ablation needs at least one seed");
    auto [train, test] = load_split(c);
    std::vector<io::AblationPair> pairs;
    for (std::size_t i = 0; i < c.ablation_seeds; ++i) {
        const std::uint64_t seed = c.train.seed + i;
        io::AblationPair p;
        p.seed = seed;
        if (c.train.precision == Precision::F32) {
            p.with_cal = ablation_arm<float>(c, train, test, seed, true);
            p.without_cal = ablation_arm<float>(c, train, test, seed, false);
        } else {
            p.with_cal = ablation_arm<double>(c, train, test, seed, true);
            p.without_cal = ablation_arm<double>(c, train, test, seed, false);
        }
        out << "seed " << seed << ": ratio " << p.with_cal.compactness->ratio << " (cal) vs "
            << p.without_cal.compactness->ratio << " (no cal), accuracy " << p.with_cal.metrics->accuracy << " vs "
            << p.without_cal.metrics->accuracy << "\n";
        pairs.push_back(std::move(p));
    }
    io::RunReport report{c, {}, std::nullopt, io::summarize_ablation(std::move(pairs))};
    io::write_report(c.out, report);
    const io::AblationSummary& s = *report.ablation;
    out << "mean ratio " << s.mean_ratio_with_cal << " (cal) vs " << s.mean_ratio_without_cal
        << " (no cal); mean accuracy " << s.mean_accuracy_with_cal << " vs " << s.mean_accuracy_without_cal
        << "\nreport: " << c.out << "\n";
    return 0;
}

void add_common(CLI::App* app, Flags& f) {
    app->add_option("--config", f.config, "JSON run config; flags override it");
    app->add_option("--out", f.out, "Output path");
}

void add_episode(CLI::App* app, Flags& f) {
    app->add_option("--n-way", f.n_way, "Classes per episode");
    app->add_option("--k-shot", f.k_shot, "Support samples per class");
    app->add_option("--q-query", f.q_query, "Query samples per class");
}

void add_data(CLI::App* app, Flags& f) {
    app->add_option("--data", f.data, "Dataset manifest");
    app->add_option("--train-fraction", f.train_fraction, "Per-class train share of the split");
    app->add_option("--split-seed", f.split_seed, "Seed of the train/test split");
}

void add_training(CLI::App* app, Flags& f) {
    app->add_option("--margin", f.margin, "CAL margin");
    app->add_flag("--no-cal", f.no_cal, "Train with cross-entropy only");
    app->add_option("--epochs", f.epochs, "Training epochs");
    app->add_option("--episodes-per-epoch", f.episodes_per_epoch, "Episodes (Adam steps) per epoch");
    app->add_option("--lr", f.lr, "Adam learning rate");
    app->add_option("--encoder", f.encoder, "mlp | conv-toy | frozen-projection");
    app->add_option("--hidden", f.hidden, "Hidden widths (mlp) or block channels (conv-toy)");
    app->add_option("--embedding-dim", f.embedding_dim, "Embedding dimension");
    app->add_option("--precision", f.precision, "f32 | f64");
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Few-shot prototypical network ensembles with a class-aware loss", "fsl"};
    app.require_subcommand(1);
    Flags f;

    CLI::App* gen = app.add_subcommand("gen-synth", "Write a synthetic Gaussian dataset");
    add_common(gen, f);
    gen->add_option("--seed", f.seed, "Generator seed");
    gen->add_option("--classes", f.classes, "Number of classes");
    gen->add_option("--dim", f.dim, "Sample dimension");
    gen->add_option("--counts", f.counts, "Samples per class (one value or one per class)");
    gen->add_option("--separation", f.separation, "Pairwise class-mean distance in sigmas");
    gen->add_option("--sigma", f.sigma, "Noise standard deviation");

    CLI::App* train = app.add_subcommand("train", "Train one model and write a checkpoint");
    add_common(train, f);
    add_data(train, f);
    add_episode(train, f);
    add_training(train, f);
    train->add_option("--seed", f.seed, "Training and initialization seed (required)");
    train->add_option("--report", f.report, "Report path (default <out>.report.json)");
    train->add_option("--model-id", f.model_id, "Model identifier");

    CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint on test episodes");
    add_common(eval, f);
    add_data(eval, f);
    add_episode(eval, f);
    eval->add_option("--model", f.model, "Checkpoint path")->required();
    eval->add_option("--seed", f.seed, "Evaluation episode seed");
    eval->add_option("--episodes", f.episodes, "Number of evaluation episodes");
    eval->add_option("--report", f.report, "Report path");

    CLI::App* ens = app.add_subcommand("ensemble", "Hard and soft voting over several models");
    add_common(ens, f);
    add_data(ens, f);
    add_episode(ens, f);
    ens->add_option("--inputs", f.inputs, "Prediction files or checkpoints");
    ens->add_option("--seed", f.seed, "Evaluation episode seed for checkpoint inputs");
    ens->add_option("--episodes", f.episodes, "Number of evaluation episodes for checkpoint inputs");

    CLI::App* abl = app.add_subcommand("ablate", "Paired runs with and without the class-aware loss");
    add_common(abl, f);
    add_data(abl, f);
    add_episode(abl, f);
    add_training(abl, f);
    abl->add_option("--seed", f.seed, "First training seed");
    abl->add_option("--seeds", f.n_seeds, "Number of paired seeds");
    abl->add_option("--episodes", f.episodes, "Number of evaluation episodes");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (*gen) return cmd_gen_synth(f, out);
        if (*train) return cmd_train(f, out);
        if (*eval) return cmd_eval(f, out);
        if (*ens) return cmd_ensemble(f, out);
        if (*abl) return cmd_ablate(f, out);
    } catch (const std::exception& e) {
        err << "fsl: error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

int dispatch(int argc, const char* const* argv) {
    return dispatch(argc, argv, std::cout, std::cerr);
}

}  // namespace fsl::cli
