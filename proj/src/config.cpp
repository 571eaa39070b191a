#include "fsl/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace fsl {

using nlohmann::json;

namespace {

const char* to_string(InitScheme s) {
    return s == InitScheme::Identity ? "identity" : "he-uniform";
}

InitScheme init_from_string(const std::string& s) {
    if (s == "he-uniform") return InitScheme::HeUniform;
    if (s == "identity") return InitScheme::Identity;
    throw InvalidArgument("unknown init scheme '" + s + "'");
}

void check_keys(const json& j, const char* where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw InvalidArgument(std::string(where) + " must be a JSON object");
    const std::set<std::string> known(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) throw InvalidArgument("unknown key '" + key + "' in " + where);
    }
}

template <typename V>
void take(const json& j, const char* key, V& out) {
    if (j.contains(key)) out = j.at(key).get<V>();
}

json episode_to_json(const EpisodeSpec& e) {
    return {{"n_way", e.n_way}, {"k_shot", e.k_shot}, {"q_query", e.q_query}, {"seed", e.seed}};
}

EpisodeSpec episode_from_json(const json& j, EpisodeSpec e) {
    check_keys(j, "episode", {"n_way", "k_shot", "q_query", "seed"});
    take(j, "n_way", e.n_way);
    take(j, "k_shot", e.k_shot);
    take(j, "q_query", e.q_query);
    take(j, "seed", e.seed);
    return e;
}

json train_to_json(const TrainConfig& t) {
    return {{"epochs", t.epochs},
            {"episodes_per_epoch", t.episodes_per_epoch},
            {"episode", episode_to_json(t.episode)},
            {"learning_rate", t.learning_rate},
            {"margin", t.margin},
            {"use_cal", t.use_cal},
            {"seed", t.seed},
            {"precision", to_string(t.precision)},
            {"check_finite", t.check_finite}};
}

TrainConfig train_from_json(const json& j, TrainConfig t) {
    check_keys(j, "train", {"epochs", "episodes_per_epoch", "episode", "learning_rate", "margin", "use_cal", "seed",
                            "precision", "check_finite"});
    take(j, "epochs", t.epochs);
    take(j, "episodes_per_epoch", t.episodes_per_epoch);
    if (j.contains("episode")) t.episode = episode_from_json(j.at("episode"), t.episode);
    take(j, "learning_rate", t.learning_rate);
    take(j, "margin", t.margin);
    take(j, "use_cal", t.use_cal);
    take(j, "seed", t.seed);
    if (j.contains("precision")) t.precision = precision_from_string(j.at("precision").get<std::string>());
    take(j, "check_finite", t.check_finite);
    return t;
}

json synthetic_to_json(const io::SyntheticSpec& s) {
    return {{"n_classes", s.n_classes},   {"dim", s.dim},     {"samples_per_class", s.samples_per_class},
            {"separation", s.separation}, {"sigma", s.sigma}, {"seed", s.seed}};
}

io::SyntheticSpec synthetic_from_json(const json& j, io::SyntheticSpec s) {
    check_keys(j, "synthetic", {"n_classes", "dim", "samples_per_class", "separation", "sigma", "seed"});
    take(j, "n_classes", s.n_classes);
    take(j, "dim", s.dim);
    take(j, "samples_per_class", s.samples_per_class);
    take(j, "separation", s.separation);
    take(j, "sigma", s.sigma);
    take(j, "seed", s.seed);
    return s;
}

}  // namespace

void RunConfig::validate() const {
    train.validate();
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw InvalidArgument("train fraction must lie in (0, 1)");
    }
}

json encoder_spec_to_json(const EncoderSpec& spec) {
    return {{"kind", to_string(spec.kind)}, {"input_shape", spec.input_shape}, {"embedding_dim", spec.embedding_dim},
            {"hidden", spec.hidden},        {"seed", spec.seed},               {"init", to_string(spec.init)}};
}

EncoderSpec encoder_spec_from_json(const json& j, EncoderSpec base) {
    try {
        check_keys(j, "encoder", {"kind", "input_shape", "embedding_dim", "hidden", "seed", "init"});
        if (j.contains("kind")) base.kind = encoder_kind_from_string(j.at("kind").get<std::string>());
        take(j, "input_shape", base.input_shape);
        take(j, "embedding_dim", base.embedding_dim);
        take(j, "hidden", base.hidden);
        take(j, "seed", base.seed);
        if (j.contains("init")) base.init = init_from_string(j.at("init").get<std::string>());
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("encoder: ") + e.what());
    }
    return base;
}

json run_config_to_json(const RunConfig& c) {
    return {{"schema_version", kRunConfigSchema},
            {"command", c.command},
            {"train", train_to_json(c.train)},
            {"encoder", encoder_spec_to_json(c.encoder)},
            {"eval_episodes", c.eval_episodes},
            {"eval_seed", c.eval_seed},
            {"train_fraction", c.train_fraction},
            {"split_seed", c.split_seed},
            {"ablation_seeds", c.ablation_seeds},
            {"synthetic", synthetic_to_json(c.synthetic)},
            {"data", c.data},
            {"inputs", c.inputs},
            {"out", c.out},
            {"report", c.report}};
}

RunConfig run_config_from_json(const json& j, RunConfig c) {
    try {
        check_keys(j, "config",
                   {"schema_version", "command", "train", "encoder", "eval_episodes", "eval_seed", "train_fraction",
                    "split_seed", "ablation_seeds", "synthetic", "data", "inputs", "out", "report"});
        if (j.contains("schema_version") && j.at("schema_version").get<int>() != kRunConfigSchema) {
            throw InvalidArgument("unsupported config schema_version " + j.at("schema_version").dump());
        }
        take(j, "command", c.command);
        if (j.contains("train")) c.train = train_from_json(j.at("train"), c.train);
        if (j.contains("encoder")) c.encoder = encoder_spec_from_json(j.at("encoder"), c.encoder);
        take(j, "eval_episodes", c.eval_episodes);
        take(j, "eval_seed", c.eval_seed);
        take(j, "train_fraction", c.train_fraction);
        take(j, "split_seed", c.split_seed);
        take(j, "ablation_seeds", c.ablation_seeds);
        if (j.contains("synthetic")) c.synthetic = synthetic_from_json(j.at("synthetic"), c.synthetic);
        take(j, "data", c.data);
        take(j, "inputs", c.inputs);
        take(j, "out", c.out);
        take(j, "report", c.report);
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("config: ") + e.what());
    }
    return c;
}

RunConfig load_run_config(const std::string& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw FormatError(FormatErrorKind::Io, "cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    json j;
    try {
        j = json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw FormatError(FormatErrorKind::Malformed, "config '" + path + "': " + e.what());
    }
    return run_config_from_json(j, std::move(base));
}

}  // namespace fsl
