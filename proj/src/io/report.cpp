#include "fsl/io/report.hpp"

#include <fstream>
#include <sstream>

namespace fsl::io {

using nlohmann::json;

namespace {

[[noreturn]] void malformed(const std::string& what) {
    throw FormatError(FormatErrorKind::Malformed, what);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(FormatErrorKind::Io, "cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError(FormatErrorKind::Io, "cannot open '" + path + "' for writing");
    out << text << '\n';
    if (!out) throw FormatError(FormatErrorKind::Io, "write to '" + path + "' failed");
}

json parse(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        malformed(std::string(what) + ": invalid JSON: " + e.what());
    }
}

void check_schema(const json& j, int expected, const char* what) {
    const int v = j.at("schema_version").get<int>();
    if (v != expected) {
        throw FormatError(FormatErrorKind::UnsupportedVersion,
                          "unsupported version " + std::to_string(v) + " of " + what);
    }
}

json model_result_to_json(const ModelResult& m) {
    json j{{"model_id", m.model_id}};
    if (m.training) j["training"] = to_json(*m.training);
    if (m.metrics) j["metrics"] = to_json(*m.metrics);
    if (m.compactness) j["compactness"] = to_json(*m.compactness);
    return j;
}

ModelResult model_result_from_json(const json& j) {
    ModelResult m;
    m.model_id = j.at("model_id").get<std::string>();
    if (j.contains("training")) m.training = train_report_from_json(j.at("training"));
    if (j.contains("metrics")) m.metrics = metrics_from_json(j.at("metrics"));
    if (j.contains("compactness")) m.compactness = compactness_from_json(j.at("compactness"));
    return m;
}

}  // namespace

AblationSummary summarize_ablation(std::vector<AblationPair> pairs) {
    if (pairs.empty()) throw InvalidArgument("ablation needs at least one seed pair");
    AblationSummary s;
    for (const AblationPair& p : pairs) {
        for (const ModelResult* m : {&p.with_cal, &p.without_cal}) {
            if (!m->metrics || !m->compactness) throw InvalidArgument("ablation arm lacks evaluation results");
        }
        s.mean_ratio_with_cal += p.with_cal.compactness->ratio;
        s.mean_ratio_without_cal += p.without_cal.compactness->ratio;
        s.mean_accuracy_with_cal += p.with_cal.metrics->accuracy;
        s.mean_accuracy_without_cal += p.without_cal.metrics->accuracy;
    }
    const double n = static_cast<double>(pairs.size());
    s.mean_ratio_with_cal /= n;
    s.mean_ratio_without_cal /= n;
    s.mean_accuracy_with_cal /= n;
    s.mean_accuracy_without_cal /= n;
    s.pairs = std::move(pairs);
    return s;
}

json to_json(const MetricsReport& r) {
    json per_class = json::array();
    for (std::size_t c = 0; c < r.per_class.size(); ++c) {
        const ClassMetrics& m = r.per_class[c];
        per_class.push_back({{"class", c < r.confusion.class_names.size() ? r.confusion.class_names[c] : ""},
                             {"precision", m.precision},
                             {"recall", m.recall},
                             {"f1", m.f1},
                             {"support", m.support}});
    }
    return {{"accuracy", r.accuracy},
            {"macro_precision", r.macro_precision},
            {"macro_recall", r.macro_recall},
            {"macro_f1", r.macro_f1},
            {"per_class", std::move(per_class)},
            {"confusion", {{"classes", r.confusion.class_names}, {"counts", r.confusion.counts}}}};
}

MetricsReport metrics_from_json(const json& j) {
    MetricsReport r;
    r.accuracy = j.at("accuracy").get<double>();
    r.macro_precision = j.at("macro_precision").get<double>();
    r.macro_recall = j.at("macro_recall").get<double>();
    r.macro_f1 = j.at("macro_f1").get<double>();
    for (const json& c : j.at("per_class")) {
        r.per_class.push_back({c.at("precision").get<double>(), c.at("recall").get<double>(),
                               c.at("f1").get<double>(), c.at("support").get<std::uint64_t>()});
    }
    r.confusion.class_names = j.at("confusion").at("classes").get<std::vector<std::string>>();
    r.confusion.counts = j.at("confusion").at("counts").get<std::vector<std::vector<std::uint64_t>>>();
    return r;
}

json to_json(const TrainReport& r) {
    json loss = {{"ce", json::array()}, {"l_ca", json::array()}, {"l_comb", json::array()}};
    json acc = json::array();
    for (const EpochRecord& e : r.epochs) {
        loss["ce"].push_back(e.loss.ce);
        loss["l_ca"].push_back(e.loss.l_ca);
        loss["l_comb"].push_back(e.loss.l_comb);
        acc.push_back(e.accuracy);
    }
    const double margin = r.epochs.empty() ? 0.0 : r.epochs.front().loss.margin;
    return {{"loss", std::move(loss)},
            {"accuracy", std::move(acc)},
            {"margin", margin},
            {"wall_seconds", r.wall_seconds},
            {"checksum", r.checksum}};
}

TrainReport train_report_from_json(const json& j) {
    TrainReport r;
    const auto ce = j.at("loss").at("ce").get<std::vector<double>>();
    const auto lca = j.at("loss").at("l_ca").get<std::vector<double>>();
    const auto comb = j.at("loss").at("l_comb").get<std::vector<double>>();
    const auto acc = j.at("accuracy").get<std::vector<double>>();
    if (lca.size() != ce.size() || comb.size() != ce.size() || acc.size() != ce.size()) {
        malformed("training curves have unequal lengths");
    }
    const double margin = j.at("margin").get<double>();
    for (std::size_t i = 0; i < ce.size(); ++i) {
        r.epochs.push_back({{ce[i], lca[i], comb[i], margin}, acc[i]});
    }
    r.wall_seconds = j.at("wall_seconds").get<double>();
    r.checksum = j.at("checksum").get<std::uint64_t>();
    return r;
}

json to_json(const CompactnessStats& c) {
    return {{"mean_max_positive", c.mean_max_positive}, {"mean_min_negative", c.mean_min_negative}, {"ratio", c.ratio}};
}

CompactnessStats compactness_from_json(const json& j) {
    return {j.at("mean_max_positive").get<double>(), j.at("mean_min_negative").get<double>(),
            j.at("ratio").get<double>()};
}

json to_json(const ModelPredictions& p) {
    json queries = json::array();
    for (const QueryRecord& q : p.queries) {
        queries.push_back(
            {{"episode", q.episode}, {"truth", q.truth}, {"label", q.label}, {"probabilities", q.probabilities}});
    }
    return {{"schema_version", kPredictionsSchema},
            {"model_id", p.model_id},
            {"classes", p.class_names},
            {"episode_seed", p.episode_seed},
            {"episode_classes", p.episode_classes},
            {"queries", std::move(queries)}};
}

ModelPredictions predictions_from_json(const json& j) {
    ModelPredictions p;
    try {
        check_schema(j, kPredictionsSchema, "prediction file");
        p.model_id = j.at("model_id").get<std::string>();
        p.class_names = j.at("classes").get<std::vector<std::string>>();
        p.episode_seed = j.at("episode_seed").get<std::uint64_t>();
        p.episode_classes = j.at("episode_classes").get<std::vector<std::vector<std::size_t>>>();
        for (const json& q : j.at("queries")) {
            p.queries.push_back({q.at("episode").get<std::size_t>(), q.at("truth").get<std::size_t>(),
                                 q.at("probabilities").get<std::vector<double>>(), q.at("label").get<std::size_t>()});
        }
    } catch (const json::exception& e) {
        malformed(std::string("prediction file: ") + e.what());
    }
    try {
        p.validate();
    } catch (const InvalidArgument& e) {
        malformed(std::string("prediction file: ") + e.what());
    }
    return p;
}

json to_json(const EnsembleReport& r) {
    json decisions = json::array();
    for (const EnsembleDecision& d : r.decisions) {
        decisions.push_back({{"hard", d.hard_label}, {"soft", d.soft_label}, {"tie", d.tie}, {"mean", d.mean}});
    }
    return {{"hard_vote", to_json(r.hard)}, {"soft_vote", to_json(r.soft)}, {"decisions", std::move(decisions)}};
}

EnsembleReport ensemble_from_json(const json& j) {
    EnsembleReport r;
    r.hard = metrics_from_json(j.at("hard_vote"));
    r.soft = metrics_from_json(j.at("soft_vote"));
    for (const json& d : j.at("decisions")) {
        r.decisions.push_back({d.at("hard").get<std::size_t>(), d.at("soft").get<std::size_t>(),
                               d.at("mean").get<std::vector<double>>(), d.at("tie").get<bool>()});
    }
    return r;
}

json to_json(const RunReport& r) {
    json j{{"schema_version", kReportSchema},
           {"config", run_config_to_json(r.config)},
           {"margin", r.config.train.margin},
           {"use_cal", r.config.train.use_cal}};
    json models = json::array();
    for (const ModelResult& m : r.models) models.push_back(model_result_to_json(m));
    j["models"] = std::move(models);
    if (r.ensemble) j["ensemble"] = to_json(*r.ensemble);
    if (r.ablation) {
        json pairs = json::array();
        for (const AblationPair& p : r.ablation->pairs) {
            pairs.push_back({{"seed", p.seed}, {"with_cal", model_result_to_json(p.with_cal)}, {"without_cal", model_result_to_json(p.without_cal)}});
        }
        j["ablation"] = {{"pairs", std::move(pairs)},
                         {"mean_ratio_with_cal", r.ablation->mean_ratio_with_cal},
                         {"mean_ratio_without_cal", r.ablation->mean_ratio_without_cal},
                         {"mean_accuracy_with_cal", r.ablation->mean_accuracy_with_cal},
                         {"mean_accuracy_without_cal", r.ablation->mean_accuracy_without_cal}};
    }
    return j;
}

RunReport report_from_json(const json& j) {
    RunReport r;
    try {
        check_schema(j, kReportSchema, "run report");
        r.config = run_config_from_json(j.at("config"));
        if (j.at("margin").get<double>() != r.config.train.margin || j.at("use_cal").get<bool>() != r.config.train.use_cal) {
            malformed("run report: margin/use_cal disagree with the config echo");
        }
        for (const json& m : j.at("models")) r.models.push_back(model_result_from_json(m));
        if (j.contains("ensemble")) r.ensemble = ensemble_from_json(j.at("ensemble"));
        if (j.contains("ablation")) {
            const json& a = j.at("ablation");
            AblationSummary s;
            for (const json& p : a.at("pairs")) {
                s.pairs.push_back({p.at("seed").get<std::uint64_t>(), model_result_from_json(p.at("with_cal")),
                                   model_result_from_json(p.at("without_cal"))});
            }
            s.mean_ratio_with_cal = a.at("mean_ratio_with_cal").get<double>();
            s.mean_ratio_without_cal = a.at("mean_ratio_without_cal").get<double>();
            s.mean_accuracy_with_cal = a.at("mean_accuracy_with_cal").get<double>();
            s.mean_accuracy_without_cal = a.at("mean_accuracy_without_cal").get<double>();
            r.ablation = std::move(s);
        }
    } catch (const json::exception& e) {
        malformed(std::string("run report: ") + e.what());
    } catch (const InvalidArgument& e) {
        malformed(std::string("run report: ") + e.what());
    }
    return r;
}

std::string report_to_string(const RunReport& report) {
    return to_json(report).dump(2);
}

RunReport report_from_string(const std::string& text) {
    return report_from_json(parse(text, "run report"));
}

void write_report(const std::string& path, const RunReport& report) {
    write_text(path, report_to_string(report));
}

RunReport read_report(const std::string& path) {
    return report_from_string(read_text(path));
}

void write_predictions(const std::string& path, const ModelPredictions& predictions) {
    write_text(path, to_json(predictions).dump(1));
}

ModelPredictions read_predictions(const std::string& path) {
    return predictions_from_json(parse(read_text(path), "prediction file"));
}

}  // namespace fsl::io
