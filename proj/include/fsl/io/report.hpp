#pragma once

// JSON run reports and prediction files. Every report carries the resolved
// RunConfig (so margin and use_cal are always present), per-model metrics
// and curves, and optional ensemble and ablation sections.

#include <optional>
#include <string>
#include <vector>

#include "fsl/config.hpp"
#include "fsl/ensemble.hpp"
#include "fsl/metrics.hpp"
#include "fsl/trainer.hpp"
#include "json.hpp"

namespace fsl::io {

inline constexpr int kReportSchema = 1;
inline constexpr int kPredictionsSchema = 1;

struct ModelResult {
    std::string model_id;
    std::optional<TrainReport> training;
    std::optional<MetricsReport> metrics;
    std::optional<CompactnessStats> compactness;
};

struct AblationPair {
    std::uint64_t seed = 0;
    ModelResult with_cal;
    ModelResult without_cal;
};

struct AblationSummary {
    std::vector<AblationPair> pairs;
    double mean_ratio_with_cal = 0.0;
    double mean_ratio_without_cal = 0.0;
    double mean_accuracy_with_cal = 0.0;
    double mean_accuracy_without_cal = 0.0;
};

// Averages the paired arms. Throws InvalidArgument on an empty list or a
// pair without metrics/compactness.
AblationSummary summarize_ablation(std::vector<AblationPair> pairs);

struct RunReport {
    RunConfig config;
    std::vector<ModelResult> models;
    std::optional<EnsembleReport> ensemble;
    std::optional<AblationSummary> ablation;
};

nlohmann::json to_json(const MetricsReport& r);
nlohmann::json to_json(const TrainReport& r);
nlohmann::json to_json(const CompactnessStats& c);
nlohmann::json to_json(const ModelPredictions& p);
nlohmann::json to_json(const EnsembleReport& r);
nlohmann::json to_json(const RunReport& r);

MetricsReport metrics_from_json(const nlohmann::json& j);
TrainReport train_report_from_json(const nlohmann::json& j);
CompactnessStats compactness_from_json(const nlohmann::json& j);
ModelPredictions predictions_from_json(const nlohmann::json& j);
EnsembleReport ensemble_from_json(const nlohmann::json& j);
RunReport report_from_json(const nlohmann::json& j);

std::string report_to_string(const RunReport& report);
RunReport report_from_string(const std::string& text);
void write_report(const std::string& path, const RunReport& report);
RunReport read_report(const std::string& path);

void write_predictions(const std::string& path, const ModelPredictions& predictions);
ModelPredictions read_predictions(const std::string& path);

}  // namespace fsl::io
