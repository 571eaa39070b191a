#pragma once

// Fully resolved settings of one CLI run. Loaded from a JSON file (keys
// missing from the file keep their defaults), then overridden by flags, and
// echoed into every report and checkpoint.

#include <cstdint>
#include <string>
#include <vector>

#include "fsl/encoder.hpp"
#include "fsl/io/synthetic.hpp"
#include "fsl/trainer.hpp"
#include "json.hpp"

namespace fsl {

inline constexpr int kRunConfigSchema = 1;

struct RunConfig {
    std::string command;
    TrainConfig train;
    // Empty input_shape is filled from the dataset's sample shape.
    EncoderSpec encoder{EncoderKind::Mlp, {}, 128, {64}, 0, InitScheme::HeUniform};
    std::size_t eval_episodes = 100;
    std::uint64_t eval_seed = 0;
    double train_fraction = 0.8;
    std::uint64_t split_seed = 0;
    std::size_t ablation_seeds = 10;
    io::SyntheticSpec synthetic;
    std::string data;
    std::vector<std::string> inputs;
    std::string out;
    std::string report;

    void validate() const;
};

nlohmann::json encoder_spec_to_json(const EncoderSpec& spec);
EncoderSpec encoder_spec_from_json(const nlohmann::json& j, EncoderSpec base = {});

nlohmann::json run_config_to_json(const RunConfig& config);
// Overlays the keys present in j onto base. Unknown keys are rejected with
// InvalidArgument so typos do not pass silently.
RunConfig run_config_from_json(const nlohmann::json& j, RunConfig base = {});
RunConfig load_run_config(const std::string& path, RunConfig base = {});

}  // namespace fsl
