#pragma once

#include "dascn/data.hpp"
#include "dascn/evaluation.hpp"
#include "dascn/trainer.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dascn {

// Everything one CLI run needs. Exactly one data source is set.
struct RunConfig {
    std::optional<std::string> dataset;
    std::string split;
    bool normalize_features = false;
    std::optional<SyntheticSpec> synthetic;

    std::uint64_t seed = 0; // root seed; train/eval seeds derive from it
    TrainConfig train;
    EvalConfig eval;
    std::vector<int> counts{10, 50, 100, 300, 500};
    std::vector<Variant> variants = all_variants();
    std::string out = "run";

    /// Throws ValidationError naming the offending field.
    void validate() const;

    /// Applies the root seed to the train and eval sub-configs.
    void propagate_seed();
};

nlohmann::json to_json(const LossWeights& w);
nlohmann::json to_json(const TrainConfig& c);
nlohmann::json to_json(const EvalConfig& c);
nlohmann::json to_json(const SyntheticSpec& s);
nlohmann::json to_json(const ClassifierFitOptions& o);
nlohmann::json to_json(const RunConfig& c);

// Parsers fill defaults for absent fields and reject unknown ones.
TrainConfig train_config_from_json(const nlohmann::json& j, const std::string& path = "train");
EvalConfig eval_config_from_json(const nlohmann::json& j, const std::string& path = "eval");
SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j, const std::string& path = "synthetic");
RunConfig run_config_from_json(const nlohmann::json& j);

RunConfig load_run_config(const std::filesystem::path& path);

/// Resolves the configured data source into a validated bundle.
DatasetBundle load_bundle(const RunConfig& config);

} // namespace dascn
