#pragma once

#include <string>

#include <json.hpp>

#include "rda/attacker.hpp"
#include "rda/environment.hpp"
#include "rda/harness.hpp"
#include "rda/learner.hpp"

namespace rda {

// Readers reject unknown keys and wrong types with std::invalid_argument;
// missing keys keep their defaults.

nlohmann::json to_json(const EnvSpec& spec);
nlohmann::json to_json(const NetworkSpec& spec);
nlohmann::json to_json(const LearnerConfig& config);
nlohmann::json to_json(const AttackerConfig& config);
nlohmann::json to_json(const ExperimentConfig& config);

EnvSpec env_from_json(const nlohmann::json& j);
NetworkSpec network_spec_from_json(const nlohmann::json& j);
LearnerConfig learner_from_json(const nlohmann::json& j);
AttackerConfig attacker_from_json(const nlohmann::json& j);
ExperimentConfig experiment_from_json(const nlohmann::json& j);

nlohmann::json read_json_file(const std::string& path);
ExperimentConfig load_config(const std::string& path);

/// Sets a dotted path such as "attack.delta" inside a config tree; the value
/// text is parsed as JSON when possible, otherwise stored as a string.
void set_config_value(nlohmann::json& root, const std::string& dotted_key, const std::string& value);

}  // namespace rda
