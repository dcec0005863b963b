#pragma once

#include <string>

#include <json.hpp>

#include "rda/environment.hpp"
#include "rda/learner.hpp"
#include "rda/nn.hpp"

namespace rda {

/// A learner checkpoint is a JSON header at `path` plus a sidecar
/// `path + ".params"` holding the flat parameters as little-endian float64.
struct Checkpoint {
    QNetwork network;
    EnvSpec env;
    LearnerConfig learner;
    nlohmann::json info = nlohmann::json::object();  // free-form provenance
};

inline constexpr const char* kCheckpointFormat = "rda-learner-checkpoint";
inline constexpr int kCheckpointVersion = 1;

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
/// Throws std::runtime_error for missing files, format mismatches or a
/// parameter count / checksum that disagrees with the header.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace rda
