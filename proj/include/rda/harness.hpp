#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rda/attacker.hpp"
#include "rda/disk.hpp"
#include "rda/environment.hpp"
#include "rda/learner.hpp"

namespace rda {

struct AttackSettings {
    long delta = 8;              // max delay of a published reward
    std::size_t disk = 9;        // disk capacity d
    std::size_t max_drop = 4;    // largest drop index K (shift mode)
    friend bool operator==(const AttackSettings&, const AttackSettings&) = default;
};

struct EvalSettings {
    int every = 1;
    int episodes = 10;
    friend bool operator==(const EvalSettings&, const EvalSettings&) = default;
};

struct TargetSettings {
    std::vector<std::size_t> actions;  // empty: the environment's stay action
    std::string qstar_checkpoint;      // empty: pretrain Q* in-process
    friend bool operator==(const TargetSettings&, const TargetSettings&) = default;
};

struct ExperimentConfig {
    EnvSpec env;
    AttackMode mode = AttackMode::none;
    Objective objective = Objective::untargeted;
    AttackerKind attacker = AttackerKind::learned;
    AttackSettings attack;
    int episodes = 300;
    LearnerConfig learner;
    AttackerConfig attacker_net;
    EvalSettings eval;
    std::uint64_t seed = 0;
    std::optional<std::string> pretrained_start;
    TargetSettings target;
    long pretrain_steps = 20000;  // clean budget for Q* and checkpoint pretraining

    /// Throws std::invalid_argument on any invariant violation.
    void validate() const;
    bool measures_success() const { return objective != Objective::untargeted; }

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Reward bookkeeping for one training episode. Every generated reward ends
/// up in exactly one of the four sinks.
struct RewardAccounting {
    long generated = 0;
    long published = 0;
    long expired = 0;
    long shift_dropped = 0;
    long residual = 0;
    long unrewarded_transitions = 0;  // learner steps that never received a reward
    long delay_sum = 0;               // sum over published items of publish - origin

    bool balanced() const { return generated == published + expired + shift_dropped + residual; }
    RewardAccounting& operator+=(const RewardAccounting& other);
};

struct EvalRow {
    int episode = 0;  // 1-based count of completed training episodes
    double eval_return = 0.0;
    std::optional<double> success_rate;
    RewardAccounting rewards;  // training episodes since the previous row
    std::optional<double> mean_delay() const;
};

struct RunSummary {
    double final_return = 0.0;
    std::optional<double> final_success_rate;
    double optimal_return = 0.0;
    std::optional<double> start_return;  // pretrained runs
    double wall_seconds = 0.0;
    long learner_steps = 0;
    long learner_updates = 0;
    RewardAccounting totals;
};

struct RunReport {
    std::vector<EvalRow> rows;
    std::vector<RewardAccounting> episodes;
    RunSummary summary;
};

struct RunHooks {
    /// Called after every environment step, once the learner has updated.
    std::function<void(const LearnerState&, long step)> on_step;
    /// When set, receives one trace record per environment step.
    std::ostream* trace = nullptr;
    /// Replaces in-process Q* pretraining for targeted objectives.
    const QNetwork* qstar = nullptr;
};

RunReport run_experiment(const ExperimentConfig& cfg, const RunHooks& hooks = {});

/// Continues training from `cfg.pretrained_start` under the configured attack.
/// Throws when the checkpoint is missing, mismatched or below 90% of optimal.
RunReport run_pretrained_attack(const ExperimentConfig& cfg, const RunHooks& hooks = {});

/// Q* for a targeted config: loaded from target.qstar_checkpoint or pretrained.
QNetwork resolve_qstar(const ExperimentConfig& cfg);

std::vector<std::size_t> resolve_target_actions(const ExperimentConfig& cfg);

inline constexpr const char* kMetricsHeader =
    "episode,eval_return,success_rate,drops_expiry,drops_shift,drops_residual,mean_delay";

void write_metrics_csv(std::ostream& out, const RunReport& report);
void write_metrics_csv(const std::string& path, const RunReport& report);
void write_summary_json(const std::string& path, const ExperimentConfig& cfg,
                        const RunReport& report);

}  // namespace rda
