#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rda/disk.hpp"
#include "rda/learner.hpp"
#include "rda/nn.hpp"
#include "rda/random.hpp"
#include "rda/replay.hpp"
#include "rda/target_policy.hpp"

namespace rda {

enum class AttackerKind { learned, random, fixed_delay, random_shift, pass_through };
enum class Objective { untargeted, targeted, rule };

std::string to_string(AttackerKind kind);
AttackerKind attacker_kind_from_string(const std::string& name);
std::string to_string(Objective objective);
Objective objective_from_string(const std::string& name);

struct AttackerConfig {
    std::vector<std::size_t> hidden{64, 64};
    bool dueling = true;
    double learning_rate = 0.01;
    double gamma = 0.9;
    std::size_t batch_size = 32;
    std::size_t replay_capacity = 10000;
    long target_sync_period = 100;
    EpsilonSchedule epsilon{1.0, 0.05, 2000};

    void validate() const;
    friend bool operator==(const AttackerConfig&, const AttackerConfig&) = default;
};

/// What the attacker sees at a decision: the learner's state, action and
/// reward, the disk (value, age / max_delay per slot, zero padded) and the
/// learner's Q-values at the state.
struct AttackerObservation {
    std::vector<double> state_features;
    std::vector<double> action_onehot;
    double current_reward = 0.0;
    std::vector<double> disk_features;
    std::vector<double> learner_q_values;

    std::vector<double> flatten() const;
};

std::size_t observation_dim(std::size_t state_dim, std::size_t action_count,
                            std::size_t disk_capacity);

AttackerObservation observe(std::span<const double> state, std::size_t action, double reward,
                            const Disk& disk, std::span<const double> learner_q);
AttackerObservation observe(const LearnerState& learner, std::span<const double> state,
                            std::size_t action, double reward, const Disk& disk);

struct AttackerTransition {
    std::vector<double> obs;
    std::size_t action = 0;
    double reward = 0.0;
    std::vector<double> next_obs;
    bool done = false;
    ActionMask next_mask;
};

struct AttackerAgent {
    AttackerConfig config;
    QNetwork online;
    QNetwork target;
    ReplayBuffer<AttackerTransition> replay{1};
    long decisions = 0;
    long update_count = 0;

    double epsilon() const { return config.epsilon.value(decisions); }
};

AttackerAgent make_attacker(std::size_t input_dim, std::size_t action_count,
                            const AttackerConfig& config, std::uint64_t init_seed);

/// Slots holding a reward are valid in delay mode.
ActionMask delay_mask(const Disk& disk);

/// ε-greedy over the masked Q-values: greedy ties go to the lowest index,
/// exploration is uniform over valid actions. Consumes one uniform draw and
/// one integer draw when exploring.
std::size_t epsilon_greedy(std::span<const double> q, std::span<const std::uint8_t> mask,
                           double epsilon, Rng& rng);

std::size_t choose_action(const AttackerAgent& agent, std::span<const double> obs,
                          std::span<const std::uint8_t> valid_mask, Rng& rng);

/// Learner Q-values at `state` after one double-DQN step on a scratch copy of
/// the online network using only `published`. The learner is untouched.
std::vector<double> proxy_q_next(const LearnerState& learner,
                                 std::span<const TransitionTuple> published,
                                 std::span<const double> state);

/// Max-subtracted softmax.
std::vector<double> softmax(std::span<const double> logits);

/// -<softmax(q_tilde), q_t>.
double untargeted_proxy_reward(std::span<const double> q_t, std::span<const double> q_tilde);

/// Cross-entropy of `probs` against the multi-hot `target` normalised to a
/// distribution.
double cross_entropy(std::span<const double> probs, std::span<const double> target);

/// sign(CE(softmax(q_t), f) - CE(softmax(q_tilde), f)).
double targeted_proxy_reward(std::span<const double> q_t, std::span<const double> q_tilde,
                             std::span<const double> target);

/// Rule-based targeted choice: the largest reward when the learner already
/// prefers a target action in a target state, the smallest when it does not,
/// uniform otherwise. Ties go to the oldest cell.
std::size_t rule_based_choice(const Disk& disk, std::span<const double> state,
                              std::span<const double> learner_q, const TargetPolicy& target,
                              Rng& rng);

std::size_t baseline_random(const Disk& disk, Rng& rng);

/// Index of the cell generated exactly `delta` steps before `now`, if any.
std::optional<std::size_t> baseline_fixed_delay(const Disk& disk, long now, long delta);

std::size_t baseline_random_shift(std::size_t max_drop, Rng& rng);

/// Double-DQN step on the attacker's network; bootstrap argmax honours each
/// transition's next-state mask.
void attacker_update(AttackerAgent& agent, std::span<const AttackerTransition> batch);

bool attacker_train_step(AttackerAgent& agent, Rng& sample_rng);

}  // namespace rda
