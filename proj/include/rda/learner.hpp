#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rda/environment.hpp"
#include "rda/nn.hpp"
#include "rda/random.hpp"
#include "rda/replay.hpp"

namespace rda {

/// One learner experience. `done` marks an absorbing next state (no
/// bootstrap); horizon truncation is not absorbing. `origin_step` is the global
/// step at which the attached reward was generated.
struct TransitionTuple {
    std::vector<double> state;
    std::size_t action = 0;
    double reward = 0.0;
    std::vector<double> next_state;
    bool done = false;
    long origin_step = 0;
};

/// Linear decay from `start` to `end` over `decay_steps` steps.
struct EpsilonSchedule {
    double start = 1.0;
    double end = 0.05;
    long decay_steps = 5000;

    double value(long step) const;
    void validate() const;
    friend bool operator==(const EpsilonSchedule&, const EpsilonSchedule&) = default;
};

struct LearnerConfig {
    std::vector<std::size_t> hidden{64};
    bool dueling = true;
    double learning_rate = 0.1;
    std::size_t batch_size = 32;
    std::size_t replay_capacity = 10000;
    long target_sync_period = 25;
    EpsilonSchedule epsilon;

    void validate() const;
    friend bool operator==(const LearnerConfig&, const LearnerConfig&) = default;
};

struct LearnerState {
    LearnerConfig config;
    double gamma = 0.95;
    QNetwork online;
    QNetwork target;
    ReplayBuffer<TransitionTuple> replay{1};
    long global_step = 0;   // environment steps taken while training
    long update_count = 0;  // double_dqn_update calls

    double epsilon() const { return config.epsilon.value(global_step); }
};

NetworkSpec learner_network_spec(const EnvSpec& env, const LearnerConfig& config);

LearnerState make_learner(const EnvSpec& env, const LearnerConfig& config, std::uint64_t init_seed);

/// Learner state around an existing network (e.g. a loaded checkpoint);
/// the target network starts as a copy of `online`.
LearnerState make_learner(QNetwork online, const LearnerConfig& config, double gamma);

/// ε-greedy over the online network; greedy ties go to the lowest index.
/// Always consumes exactly one uniform draw, plus one integer draw when
/// exploring.
std::size_t select_action(const LearnerState& ls, std::span<const double> state, Rng& rng);

/// Valid-action mask: nonzero entries are selectable.
using ActionMask = std::vector<std::uint8_t>;

/// Generic sample for the double-estimator target. `next_mask`, when
/// non-empty, restricts the bootstrap argmax to valid next actions.
struct DqnSample {
    std::span<const double> state;
    std::size_t action = 0;
    double reward = 0.0;
    std::span<const double> next_state;
    bool done = false;
    std::span<const std::uint8_t> next_mask;
};

/// y = r when done, else r + gamma * target(s')[argmax_a online(s')[a]].
std::vector<TrainTarget> double_dqn_targets(const QNetwork& online, const QNetwork& target,
                                            double gamma, std::span<const DqnSample> samples);

std::vector<DqnSample> as_samples(std::span<const TransitionTuple> batch);

/// One gradient step of the online network on `batch`, then a target sync
/// every `target_sync_period` updates.
void double_dqn_update(LearnerState& ls, std::span<const TransitionTuple> batch);

/// Samples a batch from replay and updates when replay holds at least
/// batch_size items. Returns whether an update happened.
bool train_step(LearnerState& ls, Rng& sample_rng);

using VisitFn = std::function<void(const EnvState& state, std::size_t greedy_action)>;

/// Mean undiscounted return of greedy rollouts on the true environment.
/// `on_visit` sees every state where the policy acts.
double evaluate_policy(const QNetwork& net, const EnvSpec& spec, int episodes,
                       std::uint64_t seed, const VisitFn& on_visit = {});
double evaluate_policy(const LearnerState& ls, const EnvSpec& spec, int episodes,
                       std::uint64_t seed, const VisitFn& on_visit = {});

/// Unattacked training for a fixed number of environment steps, using the
/// same random sub-streams as the experiment harness.
LearnerState train_clean(const EnvSpec& spec, const LearnerConfig& config, long steps,
                         std::uint64_t seed);

}  // namespace rda
