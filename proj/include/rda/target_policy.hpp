#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rda/environment.hpp"
#include "rda/learner.hpp"
#include "rda/nn.hpp"

namespace rda {

/// Clean-optimal greedy action lies outside `target_actions`. Ties in Q*
/// resolve to the lowest index before the membership test.
bool is_target_state(const QNetwork& qstar, std::span<const double> state,
                     std::span<const std::size_t> target_actions);

/// The attacker's objective: a state-independent target action set a^T and
/// the frozen clean network that decides which states are targeted.
class TargetPolicy {
public:
    TargetPolicy(QNetwork qstar, std::vector<std::size_t> target_actions);

    const QNetwork& qstar() const { return qstar_; }
    const std::vector<std::size_t>& target_actions() const { return target_actions_; }
    std::size_t action_count() const { return qstar_.spec().action_count; }

    bool contains(std::size_t action) const;
    bool is_target(std::span<const double> state) const;

private:
    QNetwork qstar_;
    std::vector<std::size_t> target_actions_;
};

/// Indicator of a^T on target states, all ones elsewhere.
std::vector<double> f_hat(std::span<const double> state, const TargetPolicy& target);

struct SuccessCounter {
    long hits = 0;
    long visits = 0;

    void record(bool hit) {
        ++visits;
        if (hit) ++hits;
    }
};

/// hits / visits, or nothing when no target state was visited.
std::optional<double> success_rate(const SuccessCounter& counter);

struct TargetedEvaluation {
    double mean_return = 0.0;
    SuccessCounter counter;
    long non_target_visits = 0;
};

/// Greedy evaluation that also scores every target-state visit.
TargetedEvaluation evaluate_targeted(const QNetwork& net, const EnvSpec& spec, int episodes,
                                     std::uint64_t seed, const TargetPolicy& target);

struct PretrainResult {
    QNetwork qstar;
    double eval_return = 0.0;
    double optimal = 0.0;
};

/// Clean Double DQN training for `budget_steps` environment steps. Throws
/// std::runtime_error when the greedy policy ends below 90% of the optimal
/// return.
PretrainResult pretrain_qstar(const EnvSpec& spec, const LearnerConfig& config,
                              long budget_steps, std::uint64_t seed);

inline constexpr double kPretrainThreshold = 0.9;

}  // namespace rda
