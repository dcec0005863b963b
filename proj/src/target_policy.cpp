#include "rda/target_policy.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace rda {

bool is_target_state(const QNetwork& qstar, std::span<const double> state,
                     std::span<const std::size_t> target_actions) {
    const std::size_t best = argmax(forward(qstar, state));
    return std::find(target_actions.begin(), target_actions.end(), best) == target_actions.end();
}

TargetPolicy::TargetPolicy(QNetwork qstar, std::vector<std::size_t> target_actions)
    : qstar_(std::move(qstar)), target_actions_(std::move(target_actions)) {
    std::sort(target_actions_.begin(), target_actions_.end());
    target_actions_.erase(std::unique(target_actions_.begin(), target_actions_.end()),
                          target_actions_.end());
    if (target_actions_.empty()) throw std::invalid_argument("target action set is empty");
    if (target_actions_.back() >= action_count())
        throw std::out_of_range("target action outside the action set");
    if (target_actions_.size() == action_count())
        throw std::invalid_argument("target action set must be a proper subset of the actions");
}

bool TargetPolicy::contains(std::size_t action) const {
    return std::binary_search(target_actions_.begin(), target_actions_.end(), action);
}

bool TargetPolicy::is_target(std::span<const double> state) const {
    return is_target_state(qstar_, state, target_actions_);
}

std::vector<double> f_hat(std::span<const double> state, const TargetPolicy& target) {
    if (!target.is_target(state)) return std::vector<double>(target.action_count(), 1.0);
    std::vector<double> out(target.action_count(), 0.0);
    for (std::size_t a : target.target_actions()) out[a] = 1.0;
    return out;
}

std::optional<double> success_rate(const SuccessCounter& counter) {
    if (counter.visits == 0) return std::nullopt;
    return static_cast<double>(counter.hits) / static_cast<double>(counter.visits);
}

TargetedEvaluation evaluate_targeted(const QNetwork& net, const EnvSpec& spec, int episodes,
                                     std::uint64_t seed, const TargetPolicy& target) {
    TargetedEvaluation out;
    out.mean_return = evaluate_policy(net, spec, episodes, seed,
                                      [&](const EnvState& state, std::size_t greedy) {
                                          if (target.is_target(state.features))
                                              out.counter.record(target.contains(greedy));
                                          else
                                              ++out.non_target_visits;
                                      });
    return out;
}

PretrainResult pretrain_qstar(const EnvSpec& spec, const LearnerConfig& config,
                              long budget_steps, std::uint64_t seed) {
    if (budget_steps < 1) throw std::invalid_argument("pretraining budget must be >= 1 step");
    PretrainResult result;
    result.optimal = optimal_return(spec);
    LearnerState ls = train_clean(spec, config, budget_steps, seed);
    result.eval_return = evaluate_policy(ls, spec, 10, derive_seed(seed, "pretrain-eval"));
    if (result.eval_return < kPretrainThreshold * result.optimal) {
        std::ostringstream msg;
        msg << "pretraining reached return " << result.eval_return << " after " << budget_steps
            << " steps; need >= " << kPretrainThreshold * result.optimal << " ("
            << kPretrainThreshold << " x optimal " << result.optimal << ")";
        throw std::runtime_error(msg.str());
    }
    result.qstar = std::move(ls.online);
    return result;
}

}  // namespace rda
