#include "rda/attacker.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rda {

std::string to_string(AttackerKind kind) {
    switch (kind) {
        case AttackerKind::learned: return "learned";
        case AttackerKind::random: return "random";
        case AttackerKind::fixed_delay: return "fixed_delay";
        case AttackerKind::random_shift: return "random_shift";
        case AttackerKind::pass_through: return "pass_through";
    }
    return "learned";
}

AttackerKind attacker_kind_from_string(const std::string& name) {
    if (name == "learned") return AttackerKind::learned;
    if (name == "random") return AttackerKind::random;
    if (name == "fixed_delay") return AttackerKind::fixed_delay;
    if (name == "random_shift") return AttackerKind::random_shift;
    if (name == "pass_through") return AttackerKind::pass_through;
    throw std::invalid_argument("unknown attacker '" + name + "'");
}

std::string to_string(Objective objective) {
    switch (objective) {
        case Objective::untargeted: return "untargeted";
        case Objective::targeted: return "targeted";
        case Objective::rule: return "rule";
    }
    return "untargeted";
}

Objective objective_from_string(const std::string& name) {
    if (name == "untargeted") return Objective::untargeted;
    if (name == "targeted") return Objective::targeted;
    if (name == "rule") return Objective::rule;
    throw std::invalid_argument("unknown objective '" + name + "'");
}

void AttackerConfig::validate() const {
    if (hidden.empty()) throw std::invalid_argument("attacker needs at least one hidden layer");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("attacker learning_rate must be positive");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("attacker gamma must lie in [0, 1)");
    if (batch_size < 1) throw std::invalid_argument("attacker batch_size must be >= 1");
    if (replay_capacity < batch_size)
        throw std::invalid_argument("attacker replay_capacity must be >= batch_size");
    if (target_sync_period < 1) throw std::invalid_argument("attacker target_sync_period must be >= 1");
    epsilon.validate();
}

std::vector<double> AttackerObservation::flatten() const {
    std::vector<double> out;
    out.reserve(state_features.size() + action_onehot.size() + 1 + disk_features.size() +
                learner_q_values.size());
    out.insert(out.end(), state_features.begin(), state_features.end());
    out.insert(out.end(), action_onehot.begin(), action_onehot.end());
    out.push_back(current_reward);
    out.insert(out.end(), disk_features.begin(), disk_features.end());
    out.insert(out.end(), learner_q_values.begin(), learner_q_values.end());
    return out;
}

std::size_t observation_dim(std::size_t state_dim, std::size_t action_count,
                            std::size_t disk_capacity) {
    return state_dim + action_count + 1 + 2 * disk_capacity + action_count;
}

AttackerObservation observe(std::span<const double> state, std::size_t action, double reward,
                            const Disk& disk, std::span<const double> learner_q) {
    const std::size_t actions = learner_q.size();
    if (action >= actions) throw std::out_of_range("learner action outside the action set");
    AttackerObservation obs;
    obs.state_features.assign(state.begin(), state.end());
    obs.action_onehot.assign(actions, 0.0);
    obs.action_onehot[action] = 1.0;
    obs.current_reward = reward;
    obs.disk_features.assign(2 * disk.capacity, 0.0);
    // Ages are taken relative to the newest cell, which is the reward just pushed.
    const long now = disk.empty() ? 0 : disk.cells.back().origin_step;
    for (std::size_t i = 0; i < disk.size() && i < disk.capacity; ++i) {
        obs.disk_features[2 * i] = disk.cells[i].value;
        const double age = static_cast<double>(disk.age(i, now)) / static_cast<double>(disk.max_delay);
        obs.disk_features[2 * i + 1] = std::clamp(age, 0.0, 1.0);
    }
    obs.learner_q_values.assign(learner_q.begin(), learner_q.end());
    return obs;
}

AttackerObservation observe(const LearnerState& learner, std::span<const double> state,
                            std::size_t action, double reward, const Disk& disk) {
    const auto q = forward(learner.online, state);
    return observe(state, action, reward, disk, q);
}

AttackerAgent make_attacker(std::size_t input_dim, std::size_t action_count,
                            const AttackerConfig& config, std::uint64_t init_seed) {
    config.validate();
    AttackerAgent agent;
    agent.config = config;
    agent.online = init_network({input_dim, config.hidden, action_count, config.dueling}, init_seed);
    agent.target = agent.online;
    agent.replay = ReplayBuffer<AttackerTransition>(config.replay_capacity);
    return agent;
}

ActionMask delay_mask(const Disk& disk) {
    ActionMask mask(disk.capacity, 0);
    for (std::size_t i = 0; i < disk.size() && i < disk.capacity; ++i) mask[i] = 1;
    return mask;
}

std::size_t epsilon_greedy(std::span<const double> q, std::span<const std::uint8_t> mask,
                           double epsilon, Rng& rng) {
    if (mask.size() != q.size()) throw std::invalid_argument("action mask size mismatch");
    std::vector<std::size_t> valid;
    for (std::size_t a = 0; a < mask.size(); ++a)
        if (mask[a]) valid.push_back(a);
    if (valid.empty()) throw std::invalid_argument("no valid attacker action");
    if (rng.uniform() < epsilon) return valid[rng.uniform_int(valid.size())];
    std::size_t best = valid.front();
    for (std::size_t a : valid)
        if (q[a] > q[best]) best = a;
    return best;
}

std::size_t choose_action(const AttackerAgent& agent, std::span<const double> obs,
                          std::span<const std::uint8_t> valid_mask, Rng& rng) {
    const auto q = forward(agent.online, obs);
    return epsilon_greedy(q, valid_mask, agent.epsilon(), rng);
}

std::vector<double> proxy_q_next(const LearnerState& learner,
                                 std::span<const TransitionTuple> published,
                                 std::span<const double> state) {
    if (published.empty()) return forward(learner.online, state);
    const auto samples = as_samples(published);
    const auto targets = double_dqn_targets(learner.online, learner.target, learner.gamma, samples);
    const QNetwork scratch = grad_step(clone(learner.online), targets, learner.config.learning_rate);
    return forward(scratch, state);
}

std::vector<double> softmax(std::span<const double> logits) {
    if (logits.empty()) throw std::invalid_argument("softmax of empty vector");
    const double peak = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - peak);
        total += out[i];
    }
    for (double& p : out) p /= total;
    return out;
}

double untargeted_proxy_reward(std::span<const double> q_t, std::span<const double> q_tilde) {
    if (q_t.size() != q_tilde.size()) throw std::invalid_argument("Q-vector length mismatch");
    const auto pi = softmax(q_tilde);
    double inner = 0.0;
    for (std::size_t a = 0; a < q_t.size(); ++a) inner += pi[a] * q_t[a];
    return -inner;
}

double cross_entropy(std::span<const double> probs, std::span<const double> target) {
    if (probs.size() != target.size()) throw std::invalid_argument("distribution length mismatch");
    double mass = 0.0;
    for (double t : target) mass += t;
    if (!(mass > 0.0)) throw std::invalid_argument("target vector has no positive entry");
    double loss = 0.0;
    for (std::size_t a = 0; a < probs.size(); ++a)
        if (target[a] != 0.0) loss -= (target[a] / mass) * std::log(probs[a]);
    return loss;
}

double targeted_proxy_reward(std::span<const double> q_t, std::span<const double> q_tilde,
                             std::span<const double> target) {
    if (q_t.size() != q_tilde.size()) throw std::invalid_argument("Q-vector length mismatch");
    const double before = cross_entropy(softmax(q_t), target);
    const double after = cross_entropy(softmax(q_tilde), target);
    const double diff = before - after;
    return static_cast<double>((diff > 0.0) - (diff < 0.0));
}

std::size_t rule_based_choice(const Disk& disk, std::span<const double> state,
                              std::span<const double> learner_q, const TargetPolicy& target,
                              Rng& rng) {
    if (disk.empty()) throw std::logic_error("rule-based choice on an empty disk");
    if (!target.is_target(state)) return static_cast<std::size_t>(rng.uniform_int(disk.size()));
    const bool prefers_target = target.contains(argmax(learner_q));
    std::size_t pick = 0;
    for (std::size_t i = 1; i < disk.size(); ++i) {
        const double v = disk.cells[i].value;
        if (prefers_target ? v > disk.cells[pick].value : v < disk.cells[pick].value) pick = i;
    }
    return pick;
}

std::size_t baseline_random(const Disk& disk, Rng& rng) {
    if (disk.empty()) throw std::logic_error("random baseline on an empty disk");
    return static_cast<std::size_t>(rng.uniform_int(disk.size()));
}

std::optional<std::size_t> baseline_fixed_delay(const Disk& disk, long now, long delta) {
    for (std::size_t i = 0; i < disk.size(); ++i)
        if (disk.cells[i].origin_step == now - delta) return i;
    return std::nullopt;
}

std::size_t baseline_random_shift(std::size_t max_drop, Rng& rng) {
    return static_cast<std::size_t>(rng.uniform_int(max_drop + 1));
}

void attacker_update(AttackerAgent& agent, std::span<const AttackerTransition> batch) {
    if (batch.empty()) throw std::invalid_argument("empty attacker batch");
    std::vector<DqnSample> samples;
    samples.reserve(batch.size());
    for (const auto& t : batch)
        samples.push_back({t.obs, t.action, t.reward, t.next_obs, t.done, t.next_mask});
    const auto targets =
        double_dqn_targets(agent.online, agent.target, agent.config.gamma, samples);
    agent.online = grad_step(std::move(agent.online), targets, agent.config.learning_rate);
    ++agent.update_count;
    if (agent.update_count % agent.config.target_sync_period == 0) agent.target = agent.online;
}

bool attacker_train_step(AttackerAgent& agent, Rng& sample_rng) {
    const std::size_t batch = agent.config.batch_size;
    if (agent.replay.size() < batch) return false;
    const auto picks = sample_without_replacement(agent.replay.size(), batch, sample_rng);
    std::vector<AttackerTransition> items;
    items.reserve(batch);
    for (std::size_t i : picks) items.push_back(agent.replay[i]);
    attacker_update(agent, items);
    return true;
}

}  // namespace rda
