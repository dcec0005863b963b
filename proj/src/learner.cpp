#include "rda/learner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rda {

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng) {
    if (k > n) throw std::invalid_argument("cannot sample more items than available");
    std::vector<std::size_t> chosen;
    chosen.reserve(k);
    for (std::size_t j = n - k; j < n; ++j) {
        const auto t = static_cast<std::size_t>(rng.uniform_int(j + 1));
        const bool taken = std::find(chosen.begin(), chosen.end(), t) != chosen.end();
        chosen.push_back(taken ? j : t);
    }
    return chosen;
}

double EpsilonSchedule::value(long step) const {
    if (decay_steps <= 0 || step >= decay_steps) return end;
    const double frac = static_cast<double>(std::max(step, 0L)) / static_cast<double>(decay_steps);
    return start + (end - start) * frac;
}

void EpsilonSchedule::validate() const {
    if (!(start >= 0.0 && start <= 1.0 && end >= 0.0 && end <= 1.0))
        throw std::invalid_argument("epsilon values must lie in [0, 1]");
    if (end > start) throw std::invalid_argument("epsilon must not increase");
    if (decay_steps < 0) throw std::invalid_argument("epsilon decay_steps must be >= 0");
}

void LearnerConfig::validate() const {
    if (hidden.empty()) throw std::invalid_argument("learner needs at least one hidden layer");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (replay_capacity < batch_size)
        throw std::invalid_argument("replay_capacity must be >= batch_size");
    if (target_sync_period < 1) throw std::invalid_argument("target_sync_period must be >= 1");
    epsilon.validate();
}

NetworkSpec learner_network_spec(const EnvSpec& env, const LearnerConfig& config) {
    return {env.feature_dim(), config.hidden, env.action_count(), config.dueling};
}

LearnerState make_learner(QNetwork online, const LearnerConfig& config, double gamma) {
    config.validate();
    LearnerState ls;
    ls.config = config;
    ls.gamma = gamma;
    ls.target = online;
    ls.online = std::move(online);
    ls.replay = ReplayBuffer<TransitionTuple>(config.replay_capacity);
    return ls;
}

LearnerState make_learner(const EnvSpec& env, const LearnerConfig& config,
                          std::uint64_t init_seed) {
    env.validate();
    return make_learner(init_network(learner_network_spec(env, config), init_seed), config,
                        env.gamma);
}

std::size_t select_action(const LearnerState& ls, std::span<const double> state, Rng& rng) {
    const std::size_t actions = ls.online.spec().action_count;
    if (rng.uniform() < ls.epsilon()) return static_cast<std::size_t>(rng.uniform_int(actions));
    return argmax(forward(ls.online, state));
}

namespace {

std::size_t masked_argmax(std::span<const double> q, std::span<const std::uint8_t> mask) {
    if (mask.empty()) return argmax(q);
    if (mask.size() != q.size()) throw std::invalid_argument("action mask size mismatch");
    std::size_t best = q.size();
    for (std::size_t a = 0; a < q.size(); ++a)
        if (mask[a] && (best == q.size() || q[a] > q[best])) best = a;
    if (best == q.size()) throw std::invalid_argument("action mask selects nothing");
    return best;
}

}  // namespace

std::vector<TrainTarget> double_dqn_targets(const QNetwork& online, const QNetwork& target,
                                            double gamma, std::span<const DqnSample> samples) {
    std::vector<TrainTarget> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        double y = s.reward;
        if (!s.done) {
            const auto pick = masked_argmax(forward(online, s.next_state), s.next_mask);
            y += gamma * forward(target, s.next_state)[pick];
        }
        out.push_back({std::vector<double>(s.state.begin(), s.state.end()), s.action, y});
    }
    return out;
}

std::vector<DqnSample> as_samples(std::span<const TransitionTuple> batch) {
    std::vector<DqnSample> samples;
    samples.reserve(batch.size());
    for (const auto& t : batch)
        samples.push_back({t.state, t.action, t.reward, t.next_state, t.done, {}});
    return samples;
}

void double_dqn_update(LearnerState& ls, std::span<const TransitionTuple> batch) {
    if (batch.empty()) throw std::invalid_argument("empty learner batch");
    const auto samples = as_samples(batch);
    const auto targets = double_dqn_targets(ls.online, ls.target, ls.gamma, samples);
    ls.online = grad_step(std::move(ls.online), targets, ls.config.learning_rate);
    ++ls.update_count;
    if (ls.update_count % ls.config.target_sync_period == 0) ls.target = ls.online;
}

bool train_step(LearnerState& ls, Rng& sample_rng) {
    const std::size_t batch = ls.config.batch_size;
    if (ls.replay.size() < batch) return false;
    const auto picks = sample_without_replacement(ls.replay.size(), batch, sample_rng);
    std::vector<TransitionTuple> items;
    items.reserve(batch);
    for (std::size_t i : picks) items.push_back(ls.replay[i]);
    double_dqn_update(ls, items);
    return true;
}

double evaluate_policy(const QNetwork& net, const EnvSpec& spec, int episodes,
                       std::uint64_t seed, const VisitFn& on_visit) {
    if (spec.horizon == 0) return 0.0;
    if (episodes < 1) throw std::invalid_argument("evaluation needs at least one episode");
    Rng env_rng(seed, "eval-env");
    double total = 0.0;
    for (int e = 0; e < episodes; ++e) {
        EnvState state = reset(spec, seed);
        double episode_return = 0.0;
        while (!state.terminal) {
            const std::size_t action = argmax(forward(net, state.features));
            if (on_visit) on_visit(state, action);
            StepResult r = step(spec, state, action, env_rng);
            episode_return += r.reward;
            state = std::move(r.next_state);
        }
        total += episode_return;
    }
    return total / episodes;
}

double evaluate_policy(const LearnerState& ls, const EnvSpec& spec, int episodes,
                       std::uint64_t seed, const VisitFn& on_visit) {
    return evaluate_policy(ls.online, spec, episodes, seed, on_visit);
}

LearnerState train_clean(const EnvSpec& spec, const LearnerConfig& config, long steps,
                         std::uint64_t seed) {
    LearnerState ls = make_learner(spec, config, derive_seed(seed, "learner-init"));
    Rng env_rng(seed, "env");
    Rng explore_rng(seed, "learner-explore");
    Rng sample_rng(seed, "learner-sample");
    while (ls.global_step < steps) {
        EnvState state = reset(spec, seed);
        while (!state.terminal && ls.global_step < steps) {
            const std::size_t action = select_action(ls, state.features, explore_rng);
            StepResult r = step(spec, state, action, env_rng);
            const bool absorbing = r.done && !r.truncated;
            ls.replay.push({state.features, action, r.reward, r.next_state.features, absorbing,
                            ls.global_step});
            ++ls.global_step;
            train_step(ls, sample_rng);
            state = std::move(r.next_state);
        }
    }
    return ls;
}

}  // namespace rda
