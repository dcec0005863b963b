#include "rda/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "rda/checkpoint.hpp"
#include "rda/config_io.hpp"

namespace rda {

RewardAccounting& RewardAccounting::operator+=(const RewardAccounting& other) {
    generated += other.generated;
    published += other.published;
    expired += other.expired;
    shift_dropped += other.shift_dropped;
    residual += other.residual;
    unrewarded_transitions += other.unrewarded_transitions;
    delay_sum += other.delay_sum;
    return *this;
}

std::optional<double> EvalRow::mean_delay() const {
    if (rewards.published == 0) return std::nullopt;
    return static_cast<double>(rewards.delay_sum) / static_cast<double>(rewards.published);
}

void ExperimentConfig::validate() const {
    env.validate();
    learner.validate();
    attacker_net.validate();
    if (episodes < 1) throw std::invalid_argument("episodes must be >= 1");
    if (eval.every < 1) throw std::invalid_argument("eval.every must be >= 1");
    if (eval.episodes < 1) throw std::invalid_argument("eval.episodes must be >= 1");
    if (attack.delta < 1) throw std::invalid_argument("attack.delta must be >= 1");
    if (attack.disk < 1) throw std::invalid_argument("attack.disk must be >= 1");
    if (pretrain_steps < 1) throw std::invalid_argument("pretrain_steps must be >= 1");
    switch (mode) {
        case AttackMode::none: break;
        case AttackMode::delay:
            if (attacker == AttackerKind::random_shift)
                throw std::invalid_argument("random_shift is a shift-mode attacker");
            if (attacker == AttackerKind::fixed_delay &&
                attack.disk < static_cast<std::size_t>(attack.delta) + 1)
                throw std::invalid_argument("fixed_delay needs attack.disk >= attack.delta + 1");
            break;
        case AttackMode::shift:
            if (attacker != AttackerKind::learned && attacker != AttackerKind::random_shift)
                throw std::invalid_argument("shift mode supports the learned and random_shift attackers");
            if (attack.max_drop >= attack.disk)
                throw std::invalid_argument("attack.max_drop must be below attack.disk");
            if (attack.disk > static_cast<std::size_t>(attack.delta) + 1)
                throw std::invalid_argument("shift mode needs attack.disk <= attack.delta + 1");
            break;
    }
    if (objective == Objective::rule) {
        if (mode != AttackMode::delay) throw std::invalid_argument("the rule objective runs in delay mode");
        if (attacker != AttackerKind::learned)
            throw std::invalid_argument("the rule objective replaces the attacker; leave attacker at 'learned'");
    }
    if (measures_success() && target.actions.empty() && !env.noop)
        throw std::invalid_argument("targeted objectives need target.actions or env.noop");
    for (std::size_t a : target.actions)
        if (a >= env.action_count()) throw std::invalid_argument("target action outside the action set");
}

std::vector<std::size_t> resolve_target_actions(const ExperimentConfig& cfg) {
    if (!cfg.target.actions.empty()) return cfg.target.actions;
    return {cfg.env.noop_action()};
}

QNetwork resolve_qstar(const ExperimentConfig& cfg) {
    if (!cfg.target.qstar_checkpoint.empty()) {
        Checkpoint ck = load_checkpoint(cfg.target.qstar_checkpoint);
        if (!(ck.env == cfg.env))
            throw std::runtime_error("Q* checkpoint was trained on a different environment");
        return std::move(ck.network);
    }
    return pretrain_qstar(cfg.env, cfg.learner, cfg.pretrain_steps, derive_seed(cfg.seed, "qstar"))
        .qstar;
}

namespace {

double optimal_or_nan(const EnvSpec& env) {
    try {
        return optimal_return(env);
    } catch (const std::exception&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

// A learner step whose reward is still on the attacker's disk.
struct PendingTransition {
    std::vector<double> state;
    std::size_t action = 0;
    std::vector<double> next_state;
    bool done = false;
};

class Runner {
public:
    Runner(const ExperimentConfig& cfg, const RunHooks& hooks, LearnerState learner)
        : cfg_(cfg),
          hooks_(hooks),
          ls_(std::move(learner)),
          env_rng_(cfg.seed, "env"),
          explore_rng_(cfg.seed, "learner-explore"),
          sample_rng_(cfg.seed, "learner-sample"),
          attacker_explore_(cfg.seed, "attacker-explore"),
          attacker_sample_(cfg.seed, "attacker-sample") {
        if (cfg.measures_success() || cfg.objective == Objective::rule) {
            QNetwork qstar = hooks.qstar ? *hooks.qstar : resolve_qstar(cfg);
            target_.emplace(std::move(qstar), resolve_target_actions(cfg));
        }
        if (cfg.mode != AttackMode::none && cfg.attacker == AttackerKind::learned &&
            cfg.objective != Objective::rule) {
            const std::size_t actions =
                cfg.mode == AttackMode::delay ? cfg.attack.disk : cfg.attack.max_drop + 1;
            obs_dim_ = observation_dim(cfg.env.feature_dim(), cfg.env.action_count(), cfg.attack.disk);
            agent_ = make_attacker(obs_dim_, actions, cfg.attacker_net,
                                   derive_seed(cfg.seed, "attacker-init"));
        }
    }

    RunReport run() {
        const auto started = std::chrono::steady_clock::now();
        RunReport report;
        RewardAccounting since_row;
        for (int ep = 0; ep < cfg_.episodes; ++ep) {
            const RewardAccounting acc = run_episode(ep);
            report.episodes.push_back(acc);
            report.summary.totals += acc;
            since_row += acc;
            if ((ep + 1) % cfg_.eval.every == 0 || ep + 1 == cfg_.episodes) {
                report.rows.push_back(evaluate(ep, since_row));
                since_row = {};
            }
        }
        report.summary.final_return = report.rows.back().eval_return;
        report.summary.final_success_rate = report.rows.back().success_rate;
        report.summary.optimal_return = optimal_or_nan(cfg_.env);
        report.summary.learner_steps = ls_.global_step;
        report.summary.learner_updates = ls_.update_count;
        report.summary.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        return report;
    }

private:
    EvalRow evaluate(int ep, const RewardAccounting& rewards) {
        EvalRow row;
        row.episode = ep + 1;
        row.rewards = rewards;
        const std::uint64_t seed = derive_seed(cfg_.seed, "eval") + static_cast<std::uint64_t>(ep);
        if (cfg_.measures_success()) {
            const auto ev = evaluate_targeted(ls_.online, cfg_.env, cfg_.eval.episodes, seed, *target_);
            row.eval_return = ev.mean_return;
            row.success_rate = success_rate(ev.counter);
        } else {
            row.eval_return = evaluate_policy(ls_.online, cfg_.env, cfg_.eval.episodes, seed);
        }
        return row;
    }

    void learner_step_done() {
        ++ls_.global_step;
    }

    void notify() {
        if (hooks_.on_step) hooks_.on_step(ls_, ls_.global_step);
    }

    void emit(const TraceRecord& rec) {
        if (hooks_.trace) *hooks_.trace << to_json_line(rec) << '\n';
    }

    // Completes the attacker's previous transition now that its successor
    // observation is known, then opens a new one.
    void record_decision(std::vector<double> obs, ActionMask mask, std::size_t action,
                         double reward) {
        if (open_) {
            open_->next_obs = obs;
            open_->next_mask = std::move(mask);
            agent_->replay.push(std::move(*open_));
        }
        open_ = AttackerTransition{std::move(obs), action, reward, {}, false, {}};
        ++agent_->decisions;
    }

    void close_attacker_episode() {
        if (!open_) return;
        open_->next_obs.assign(obs_dim_, 0.0);
        open_->done = true;
        agent_->replay.push(std::move(*open_));
        open_.reset();
    }

    double proxy_reward(std::span<const double> q_t, std::span<const double> q_tilde,
                        std::span<const double> state) const {
        if (cfg_.objective == Objective::targeted)
            return targeted_proxy_reward(q_t, q_tilde, f_hat(state, *target_));
        return untargeted_proxy_reward(q_t, q_tilde);
    }

    RewardAccounting run_episode(int ep) {
        RewardAccounting acc;
        EnvState state = reset(cfg_.env, cfg_.seed);
        Disk disk(cfg_.attack.disk, cfg_.attack.delta);
        std::deque<PendingTransition> pending;
        long unpublished_steps = 0;
        bool filled = false;
        TraceRecord rec;

        while (!state.terminal) {
            const std::size_t action = select_action(ls_, state.features, explore_rng_);
            StepResult sr = step(cfg_.env, state, action, env_rng_);
            const bool absorbing = sr.done && !sr.truncated;
            const long now = ls_.global_step;
            ++acc.generated;
            rec = TraceRecord{};
            rec.now = now;
            rec.episode = ep;
            rec.generated = RewardCell{sr.reward, now};

            if (cfg_.mode == AttackMode::none) {
                ls_.replay.push({state.features, action, sr.reward, sr.next_state.features, absorbing, now});
                rec.published.push_back({sr.reward, now});
                ++acc.published;
                learner_step_done();
                train_step(ls_, sample_rng_);
            } else if (cfg_.mode == AttackMode::delay) {
                disk = push(std::move(disk), {sr.reward, now}, now);
                auto ev = evict_expired(std::move(disk), now);
                disk = std::move(ev.disk);
                for (const auto& c : ev.dropped) rec.expired.push_back(c.origin_step);
                acc.expired += static_cast<long>(ev.dropped.size());

                if (disk.full()) filled = true;
                std::optional<std::size_t> pick;
                std::vector<double> obs;
                ActionMask mask;
                std::vector<double> q_t;
                switch (cfg_.attacker) {
                    case AttackerKind::pass_through:
                        pick = disk.size() - 1;
                        break;
                    case AttackerKind::fixed_delay:
                        pick = baseline_fixed_delay(disk, now, cfg_.attack.delta);
                        break;
                    case AttackerKind::random:
                        if (filled) pick = baseline_random(disk, attacker_explore_);
                        break;
                    case AttackerKind::learned:
                        if (!filled) break;
                        q_t = forward(ls_.online, state.features);
                        if (cfg_.objective == Objective::rule) {
                            pick = rule_based_choice(disk, state.features, q_t, *target_,
                                                     attacker_explore_);
                        } else {
                            obs = observe(state.features, action, sr.reward, disk, q_t).flatten();
                            mask = delay_mask(disk);
                            pick = choose_action(*agent_, obs, mask, attacker_explore_);
                        }
                        break;
                    case AttackerKind::random_shift:
                        throw std::logic_error("random_shift in delay mode");
                }

                if (pick) {
                    auto pub = publish_delay(std::move(disk), *pick, now);
                    disk = std::move(pub.disk);
                    rec.action = static_cast<long>(*pick);
                    rec.published.push_back(pub.cell);
                    ++acc.published;
                    acc.delay_sum += now - pub.cell.origin_step;
                    TransitionTuple tuple{state.features, action, pub.reward, sr.next_state.features,
                                          absorbing, pub.cell.origin_step};
                    if (agent_) {
                        const std::vector<double> q_tilde =
                            proxy_q_next(ls_, std::span<const TransitionTuple>(&tuple, 1), state.features);
                        record_decision(std::move(obs), std::move(mask), *pick,
                                        proxy_reward(q_t, q_tilde, state.features));
                    }
                    ls_.replay.push(std::move(tuple));
                } else {
                    ++acc.unrewarded_transitions;
                }
                learner_step_done();
                train_step(ls_, sample_rng_);
                if (agent_ && pick) attacker_train_step(*agent_, attacker_sample_);
            } else {
                pending.push_back({state.features, action, sr.next_state.features, absorbing});
                disk = push(std::move(disk), {sr.reward, now}, now);
                ++unpublished_steps;
                std::optional<std::size_t> drop;
                std::vector<double> obs;
                ActionMask mask;
                std::vector<double> q_t;
                if (disk.full()) {
                    if (cfg_.attacker == AttackerKind::random_shift) {
                        drop = baseline_random_shift(cfg_.attack.max_drop, attacker_explore_);
                    } else {
                        q_t = forward(ls_.online, state.features);
                        obs = observe(state.features, action, sr.reward, disk, q_t).flatten();
                        mask.assign(cfg_.attack.max_drop + 1, 1);
                        drop = choose_action(*agent_, obs, mask, attacker_explore_);
                    }
                }
                learner_step_done();
                if (drop) {
                    auto pub = publish_shift(std::move(disk), *drop, cfg_.attack.max_drop);
                    disk = std::move(pub.disk);
                    rec.action = static_cast<long>(*drop);
                    for (const auto& c : pub.dropped) rec.shift_dropped.push_back(c.origin_step);
                    acc.shift_dropped += static_cast<long>(pub.dropped.size());
                    // Published rewards take the oldest waiting transitions in order;
                    // the newest transitions have no reward left and are discarded.
                    std::vector<TransitionTuple> batch;
                    for (std::size_t j = 0; j < pub.published.size(); ++j) {
                        const RewardCell& c = pub.published[j];
                        PendingTransition& p = pending[j];
                        batch.push_back({std::move(p.state), p.action, c.value, std::move(p.next_state),
                                         p.done, c.origin_step});
                        rec.published.push_back(c);
                        ++acc.published;
                        acc.delay_sum += now - c.origin_step;
                    }
                    acc.unrewarded_transitions += static_cast<long>(pending.size() - batch.size());
                    pending.clear();
                    if (agent_) {
                        const std::vector<double> q_tilde = proxy_q_next(ls_, batch, state.features);
                        record_decision(std::move(obs), std::move(mask), *drop,
                                        proxy_reward(q_t, q_tilde, state.features));
                    }
                    for (auto& t : batch) ls_.replay.push(std::move(t));
                    for (long k = 0; k < unpublished_steps; ++k) train_step(ls_, sample_rng_);
                    unpublished_steps = 0;
                    if (agent_) attacker_train_step(*agent_, attacker_sample_);
                }
            }

            state = std::move(sr.next_state);
            if (state.terminal) {
                for (const auto& c : disk.cells) rec.residual.push_back(c.origin_step);
                acc.residual += static_cast<long>(disk.size());
                acc.unrewarded_transitions += static_cast<long>(pending.size());
            }
            emit(rec);
            notify();
        }
        if (agent_) close_attacker_episode();
        return acc;
    }

    const ExperimentConfig& cfg_;
    const RunHooks& hooks_;
    LearnerState ls_;
    Rng env_rng_;
    Rng explore_rng_;
    Rng sample_rng_;
    Rng attacker_explore_;
    Rng attacker_sample_;
    std::optional<TargetPolicy> target_;
    std::optional<AttackerAgent> agent_;
    std::optional<AttackerTransition> open_;
    std::size_t obs_dim_ = 0;
};

}  // namespace

RunReport run_experiment(const ExperimentConfig& cfg, const RunHooks& hooks) {
    cfg.validate();
    if (cfg.pretrained_start) return run_pretrained_attack(cfg, hooks);
    LearnerState ls = make_learner(cfg.env, cfg.learner, derive_seed(cfg.seed, "learner-init"));
    return Runner(cfg, hooks, std::move(ls)).run();
}

RunReport run_pretrained_attack(const ExperimentConfig& cfg, const RunHooks& hooks) {
    cfg.validate();
    if (!cfg.pretrained_start) throw std::invalid_argument("config has no pretrained_start checkpoint");
    Checkpoint ck = load_checkpoint(*cfg.pretrained_start);
    if (!(ck.env == cfg.env)) throw std::runtime_error("checkpoint environment differs from the config");
    if (!(ck.network.spec() == learner_network_spec(cfg.env, cfg.learner)))
        throw std::runtime_error("checkpoint network shape differs from the learner config");
    const double optimal = optimal_return(cfg.env);
    const double start = evaluate_policy(ck.network, cfg.env, cfg.eval.episodes,
                                         derive_seed(cfg.seed, "eval-start"));
    if (start < kPretrainThreshold * optimal) {
        throw std::runtime_error("checkpoint return " + std::to_string(start) + " is below " +
                                 std::to_string(kPretrainThreshold) + " x optimal " +
                                 std::to_string(optimal));
    }
    LearnerState ls = make_learner(std::move(ck.network), cfg.learner, cfg.env.gamma);
    RunReport report = Runner(cfg, hooks, std::move(ls)).run();
    report.summary.start_return = start;
    return report;
}

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

nlohmann::json number_or_null(double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

nlohmann::json accounting_json(const RewardAccounting& a) {
    return {{"generated", a.generated},
            {"published", a.published},
            {"expired", a.expired},
            {"shift_dropped", a.shift_dropped},
            {"residual", a.residual},
            {"unrewarded_transitions", a.unrewarded_transitions},
            {"delay_sum", a.delay_sum},
            {"balanced", a.balanced()}};
}

}  // namespace

void write_metrics_csv(std::ostream& out, const RunReport& report) {
    out << kMetricsHeader << '\n';
    for (const auto& row : report.rows) {
        out << row.episode << ',' << fmt(row.eval_return) << ','
            << (row.success_rate ? fmt(*row.success_rate) : "") << ',' << row.rewards.expired << ','
            << row.rewards.shift_dropped << ',' << row.rewards.residual << ','
            << (row.mean_delay() ? fmt(*row.mean_delay()) : "") << '\n';
    }
}

void write_metrics_csv(const std::string& path, const RunReport& report) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    write_metrics_csv(out, report);
}

void write_summary_json(const std::string& path, const ExperimentConfig& cfg, const RunReport& report) {
    const RunSummary& s = report.summary;
    nlohmann::json j{
        {"config", to_json(cfg)},
        {"final_return", s.final_return},
        {"final_success_rate",
         s.final_success_rate ? nlohmann::json(*s.final_success_rate) : nlohmann::json(nullptr)},
        {"optimal_return", number_or_null(s.optimal_return)},
        {"start_return", s.start_return ? nlohmann::json(*s.start_return) : nlohmann::json(nullptr)},
        {"wall_seconds", s.wall_seconds},
        {"learner_steps", s.learner_steps},
        {"learner_updates", s.learner_updates},
        {"evaluations", report.rows.size()},
        {"rewards", accounting_json(s.totals)}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

}  // namespace rda
