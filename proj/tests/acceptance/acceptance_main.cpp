// Acceptance suite: one PASS/FAIL line per criterion. Thresholds are fixed
// constants below; runs use the configs in RDA_CONFIG_DIR.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oracles.hpp"
#include "rda/checkpoint.hpp"
#include "rda/config_io.hpp"
#include "rda/disk.hpp"
#include "rda/harness.hpp"
#include "rda/nn.hpp"
#include "rda/target_policy.hpp"

namespace {

using rda::ExperimentConfig;
using rda::RunReport;

#ifndef RDA_CONFIG_DIR
#define RDA_CONFIG_DIR "configs"
#endif

std::string g_config_dir = RDA_CONFIG_DIR;

// Pinned thresholds.
constexpr double kGradTolerance = 1e-4;
constexpr int kGradInstances = 24;
constexpr double kCleanFraction = 0.90;
constexpr double kDelayBar = 0.25;
constexpr double kDeltaTolerance = 0.10;
constexpr double kTargetMargin = 0.15;
constexpr double kTrendTolerance = 0.05;
constexpr int kTrendWindow = 5;
constexpr double kShiftBar = 0.35;
constexpr double kShiftTolerance = 0.05;
constexpr double kPretrainedDecay = 0.50;
constexpr double kControlFraction = 0.90;
constexpr int kPretrainedEpisodes = 200;
constexpr int kFinalWindow = 10;  // final value = mean of the last 10 evaluations
const std::vector<std::uint64_t> kSeeds{1, 2, 3, 4};

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    std::string name;
    double budget_seconds;  // 0: no runtime requirement
    std::function<Outcome()> run;
};

// Accounting is checked on every run the suite performs.
long g_runs = 0;
long g_unbalanced = 0;

ExperimentConfig config(const std::string& name, std::uint64_t seed) {
    auto cfg = rda::load_config(g_config_dir + "/" + name + ".json");
    cfg.seed = seed;
    return cfg;
}

RunReport run(const ExperimentConfig& cfg, const rda::RunHooks& hooks = {}) {
    RunReport r = rda::run_experiment(cfg, hooks);
    ++g_runs;
    bool ok = r.summary.totals.balanced();
    for (const auto& ep : r.episodes) ok = ok && ep.balanced();
    if (!ok) ++g_unbalanced;
    return r;
}

double final_return(const RunReport& r) {
    const std::size_t n = std::min<std::size_t>(kFinalWindow, r.rows.size());
    double s = 0.0;
    for (std::size_t i = r.rows.size() - n; i < r.rows.size(); ++i) s += r.rows[i].eval_return;
    return s / static_cast<double>(n);
}

// Rows without a target-state visit count as zero success.
std::vector<double> sr_series(const RunReport& r) {
    std::vector<double> out;
    for (const auto& row : r.rows) out.push_back(row.success_rate.value_or(0.0));
    return out;
}

double final_sr(const RunReport& r) {
    const auto s = sr_series(r);
    const std::size_t n = std::min<std::size_t>(kFinalWindow, s.size());
    return std::accumulate(s.end() - static_cast<long>(n), s.end(), 0.0) / static_cast<double>(n);
}

// Trailing moving average over the last third of training must not fall by
// more than the tolerance from its start to its end.
bool sr_non_decreasing(const RunReport& r) {
    const auto s = sr_series(r);
    std::vector<double> ma;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const std::size_t lo = i + 1 >= kTrendWindow ? i + 1 - kTrendWindow : 0;
        ma.push_back(std::accumulate(s.begin() + static_cast<long>(lo), s.begin() + static_cast<long>(i) + 1, 0.0) /
                     static_cast<double>(i + 1 - lo));
    }
    const std::size_t start = ma.size() - ma.size() / 3;
    return ma.back() >= ma[start] - kTrendTolerance;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%+.3f", v);
    return buf;
}

std::string join(const std::vector<double>& v) {
    std::string out;
    for (double x : v) out += (out.empty() ? "" : " ") + fmt(x);
    return out;
}

double mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

const double kOptimal = rda::optimal_return(rda::EnvSpec{});

// ---------------------------------------------------------------------------

Outcome gradient_oracle() {
    rda::Rng rng(2718, "acceptance-gradcheck");
    double worst = 0.0;
    for (int i = 0; i < kGradInstances; ++i) {
        const std::size_t in = 2 + rng.uniform_int(6), actions = 2 + rng.uniform_int(4);
        std::vector<std::size_t> hidden{2 + rng.uniform_int(8)};
        if (i % 3 == 0) hidden.push_back(2 + rng.uniform_int(8));
        const rda::NetworkSpec spec{in, hidden, actions, i % 2 == 0};
        const auto net = rda::init_network(spec, 500 + static_cast<std::uint64_t>(i));
        std::vector<rda::TrainTarget> batch;
        for (int b = 0; b < 4; ++b) {
            std::vector<double> x(in);
            for (double& v : x) v = 3.0 * rng.uniform() - 1.5;
            batch.push_back({x, rng.uniform_int(actions), 2.0 * rng.uniform() - 1.0});
        }
        worst = std::max(worst, oracle::max_relative_gradient_error(net, batch, rda::loss_gradient(net, batch), 1e-5));
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "%d instances, max relative error %.3g (<= %.0e)", kGradInstances, worst,
                  kGradTolerance);
    return {worst <= kGradTolerance, buf};
}

std::vector<std::uint64_t> step_hashes(const ExperimentConfig& cfg, std::vector<double>& final_params) {
    std::vector<std::uint64_t> hashes;
    rda::RunHooks hooks;
    hooks.on_step = [&](const rda::LearnerState& ls, long) {
        const auto p = ls.online.parameters();
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (double d : p) {
            const auto bits = std::bit_cast<std::uint64_t>(d);
            for (int k = 0; k < 8; ++k) {
                h ^= (bits >> (8 * k)) & 0xffu;
                h *= 0x100000001b3ull;
            }
        }
        hashes.push_back(h);
        final_params.assign(p.begin(), p.end());
    };
    run(cfg, hooks);
    return hashes;
}

Outcome pass_through() {
    long steps = 0;
    for (std::uint64_t seed : {1u, 2u}) {
        auto clean = config("clean", seed);
        clean.episodes = 500;
        clean.eval.every = 50;
        auto pass = clean;
        pass.mode = rda::AttackMode::delay;
        pass.attacker = rda::AttackerKind::pass_through;
        std::vector<double> pa, pb;
        const auto a = step_hashes(clean, pa), b = step_hashes(pass, pb);
        if (a != b || pa != pb)
            return {false, "seed " + std::to_string(seed) + ": parameters diverge"};
        steps += static_cast<long>(a.size());
    }
    return {true, "2 seeds x 500 episodes, " + std::to_string(steps) + " steps bit-identical"};
}

Outcome clean_training() {
    std::vector<double> finals;
    int ok = 0;
    for (auto s : kSeeds) {
        finals.push_back(final_return(run(config("clean", s))));
        ok += finals.back() >= kCleanFraction * kOptimal;
    }
    return {ok == 4, std::to_string(ok) + "/4 seeds >= " + fmt(kCleanFraction * kOptimal) + " [" + join(finals) + "]"};
}

Outcome untargeted_delay() {
    std::vector<double> learned, random;
    int ok_l = 0, ok_r = 0;
    const double bar = kDelayBar * kOptimal;
    for (auto s : kSeeds) {
        learned.push_back(final_return(run(config("delay_learned", s))));
        random.push_back(final_return(run(config("delay_random", s))));
        ok_l += learned.back() < bar;
        ok_r += random.back() < bar;
    }
    return {ok_l == 4 && ok_r == 4, "bar " + fmt(bar) + "; learned " + std::to_string(ok_l) + "/4 [" +
                                        join(learned) + "], random " + std::to_string(ok_r) + "/4 [" +
                                        join(random) + "]"};
}

Outcome delta_sensitivity() {
    std::vector<double> d8, d16;
    for (auto s : kSeeds) {
        d8.push_back(final_return(run(config("delay_learned", s))));
        d16.push_back(final_return(run(config("delay16_learned", s))));
    }
    const double m8 = mean(d8), m16 = mean(d16), bar = kDelayBar * kOptimal;
    const bool pass = m16 <= m8 + kDeltaTolerance && m8 < bar && m16 < bar;
    return {pass, "mean delta=16 " + fmt(m16) + " vs delta=8 " + fmt(m8) + " + " + fmt(kDeltaTolerance) +
                      ", bar " + fmt(bar) + "; delta=8 [" + join(d8) + "], delta=16 [" + join(d16) + "]"};
}

Outcome targeted() {
    int ok_learned = 0, ok_rule = 0;
    std::vector<double> srl, srr, srb;
    for (auto s : kSeeds) {
        const auto base = config("targeted_learned", s);
        const rda::QNetwork qstar = rda::resolve_qstar(base);
        rda::RunHooks hooks;
        hooks.qstar = &qstar;
        const auto learned = run(base, hooks);
        const auto rule = run(config("targeted_rule", s), hooks);
        const auto random = run(config("targeted_random", s), hooks);
        srl.push_back(final_sr(learned));
        srr.push_back(final_sr(rule));
        srb.push_back(final_sr(random));
        ok_learned += srl.back() >= srb.back() + kTargetMargin && sr_non_decreasing(learned);
        ok_rule += srr.back() >= srb.back() + kTargetMargin && sr_non_decreasing(rule);
    }
    return {ok_learned >= 3 && ok_rule >= 3,
            "need 3/4 with SR >= random + " + fmt(kTargetMargin) + "; learned " + std::to_string(ok_learned) +
                "/4 [" + join(srl) + "], rule " + std::to_string(ok_rule) + "/4 [" + join(srr) + "], random [" +
                join(srb) + "]"};
}

rda::StreamReport verified_run(const ExperimentConfig& cfg) {
    std::stringstream trace;
    rda::RunHooks hooks;
    hooks.trace = &trace;
    run(cfg, hooks);
    return rda::verify_stream(trace, cfg.mode, cfg.attack.delta);
}

Outcome shift_legality() {
    rda::Rng rng(31337, "acceptance-shift");
    long property_violations = 0;
    for (int i = 0; i < 10000; ++i) {
        const std::size_t d = 2 + rng.uniform_int(15);
        const std::size_t k = rng.uniform_int(d);
        const std::size_t drop = rng.uniform_int(k + 1);
        rda::Disk disk(d, static_cast<long>(d));
        const long start = static_cast<long>(rng.uniform_int(10000));
        for (std::size_t j = 0; j < d; ++j) {
            const long t = start + static_cast<long>(j);
            disk = rda::push(std::move(disk), {rng.uniform(), t}, t);
        }
        const auto out = rda::publish_shift(disk, drop, k);
        rda::StreamVerifier v(static_cast<long>(d));
        for (const auto& c : out.published) v.observe(start + static_cast<long>(d) - 1, c.origin_step);
        property_violations += v.report().order_violations + v.report().delay_violations;
        if (out.published.size() + out.dropped.size() != d) ++property_violations;
    }
    long order = 0, delay = 0, published = 0;
    int runs = 0;
    for (auto s : kSeeds) {
        for (const char* name : {"shift_learned", "shift_random", "delay_learned", "delay_random", "delay_fixed"}) {
            const auto cfg = config(name, s);
            const auto rep = verified_run(cfg);
            if (cfg.mode == rda::AttackMode::shift) order += rep.order_violations;
            delay += rep.delay_violations;
            published += rep.published;
            ++runs;
        }
    }
    return {property_violations == 0 && order == 0 && delay == 0,
            "10000 property cases, " + std::to_string(property_violations) + " violations; " + std::to_string(runs) +
                " runs, " + std::to_string(published) + " publications, " + std::to_string(order) +
                " shift order violations, " + std::to_string(delay) + " delay-bound violations"};
}

Outcome shift_effectiveness() {
    std::vector<double> learned, random;
    int ok = 0;
    const double bar = kShiftBar * kOptimal;
    for (auto s : kSeeds) {
        learned.push_back(final_return(run(config("shift_learned", s))));
        random.push_back(final_return(run(config("shift_random", s))));
        ok += learned.back() < bar && learned.back() <= random.back() + kShiftTolerance;
    }
    return {ok >= 3, std::to_string(ok) + "/4 seeds (need 3) with learned < " + fmt(bar) +
                         " and learned <= random + " + fmt(kShiftTolerance) + "; learned [" + join(learned) +
                         "], random [" + join(random) + "]"};
}

Outcome pretrained_degradation() {
    const auto dir = std::filesystem::temp_directory_path() / "rda_acceptance_ckpt";
    std::filesystem::create_directories(dir);
    int ok_attack = 0, ok_control = 0;
    std::vector<double> ratios, control_min;
    for (auto s : kSeeds) {
        const auto clean = config("clean", s);
        const auto pre = rda::pretrain_qstar(clean.env, clean.learner, clean.pretrain_steps, s);
        const auto path = (dir / ("seed" + std::to_string(s) + ".json")).string();
        rda::save_checkpoint(path, {pre.qstar, clean.env, clean.learner, {{"seed", s}}});

        auto attack = config("delay_learned", s);
        attack.episodes = kPretrainedEpisodes;
        attack.pretrained_start = path;
        const auto ra = run(attack);
        const double start = *ra.summary.start_return;
        ratios.push_back(final_return(ra) / start);
        ok_attack += final_return(ra) < kPretrainedDecay * start;

        auto control = clean;
        control.episodes = kPretrainedEpisodes;
        control.pretrained_start = path;
        const auto rc = run(control);
        double lowest = rc.rows.front().eval_return;
        for (const auto& row : rc.rows) lowest = std::min(lowest, row.eval_return);
        control_min.push_back(lowest / *rc.summary.start_return);
        ok_control += lowest >= kControlFraction * *rc.summary.start_return;
    }
    std::filesystem::remove_all(dir);
    return {ok_attack == 4 && ok_control == 4,
            "attack final/start < " + fmt(kPretrainedDecay) + " on " + std::to_string(ok_attack) + "/4 [" +
                join(ratios) + "]; control min/start >= " + fmt(kControlFraction) + " on " +
                std::to_string(ok_control) + "/4 [" + join(control_min) + "]"};
}

Outcome accounting() {
    const long before_runs = g_runs, before_bad = g_unbalanced;
    for (const char* name : {"clean", "delay_learned", "delay_random", "delay_fixed", "delay16_learned",
                             "shift_learned", "shift_random", "targeted_learned", "targeted_rule", "targeted_random"})
        run(config(name, 1));
    return {g_unbalanced == 0, std::to_string(g_runs - before_runs) + " runs here, " + std::to_string(g_runs) +
                                   " in this process, " + std::to_string(g_unbalanced - before_bad) +
                                   " unbalanced here, " + std::to_string(g_unbalanced) + " overall"};
}

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> all{
        {"gradient_oracle", 10, gradient_oracle},
        {"pass_through_equivalence", 120, pass_through},
        {"clean_training", 300, clean_training},
        {"untargeted_delay", 900, untargeted_delay},
        {"delta_sensitivity", 900, delta_sensitivity},
        {"targeted_attack", 1200, targeted},
        {"shift_legality", 120, shift_legality},
        {"shift_effectiveness", 0, shift_effectiveness},
        {"pretrained_degradation", 0, pretrained_degradation},
        {"accounting_invariant", 0, accounting},
    };
    return all;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    std::vector<std::string> names;
    bool list = false;
    app.add_option("criteria", names, "criteria to run (default: all)");
    app.add_option("--configs", g_config_dir, "directory holding the experiment configs");
    app.add_flag("--list", list, "print criterion names and exit");
    CLI11_PARSE(app, argc, argv);

    if (list) {
        for (const auto& c : criteria()) std::printf("%s\n", c.name.c_str());
        return 0;
    }
    std::vector<const Criterion*> selected;
    for (const auto& c : criteria())
        if (names.empty() || std::find(names.begin(), names.end(), c.name) != names.end()) selected.push_back(&c);
    if (selected.size() != (names.empty() ? criteria().size() : names.size())) {
        std::fprintf(stderr, "unknown criterion name; use --list\n");
        return 2;
    }

    int failures = 0;
    for (const Criterion* c : selected) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c->run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::string timing = std::to_string(static_cast<int>(secs + 0.5)) + "s";
        if (c->budget_seconds > 0) {
            timing += " (budget " + std::to_string(static_cast<int>(c->budget_seconds)) + "s)";
            if (secs >= c->budget_seconds) o.pass = false;
        }
        std::printf("%s %s: %s; %s\n", o.pass ? "PASS" : "FAIL", c->name.c_str(), o.detail.c_str(), timing.c_str());
        std::fflush(stdout);
        failures += !o.pass;
    }
    return failures == 0 ? 0 : 1;
}
