#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "rda/checkpoint.hpp"
#include "rda/config_io.hpp"
#include "rda/harness.hpp"
#include "rda/target_policy.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep))
        if (!item.empty()) out.push_back(item);
    return out;
}

void run_to_dir(const rda::ExperimentConfig& cfg, const fs::path& out, bool trace) {
    fs::create_directories(out);
    std::ofstream trace_file;
    rda::RunHooks hooks;
    if (trace) {
        trace_file.open(out / "trace.log");
        hooks.trace = &trace_file;
    }
    const rda::RunReport report = rda::run_experiment(cfg, hooks);
    rda::write_metrics_csv((out / "metrics.csv").string(), report);
    rda::write_summary_json((out / "summary.json").string(), cfg, report);
}

std::string describe(const rda::RunReport& r) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "final_return=%.4f", r.summary.final_return);
    std::string s = buf;
    if (r.summary.final_success_rate) {
        std::snprintf(buf, sizeof buf, " final_sr=%.4f", *r.summary.final_success_rate);
        s += buf;
    }
    return s;
}

int cmd_run(const std::string& config, std::optional<std::uint64_t> seed, const std::string& out,
            bool trace) {
    rda::ExperimentConfig cfg = rda::load_config(config);
    if (seed) cfg.seed = *seed;
    run_to_dir(cfg, out, trace);
    std::ifstream summary(fs::path(out) / "summary.json");
    const json s = json::parse(summary);
    std::cout << "final_return " << s["final_return"] << "  optimal " << s["optimal_return"];
    if (!s["final_success_rate"].is_null()) std::cout << "  final_sr " << s["final_success_rate"];
    std::cout << "\nwrote " << out << "\n";
    return 0;
}

int cmd_pretrain(const std::string& config, const std::string& out) {
    const rda::ExperimentConfig cfg = rda::load_config(config);
    const auto result = rda::pretrain_qstar(cfg.env, cfg.learner, cfg.pretrain_steps, cfg.seed);
    rda::Checkpoint ck{result.qstar, cfg.env, cfg.learner,
                       {{"steps", cfg.pretrain_steps},
                        {"seed", cfg.seed},
                        {"eval_return", result.eval_return},
                        {"optimal_return", result.optimal}}};
    if (const auto parent = fs::path(out).parent_path(); !parent.empty()) fs::create_directories(parent);
    rda::save_checkpoint(out, ck);
    std::cout << "eval_return " << result.eval_return << " (optimal " << result.optimal << ")\nwrote "
              << out << "\n";
    return 0;
}

int cmd_verify(const std::string& trace, const std::string& mode_name, long delta) {
    const rda::AttackMode mode = rda::attack_mode_from_string(mode_name);
    const rda::StreamReport r = rda::verify_stream(trace, mode, delta);
    const bool ok = rda::stream_is_legal(r, mode);
    std::cout << "records " << r.records << "\npublished " << r.published << "\ndelay_violations "
              << r.delay_violations << "\norder_violations " << r.order_violations
              << "\nmax_delay " << r.max_delay_seen << "\n"
              << (ok ? "legal" : "ILLEGAL") << "\n";
    return ok ? 0 : 1;
}

int cmd_sweep(const std::string& config, const std::string& seeds_text,
              const std::vector<std::string>& params, const std::string& out, unsigned jobs,
              bool trace) {
    const json base = rda::read_json_file(config);
    std::vector<std::uint64_t> seeds;
    for (const auto& s : split(seeds_text, ',')) seeds.push_back(std::stoull(s));
    if (seeds.empty()) throw std::invalid_argument("--seeds needs at least one seed");

    // Cartesian product of every --param key=v1,v2,... axis.
    std::vector<std::pair<std::string, json>> variants{{"", base}};
    for (const auto& p : params) {
        const auto eq = p.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("--param expects key=v1,v2");
        const std::string key = p.substr(0, eq);
        std::vector<std::pair<std::string, json>> next;
        for (const auto& [label, tree] : variants) {
            for (const auto& v : split(p.substr(eq + 1), ',')) {
                json t = tree;
                rda::set_config_value(t, key, v);
                next.emplace_back(label + (label.empty() ? "" : "_") + key + "=" + v, std::move(t));
            }
        }
        variants = std::move(next);
    }

    struct Job {
        std::string name;
        rda::ExperimentConfig cfg;
    };
    std::vector<Job> queue;
    for (const auto& [label, tree] : variants) {
        rda::ExperimentConfig cfg = rda::experiment_from_json(tree);
        for (auto seed : seeds) {
            cfg.seed = seed;
            queue.push_back({(label.empty() ? std::string("base") : label) + "_seed" + std::to_string(seed), cfg});
        }
    }

    std::atomic<std::size_t> next{0};
    std::atomic<int> failures{0};
    std::mutex io;
    auto worker = [&] {
        for (std::size_t i = next++; i < queue.size(); i = next++) {
            const Job& job = queue[i];
            try {
                fs::path dir = fs::path(out) / job.name;
                fs::create_directories(dir);
                std::ofstream trace_file;
                rda::RunHooks hooks;
                if (trace) {
                    trace_file.open(dir / "trace.log");
                    hooks.trace = &trace_file;
                }
                const rda::RunReport report = rda::run_experiment(job.cfg, hooks);
                rda::write_metrics_csv((dir / "metrics.csv").string(), report);
                rda::write_summary_json((dir / "summary.json").string(), job.cfg, report);
                std::lock_guard lock(io);
                std::cout << job.name << "  " << describe(report) << "\n";
            } catch (const std::exception& e) {
                ++failures;
                std::lock_guard lock(io);
                std::cerr << job.name << "  failed: " << e.what() << "\n";
            }
        }
    };
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reward delay and reward shifting attacks on dueling Double DQN"};
    app.require_subcommand(1);

    std::string config, out = "out", trace_path, mode = "delay", seeds, ckpt_out;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> params;
    long delta = 8;
    unsigned jobs = 0;
    bool trace = false;

    auto* run = app.add_subcommand("run", "Run one experiment");
    run->add_option("--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("--seed", seed, "Override the config seed");
    run->add_option("--out", out, "Output directory")->capture_default_str();
    run->add_flag("--trace", trace, "Also write trace.log");

    auto* pretrain = app.add_subcommand("pretrain", "Train a clean learner and save a checkpoint");
    pretrain->add_option("--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    pretrain->add_option("--out", ckpt_out, "Checkpoint path")->required();

    auto* verify = app.add_subcommand("verify", "Audit a trace log for delay and order violations");
    verify->add_option("--trace", trace_path, "trace.log path")->required()->check(CLI::ExistingFile);
    verify->add_option("--mode", mode, "delay or shift")
        ->check(CLI::IsMember({"none", "delay", "shift"}))
        ->capture_default_str();
    verify->add_option("--delta", delta, "Maximum delay")->capture_default_str();

    auto* sweep = app.add_subcommand("sweep", "Run a config over several seeds and parameter values");
    sweep->add_option("--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sweep->add_option("--seeds", seeds, "Comma-separated seeds")->required();
    sweep->add_option("--param", params, "key=v1,v2 (dotted keys, repeatable)");
    sweep->add_option("--out", out, "Output directory")->capture_default_str();
    sweep->add_option("--jobs", jobs, "Worker threads (0 = all cores)")->capture_default_str();
    sweep->add_flag("--trace", trace, "Also write trace.log per run");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run) return cmd_run(config, seed, out, trace);
        if (*pretrain) return cmd_pretrain(config, ckpt_out);
        if (*verify) return cmd_verify(trace_path, mode, delta);
        if (*sweep) return cmd_sweep(config, seeds, params, out, jobs, trace);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
