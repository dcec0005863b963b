#include "rda/config_io.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace rda {

using nlohmann::json;

namespace {

// Tracks which keys of an object were consumed so leftovers can be reported.
class Reader {
public:
    Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw std::invalid_argument(where_ + ": expected an object");
    }

    template <typename T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        const auto it = j_.find(key);
        if (it == j_.end()) return;
        try {
            out = it->template get<T>();
        } catch (const json::exception&) {
            throw std::invalid_argument(where_ + "." + key + ": wrong type");
        }
    }

    const json* child(const char* key) {
        seen_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    std::string path(const char* key) const { return where_ + "." + key; }

    void finish() const {
        for (const auto& [key, _] : j_.items())
            if (!seen_.count(key)) throw std::invalid_argument(where_ + ": unknown key '" + key + "'");
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

json cell_json(const Cell& c) { return json::array({c.row, c.col}); }

Cell cell_from(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
        throw std::invalid_argument(where + ": expected [row, col]");
    return {j[0].get<int>(), j[1].get<int>()};
}

json epsilon_json(const EpsilonSchedule& e) {
    return {{"start", e.start}, {"end", e.end}, {"decay_steps", e.decay_steps}};
}

EpsilonSchedule epsilon_from(const json& j, const std::string& where, EpsilonSchedule e) {
    Reader r(j, where);
    r.get("start", e.start);
    r.get("end", e.end);
    r.get("decay_steps", e.decay_steps);
    r.finish();
    return e;
}

}  // namespace

json to_json(const EnvSpec& spec) {
    json j{{"kind", to_string(spec.kind)},
           {"horizon", spec.horizon},
           {"gamma", spec.gamma},
           {"slip_probability", spec.slip_probability},
           {"noop", spec.noop}};
    if (spec.kind == EnvKind::gridworld) {
        j["width"] = spec.width;
        j["height"] = spec.height;
        j["start"] = cell_json(spec.start);
        j["goal"] = cell_json(spec.goal);
        json pits = json::array();
        for (const auto& p : spec.pits) pits.push_back(cell_json(p));
        j["pits"] = std::move(pits);
    } else {
        j["chain_length"] = spec.chain_length;
    }
    return j;
}

EnvSpec env_from_json(const json& j) {
    Reader r(j, "env");
    std::string kind = "gridworld";
    r.get("kind", kind);
    EnvSpec spec;
    int width = 8, height = 5, length = 12;
    r.get("width", width);
    r.get("height", height);
    r.get("chain_length", length);
    if (env_kind_from_string(kind) == EnvKind::gridworld)
        spec = EnvSpec::gridworld(width, height);
    else
        spec = EnvSpec::cliff_chain(length);
    r.get("horizon", spec.horizon);
    r.get("gamma", spec.gamma);
    r.get("slip_probability", spec.slip_probability);
    r.get("noop", spec.noop);
    if (const json* s = r.child("start")) spec.start = cell_from(*s, "env.start");
    if (const json* g = r.child("goal")) spec.goal = cell_from(*g, "env.goal");
    if (const json* pits = r.child("pits")) {
        if (!pits->is_array()) throw std::invalid_argument("env.pits: expected a list");
        spec.pits.clear();
        for (const auto& p : *pits) spec.pits.push_back(cell_from(p, "env.pits"));
    }
    r.finish();
    spec.validate();
    return spec;
}

json to_json(const NetworkSpec& spec) {
    return {{"input_dim", spec.input_dim},
            {"hidden_layers", spec.hidden_layers},
            {"action_count", spec.action_count},
            {"dueling", spec.dueling}};
}

NetworkSpec network_spec_from_json(const json& j) {
    Reader r(j, "network");
    NetworkSpec spec;
    r.get("input_dim", spec.input_dim);
    r.get("hidden_layers", spec.hidden_layers);
    r.get("action_count", spec.action_count);
    r.get("dueling", spec.dueling);
    r.finish();
    spec.validate();
    return spec;
}

json to_json(const LearnerConfig& c) {
    return {{"hidden", c.hidden},
            {"dueling", c.dueling},
            {"learning_rate", c.learning_rate},
            {"batch_size", c.batch_size},
            {"replay_capacity", c.replay_capacity},
            {"target_sync_period", c.target_sync_period},
            {"epsilon", epsilon_json(c.epsilon)}};
}

LearnerConfig learner_from_json(const json& j) {
    Reader r(j, "learner");
    LearnerConfig c;
    r.get("hidden", c.hidden);
    r.get("dueling", c.dueling);
    r.get("learning_rate", c.learning_rate);
    r.get("batch_size", c.batch_size);
    r.get("replay_capacity", c.replay_capacity);
    r.get("target_sync_period", c.target_sync_period);
    if (const json* e = r.child("epsilon")) c.epsilon = epsilon_from(*e, "learner.epsilon", c.epsilon);
    r.finish();
    c.validate();
    return c;
}

json to_json(const AttackerConfig& c) {
    return {{"hidden", c.hidden},
            {"dueling", c.dueling},
            {"learning_rate", c.learning_rate},
            {"gamma", c.gamma},
            {"batch_size", c.batch_size},
            {"replay_capacity", c.replay_capacity},
            {"target_sync_period", c.target_sync_period},
            {"epsilon", epsilon_json(c.epsilon)}};
}

AttackerConfig attacker_from_json(const json& j) {
    Reader r(j, "attacker_net");
    AttackerConfig c;
    r.get("hidden", c.hidden);
    r.get("dueling", c.dueling);
    r.get("learning_rate", c.learning_rate);
    r.get("gamma", c.gamma);
    r.get("batch_size", c.batch_size);
    r.get("replay_capacity", c.replay_capacity);
    r.get("target_sync_period", c.target_sync_period);
    if (const json* e = r.child("epsilon"))
        c.epsilon = epsilon_from(*e, "attacker_net.epsilon", c.epsilon);
    r.finish();
    c.validate();
    return c;
}

json to_json(const ExperimentConfig& c) {
    json j{{"env", to_json(c.env)},
           {"mode", to_string(c.mode)},
           {"objective", to_string(c.objective)},
           {"attacker", to_string(c.attacker)},
           {"attack",
            {{"delta", c.attack.delta}, {"disk", c.attack.disk}, {"max_drop", c.attack.max_drop}}},
           {"episodes", c.episodes},
           {"learner", to_json(c.learner)},
           {"attacker_net", to_json(c.attacker_net)},
           {"eval", {{"every", c.eval.every}, {"episodes", c.eval.episodes}}},
           {"seed", c.seed},
           {"target", {{"actions", c.target.actions}, {"qstar_checkpoint", c.target.qstar_checkpoint}}},
           {"pretrain_steps", c.pretrain_steps}};
    j["pretrained_start"] = c.pretrained_start ? json(*c.pretrained_start) : json(nullptr);
    return j;
}

ExperimentConfig experiment_from_json(const json& j) {
    Reader r(j, "config");
    ExperimentConfig c;
    if (const json* env = r.child("env")) c.env = env_from_json(*env);
    std::string mode = "none", objective = "untargeted", attacker = "learned";
    r.get("mode", mode);
    r.get("objective", objective);
    r.get("attacker", attacker);
    c.mode = attack_mode_from_string(mode);
    c.objective = objective_from_string(objective);
    c.attacker = attacker_kind_from_string(attacker);
    if (const json* a = r.child("attack")) {
        Reader ar(*a, "attack");
        ar.get("delta", c.attack.delta);
        ar.get("disk", c.attack.disk);
        ar.get("max_drop", c.attack.max_drop);
        ar.finish();
    }
    r.get("episodes", c.episodes);
    if (const json* l = r.child("learner")) c.learner = learner_from_json(*l);
    if (const json* a = r.child("attacker_net")) c.attacker_net = attacker_from_json(*a);
    if (const json* e = r.child("eval")) {
        Reader er(*e, "eval");
        er.get("every", c.eval.every);
        er.get("episodes", c.eval.episodes);
        er.finish();
    }
    r.get("seed", c.seed);
    if (const json* p = r.child("pretrained_start"); p && !p->is_null()) {
        if (!p->is_string()) throw std::invalid_argument("config.pretrained_start: expected a path");
        c.pretrained_start = p->get<std::string>();
    }
    if (const json* t = r.child("target")) {
        Reader tr(*t, "target");
        tr.get("actions", c.target.actions);
        tr.get("qstar_checkpoint", c.target.qstar_checkpoint);
        tr.finish();
    }
    r.get("pretrain_steps", c.pretrain_steps);
    r.finish();
    c.validate();
    return c;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("'" + path + "' is not valid JSON: " + e.what());
    }
}

ExperimentConfig load_config(const std::string& path) {
    return experiment_from_json(read_json_file(path));
}

void set_config_value(json& root, const std::string& dotted_key, const std::string& value) {
    json* node = &root;
    std::stringstream parts(dotted_key);
    std::string part;
    std::vector<std::string> keys;
    while (std::getline(parts, part, '.')) keys.push_back(part);
    if (keys.empty()) throw std::invalid_argument("empty config key");
    for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
        json& next = (*node)[keys[i]];
        if (next.is_null()) next = json::object();
        if (!next.is_object()) throw std::invalid_argument("'" + dotted_key + "' crosses a non-object");
        node = &next;
    }
    json parsed = json::parse(value, nullptr, false);
    (*node)[keys.back()] = parsed.is_discarded() ? json(value) : parsed;
}

}  // namespace rda
