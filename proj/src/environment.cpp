#include "rda/environment.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace rda {

namespace {

constexpr std::size_t kMaxCells = 10000;

struct Outcome {
    std::size_t cell;
    double reward;
    bool terminal;
};

bool is_pit(const EnvSpec& spec, std::size_t cell) {
    for (const Cell& pit : spec.pits)
        if (static_cast<std::size_t>(pit.row * spec.width + pit.col) == cell) return true;
    return false;
}

std::size_t cell_index(const EnvSpec& spec, Cell c) {
    return static_cast<std::size_t>(c.row * spec.width + c.col);
}

std::size_t start_cell(const EnvSpec& spec) {
    return spec.kind == EnvKind::gridworld ? cell_index(spec, spec.start) : 0;
}

Outcome transition(const EnvSpec& spec, std::size_t cell, std::size_t action) {
    if (spec.kind == EnvKind::cliff_chain) {
        const auto last = static_cast<std::size_t>(spec.chain_length - 1);
        if (action == 0) {
            if (cell == 0) return {cell, -1.0, true};
            return {cell - 1, 0.0, false};
        }
        if (action == 1) {
            if (cell + 1 == last) return {last, 1.0, true};
            return {cell + 1, 0.0, false};
        }
        return {cell, 0.0, false};
    }

    int row = static_cast<int>(cell) / spec.width;
    int col = static_cast<int>(cell) % spec.width;
    switch (action) {
        case 0: row = std::max(row - 1, 0); break;
        case 1: row = std::min(row + 1, spec.height - 1); break;
        case 2: col = std::max(col - 1, 0); break;
        case 3: col = std::min(col + 1, spec.width - 1); break;
        default: break;  // stay
    }
    const std::size_t next = static_cast<std::size_t>(row * spec.width + col);
    if (next == cell_index(spec, spec.goal)) return {next, 1.0, true};
    if (is_pit(spec, next)) return {next, -1.0, true};
    return {next, kStepPenalty, false};
}

bool goal_reachable(const EnvSpec& spec) {
    if (spec.kind == EnvKind::cliff_chain) return true;
    const std::size_t goal = cell_index(spec, spec.goal);
    std::vector<bool> seen(spec.cell_count(), false);
    std::deque<std::size_t> frontier{start_cell(spec)};
    seen[frontier.front()] = true;
    while (!frontier.empty()) {
        const std::size_t cell = frontier.front();
        frontier.pop_front();
        for (std::size_t a = 0; a < 4; ++a) {
            const Outcome o = transition(spec, cell, a);
            if (o.cell == goal) return true;
            if (o.terminal || seen[o.cell]) continue;
            seen[o.cell] = true;
            frontier.push_back(o.cell);
        }
    }
    return false;
}

void check_cell(const EnvSpec& spec, Cell c, const char* what) {
    if (c.row < 0 || c.row >= spec.height || c.col < 0 || c.col >= spec.width)
        throw std::invalid_argument(std::string(what) + " lies outside the grid");
}

}  // namespace

EnvSpec EnvSpec::gridworld(int width, int height) {
    EnvSpec spec;
    spec.kind = EnvKind::gridworld;
    spec.width = width;
    spec.height = height;
    const int mid = height / 2;
    spec.start = {mid, 0};
    spec.goal = {std::max(mid - 1, 0), width - 1};
    spec.pits.clear();
    for (Cell pit : {Cell{mid, width / 2 - 1}, Cell{mid, width / 2}, Cell{mid + 1, width / 2 - 1}}) {
        if (pit.row < height && pit.col > 0 && pit.col < width - 1 && !(pit == spec.goal))
            spec.pits.push_back(pit);
    }
    return spec;
}

EnvSpec EnvSpec::cliff_chain(int length) {
    EnvSpec spec;
    spec.kind = EnvKind::cliff_chain;
    spec.chain_length = length;
    spec.pits.clear();
    return spec;
}

void EnvSpec::validate() const {
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0, 1)");
    if (!(slip_probability >= 0.0 && slip_probability <= 1.0))
        throw std::invalid_argument("slip_probability must lie in [0, 1]");
    if (kind == EnvKind::cliff_chain) {
        if (chain_length < 2) throw std::invalid_argument("cliff_chain length must be >= 2");
        if (static_cast<std::size_t>(chain_length) > kMaxCells)
            throw std::invalid_argument("cliff_chain too long to enumerate");
        return;
    }
    if (width < 1 || height < 1) throw std::invalid_argument("grid dimensions must be >= 1");
    if (static_cast<std::size_t>(width) * static_cast<std::size_t>(height) > kMaxCells)
        throw std::invalid_argument("grid too large to enumerate");
    check_cell(*this, start, "start cell");
    check_cell(*this, goal, "goal cell");
    if (start == goal) throw std::invalid_argument("start and goal coincide");
    for (const Cell& pit : pits) {
        check_cell(*this, pit, "pit cell");
        if (pit == start) throw std::invalid_argument("start cell is a pit");
        if (pit == goal) throw std::invalid_argument("goal cell is a pit");
    }
}

std::size_t EnvSpec::cell_count() const {
    if (kind == EnvKind::cliff_chain) return static_cast<std::size_t>(chain_length);
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
}

std::size_t EnvSpec::action_count() const {
    const std::size_t moves = kind == EnvKind::gridworld ? 4 : 2;
    return noop ? moves + 1 : moves;
}

std::size_t EnvSpec::noop_action() const {
    if (!noop) throw std::logic_error("environment has no stay action");
    return action_count() - 1;
}

std::string to_string(EnvKind kind) {
    return kind == EnvKind::gridworld ? "gridworld" : "cliff_chain";
}

EnvKind env_kind_from_string(const std::string& name) {
    if (name == "gridworld") return EnvKind::gridworld;
    if (name == "cliff_chain") return EnvKind::cliff_chain;
    throw std::invalid_argument("unknown environment kind '" + name + "'");
}

std::vector<double> encode_cell(const EnvSpec& spec, std::size_t cell) {
    std::vector<double> features(spec.feature_dim(), 0.0);
    features.at(cell) = 1.0;
    return features;
}

EnvState reset(const EnvSpec& spec, std::uint64_t /*seed*/) {
    spec.validate();
    const std::size_t cell = start_cell(spec);
    return {encode_cell(spec, cell), cell, 0, false};
}

StepResult step(const EnvSpec& spec, const EnvState& state, std::size_t action, Rng& rng) {
    if (state.terminal) throw std::logic_error("step called on a terminal state");
    const std::size_t actions = spec.action_count();
    if (action >= actions) throw std::out_of_range("action index out of range");
    if (spec.slip_probability > 0.0 && rng.uniform() < spec.slip_probability)
        action = static_cast<std::size_t>(rng.uniform_int(actions));

    const Outcome o = transition(spec, state.cell, action);
    StepResult result;
    result.next_state.cell = o.cell;
    result.next_state.features = encode_cell(spec, o.cell);
    result.next_state.step_index = state.step_index + 1;
    result.reward = o.reward;
    result.truncated = !o.terminal && result.next_state.step_index >= spec.horizon;
    result.done = o.terminal || result.truncated;
    result.next_state.terminal = result.done;
    return result;
}

std::vector<std::vector<double>> optimal_q_table(const EnvSpec& spec) {
    spec.validate();
    if (spec.slip_probability > 0.0)
        throw std::invalid_argument("optimal_q_table requires a deterministic environment");
    if (!goal_reachable(spec)) throw std::domain_error("goal is unreachable from the start cell");

    const std::size_t cells = spec.cell_count();
    const std::size_t actions = spec.action_count();
    std::vector<double> value(cells, 0.0);  // V with k steps remaining
    std::vector<std::vector<double>> q(cells, std::vector<double>(actions, 0.0));
    for (int remaining = 1; remaining <= spec.horizon; ++remaining) {
        for (std::size_t s = 0; s < cells; ++s)
            for (std::size_t a = 0; a < actions; ++a) {
                const Outcome o = transition(spec, s, a);
                q[s][a] = o.reward + (o.terminal ? 0.0 : value[o.cell]);
            }
        for (std::size_t s = 0; s < cells; ++s)
            value[s] = *std::max_element(q[s].begin(), q[s].end());
    }
    return q;
}

double optimal_return(const EnvSpec& spec) {
    const auto q = optimal_q_table(spec);
    const auto& row = q[start_cell(spec)];
    return *std::max_element(row.begin(), row.end());
}

}  // namespace rda
