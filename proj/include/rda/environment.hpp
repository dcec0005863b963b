#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "rda/random.hpp"

namespace rda {

enum class EnvKind { gridworld, cliff_chain };

struct Cell {
    int row = 0;
    int col = 0;
    friend bool operator==(const Cell&, const Cell&) = default;
};

/// Gridworld actions: 0 up, 1 down, 2 left, 3 right, then 4 = stay when
/// `noop` is set. Cliff chain actions: 0 left, 1 right, 2 = stay.
struct EnvSpec {
    EnvKind kind = EnvKind::gridworld;
    int width = 8;
    int height = 5;
    int chain_length = 12;
    int horizon = 100;
    double gamma = 0.95;
    double slip_probability = 0.0;
    bool noop = false;
    Cell start{2, 0};
    Cell goal{1, 7};
    std::vector<Cell> pits{{2, 3}, {2, 4}, {3, 3}};

    static EnvSpec gridworld(int width, int height);
    static EnvSpec cliff_chain(int length);

    void validate() const;
    std::size_t cell_count() const;
    std::size_t action_count() const;
    std::size_t feature_dim() const { return cell_count(); }
    /// Index of the stay action; throws when the spec has none.
    std::size_t noop_action() const;

    friend bool operator==(const EnvSpec&, const EnvSpec&) = default;
};

inline constexpr double kStepPenalty = -0.01;

struct EnvState {
    std::vector<double> features;
    std::size_t cell = 0;
    int step_index = 0;
    bool terminal = false;
};

struct StepResult {
    EnvState next_state;
    double reward = 0.0;
    /// Episode is over (absorbing state reached or horizon hit).
    bool done = false;
    /// Episode ended only because the horizon was reached.
    bool truncated = false;
};

std::string to_string(EnvKind kind);
EnvKind env_kind_from_string(const std::string& name);

/// The start distribution is a point mass, so the seed does not move the
/// start cell; it is accepted for interface symmetry with stochastic resets.
EnvState reset(const EnvSpec& spec, std::uint64_t seed);

/// With slip probability p the requested action is replaced by one drawn
/// uniformly from all actions.
StepResult step(const EnvSpec& spec, const EnvState& state, std::size_t action, Rng& rng);

/// Optimal undiscounted episodic return from the start state, by backward
/// induction over (cell, steps remaining). Deterministic specs only; throws
/// std::domain_error when the goal cannot be reached.
double optimal_return(const EnvSpec& spec);

/// Q-table of the finite-horizon problem with `spec.horizon` steps
/// remaining, indexed [cell][action]. Deterministic specs only.
std::vector<std::vector<double>> optimal_q_table(const EnvSpec& spec);

/// One-hot feature vector for a cell index.
std::vector<double> encode_cell(const EnvSpec& spec, std::size_t cell);

}  // namespace rda
