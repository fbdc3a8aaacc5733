#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rsv {

/// Probability row over states (or actions), aligned to the dense index order.
using Row = std::vector<double>;

inline constexpr double kStochasticTolerance = 1e-9;

/**
 * Ordered state set split into goal (E), unsafe (U) and living (H) states.
 *
 * Overlapping or out-of-range goal/unsafe indices are representable so that
 * validate_model can report them; check() lists such problems.
 */
class StatePartition {
   public:
    StatePartition() = default;
    StatePartition(std::vector<std::string> states, std::vector<std::size_t> goal, std::vector<std::size_t> unsafe);

    /// Resolves goal/unsafe names against `states`; throws rsv::Error on unknown names.
    static StatePartition from_names(std::vector<std::string> states, const std::vector<std::string>& goal,
                                    const std::vector<std::string>& unsafe);

    std::size_t size() const { return names_.size(); }
    const std::string& name(std::size_t state) const { return names_.at(state); }
    const std::vector<std::string>& names() const { return names_; }
    std::optional<std::size_t> find(std::string_view name) const;

    bool is_goal(std::size_t state) const { return goal_mask_.at(state); }
    bool is_unsafe(std::size_t state) const { return unsafe_mask_.at(state); }
    bool is_terminal(std::size_t state) const { return is_goal(state) || is_unsafe(state); }
    bool is_living(std::size_t state) const { return !is_terminal(state); }

    const std::vector<std::size_t>& goal() const { return goal_; }
    const std::vector<std::size_t>& unsafe() const { return unsafe_; }
    const std::vector<std::size_t>& living() const { return living_; }

    /// Human-readable invariant violations (duplicates, E ∩ U, empty H, bad indices).
    std::vector<std::string> check() const;

    bool operator==(const StatePartition&) const = default;

   private:
    std::vector<std::string> names_;
    std::vector<std::size_t> goal_;
    std::vector<std::size_t> unsafe_;
    std::vector<std::size_t> living_;
    std::vector<bool> goal_mask_;
    std::vector<bool> unsafe_mask_;
};

/// Finite-horizon MDP with a nominal, possibly time-varying kernel.
struct ImdpModel {
    StatePartition partition;
    std::vector<std::string> actions;
    std::size_t horizon = 0;
    // kernel[t][x][a]; rows of terminal states stay empty (absorbing is implied).
    std::vector<std::vector<std::vector<Row>>> kernel;

    const Row& row(std::size_t t, std::size_t x, std::size_t a) const { return kernel.at(t).at(x).at(a); }
};

/// Time-varying randomized policy: rules[t][x] is a distribution over actions (empty for terminal x).
struct Policy {
    std::vector<std::vector<Row>> rules;
};

struct Violation {
    std::string where;
    std::string what;
};

std::string to_string(const Violation& violation);

std::vector<Violation> validate_model(const ImdpModel& model);
std::vector<Violation> validate_policy(const ImdpModel& model, const Policy& policy);

/// The Markov chain obtained by fixing the policy. rows[t][x] is defined for every state;
/// terminal states carry the absorbing point mass.
struct InducedChain {
    StatePartition partition;
    std::size_t horizon = 0;
    std::vector<std::vector<Row>> rows;

    std::size_t state_count() const { return partition.size(); }
    const Row& row(std::size_t t, std::size_t x) const { return rows.at(t).at(x); }
};

InducedChain induce_chain(const ImdpModel& model, const Policy& policy);

/// Absorbing point-mass row for `state`.
Row absorbing_row(std::size_t state_count, std::size_t state);

/// Sum of the row; nonnegativity and |sum-1| <= tolerance.
bool is_stochastic(std::span<const double> row, double tolerance = kStochasticTolerance);

/// Checks shape and stochasticity of every row; empty when the chain is well formed.
std::vector<Violation> validate_chain(const InducedChain& chain);

}  // namespace rsv
