#include "rsv/model.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "rsv/error.h"

namespace rsv {

StatePartition::StatePartition(std::vector<std::string> states, std::vector<std::size_t> goal,
                               std::vector<std::size_t> unsafe)
    : names_(std::move(states)),
      goal_(std::move(goal)),
      unsafe_(std::move(unsafe)),
      goal_mask_(names_.size(), false),
      unsafe_mask_(names_.size(), false) {
    for (auto g : goal_)
        if (g < names_.size()) goal_mask_[g] = true;
    for (auto u : unsafe_)
        if (u < names_.size()) unsafe_mask_[u] = true;
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (is_living(i)) living_.push_back(i);
}

StatePartition StatePartition::from_names(std::vector<std::string> states, const std::vector<std::string>& goal,
                                          const std::vector<std::string>& unsafe) {
    auto resolve = [&](const std::vector<std::string>& subset, const char* label) {
        std::vector<std::size_t> indices;
        for (const auto& name : subset) {
            auto it = std::find(states.begin(), states.end(), name);
            if (it == states.end()) throw Error(std::string("unknown state '") + name + "' in " + label);
            indices.push_back(static_cast<std::size_t>(it - states.begin()));
        }
        return indices;
    };
    auto goalIndices = resolve(goal, "goal");
    auto unsafeIndices = resolve(unsafe, "unsafe");
    return StatePartition(std::move(states), std::move(goalIndices), std::move(unsafeIndices));
}

std::optional<std::size_t> StatePartition::find(std::string_view name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return i;
    return std::nullopt;
}

std::vector<std::string> StatePartition::check() const {
    std::vector<std::string> problems;
    std::unordered_set<std::string> seen;
    for (const auto& name : names_)
        if (!seen.insert(name).second) problems.push_back("duplicate state '" + name + "'");
    for (auto g : goal_)
        if (g >= names_.size()) problems.push_back("goal index " + std::to_string(g) + " out of range");
    for (auto u : unsafe_)
        if (u >= names_.size()) problems.push_back("unsafe index " + std::to_string(u) + " out of range");
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (goal_mask_[i] && unsafe_mask_[i]) problems.push_back("state '" + names_[i] + "' is both goal and unsafe");
    if (living_.empty()) problems.push_back("living set is empty");
    return problems;
}

std::string to_string(const Violation& violation) {
    return violation.where.empty() ? violation.what : violation.where + ": " + violation.what;
}

bool is_stochastic(std::span<const double> row, double tolerance) {
    double sum = 0.0;
    for (double p : row) {
        if (!(p >= 0.0) || !std::isfinite(p)) return false;
        sum += p;
    }
    return std::abs(sum - 1.0) <= tolerance;
}

Row absorbing_row(std::size_t state_count, std::size_t state) {
    Row row(state_count, 0.0);
    row.at(state) = 1.0;
    return row;
}

namespace {

std::string describe_row(std::span<const double> row, std::size_t expected) {
    if (row.empty()) return "row is missing";
    if (row.size() != expected) {
        return "row has " + std::to_string(row.size()) + " entries, expected " + std::to_string(expected);
    }
    for (double p : row)
        if (!(p >= 0.0) || !std::isfinite(p)) return "row has a negative or non-finite entry";
    double sum = std::accumulate(row.begin(), row.end(), 0.0);
    std::ostringstream os;
    os.precision(12);
    os << "row sums to " << sum;
    return os.str();
}

std::string location(std::size_t t, const std::string& x, const std::string& a = {}) {
    std::string where = "(t=" + std::to_string(t) + ", x=" + x;
    if (!a.empty()) where += ", a=" + a;
    return where + ")";
}

}  // namespace

std::vector<Violation> validate_model(const ImdpModel& model) {
    std::vector<Violation> violations;
    for (auto& problem : model.partition.check()) violations.push_back({"partition", std::move(problem)});

    std::unordered_set<std::string> actionNames;
    for (const auto& a : model.actions)
        if (!actionNames.insert(a).second) violations.push_back({"actions", "duplicate action '" + a + "'"});
    if (model.actions.empty()) violations.push_back({"actions", "no actions"});
    if (model.horizon == 0) violations.push_back({"horizon", "horizon must be positive"});
    if (model.kernel.size() != model.horizon) {
        violations.push_back({"kernel", "kernel covers " + std::to_string(model.kernel.size()) + " time steps, horizon is " +
                                            std::to_string(model.horizon)});
        return violations;
    }

    const auto n = model.partition.size();
    for (std::size_t t = 0; t < model.horizon; ++t) {
        const auto& step = model.kernel[t];
        if (step.size() != n) {
            violations.push_back({"(t=" + std::to_string(t) + ")", "kernel step does not cover every state"});
            continue;
        }
        for (std::size_t x = 0; x < n; ++x) {
            const auto& rows = step[x];
            if (model.partition.is_terminal(x)) {
                for (std::size_t a = 0; a < rows.size(); ++a) {
                    if (!rows[a].empty() && rows[a] != absorbing_row(n, x)) {
                        violations.push_back({location(t, model.partition.name(x)), "terminal state row is not absorbing"});
                        break;
                    }
                }
                continue;
            }
            if (rows.size() != model.actions.size()) {
                violations.push_back({location(t, model.partition.name(x)), "missing action rows"});
                continue;
            }
            for (std::size_t a = 0; a < rows.size(); ++a) {
                if (rows[a].size() != n || !is_stochastic(rows[a])) {
                    violations.push_back({location(t, model.partition.name(x), model.actions[a]), describe_row(rows[a], n)});
                }
            }
        }
    }
    return violations;
}

std::vector<Violation> validate_policy(const ImdpModel& model, const Policy& policy) {
    std::vector<Violation> violations;
    if (policy.rules.size() != model.horizon) {
        violations.push_back({"policy", "policy covers " + std::to_string(policy.rules.size()) + " time steps, horizon is " +
                                            std::to_string(model.horizon)});
        return violations;
    }
    for (std::size_t t = 0; t < model.horizon; ++t) {
        for (auto x : model.partition.living()) {
            const auto& name = model.partition.name(x);
            if (x >= policy.rules[t].size() || policy.rules[t][x].empty()) {
                violations.push_back({location(t, name), "missing policy rule"});
                continue;
            }
            const auto& rule = policy.rules[t][x];
            if (rule.size() != model.actions.size() || !is_stochastic(rule))
                violations.push_back({location(t, name), "policy " + describe_row(rule, model.actions.size())});
        }
    }
    return violations;
}

std::vector<Violation> validate_chain(const InducedChain& chain) {
    std::vector<Violation> violations;
    for (auto& problem : chain.partition.check()) violations.push_back({"partition", std::move(problem)});
    const auto n = chain.state_count();
    if (chain.rows.size() != chain.horizon) {
        violations.push_back({"chain", "rows cover " + std::to_string(chain.rows.size()) + " time steps, horizon is " +
                                           std::to_string(chain.horizon)});
        return violations;
    }
    for (std::size_t t = 0; t < chain.horizon; ++t) {
        if (chain.rows[t].size() != n) {
            violations.push_back({"(t=" + std::to_string(t) + ")", "chain step does not cover every state"});
            continue;
        }
        for (std::size_t x = 0; x < n; ++x) {
            const auto& row = chain.rows[t][x];
            if (row.size() != n || !is_stochastic(row))
                violations.push_back({location(t, chain.partition.name(x)), describe_row(row, n)});
        }
    }
    return violations;
}

InducedChain induce_chain(const ImdpModel& model, const Policy& policy) {
    if (auto problems = validate_model(model); !problems.empty())
        throw Error("invalid model: " + to_string(problems.front()));
    if (auto problems = validate_policy(model, policy); !problems.empty())
        throw Error("invalid policy: " + to_string(problems.front()));

    const auto n = model.partition.size();
    InducedChain chain{model.partition, model.horizon, {}};
    chain.rows.assign(model.horizon, std::vector<Row>(n));
    for (std::size_t t = 0; t < model.horizon; ++t) {
        for (std::size_t x = 0; x < n; ++x) {
            if (model.partition.is_terminal(x)) {
                chain.rows[t][x] = absorbing_row(n, x);
                continue;
            }
            const auto& rule = policy.rules[t][x];
            Row row(n, 0.0);
            for (std::size_t a = 0; a < rule.size(); ++a) {
                if (rule[a] == 0.0) continue;
                const auto& actionRow = model.kernel[t][x][a];
                for (std::size_t y = 0; y < n; ++y) row[y] += rule[a] * actionRow[y];
            }
            chain.rows[t][x] = std::move(row);
        }
    }
    return chain;
}

}  // namespace rsv
