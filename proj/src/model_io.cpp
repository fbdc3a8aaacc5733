#include "rsv/model_io.h"

#include <cmath>
#include <fstream>
#include <set>

#include "rsv/error.h"

namespace rsv {

using nlohmann::json;

namespace {

const std::set<std::string> kModelKeys = {"states", "goal", "unsafe", "actions", "horizon", "kernel", "policy"};

std::vector<std::string> string_list(const json& document, const char* key) {
    if (!document.contains(key)) throw Error(std::string("missing key '") + key + "'");
    const auto& node = document.at(key);
    if (!node.is_array()) throw Error(std::string("'") + key + "' must be an array of names");
    std::vector<std::string> names;
    for (const auto& item : node) {
        if (!item.is_string()) throw Error(std::string("'") + key + "' must contain strings");
        names.push_back(item.get<std::string>());
    }
    return names;
}

std::size_t index_of(const std::vector<std::string>& names, const std::string& name, const char* what) {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return i;
    throw Error(std::string("unknown ") + what + " '" + name + "'");
}

double probability(const json& value, const std::string& context) {
    if (!value.is_number()) throw Error("probability at " + context + " is not a number");
    return value.get<double>();
}

/// Distribution over `names` from {name: p}; unlisted names get 0.
Row parse_row(const json& node, const std::vector<std::string>& names, const char* what, const std::string& context) {
    if (!node.is_object()) throw Error("row at " + context + " must be an object");
    Row row(names.size(), 0.0);
    for (const auto& [key, value] : node.items()) row[index_of(names, key, what)] = probability(value, context);
    return row;
}

/// Renormalizes rows whose sum deviates from 1 by at most the tolerance. Others are left for validation.
void renormalize(Row& row) {
    double sum = 0.0;
    for (double p : row) sum += p;
    if (sum > 0.0 && sum != 1.0 && std::abs(sum - 1.0) <= kStochasticTolerance)
        for (double& p : row) p /= sum;
}

/// Expands {x: value} with the "*" wildcard into one entry per state it applies to.
template <typename Fn>
void for_each_state(const json& node, const StatePartition& partition, const std::string& context, Fn&& apply) {
    if (!node.is_object()) throw Error(context + " must be an object keyed by state");
    std::vector<bool> explicitly(partition.size(), false);
    for (const auto& [key, value] : node.items()) {
        if (key == "*") continue;
        auto x = partition.find(key);
        if (!x) throw Error("unknown state '" + key + "' in " + context);
        explicitly[*x] = true;
        apply(*x, value);
    }
    if (node.contains("*"))
        for (auto x : partition.living())
            if (!explicitly[x]) apply(x, node.at("*"));
}

using KernelStep = std::vector<std::vector<Row>>;

KernelStep parse_kernel_step(const json& node, const StatePartition& partition, const std::vector<std::string>& actions,
                             std::size_t t) {
    KernelStep step(partition.size());
    const auto context = "kernel step t=" + std::to_string(t);
    for_each_state(node, partition, context, [&](std::size_t x, const json& byAction) {
        if (!byAction.is_object()) throw Error(context + ", state '" + partition.name(x) + "' must map actions to rows");
        step[x].assign(actions.size(), Row{});
        for (const auto& [action, rowNode] : byAction.items()) {
            auto a = index_of(actions, action, "action");
            auto row = parse_row(rowNode, partition.names(), "state",
                                 "(t=" + std::to_string(t) + ", x=" + partition.name(x) + ", a=" + action + ")");
            renormalize(row);
            step[x][a] = std::move(row);
        }
    });
    return step;
}

using PolicyStep = std::vector<Row>;

void apply_policy_step(PolicyStep& step, const json& node, const StatePartition& partition,
                       const std::vector<std::string>& actions, std::size_t t) {
    const auto context = "policy step t=" + std::to_string(t);
    for_each_state(node, partition, context, [&](std::size_t x, const json& rowNode) {
        if (partition.is_terminal(x)) throw Error(context + ": policy given for terminal state '" + partition.name(x) + "'");
        auto row = parse_row(rowNode, actions, "action", "(t=" + std::to_string(t) + ", x=" + partition.name(x) + ")");
        renormalize(row);
        step[x] = std::move(row);
    });
}

template <typename Step, typename ParseStep>
std::vector<Step> parse_timed(const json& node, std::size_t horizon, const char* what, ParseStep&& parseStep) {
    if (!node.is_object()) throw Error(std::string("'") + what + "' must be an object");
    if (node.contains("stationary") && node.size() == 1) {
        std::vector<Step> steps;
        for (std::size_t t = 0; t < horizon; ++t) steps.push_back(parseStep(node.at("stationary"), t));
        return steps;
    }
    if (node.contains("per_t") && node.size() == 1) {
        const auto& list = node.at("per_t");
        if (!list.is_array() || list.size() != horizon)
            throw Error(std::string("'") + what + ".per_t' must list exactly horizon = " + std::to_string(horizon) + " steps");
        std::vector<Step> steps;
        for (std::size_t t = 0; t < horizon; ++t) steps.push_back(parseStep(list[t], t));
        return steps;
    }
    throw Error(std::string("'") + what + "' must have exactly one of 'stationary' or 'per_t'");
}

std::vector<PolicyStep> parse_policy(const json& node, const StatePartition& partition,
                                     const std::vector<std::string>& actions, std::size_t horizon) {
    if (node.is_object() && node.contains("default")) {
        for (const auto& [key, _] : node.items())
            if (key != "default" && key != "overrides") throw Error("unknown key '" + key + "' in policy");
        std::vector<PolicyStep> steps(horizon, PolicyStep(partition.size()));
        for (std::size_t t = 0; t < horizon; ++t) apply_policy_step(steps[t], node.at("default"), partition, actions, t);
        if (node.contains("overrides")) {
            const auto& overrides = node.at("overrides");
            if (!overrides.is_object()) throw Error("'policy.overrides' must be an object keyed by time step");
            for (const auto& [key, stepNode] : overrides.items()) {
                std::size_t t = 0;
                try {
                    std::size_t used = 0;
                    t = std::stoul(key, &used);
                    if (used != key.size()) throw std::invalid_argument(key);
                } catch (const std::exception&) {
                    throw Error("policy override key '" + key + "' is not a time step");
                }
                if (t >= horizon) throw Error("policy override t=" + key + " is beyond the horizon");
                apply_policy_step(steps[t], stepNode, partition, actions, t);
            }
        }
        return steps;
    }
    return parse_timed<PolicyStep>(node, horizon, "policy", [&](const json& stepNode, std::size_t t) {
        PolicyStep step(partition.size());
        apply_policy_step(step, stepNode, partition, actions, t);
        return step;
    });
}

std::string join(const std::vector<Violation>& violations) {
    std::string text;
    for (const auto& v : violations) text += "\n  " + to_string(v);
    return text;
}

json state_names(const StatePartition& partition, const std::vector<std::size_t>& indices) {
    json list = json::array();
    for (auto i : indices) list.push_back(partition.name(i));
    return list;
}

}  // namespace

ModelFile parse_model(const json& document) {
    if (!document.is_object()) throw Error("model document must be a JSON object");
    for (const auto& [key, _] : document.items())
        if (!kModelKeys.contains(key)) throw Error("unknown key '" + key + "' in model document");
    for (const auto& key : kModelKeys)
        if (!document.contains(key)) throw Error("missing key '" + key + "'");

    auto partition = StatePartition::from_names(string_list(document, "states"), string_list(document, "goal"),
                                                string_list(document, "unsafe"));
    auto actions = string_list(document, "actions");
    const auto& horizonNode = document.at("horizon");
    if (!horizonNode.is_number_integer() || horizonNode.get<long long>() <= 0)
        throw Error("'horizon' must be a positive integer");
    const auto horizon = horizonNode.get<std::size_t>();

    ModelFile file;
    file.model.partition = partition;
    file.model.actions = actions;
    file.model.horizon = horizon;
    file.model.kernel = parse_timed<KernelStep>(document.at("kernel"), horizon, "kernel", [&](const json& node, std::size_t t) {
        return parse_kernel_step(node, partition, actions, t);
    });
    file.policy.rules = parse_policy(document.at("policy"), partition, actions, horizon);

    if (auto problems = validate_model(file.model); !problems.empty()) throw Error("invalid model:" + join(problems));
    if (auto problems = validate_policy(file.model, file.policy); !problems.empty())
        throw Error("invalid policy:" + join(problems));
    return file;
}

ModelFile load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open model file " + path.string());
    json document;
    try {
        document = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error("malformed JSON in " + path.string() + ": " + e.what());
    }
    return parse_model(document);
}

json chain_to_json(const InducedChain& chain) {
    const auto& partition = chain.partition;
    json steps = json::array();
    for (std::size_t t = 0; t < chain.horizon; ++t) {
        json step = json::object();
        for (auto x : partition.living()) {
            json row = json::object();
            for (std::size_t y = 0; y < partition.size(); ++y)
                if (chain.rows[t][x][y] != 0.0) row[partition.name(y)] = chain.rows[t][x][y];
            step[partition.name(x)] = std::move(row);
        }
        steps.push_back(std::move(step));
    }
    return json{{"states", partition.names()},
                {"goal", state_names(partition, partition.goal())},
                {"unsafe", state_names(partition, partition.unsafe())},
                {"horizon", chain.horizon},
                {"chain", {{"per_t", std::move(steps)}}}};
}

InducedChain chain_from_json(const json& document) {
    if (!document.is_object()) throw Error("chain document must be a JSON object");
    for (const char* key : {"states", "goal", "unsafe", "horizon", "chain"})
        if (!document.contains(key)) throw Error(std::string("missing key '") + key + "'");
    auto partition = StatePartition::from_names(string_list(document, "states"), string_list(document, "goal"),
                                                string_list(document, "unsafe"));
    const auto horizon = document.at("horizon").get<std::size_t>();
    InducedChain chain{partition, horizon, {}};
    chain.rows = parse_timed<std::vector<Row>>(document.at("chain"), horizon, "chain", [&](const json& node, std::size_t t) {
        std::vector<Row> step(partition.size());
        for (std::size_t x = 0; x < partition.size(); ++x)
            if (partition.is_terminal(x)) step[x] = absorbing_row(partition.size(), x);
        for_each_state(node, partition, "chain step t=" + std::to_string(t), [&](std::size_t x, const json& rowNode) {
            if (partition.is_terminal(x)) throw Error("chain row given for terminal state '" + partition.name(x) + "'");
            step[x] = parse_row(rowNode, partition.names(), "state",
                                "(t=" + std::to_string(t) + ", x=" + partition.name(x) + ")");
            renormalize(step[x]);
        });
        return step;
    });
    if (auto problems = validate_chain(chain); !problems.empty()) throw Error("invalid chain:" + join(problems));
    return chain;
}

}  // namespace rsv
