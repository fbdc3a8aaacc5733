#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "rsv/model.h"

namespace rsv {

struct ModelFile {
    ImdpModel model;
    Policy policy;
};

/**
 * Parses the JSON model document.
 *
 * Top-level keys: states, goal, unsafe, actions, horizon, kernel, policy. Unknown keys are
 * rejected. `kernel` is either {"stationary": {x: {a: {y: p}}}} or {"per_t": [{x: {a: {y: p}}}, ...]};
 * `policy` is {"stationary": {x: {a: p}}}, {"per_t": [...]} or {"default": {...}, "overrides": {"t": {...}}}.
 * The key "*" in a state map stands for every living state not listed explicitly.
 *
 * Rows whose sum is within kStochasticTolerance of 1 are renormalized; larger deviations,
 * negative entries and any validate_model/validate_policy violation throw rsv::Error.
 */
ModelFile parse_model(const nlohmann::json& document);
ModelFile load_model(const std::filesystem::path& path);

/// Serializes the policy-induced chain ({states, goal, unsafe, horizon, chain: {per_t: [...]}}).
nlohmann::json chain_to_json(const InducedChain& chain);

/// Inverse of chain_to_json (extra keys such as n_samples/rho are ignored).
InducedChain chain_from_json(const nlohmann::json& document);

}  // namespace rsv
