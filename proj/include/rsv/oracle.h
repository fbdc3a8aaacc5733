#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "rsv/model.h"
#include "rsv/random.h"

namespace rsv {

enum class HitKind { unsafe_first, goal_first, censored };

struct TrajectoryOutcome {
    HitKind hit = HitKind::censored;
    std::size_t hitting_time = 0;  // steps after the start time
};

/// Simulates the chain from (t, x) until U or E is entered or the horizon is reached.
TrajectoryOutcome simulate_trajectory(const InducedChain& chain, std::size_t t, std::size_t x, Rng& rng);

struct McEstimate {
    double estimate = 0.0;
    double half_width = 0.0;  // 95% normal approximation
    std::size_t trials = 0;
    std::size_t unsafe_first = 0;
    std::size_t goal_first = 0;
    std::size_t censored = 0;
};

/// Monte Carlo estimate of the nominal safety function. Throws when x is terminal or trials == 0.
McEstimate mc_safety(const InducedChain& chain, std::size_t t, std::size_t x, std::size_t trials, std::uint64_t seed);

inline constexpr double kMaxEnumeratedPaths = 1e7;

/// Exact unsafe-first probability by enumerating every trajectory from (t, x).
/// Throws when |X|^(horizon - t) exceeds kMaxEnumeratedPaths or x is terminal.
double exhaustive_safety(const InducedChain& chain, std::size_t t, std::size_t x);

/// Row-wise arithmetic mean of the per-run kernels.
InducedChain averaged_true_chain(std::span<const InducedChain> kernels);

struct BoundTrialConfig {
    double delta = 0.2;
    double beta = 0.05;
    std::size_t n_samples = 100000;
    std::size_t trials = 100;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

struct BoundTrialReport {
    std::size_t trials = 0;
    std::size_t violations = 0;           // trials where some (t, x) had empirical < reference - 1e-9
    std::size_t max_cell_violations = 0;  // worst single (t, x) count over trials
    double empirical_confidence = 1.0;
    double beta = 0.0;
    double rho = 0.0;
    std::vector<double> per_trial_max_gap;  // max over cells of reference - empirical
};

inline constexpr double kBoundViolationTolerance = 1e-9;

/**
 * Repeats: sample a log with per-run kernels inside delta/2 of the nominal, solve the
 * empirical robust table with radius delta + rho, and compare it with the robust table of
 * the nominal chain at radius delta.
 */
BoundTrialReport validate_bound(const InducedChain& nominal, const BoundTrialConfig& config);

nlohmann::json to_json(const BoundTrialReport& report);

}  // namespace rsv
