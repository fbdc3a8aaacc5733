#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "rsv/metric.h"
#include "rsv/model.h"
#include "rsv/random.h"
#include "rsv/robust_dp.h"

namespace rsv {

/// One observed transition: at time t from state x, run `run` (1-based) moved to `successor`.
struct SampleRecord {
    std::uint32_t t = 0;
    std::uint32_t x = 0;
    std::uint32_t run = 0;
    std::uint32_t successor = 0;

    bool operator==(const SampleRecord&) const = default;
};

struct SampleLog {
    std::size_t n_runs = 0;
    std::uint64_t seed = 0;
    std::string generator;
    std::vector<SampleRecord> records;
};

enum class PerturbationMode { per_run_ball, adversarial_preset };

struct PerturbationSpec {
    double delta = 0.0;
    PerturbationMode mode = PerturbationMode::per_run_ball;
    std::uint64_t seed = 0;
    // adversarial_preset: run i uses presets[(i - 1) % presets.size()]; each within delta/2.
    std::vector<InducedChain> presets;
};

/**
 * Perturbed copy of a nominal row: Q = (1 - a) P + a e_r with r ~ P and
 * a ~ U[0, half_width]. TV(Q, P) = a (1 - P(r)) <= half_width and E[Q] = P.
 */
Row perturb_row(std::span<const double> nominal, double half_width, Rng& rng);

/// Kernel family used by run `run` (1-based); deterministic in (spec.seed, run).
InducedChain run_kernel(const InducedChain& nominal, const PerturbationSpec& spec, std::size_t run);

/**
 * For every run i in [1, n_runs] and every (t, x in H) draws one successor from the run-i row.
 * Records are ordered by (run, t, x). Deterministic given spec.seed, independent of `threads`.
 */
SampleLog simulate_samples(const InducedChain& nominal, const PerturbationSpec& spec, std::size_t n_runs,
                           unsigned threads = 1);

struct EmpiricalChain {
    InducedChain chain;
    std::size_t n_samples = 0;
    // counts[t][x][y]; empty for terminal x.
    std::vector<std::vector<std::vector<std::size_t>>> counts;
};

/// Counting estimator. Throws listing missing (t,x) pairs, unequal N or duplicate run indices.
EmpiricalChain empirical_chain(const SampleLog& log, const StatePartition& partition, std::size_t horizon);

/// Robust safety on the empirical rows with radius delta + rho(|X|, N, beta).
SafetyTable solve_empirical_robust_safety(const EmpiricalChain& empirical, double delta, double beta,
                                          unsigned threads = 1);

/// Line format: "#rsv-samples v1 N=<int> seed=<int>" then "t\tx\trun\ty" with state names.
void write_sample_log(std::ostream& out, const SampleLog& log, const StatePartition& partition);
SampleLog read_sample_log(std::istream& in, const StatePartition& partition);

/// chain_to_json plus n_samples and rho.
nlohmann::json empirical_chain_to_json(const EmpiricalChain& empirical, const AmbiguityRadius& radius);

}  // namespace rsv
