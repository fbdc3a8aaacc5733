#include "rsv/oracle.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rsv/data.h"
#include "rsv/error.h"
#include "rsv/metric.h"
#include "rsv/parallel.h"
#include "rsv/robust_dp.h"

namespace rsv {

namespace {

constexpr std::uint64_t kTrialStream = 2;
constexpr double kNormalQuantile95 = 1.959963984540054;

void require_living_start(const InducedChain& chain, std::size_t t, std::size_t x) {
    if (x >= chain.state_count()) throw Error("start state out of range");
    if (!chain.partition.is_living(x))
        throw Error("start state '" + chain.partition.name(x) + "' is terminal; its safety value is definitional");
    if (t >= chain.horizon) throw Error("start time must be below the horizon");
}

double unsafe_first_paths(const InducedChain& chain, std::size_t t, std::size_t x, double pathProbability) {
    if (t == chain.horizon) return 0.0;
    double total = 0.0;
    const auto& row = chain.row(t, x);
    for (std::size_t y = 0; y < row.size(); ++y) {
        if (row[y] == 0.0) continue;
        const double p = pathProbability * row[y];
        if (chain.partition.is_unsafe(y))
            total += p;
        else if (chain.partition.is_living(y))
            total += unsafe_first_paths(chain, t + 1, y, p);
    }
    return total;
}

}  // namespace

TrajectoryOutcome simulate_trajectory(const InducedChain& chain, std::size_t t, std::size_t x, Rng& rng) {
    const auto& partition = chain.partition;
    if (partition.is_unsafe(x)) return {HitKind::unsafe_first, 0};
    if (partition.is_goal(x)) return {HitKind::goal_first, 0};
    std::size_t state = x;
    for (std::size_t k = t; k < chain.horizon; ++k) {
        state = rng.categorical(chain.row(k, state));
        if (partition.is_unsafe(state)) return {HitKind::unsafe_first, k + 1 - t};
        if (partition.is_goal(state)) return {HitKind::goal_first, k + 1 - t};
    }
    return {HitKind::censored, chain.horizon - t};
}

McEstimate mc_safety(const InducedChain& chain, std::size_t t, std::size_t x, std::size_t trials, std::uint64_t seed) {
    require_living_start(chain, t, x);
    if (trials == 0) throw Error("at least one trial is required");
    if (auto problems = validate_chain(chain); !problems.empty()) throw Error("invalid chain: " + to_string(problems.front()));

    McEstimate result;
    result.trials = trials;
    Rng rng(seed);
    for (std::size_t i = 0; i < trials; ++i) {
        switch (simulate_trajectory(chain, t, x, rng).hit) {
            case HitKind::unsafe_first:
                ++result.unsafe_first;
                break;
            case HitKind::goal_first:
                ++result.goal_first;
                break;
            case HitKind::censored:
                ++result.censored;
                break;
        }
    }
    const auto n = static_cast<double>(trials);
    result.estimate = static_cast<double>(result.unsafe_first) / n;
    result.half_width = kNormalQuantile95 * std::sqrt(result.estimate * (1.0 - result.estimate) / n);
    return result;
}

double exhaustive_safety(const InducedChain& chain, std::size_t t, std::size_t x) {
    require_living_start(chain, t, x);
    const double paths = std::pow(static_cast<double>(chain.state_count()), static_cast<double>(chain.horizon - t));
    if (paths > kMaxEnumeratedPaths) throw Error("instance too large for path enumeration");
    return unsafe_first_paths(chain, t, x, 1.0);
}

InducedChain averaged_true_chain(std::span<const InducedChain> kernels) {
    if (kernels.empty()) throw Error("no kernels to average");
    const auto& first = kernels.front();
    for (const auto& kernel : kernels) {
        if (kernel.partition != first.partition || kernel.horizon != first.horizon || kernel.rows.size() != first.rows.size())
            throw Error("averaged_true_chain: kernels differ in shape");
        for (std::size_t t = 0; t < kernel.rows.size(); ++t) {
            if (kernel.rows[t].size() != first.rows[t].size()) throw Error("averaged_true_chain: kernels differ in shape");
            for (std::size_t x = 0; x < kernel.rows[t].size(); ++x)
                if (kernel.rows[t][x].size() != first.rows[t][x].size())
                    throw Error("averaged_true_chain: kernels differ in shape");
        }
    }
    InducedChain mean = first;
    const auto count = static_cast<double>(kernels.size());
    for (std::size_t t = 0; t < mean.rows.size(); ++t) {
        for (std::size_t x = 0; x < mean.rows[t].size(); ++x) {
            for (std::size_t y = 0; y < mean.rows[t][x].size(); ++y) {
                double sum = 0.0;
                for (const auto& kernel : kernels) sum += kernel.rows[t][x][y];
                mean.rows[t][x][y] = sum / count;
            }
        }
    }
    return mean;
}

BoundTrialReport validate_bound(const InducedChain& nominal, const BoundTrialConfig& config) {
    if (config.trials == 0) throw Error("at least one trial is required");
    if (!(config.delta >= 0.0 && config.delta <= 1.0)) throw Error("delta must lie in [0, 1]");
    const auto radius = hoeffding_radius(nominal.state_count(), config.n_samples, config.beta, config.delta);

    const auto reference = solve_robust_safety(nominal, config.delta);
    const auto& living = nominal.partition.living();
    const std::size_t cells = nominal.horizon * living.size();

    std::vector<double> gaps(config.trials, 0.0);
    std::vector<std::vector<bool>> violated(config.trials, std::vector<bool>(cells, false));
    parallel_for(config.trials, config.threads, [&](std::size_t trial) {
        PerturbationSpec spec;
        spec.delta = config.delta;
        spec.mode = PerturbationMode::per_run_ball;
        spec.seed = mix_seed(config.seed, trial, kTrialStream);
        const auto log = simulate_samples(nominal, spec, config.n_samples);
        const auto empirical = empirical_chain(log, nominal.partition, nominal.horizon);
        const auto table = solve_empirical_robust_safety(empirical, config.delta, config.beta);

        double worst = -std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < nominal.horizon; ++t) {
            for (std::size_t i = 0; i < living.size(); ++i) {
                const double gap = reference.value(t, living[i]) - table.value(t, living[i]);
                worst = std::max(worst, gap);
                if (gap > kBoundViolationTolerance) violated[trial][t * living.size() + i] = true;
            }
        }
        gaps[trial] = worst;
    });

    BoundTrialReport report;
    report.trials = config.trials;
    report.beta = config.beta;
    report.rho = radius.rho;
    report.per_trial_max_gap = gaps;
    std::vector<std::size_t> perCell(cells, 0);
    for (std::size_t trial = 0; trial < config.trials; ++trial) {
        bool any = false;
        for (std::size_t c = 0; c < cells; ++c) {
            if (violated[trial][c]) {
                any = true;
                ++perCell[c];
            }
        }
        if (any) ++report.violations;
    }
    report.max_cell_violations = cells == 0 ? 0 : *std::max_element(perCell.begin(), perCell.end());
    report.empirical_confidence = 1.0 - static_cast<double>(report.violations) / static_cast<double>(report.trials);
    return report;
}

nlohmann::json to_json(const BoundTrialReport& report) {
    return nlohmann::json{{"trials", report.trials},
                          {"violations", report.violations},
                          {"max_cell_violations", report.max_cell_violations},
                          {"empirical_confidence", report.empirical_confidence},
                          {"beta", report.beta},
                          {"rho", report.rho},
                          {"per_trial_max_gap", report.per_trial_max_gap}};
}

}  // namespace rsv
