#include "rsv/robust_dp.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rsv/error.h"
#include "rsv/parallel.h"

namespace rsv {

namespace {

constexpr double kRangeTolerance = 1e-9;

void require_same_size(std::span<const double> nominal, std::span<const double> payoffs) {
    if (nominal.size() != payoffs.size())
        throw Error("nominal row and payoffs differ in length (" + std::to_string(nominal.size()) + " vs " +
                    std::to_string(payoffs.size()) + ")");
    if (nominal.empty()) throw Error("empty distribution");
}

double max_payoff(std::span<const double> payoffs) { return *std::max_element(payoffs.begin(), payoffs.end()); }

}  // namespace

double stage_cost(const StatePartition& partition, std::size_t /*x*/, std::size_t successor) {
    return partition.is_unsafe(successor) ? 1.0 : 0.0;
}

double kappa(std::span<const double> row, const StatePartition& partition) {
    double mass = 0.0;
    for (auto u : partition.unsafe()) mass += row[u];
    return mass;
}

Row backup_payoffs(const StatePartition& partition, std::size_t x, std::span<const double> continuation) {
    if (continuation.size() != partition.size()) throw Error("continuation values do not cover every state");
    Row payoffs(partition.size());
    for (std::size_t l = 0; l < partition.size(); ++l)
        payoffs[l] = stage_cost(partition, x, l) + (partition.is_living(l) ? continuation[l] : 0.0);
    return payoffs;
}

double hamming(std::size_t l, std::size_t y) { return l == y ? 0.0 : 1.0; }

double dual_objective(double lambda, std::span<const double> nominal, std::span<const double> payoffs, double radius) {
    if (!(lambda >= 0.0)) throw Error("dual multiplier must be nonnegative");
    require_same_size(nominal, payoffs);
    const double top = max_payoff(payoffs);
    double value = lambda * radius;
    for (std::size_t y = 0; y < nominal.size(); ++y) value += std::max(payoffs[y], top - lambda) * nominal[y];
    return value;
}

double dual_objective(double lambda, std::span<const double> nominal, std::span<const double> payoffs, double radius,
                      const GroundMetric& metric) {
    if (!(lambda >= 0.0)) throw Error("dual multiplier must be nonnegative");
    require_same_size(nominal, payoffs);
    double value = lambda * radius;
    for (std::size_t y = 0; y < nominal.size(); ++y) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t l = 0; l < payoffs.size(); ++l) best = std::max(best, payoffs[l] - lambda * metric(l, y));
        value += best * nominal[y];
    }
    return value;
}

WorstCase worst_case_expectation_greedy(std::span<const double> nominal, std::span<const double> payoffs, double radius) {
    if (!(radius >= 0.0 && radius <= 1.0)) throw Error("transport radius must lie in [0, 1]");
    require_same_size(nominal, payoffs);
    if (!is_stochastic(nominal)) throw Error("nominal row is not a probability distribution");

    const auto n = nominal.size();
    const double top = max_payoff(payoffs);
    std::size_t receiver = 0;
    while (payoffs[receiver] != top) ++receiver;

    std::vector<std::size_t> donors;
    double movable = 0.0;
    for (std::size_t y = 0; y < n; ++y) {
        if (payoffs[y] < top) {
            donors.push_back(y);
            movable += nominal[y];
        }
    }
    std::stable_sort(donors.begin(), donors.end(), [&](std::size_t a, std::size_t b) { return payoffs[a] < payoffs[b]; });

    WorstCase result{0.0, Row(nominal.begin(), nominal.end())};
    double remaining = std::min(radius, movable);
    const double moved = remaining;
    for (auto y : donors) {
        if (remaining <= 0.0) break;
        const double take = std::min(remaining, result.distribution[y]);
        result.distribution[y] -= take;
        remaining -= take;
    }
    result.distribution[receiver] += moved - std::max(remaining, 0.0);
    for (std::size_t y = 0; y < n; ++y) result.value += payoffs[y] * result.distribution[y];
    return result;
}

BackupResult robust_backup(std::span<const double> nominal, std::span<const double> payoffs, double radius) {
    require_same_size(nominal, payoffs);
    if (!(radius >= 0.0) || !std::isfinite(radius)) throw Error("ambiguity radius must be a nonnegative number");
    if (!is_stochastic(nominal)) throw Error("nominal row is not a probability distribution");

    const double top = max_payoff(payoffs);
    std::vector<double> kinks = {0.0};
    for (std::size_t y = 0; y < nominal.size(); ++y)
        if (nominal[y] > 0.0) kinks.push_back(top - payoffs[y]);
    std::sort(kinks.begin(), kinks.end());
    kinks.erase(std::unique(kinks.begin(), kinks.end()), kinks.end());

    BackupResult result;
    result.value = std::numeric_limits<double>::infinity();
    for (double lambda : kinks) {
        const double value = dual_objective(lambda, nominal, payoffs, radius);
        if (value < result.value) {
            result.value = value;
            result.lambda_star = lambda;
        }
    }
    result.breakpoints_evaluated = kinks.size();
    result.worst_distribution = worst_case_expectation_greedy(nominal, payoffs, std::min(radius, 1.0)).distribution;
    return result;
}

BackupResult robust_backup(const StatePartition& partition, std::span<const double> nominal,
                           std::span<const double> continuation, std::size_t x, double radius) {
    auto result = robust_backup(nominal, backup_payoffs(partition, x, continuation), radius);
    if (result.value < -kRangeTolerance || result.value > 1.0 + kRangeTolerance)
        throw Error("robust backup left [0, 1]: " + std::to_string(result.value));
    result.value = std::clamp(result.value, 0.0, 1.0);
    return result;
}

std::string to_string(Scheme scheme) {
    switch (scheme) {
        case Scheme::nominal:
            return "nominal";
        case Scheme::robust:
            return "robust";
        case Scheme::empirical_robust:
            return "empirical-robust";
    }
    return "unknown";
}

namespace {

/// Backward induction over the chain. Living payoff is the next-step value, U contributes
/// `unsafe_payoff`, E contributes 0, and living states at the horizon hold `horizon_value`.
std::vector<std::vector<double>> backward_induction(const InducedChain& chain, double radius, double unsafe_payoff,
                                                    double horizon_value, unsigned threads) {
    if (auto problems = validate_chain(chain); !problems.empty()) throw Error("invalid chain: " + to_string(problems.front()));
    if (!(radius >= 0.0) || !std::isfinite(radius)) throw Error("ambiguity radius must be a nonnegative number");

    const auto& partition = chain.partition;
    const auto n = partition.size();
    std::vector<std::vector<double>> values(chain.horizon + 1, std::vector<double>(n, 0.0));
    for (auto x : partition.living()) values[chain.horizon][x] = horizon_value;

    const auto& living = partition.living();
    for (std::size_t step = chain.horizon; step-- > 0;) {
        Row payoffs(n, 0.0);
        for (std::size_t l = 0; l < n; ++l) {
            if (partition.is_unsafe(l))
                payoffs[l] = unsafe_payoff;
            else if (partition.is_living(l))
                payoffs[l] = values[step + 1][l];
        }
        auto& current = values[step];
        parallel_for(living.size(), threads, [&](std::size_t i) {
            const auto x = living[i];
            try {
                current[x] = robust_backup(chain.row(step, x), payoffs, radius).value;
            } catch (const Error& e) {
                throw Error("backup at (t=" + std::to_string(step) + ", x=" + partition.name(x) + "): " + e.what());
            }
        });
    }
    return values;
}

}  // namespace

SafetyTable solve_robust_safety(const InducedChain& chain, const AmbiguityRadius& radius, Scheme scheme, unsigned threads) {
    SafetyTable table;
    table.scheme = scheme;
    table.radius = radius;
    table.partition = chain.partition;
    table.values = backward_induction(chain, radius.total(), 1.0, 0.0, threads);

    for (auto& row : table.values) {
        for (auto x : chain.partition.unsafe()) row[x] = 1.0;
        for (auto x : chain.partition.living()) {
            double& v = row[x];
            if (v < -kRangeTolerance || v > 1.0 + kRangeTolerance)
                throw Error("robust safety value left [0, 1]: " + std::to_string(v));
            v = std::clamp(v, 0.0, 1.0);
        }
    }
    return table;
}

SafetyTable solve_robust_safety(const InducedChain& chain, double radius, unsigned threads) {
    AmbiguityRadius ball;
    ball.delta = radius;
    ball.state_count = chain.state_count();
    return solve_robust_safety(chain, ball, radius == 0.0 ? Scheme::nominal : Scheme::robust, threads);
}

double robust_residual_living_mass(const InducedChain& chain, double radius) {
    const auto values = backward_induction(chain, radius, 0.0, 1.0, 1);
    double worst = 0.0;
    for (std::size_t t = 0; t < chain.horizon; ++t)
        for (auto x : chain.partition.living()) worst = std::max(worst, values[t][x]);
    return worst;
}

SafetyVerdict is_robust_p_safe(const SafetyTable& table, double p) {
    SafetyVerdict verdict;
    verdict.threshold = p;
    verdict.max_value = -1.0;
    for (std::size_t t = 0; t < table.horizon(); ++t) {
        for (auto x : table.partition.living()) {
            if (table.values[t][x] > verdict.max_value) {
                verdict.max_value = table.values[t][x];
                verdict.t = t;
                verdict.x = x;
            }
        }
    }
    if (verdict.max_value < 0.0) verdict.max_value = 0.0;
    verdict.safe = verdict.max_value <= p;
    return verdict;
}

}  // namespace rsv
