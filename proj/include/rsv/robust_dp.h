#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rsv/metric.h"
#include "rsv/model.h"

namespace rsv {

/// c(x, l): 1 when the successor l is unsafe. Independent of x under the Hamming metric.
double stage_cost(const StatePartition& partition, std::size_t x, std::size_t successor);

/// One-step mass the row places on U.
double kappa(std::span<const double> row, const StatePartition& partition);

/**
 * Backup payoffs w(l) = c(x,l) + continuation(l). `continuation` holds the next-step
 * safety values on living states; entries on terminal states are ignored (taken as 0),
 * so w is 1 on U and 0 on E.
 */
Row backup_payoffs(const StatePartition& partition, std::size_t x, std::span<const double> continuation);

/// Ground metric d(l, y) between state indices.
using GroundMetric = std::function<double(std::size_t, std::size_t)>;

double hamming(std::size_t l, std::size_t y);

/**
 * lambda * radius + sum_y max_l(w(l) - lambda d(l,y)) nominal(y), specialised to the Hamming
 * metric: the inner max is max(w(y), max_l w(l) - lambda). Throws on lambda < 0.
 */
double dual_objective(double lambda, std::span<const double> nominal, std::span<const double> payoffs, double radius);

/// Same objective for an arbitrary ground metric (O(|X|^2)).
double dual_objective(double lambda, std::span<const double> nominal, std::span<const double> payoffs, double radius,
                      const GroundMetric& metric);

struct BackupResult {
    double value = 0.0;
    double lambda_star = 0.0;
    Row worst_distribution;
    std::size_t breakpoints_evaluated = 0;
};

struct WorstCase {
    double value = 0.0;
    Row distribution;
};

/**
 * sup of E_Q[w] over TV(Q, nominal) <= radius by direct mass transport: drain the
 * lowest-payoff states (ascending payoff, then index) onto the lowest-index argmax.
 * Throws on radius outside [0,1].
 */
WorstCase worst_case_expectation_greedy(std::span<const double> nominal, std::span<const double> payoffs, double radius);

/**
 * Exact minimum of dual_objective over lambda >= 0. The objective is convex and piecewise
 * linear with kinks at max_l w(l) - w(y) for y in the support of `nominal`; every kink
 * and lambda = 0 are evaluated. worst_distribution comes from the greedy transport.
 * Throws on a non-stochastic nominal row or negative radius.
 */
BackupResult robust_backup(std::span<const double> nominal, std::span<const double> payoffs, double radius);

/// Safety backup at state x: builds the payoffs, solves the dual and clamps values
/// within 1e-9 of [0,1]. A larger excursion throws.
BackupResult robust_backup(const StatePartition& partition, std::span<const double> nominal,
                           std::span<const double> continuation, std::size_t x, double radius);

enum class Scheme { nominal, robust, empirical_robust };

std::string to_string(Scheme scheme);

/// values[t][x] for t in [0, horizon]. U rows are 1, E rows 0, H at the horizon 0.
struct SafetyTable {
    Scheme scheme = Scheme::nominal;
    AmbiguityRadius radius;
    StatePartition partition;
    std::vector<std::vector<double>> values;

    std::size_t horizon() const { return values.empty() ? 0 : values.size() - 1; }
    double value(std::size_t t, std::size_t x) const { return values.at(t).at(x); }
};

/**
 * Backward induction of the robust safety function with ball radius radius.total().
 * Backups at one t run on up to `threads` workers; results do not depend on the count.
 */
SafetyTable solve_robust_safety(const InducedChain& chain, const AmbiguityRadius& radius, Scheme scheme,
                                unsigned threads = 1);

/// Convenience overload: radius used as delta; scheme is nominal when radius == 0.
SafetyTable solve_robust_safety(const InducedChain& chain, double radius, unsigned threads = 1);

/**
 * Worst-case probability, over the same ambiguity ball, that a trajectory started at
 * (t, x) is still in H at the horizon. Returns the maximum over t in [0, horizon) and x in H.
 * Zero means the hitting-time bound holds for every admissible kernel.
 */
double robust_residual_living_mass(const InducedChain& chain, double radius);

struct SafetyVerdict {
    bool safe = true;
    double threshold = 0.0;
    double max_value = 0.0;
    std::size_t t = 0;
    std::size_t x = 0;
};

/// safe iff max over t < horizon, x in H of the table is <= p. Witness is the first argmax.
SafetyVerdict is_robust_p_safe(const SafetyTable& table, double p);

}  // namespace rsv
