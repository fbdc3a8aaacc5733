#include "rsv/metric.h"

#include <algorithm>
#include <cmath>

#include "rsv/error.h"

namespace rsv {

double tv_distance(std::span<const double> mu, std::span<const double> nu) {
    if (mu.size() != nu.size())
        throw Error("tv_distance: length mismatch (" + std::to_string(mu.size()) + " vs " + std::to_string(nu.size()) + ")");
    double l1 = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) l1 += std::abs(mu[i] - nu[i]);
    return std::min(1.0, 0.5 * l1);
}

double wasserstein_hamming(std::span<const double> mu, std::span<const double> nu) { return tv_distance(mu, nu); }

AmbiguityRadius hoeffding_radius(std::size_t state_count, std::size_t n_samples, double beta, double delta) {
    if (!(beta > 0.0 && beta < 1.0)) throw Error("confidence parameter beta must lie in (0, 1)");
    if (n_samples == 0) throw Error("number of samples must be positive");
    if (state_count == 0) throw Error("state count must be positive");
    if (!(delta >= 0.0)) throw Error("delta must be nonnegative");

    AmbiguityRadius radius;
    const auto states = static_cast<double>(state_count);
    radius.delta = delta;
    radius.epsilon = std::sqrt(std::log(2.0 * states / beta) / (2.0 * static_cast<double>(n_samples)));
    radius.rho = 0.5 * states * radius.epsilon;
    radius.n_samples = n_samples;
    radius.beta = beta;
    radius.state_count = state_count;
    return radius;
}

double kernel_distance(const InducedChain& a, const InducedChain& b, std::size_t t) {
    if (a.state_count() != b.state_count() || a.partition.living() != b.partition.living())
        throw Error("kernel_distance: chains have different state spaces");
    if (t >= a.rows.size() || t >= b.rows.size()) throw Error("kernel_distance: time index out of range");
    double distance = 0.0;
    for (auto x : a.partition.living()) distance = std::max(distance, tv_distance(a.row(t, x), b.row(t, x)));
    return distance;
}

double chain_distance(const InducedChain& a, const InducedChain& b) {
    if (a.horizon != b.horizon) throw Error("chain_distance: horizons differ");
    double distance = 0.0;
    for (std::size_t t = 0; t < a.horizon; ++t) distance = std::max(distance, kernel_distance(a, b, t));
    return distance;
}

}  // namespace rsv
