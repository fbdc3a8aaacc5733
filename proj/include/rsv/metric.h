#pragma once

#include <cstddef>
#include <span>

#include "rsv/model.h"

namespace rsv {

/// Half the L1 distance between two distributions on the same ordered support.
double tv_distance(std::span<const double> mu, std::span<const double> nu);

/// 1-Wasserstein distance under the Hamming ground metric; equal to tv_distance.
double wasserstein_hamming(std::span<const double> mu, std::span<const double> nu);

/**
 * Radius of the ambiguity ball: delta covers run-to-run model variability, rho the
 * finite-sample error of the empirical rows, rho = (|X|/2) * epsilon.
 */
struct AmbiguityRadius {
    double delta = 0.0;
    double rho = 0.0;
    double epsilon = 0.0;
    std::size_t n_samples = 0;
    double beta = 0.0;
    std::size_t state_count = 0;

    double total() const { return delta + rho; }
};

/// epsilon = sqrt(ln(2|X|/beta) / (2N)), rho = |X|/2 * epsilon. Throws on beta outside (0,1) or N = 0.
AmbiguityRadius hoeffding_radius(std::size_t state_count, std::size_t n_samples, double beta, double delta = 0.0);

/// max over living x of tv_distance(a.row(t,x), b.row(t,x)).
double kernel_distance(const InducedChain& a, const InducedChain& b, std::size_t t);

/// max over t of kernel_distance.
double chain_distance(const InducedChain& a, const InducedChain& b);

}  // namespace rsv
