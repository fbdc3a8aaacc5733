#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "rsv/benchmark.h"
#include "rsv/model.h"

namespace rsv::fixtures {

inline InducedChain benchmark_chain() {
    const auto file = benchmark::twenty_state_model();
    return induce_chain(file.model, file.policy);
}

inline std::vector<std::string> numbered_states(std::size_t n) {
    std::vector<std::string> names;
    for (std::size_t i = 1; i <= n; ++i) names.push_back(std::to_string(i));
    return names;
}

/// Random stochastic row; roughly a third of the entries are zeroed when `sparse`.
inline Row random_row(std::size_t n, std::mt19937_64& gen, bool sparse = true) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Row row(n);
    double sum = 0.0;
    for (auto& p : row) {
        p = (sparse && unit(gen) < 0.33) ? 0.0 : unit(gen);
        sum += p;
    }
    if (sum == 0.0) {
        row[0] = 1.0;
        return row;
    }
    for (auto& p : row) p /= sum;
    return row;
}

/// Random chain: state 0 unsafe, state 1 goal, the rest living (n >= 3).
inline InducedChain random_chain(std::size_t n, std::size_t horizon, std::mt19937_64& gen) {
    InducedChain chain;
    chain.partition = StatePartition(numbered_states(n), {1}, {0});
    chain.horizon = horizon;
    chain.rows.assign(horizon, std::vector<Row>(n));
    for (std::size_t t = 0; t < horizon; ++t)
        for (std::size_t x = 0; x < n; ++x)
            chain.rows[t][x] = chain.partition.is_terminal(x) ? absorbing_row(n, x) : random_row(n, gen);
    return chain;
}

/// Chain with the same living row for t <= horizon - 2 and a different final row.
inline InducedChain two_phase_chain(const StatePartition& partition, std::size_t horizon, const Row& early, const Row& last) {
    InducedChain chain{partition, horizon, {}};
    const auto n = partition.size();
    chain.rows.assign(horizon, std::vector<Row>(n));
    for (std::size_t t = 0; t < horizon; ++t)
        for (std::size_t x = 0; x < n; ++x)
            chain.rows[t][x] = partition.is_terminal(x) ? absorbing_row(n, x) : (t + 1 < horizon ? early : last);
    return chain;
}

}  // namespace rsv::fixtures
