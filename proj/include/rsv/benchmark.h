#pragma once

#include <array>

#include "rsv/model_io.h"

namespace rsv::benchmark {

/**
 * Twenty-state reach-avoid example: H = {1..10}, U = {11,12}, E = {13..20},
 * actions {a_H, a_U, a_E} moving uniformly into H, U or E, horizon 10.
 * The policy plays (0.4, 0.3, 0.3) for t <= 8 and (0, 0.5, 0.5) at t = 9.
 */
ModelFile twenty_state_model();

inline constexpr double kDelta = 0.2;
inline constexpr double kBeta = 0.05;
inline constexpr std::size_t kSampleCount = 100000;

/// Published reference tables, rows t = 0..9, columns states 1..4.
using ReferenceTable = std::array<std::array<double, 4>, 10>;

/// Robust safety function on the exact nominal chain with radius delta.
extern const ReferenceTable kRobustNominalTable;
/// Empirical robust safety function with radius delta + rho.
extern const ReferenceTable kEmpiricalRobustTable;
/// Empirical rows treated as exact, radius delta only.
extern const ReferenceTable kEmpiricalDeltaOnlyTable;

}  // namespace rsv::benchmark
