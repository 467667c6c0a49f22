#pragma once

#include "aki/rng.hpp"

#include <cstdint>
#include <vector>

namespace aki {

// Stratified k-fold assignment: per class, shuffled indices dealt round-robin,
// so fold class counts differ by at most one. Deterministic in (labels, k, seed).
std::vector<int> stratified_folds(const std::vector<std::uint8_t>& labels, int k,
                                  std::uint64_t seed);

} // namespace aki
