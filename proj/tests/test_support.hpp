#pragma once

// Shared helpers for the unit test suites: deterministic RNG plus the
// big-integer oracle bridges.

#include <random>

#include "big_oracle.hpp"

namespace zkimg::test {

inline std::mt19937_64 rng(uint64_t seed = 0x5eedf00d) { return std::mt19937_64(seed); }

}  // namespace zkimg::test
