#pragma once

#include <cstdint>
#include <random>

namespace causalrisk {

using Rng = std::mt19937_64;

// Independent stream derived from (root seed, index, salt). Used so that every setting,
// dataset replication and pilot simulation owns its own generator regardless of schedule.
Rng make_stream(std::uint64_t root_seed, std::uint64_t index, std::uint64_t salt = 0);

}  // namespace causalrisk
