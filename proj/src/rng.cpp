#include "causalrisk/rng.hpp"

namespace causalrisk {

Rng make_stream(std::uint64_t root_seed, std::uint64_t index, std::uint64_t salt) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(root_seed), hi(root_seed), lo(index), hi(index), lo(salt), hi(salt)};
  return Rng(seq);
}

}  // namespace causalrisk
