#include "finipost/rng.hpp"

namespace finipost {

std::uint64_t Rng::below(std::uint64_t n) noexcept {
  // Lemire's nearly-divisionless reduction with rejection.
  std::uint64_t x = (*this)();
  __uint128_t m = static_cast<__uint128_t>(x) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      x = (*this)();
      m = static_cast<__uint128_t>(x) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

Rng derive_seed(std::uint64_t master, std::uint64_t replicate, std::uint64_t stream) noexcept {
  return Rng(mix64(mix64(mix64(master + Rng::kGolden) + replicate * Rng::kGolden) + stream * Rng::kGolden));
}

}  // namespace finipost
