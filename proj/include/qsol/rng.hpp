#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace qsol {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). A pure
/// function of (counter, key): no state, so any stream can be regenerated
/// from its coordinates alone.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key);
};

/// Map 64 random bits to a double in the open interval (0, 1).
inline double to_open_unit(std::uint64_t bits) {
  return (double(bits >> 12) + 0.5) * 0x1.0p-52;
}

/// Fill `out` with standard normal variates drawn from the stream addressed by
/// (seed; counter words c1, c2, c3). Word c0 enumerates blocks within the stream.
void fill_standard_normal(std::uint64_t seed, std::uint32_t c1, std::uint32_t c2,
                          std::uint32_t c3, std::span<double> out);

}  // namespace qsol
