#ifndef UNIQCERT_RNG_HPP
#define UNIQCERT_RNG_HPP

#include <cstdint>

namespace uniqcert {

/// SplitMix64 finalizer. Statelessly mixes one 64-bit word.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Counter-based generator: the value at (seed, stream, counter) is a pure
/// function of its arguments, so parallel consumers drawing disjoint
/// (stream, counter) pairs reproduce the serial sequence bit for bit.
inline std::uint64_t random_word(std::uint64_t seed, std::uint64_t stream,
                                 std::uint64_t counter) {
  return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ counter);
}

/// Uniform draw in [lo, hi). Uses the top 53 bits, so every result is an
/// exactly representable double in [0, 1) before affine mapping.
inline double uniform(std::uint64_t seed, std::uint64_t stream,
                      std::uint64_t counter, double lo, double hi) {
  const double unit =
      static_cast<double>(random_word(seed, stream, counter) >> 11) *
      0x1.0p-53;
  return lo + (hi - lo) * unit;
}

}  // namespace uniqcert

#endif  // UNIQCERT_RNG_HPP
