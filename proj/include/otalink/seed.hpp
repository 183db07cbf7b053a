#ifndef OTALINK_SEED_HPP
#define OTALINK_SEED_HPP

#include <cstdint>
#include <initializer_list>

namespace otalink {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stable seed for a tuple of indices. Independent of evaluation order, so
/// work units can run in any order or in parallel.
inline constexpr std::uint64_t derive_seed(std::uint64_t base,
                                           std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = splitmix64(base);
  for (auto k : keys) h = splitmix64(h ^ splitmix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

// Stream tags keep component draws apart when they share indices.
namespace stream {
inline constexpr std::uint64_t payload = 0x7061796c6f6164ULL;
inline constexpr std::uint64_t pilot = 0x70696c6f74ULL;
inline constexpr std::uint64_t noise = 0x6e6f697365ULL;
inline constexpr std::uint64_t interferer = 0x696e7466ULL;
inline constexpr std::uint64_t channel = 0x6368616eULL;
inline constexpr std::uint64_t offset = 0x6f6666736574ULL;
}  // namespace stream

}  // namespace otalink

#endif  // OTALINK_SEED_HPP
