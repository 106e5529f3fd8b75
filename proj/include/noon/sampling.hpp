#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace noon {

/// splitmix64 step; used to derive independent substreams from one master
/// seed so scan points can be evaluated in any order.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) {
  std::uint64_t s = seed ^ (value + 0x9e3779b97f4a7c15ULL + (seed << 6) +
                            (seed >> 2));
  return splitmix64(s);
}

inline std::uint64_t hash_string(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Engine for one (record, point) substream of a master seed.
inline std::mt19937_64 substream(std::uint64_t master_seed,
                                 const std::string& record_name,
                                 std::uint64_t point_index) {
  std::uint64_t s = hash_combine(master_seed, hash_string(record_name));
  s = hash_combine(s, point_index);
  return std::mt19937_64(s);
}

/// Poisson draw with mean lambda (counts per integration window).
inline long long sample_poisson(std::mt19937_64& rng, double lambda) {
  if (lambda <= 0.0) return 0;
  std::poisson_distribution<long long> dist(lambda);
  return dist(rng);
}

}  // namespace noon
