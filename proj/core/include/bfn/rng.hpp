#ifndef BFN_RNG_HPP
#define BFN_RNG_HPP

#include <cstdint>
#include <random>

namespace bfn {

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

// Derives an independent child seed; callers own stream partitioning.
inline std::uint64_t split_seed(Rng& rng) { return rng(); }

inline double draw_normal(Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

inline double draw_uniform(Rng& rng) {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

}  // namespace bfn

#endif
