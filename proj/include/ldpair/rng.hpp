#pragma once

// Reproducible random streams. A splitmix64 mixer turns
// (master seed, stream id, replica index) into an independent engine seed,
// so replica r of experiment s can be replayed without storing state.
// Stream ids are fixed per use site (see `streams` below); replicas run
// concurrently with derived seeds and reduce deterministically.

#include <atomic>
#include <cstdint>
#include <functional>
#include <random>
#include <thread>
#include <vector>

namespace ldpair {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seed for (seed, stream, replica); distinct inputs give uncorrelated seeds.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream,
                                 std::uint64_t replica = 0) {
  std::uint64_t s = seed;
  std::uint64_t h = splitmix64(s);
  s = h ^ (stream * 0xd1b54a32d192ed03ULL + 0x9e3779b97f4a7c15ULL);
  h = splitmix64(s);
  s = h ^ (replica * 0x2545f4914f6cdd1dULL + 0x9e3779b97f4a7c15ULL);
  return splitmix64(s);
}

namespace streams {
// One id per independent consumer of randomness.
inline constexpr std::uint64_t sampler = 1;
inline constexpr std::uint64_t mcmc = 2;
inline constexpr std::uint64_t negdef = 3;
inline constexpr std::uint64_t varadhan_restart = 4;
inline constexpr std::uint64_t mc_mgf = 5;
inline constexpr std::uint64_t decay = 6;
inline constexpr std::uint64_t properties = 7;
}  // namespace streams

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed, std::uint64_t stream,
                          std::uint64_t replica = 0) {
  return Engine(derive_seed(seed, stream, replica));
}

// Runs fn(i) for i in [0, count) on up to `workers` threads (0 = hardware
// concurrency). fn(i) must touch only per-index state; with that, results
// do not depend on scheduling.
inline void parallel_for(std::size_t count, unsigned workers,
                         const std::function<void(std::size_t)>& fn) {
  if (workers == 0) workers = std::thread::hardware_concurrency();
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  workers = static_cast<unsigned>(
      std::min<std::size_t>(workers, count));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        fn(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace ldpair
