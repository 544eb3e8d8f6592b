#pragma once

// One configuration (x_1..x_n, y_1..y_n) of the pair ensemble together with
// the provenance needed to reproduce it: (seed, stream, replica) plus the
// method tag. Shared by the sampler (producers) and measure (consumers).

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ldpair {

struct SeedInfo {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::uint64_t replica = 0;
  std::string method;  // "exact_gaussian" or "mcmc"
};

struct Ensemble {
  int n = 0;
  std::vector<double> x;
  std::vector<double> y;
  SeedInfo seed_info;

  void validate() const {
    if (n <= 0 || x.size() != static_cast<std::size_t>(n) ||
        y.size() != static_cast<std::size_t>(n))
      throw std::invalid_argument("Ensemble: x and y must both have length n > 0");
  }
};

}  // namespace ldpair
