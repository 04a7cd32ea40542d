#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include <boost/random/bernoulli_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>

namespace incident {

// Engine used everywhere. mt19937_64 output is fixed by the standard and the
// boost distributions are implemented identically on every platform, so a
// seed reproduces the same stream regardless of toolchain.
using Rng = std::mt19937_64;

// Independent stream for a named sub-task: splitmix64 over
// (master seed, FNV-1a(tag)).
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag);

inline Rng make_rng(std::uint64_t master, std::string_view tag) {
  return Rng(derive_seed(master, tag));
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  boost::random::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(rng);
}

inline double uniform_unit(Rng& rng) {
  boost::random::uniform_01<double> dist;
  return dist(rng);
}

inline double normal_draw(Rng& rng, double mean, double sd) {
  if (sd == 0.0) return mean;
  boost::random::normal_distribution<double> dist(mean, sd);
  return dist(rng);
}

inline bool bernoulli_draw(Rng& rng, double p) {
  boost::random::bernoulli_distribution<double> dist(p);
  return dist(rng);
}

// Fisher-Yates shuffle; std::shuffle is implementation-defined.
template <typename T>
void shuffle(std::vector<T>& values, Rng& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    std::size_t j = uniform_index(rng, i);
    std::swap(values[i - 1], values[j]);
  }
}

// Uniform random subset of {0..n-1} of the given size, returned ascending.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count, Rng& rng);

}  // namespace incident
