#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace rlab {

// Finalizer of the splitmix64 generator. Used to turn structured ids
// (master seed + stream index) into well mixed engine seeds.
std::uint64_t mix64(std::uint64_t x);

// Seed for an independent stream derived from a master seed. Streams with
// different ids never share an engine state.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

// Deterministic random source. The engine (mt19937_64) is fully specified
// by the standard, and every distribution below is implemented here rather
// than taken from <random> (the library distributions are not portable),
// so a seed reproduces the same stream on any platform and compiler.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform();

  // Uniform on [lo, hi). Requires lo <= hi.
  double uniform(double lo, double hi);

  // Uniform index in [0, n). Requires n > 0. Consumes exactly one draw.
  std::size_t uniform_index(std::size_t n);

  // Gaussian via Box-Muller, two draws per sample, no caching.
  // stddev == 0 returns mean and consumes nothing; stddev < 0 is an error.
  double normal(double mean, double stddev);

 private:
  std::mt19937_64 engine_;
};

}  // namespace rlab
