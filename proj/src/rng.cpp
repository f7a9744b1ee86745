#include "rlab/rng.hpp"

#include <cmath>
#include <numbers>

#include "rlab/errors.hpp"

namespace rlab {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return mix64(master + (stream + 1) * 0x9E3779B97F4A7C15ULL);
}

double Rng::uniform() {
  // Top 53 bits scaled into [0, 1).
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  if (!(lo <= hi)) throw ContractViolation("Rng::uniform: lo > hi");
  return lo + (hi - lo) * uniform();
}

std::size_t Rng::uniform_index(std::size_t n) {
  if (n == 0) throw ContractViolation("Rng::uniform_index: n must be > 0");
  auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
  return i < n ? i : n - 1;
}

double Rng::normal(double mean, double stddev) {
  if (stddev < 0.0) throw ContractViolation("Rng::normal: stddev < 0");
  if (stddev == 0.0) return mean;
  // u1 in (0, 1] so the log is finite.
  double u1 = 1.0 - uniform();
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  return mean + stddev * r * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace rlab
