#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

namespace bdbc {

/// xoshiro256** seeded through splitmix64. Variates are produced by our own
/// transforms (53-bit uniforms, Box-Muller normals) so streams are identical
/// on every platform.
class Rng {
public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();
  /// Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal.
  double normal();
  /// Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n);

private:
  std::array<std::uint64_t, 4> s_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t& state);

/// Stream seed for a keyed sub-task, e.g. derive_seed(seed, {g, replicate}).
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> keys);

} // namespace bdbc
