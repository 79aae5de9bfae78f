#pragma once

#include <array>
#include <cstdint>

namespace aftxs {

/// (base_seed, stream_id) fixes every random quantity drawn under it.
struct SeedSpec {
  std::uint64_t base_seed = 0;
  std::uint64_t stream_id = 0;

  /// Deterministic child stream; children of distinct tags are disjoint with
  /// overwhelming probability (SplitMix64 mixing of the pair).
  SeedSpec child(std::uint64_t tag) const;

  friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as
/// easy as 1, 2, 3").
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Sequential draws from the counter-based generator at a fixed
/// (seed, substream, record) coordinate. Independent records can be generated
/// in any order or in parallel with identical output.
class CounterRng {
 public:
  CounterRng(const SeedSpec& seed, std::uint32_t substream, std::uint64_t record);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1].
  double uniform_pos() { return 1.0 - uniform(); }
  double normal();
  /// Exponential(1).
  double exponential();
  /// Gamma(shape, 1) by Marsaglia–Tsang; shape < 1 through the U^{1/a} boost.
  double gamma(double shape);
  /// +1 or -1 with probability 1/2.
  int sign();

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace aftxs
