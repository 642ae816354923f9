#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string_view>

namespace rntk {

/// Portable seeded generator.
///
/// Bits come from std::mt19937_64, whose output sequence is fixed by the
/// standard. Uniform, integer and normal variates are produced by the
/// conversions below rather than by <random> distributions, whose outputs
/// differ between standard libraries. Independent substreams are derived
/// from a parent seed, a stream name and integer indices with SplitMix64,
/// so that results never depend on evaluation order or thread scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Seed for the named substream `stream` at position `indices`.
  static std::uint64_t derive(std::uint64_t seed, std::string_view stream,
                              std::initializer_list<std::uint64_t> indices = {});
  static Rng substream(std::uint64_t seed, std::string_view stream,
                       std::initializer_list<std::uint64_t> indices = {});

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer on the closed range [lo, hi].
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi);
  /// Standard normal (Box-Muller; the second variate of each pair is cached).
  double normal();
  void fill_normal(std::span<double> out);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

}  // namespace rntk
