#pragma once

// Deterministic, seedable randomness for the simulation engines.
//
// Every path of an ensemble owns its own generator state, derived by hashing
// (master_seed, path_index, stream_role).  Substreams are therefore
// independent of execution order and of the worker count, and a run is a pure
// function of its SeedSpec.  All variates are produced by explicit inverse
// transforms of 64-bit uniforms so that output is bit-identical across
// platforms (the standard library distributions are unspecified).

#include <cmath>
#include <cstdint>
#include <utility>

#include "coupled_crn/errors.hpp"

namespace ccrn {

namespace detail {

inline std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

// xoshiro256++ by Blackman & Vigna; small, fast, and well studied.
class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed) {
    // Expand the seed through splitmix64, the recommended seeding procedure.
    std::uint64_t z = seed;
    for (auto& word : state_) {
      z += 0x9E3779B97F4A7C15ULL;
      word = detail::splitmix64_mix(z);
    }
  }

  std::uint64_t next() {
    const std::uint64_t result = detail::rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  // Uniform on [0,1), 53-bit mantissa.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform on (0,1]; safe argument for log().
  double uniform01_open0() {
    return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Unit-rate exponential via inverse CDF.
  double exponential1() { return -std::log(uniform01_open0()); }

 private:
  std::uint64_t state_[4];
};

// Identifies one path of a Monte Carlo ensemble.  Distinct (master_seed,
// path_index) pairs yield independent substreams; equal pairs replay
// bit-identically.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t path_index = 0;
};

// Fixed substream layout.  One role per reaction and representation, three
// per reaction for the split coupling, so that every construction consumes
// its own randomness and replays exactly.
namespace role {

inline constexpr std::uint64_t kBlock = std::uint64_t{1} << 20;

// Unit-rate processes driving the time-change engine; shared by both legs of
// the common-reaction-path coupling.
inline constexpr std::uint64_t unit(int reaction) {
  return 0 * kBlock + static_cast<std::uint64_t>(reaction);
}
// Single mark stream for the thinning engine and the stacked coupling.
inline constexpr std::uint64_t kMark = 1 * kBlock;
// Split coupling: shared-minimum channel plus the two residual channels.
inline constexpr std::uint64_t split_both(int reaction) {
  return 2 * kBlock + static_cast<std::uint64_t>(reaction);
}
inline constexpr std::uint64_t split_perturbed(int reaction) {
  return 3 * kBlock + static_cast<std::uint64_t>(reaction);
}
inline constexpr std::uint64_t split_nominal(int reaction) {
  return 4 * kBlock + static_cast<std::uint64_t>(reaction);
}
// Independent coupling: disjoint roles per leg.
inline constexpr std::uint64_t indep_perturbed(int reaction) {
  return 5 * kBlock + static_cast<std::uint64_t>(reaction);
}
inline constexpr std::uint64_t indep_nominal(int reaction) {
  return 6 * kBlock + static_cast<std::uint64_t>(reaction);
}
inline constexpr std::uint64_t kIndepPerturbedMark = 7 * kBlock;
inline constexpr std::uint64_t kIndepNominalMark = 8 * kBlock;
// Dominating birth process used by the exit-time analysis.
inline constexpr std::uint64_t kDominatingBirth = 9 * kBlock;

}  // namespace role

inline Xoshiro256pp make_generator(const SeedSpec& seed, std::uint64_t stream_role) {
  std::uint64_t h = seed.master_seed;
  h = detail::splitmix64_mix(h + 0x9E3779B97F4A7C15ULL * (seed.path_index + 1));
  h = detail::splitmix64_mix(h + 0xD1B54A32D192ED03ULL * (stream_role + 1));
  return Xoshiro256pp(h);
}

// One unit-rate Poisson process, exposed through its cumulative internal
// clock.  The engine advances internal_time by lambda*dt; the process fires
// whenever internal_time reaches next_fire.
class UnitPoissonStream {
 public:
  UnitPoissonStream(const SeedSpec& seed, std::uint64_t stream_role)
      : rng_(make_generator(seed, stream_role)) {
    next_fire_ = rng_.exponential1();
  }

  // Returns the internal time of the pending jump and schedules the next one.
  double advance_to_next_fire() {
    const double fire = next_fire_;
    next_fire_ += rng_.exponential1();
    return fire;
  }

  double next_fire() const { return next_fire_; }
  double internal_time() const { return internal_time_; }
  void set_internal_time(double t) { internal_time_ = t; }
  void add_internal_time(double dt) { internal_time_ += dt; }

 private:
  double internal_time_ = 0.0;
  double next_fire_ = 0.0;
  Xoshiro256pp rng_;
};

// Marks of a unit-rate space-time Poisson point process restricted to a
// finite rate level: exponential gaps plus independent uniform heights.
class MarkStream {
 public:
  MarkStream(const SeedSpec& seed, std::uint64_t stream_role)
      : rng_(make_generator(seed, stream_role)) {}

  double uniform() { return rng_.uniform01(); }
  double exponential_gap() { return rng_.exponential1(); }

  // Next point of the process below `total_rate`: holding time until the
  // point and the uniform height u, so that u*total_rate is its level.
  std::pair<double, double> next_event(double total_rate) {
    if (!(total_rate > 0.0)) {
      throw UsageError("MarkStream::next_event requires total_rate > 0");
    }
    const double holding = rng_.exponential1() / total_rate;
    const double u = rng_.uniform01();
    return {holding, u};
  }

 private:
  Xoshiro256pp rng_;
};

}  // namespace ccrn
