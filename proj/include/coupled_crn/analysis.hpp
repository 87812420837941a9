#pragma once

// Exit-time experiments and their closed-form oracles.
//
// For a network whose population-increasing reactions are at most first
// order, the total count is stochastically dominated by a pure-birth process
// with affine intensity, which yields an explicit geometric bound
// P(tau_m <= t) <= C delta^m on the probability of leaving the L1 ball of
// radius m by time t.  This header computes those constants, the exact exit
// CDF of the linear pure-birth process, the hypoexponential CDF it derives
// from, and runs the empirical experiments against them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "coupled_crn/engines.hpp"
#include "coupled_crn/ensemble.hpp"
#include "coupled_crn/network.hpp"
#include "coupled_crn/stats.hpp"
#include "coupled_crn/streams.hpp"

namespace ccrn {

// Constants of the geometric exit bound C * delta^m.
struct ExitBoundConstants {
  double C = 0.0;
  double delta = 0.0;  // in (0,1)
  double c = 0.0;      // max(|x0|_1 + 1, jump)
  // Echoed inputs.
  double rate_bound = 0.0;
  int reaction_count = 0;
  double t = 0.0;
  std::int64_t x0_norm = 0;
  std::int64_t jump = 1;

  double bound_at(std::int64_t m) const {
    return C * std::pow(delta, static_cast<double>(m));
  }
};

namespace detail {

inline ExitBoundConstants geometric_exit_bound(double kappa, double t,
                                               std::int64_t x0, std::int64_t jump,
                                               double c) {
  if (!(kappa > 0.0) || !(t > 0.0) || jump < 1) {
    throw UsageError("exit bound needs kappa > 0, t > 0, jump >= 1");
  }
  ExitBoundConstants out;
  out.c = c;
  out.t = t;
  out.x0_norm = x0;
  out.jump = jump;
  const double base = -std::expm1(-c * t * kappa);  // 1 - exp(-c t kappa)
  const double ell = static_cast<double>(jump);
  out.delta = std::pow(base, 1.0 / ell);
  out.C = std::pow(base, -1.0 - static_cast<double>(x0) / ell);
  return out;
}

}  // namespace detail

// Bound constants for the linear pure-birth process x0 + jump * Y(kappa int X):
// delta = (1 - e^{-c t kappa})^{1/jump}, C = (1 - e^{-c t kappa})^{-1 - x0/jump},
// with c = max(x0, jump).
inline ExitBoundConstants pure_birth_exit_bound(std::int64_t x0, std::int64_t jump,
                                                double kappa, double t) {
  if (x0 < 1) throw UsageError("pure birth bound needs x0 >= 1");
  const double c = static_cast<double>(std::max(x0, jump));
  return detail::geometric_exit_bound(kappa, t, x0, jump, c);
}

// Bound constants for the affine-rate process x0 + jump * Y(int kappa (1+X)):
// same shape with c = max(x0 + 1, jump); equals the linear bound started at
// x0 + 1 multiplied by one extra factor of delta.
inline ExitBoundConstants affine_birth_exit_bound(std::int64_t x0, std::int64_t jump,
                                                  double kappa, double t) {
  if (x0 < 0) throw UsageError("affine birth bound needs x0 >= 0");
  const double c = static_cast<double>(std::max(x0 + 1, jump));
  return detail::geometric_exit_bound(kappa, t, x0, jump, c);
}

// Bound constants for a compliant network: the dominating process has rate
// constant rate_bound * K and jump max_gain_jump.
inline ExitBoundConstants exit_bound_constants(const GrowthProfile& profile, int K,
                                               double t, std::int64_t x0_norm) {
  if (!profile.first_order_gain) {
    throw UsageError(
        "exit bound requires linear growth of the population-increasing "
        "reactions");
  }
  if (profile.gain_reactions.empty()) {
    throw UsageError(
        "exit bound is vacuous: no reaction increases the population");
  }
  const double kappa = profile.rate_bound * static_cast<double>(K);
  auto out = affine_birth_exit_bound(x0_norm, profile.max_gain_jump, kappa, t);
  out.rate_bound = profile.rate_bound;
  out.reaction_count = K;
  return out;
}

// Exact exit CDF of the unit-jump pure-birth process started at 1 with
// per-capita rate kappa: P(tau_M <= t) = (1 - e^{-kappa t})^{M-1}.
inline double pure_birth_exit_cdf(double kappa, int M, double t) {
  if (!(kappa > 0.0)) throw UsageError("kappa must be positive");
  if (M < 1) throw UsageError("threshold M must be a positive integer");
  if (t < 0.0) throw UsageError("time must be nonnegative");
  if (M == 1) return 1.0;  // already at the threshold
  return std::pow(-std::expm1(-kappa * t), M - 1);
}

// CDF of a sum of independent exponentials with pairwise distinct rates,
// via partial fractions:
//   P(T <= t) = sum_i (prod_{j != i} rho_j / (rho_j - rho_i)) (1 - e^{-rho_i t}).
// The alternating coefficients cancel catastrophically for many close rates,
// so this oracle accepts at most 12 of them.
inline double hypoexponential_cdf(std::span<const double> rates, double t) {
  if (rates.empty()) throw UsageError("need at least one rate");
  if (rates.size() > 12) {
    throw UsageError(
        "hypoexponential oracle supports at most 12 rates; the partial "
        "fraction coefficients cancel beyond that");
  }
  if (t < 0.0) throw UsageError("time must be nonnegative");
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (!(rates[i] > 0.0)) throw UsageError("rates must be positive");
    for (std::size_t j = i + 1; j < rates.size(); ++j) {
      if (rates[i] == rates[j]) {
        throw UsageError("rates must be pairwise distinct");
      }
    }
  }
  double cdf = 0.0;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    double coeff = 1.0;
    for (std::size_t j = 0; j < rates.size(); ++j) {
      if (j != i) coeff *= rates[j] / (rates[j] - rates[i]);
    }
    cdf += coeff * (-std::expm1(-rates[i] * t));
  }
  return std::clamp(cdf, 0.0, 1.0);
}

struct DominatingTrajectory {
  std::vector<double> times;        // jump times
  std::vector<std::int64_t> values; // value after each jump
  std::int64_t final_value = 0;
  std::optional<double> exit_time;  // first time the value reached exit_level
};

// Exact simulation of the dominating birth process: jumps of size `jump` at
// rate kappa * (1 + Z) (or kappa * Z with the offset removed), where
// kappa = rate_bound * channel_count collapses the per-reaction channels into
// one stream of the same law.
inline DominatingTrajectory simulate_dominating_birth(
    std::int64_t x0_norm, std::int64_t jump, double rate_bound, int channel_count,
    double t_end, const SeedSpec& seed,
    std::optional<std::int64_t> exit_level = std::nullopt,
    bool affine_offset = true, std::uint64_t max_events = 10'000'000) {
  if (jump < 1 || !(rate_bound > 0.0) || channel_count < 1) {
    throw UsageError("dominating process needs jump >= 1, rate_bound > 0, K >= 1");
  }
  const double kappa = rate_bound * static_cast<double>(channel_count);
  Xoshiro256pp rng = make_generator(seed, role::kDominatingBirth);

  DominatingTrajectory out;
  std::int64_t z = x0_norm;
  double t = 0.0;
  if (exit_level && z >= *exit_level) {
    out.exit_time = 0.0;
    out.final_value = z;
    return out;
  }
  std::uint64_t steps = 0;
  while (true) {
    if (++steps > max_events) {
      throw UsageError("dominating process exceeded the event guard");
    }
    const double rate = kappa * static_cast<double>(affine_offset ? z + 1 : z);
    if (!(rate > 0.0)) break;  // absorbed at zero when the offset is removed
    t += rng.exponential1() / rate;
    if (t > t_end) break;
    z += jump;
    out.times.push_back(t);
    out.values.push_back(z);
    if (exit_level && z >= *exit_level) {
      out.exit_time = t;
      break;
    }
  }
  out.final_value = z;
  return out;
}

struct ExitTimeSample {
  std::int64_t m = 0;
  double t = 0.0;
  std::uint64_t n_paths = 0;
  std::uint64_t n_hit = 0;
  double p_hat = 0.0;
  double upper_conf = 0.0;  // one-sided 99% Clopper-Pearson upper bound
};

struct ExitTimeExperiment {
  std::vector<ExitTimeSample> samples;  // one per grid radius
  ExitBoundConstants bound;
  std::vector<double> bound_curve;      // C delta^m per grid radius
};

// First-passage experiment: simulates N paths once with exit radius
// max(m_grid) and reads the nested first-passage times of every radius in the
// grid off each trajectory.
inline ExitTimeExperiment exit_time_experiment(
    const ReactionNetwork& network, const ParamPoint& theta,
    std::span<const std::int64_t> x0, std::span<const std::int64_t> m_grid,
    double t, std::uint64_t n_paths, std::uint64_t master_seed,
    unsigned workers = 0) {
  if (m_grid.empty()) throw UsageError("need at least one exit radius");
  if (n_paths == 0) throw UsageError("need at least one path");
  const GrowthProfile profile = compute_growth_profile(network, theta);
  if (!profile.compliant) {
    throw ModelError(
        "exit-time experiment requires a compliant network "
        "(population-increasing reaction of order >= 2 present)");
  }

  std::vector<std::int64_t> grid(m_grid.begin(), m_grid.end());
  std::sort(grid.begin(), grid.end());

  SimConfig config;
  config.t_end = t;
  config.exit_radius = grid.back();
  config.record_events = true;

  // hits[path * G + g] = 1 when radius grid[g] was reached by time t.
  const std::size_t G = grid.size();
  std::vector<std::uint8_t> hits(static_cast<std::size_t>(n_paths) * G, 0);
  parallel_paths(n_paths, workers, [&](std::uint64_t path) {
    const Trajectory traj =
        simulate(network, theta, x0, config, SeedSpec{master_seed, path});
    std::int64_t norm = detail::l1_norm(traj.x0);
    std::size_t g = 0;
    while (g < G && norm >= grid[g]) {
      hits[path * G + g] = 1;
      ++g;
    }
    for (const auto& ev : traj.events) {
      if (g >= G) break;
      norm = detail::l1_norm(ev.state_after);
      while (g < G && norm >= grid[g]) {
        hits[path * G + g] = 1;
        ++g;
      }
    }
  });

  ExitTimeExperiment out;
  out.bound = exit_bound_constants(profile, network.reaction_count(), t,
                                   detail::l1_norm(x0));
  for (std::size_t g = 0; g < G; ++g) {
    ExitTimeSample sample;
    sample.m = grid[g];
    sample.t = t;
    sample.n_paths = n_paths;
    for (std::uint64_t path = 0; path < n_paths; ++path) {
      sample.n_hit += hits[path * G + g];
    }
    sample.p_hat =
        static_cast<double>(sample.n_hit) / static_cast<double>(n_paths);
    sample.upper_conf = clopper_pearson_upper(sample.n_hit, n_paths, 0.99);
    out.samples.push_back(sample);
    out.bound_curve.push_back(out.bound.bound_at(grid[g]));
  }
  return out;
}

// Scalar pair used by the property tests: the probability that at least one
// of n independent events of probability x occurs, and its union bound.
inline double any_occurrence_prob(double x, int n) {
  if (x < 0.0 || x > 1.0) throw UsageError("x must lie in [0,1]");
  return 1.0 - std::pow(1.0 - x, n);
}

inline double union_bound(double x, int n) { return static_cast<double>(n) * x; }

}  // namespace ccrn
