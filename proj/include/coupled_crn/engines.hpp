#pragma once

// Exact single-path simulation of one reaction network process.
//
// Two equivalent constructions are provided: a next-reaction scheme that
// drives one unit-rate Poisson process per reaction through its integrated
// intensity, and a thinning scheme that proposes events from a stacked
// constant majorant and accepts them against the current intensities.  The
// next-reaction engine requires time-independent rate laws; thinning handles
// the periodic family exactly because base + amplitude majorizes kappa(t)
// globally.

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "coupled_crn/errors.hpp"
#include "coupled_crn/network.hpp"
#include "coupled_crn/streams.hpp"

namespace ccrn {

struct SimConfig {
  double t_end = 1.0;
  std::uint64_t max_events = 10'000'000;  // guard against explosive models
  std::optional<std::int64_t> exit_radius;  // stop once |X|_1 reaches this
  bool record_events = true;  // false: keep only final state and counters
};

struct TrajectoryEvent {
  double time;
  int reaction;
  State state_after;
};

struct ExitFlag {
  std::int64_t radius;
  double time;
};

struct Trajectory {
  State x0;
  std::vector<TrajectoryEvent> events;  // empty in statistics-only mode
  double t_end = 0.0;                   // configured horizon
  State final_state;
  double final_time = 0.0;  // horizon, or the exit time if stopped early
  std::uint64_t event_count = 0;
  std::optional<ExitFlag> exit_flag;
};

// Thrown when max_events is exceeded; carries the partial trajectory so the
// caller can see how far the path got before the guard tripped.
class TruncationError : public std::runtime_error {
 public:
  TruncationError(std::string what, Trajectory partial)
      : std::runtime_error(std::move(what)), partial_trajectory(std::move(partial)) {}

  Trajectory partial_trajectory;
};

namespace detail {

// Per-run resolved kinetics: rate constants bound to a concrete theta, source
// complexes flattened to the nonzero entries.  Hot-path evaluator for the
// engines.
class IntensitySet {
 public:
  IntensitySet(const ReactionNetwork& network, const ParamPoint& theta)
      : network_(&network), theta_(theta) {
    check_theta(network, theta_);
    entries_.reserve(network.reactions.size());
    for (const auto& r : network.reactions) {
      Entry e;
      e.periodic = r.rate.time_dependent();
      if (e.periodic) {
        e.base = r.rate.base;
        e.amplitude = r.rate.amplitude_value(theta_);
        if (!(e.amplitude < e.base)) {
          throw UsageError("periodic amplitude must stay below base");
        }
        e.angular = 2.0 * std::numbers::pi / r.rate.period;
        e.phase = r.rate.phase;
        e.kappa_max = e.base + e.amplitude;
      } else {
        e.kappa_max = theta_[static_cast<std::size_t>(r.rate.param_index)];
      }
      for (std::size_t i = 0; i < r.source.counts.size(); ++i) {
        if (r.source.counts[i] > 0) {
          e.source_terms.emplace_back(static_cast<int>(i), r.source.counts[i]);
        }
      }
      entries_.push_back(std::move(e));
    }
  }

  int size() const { return static_cast<int>(entries_.size()); }
  const ReactionNetwork& network() const { return *network_; }
  const ParamPoint& theta() const { return theta_; }

  double factor(int k, std::span<const std::int64_t> x) const {
    const auto& e = entries_[static_cast<std::size_t>(k)];
    double prod = 1.0;
    for (const auto& [i, need] : e.source_terms) {
      const std::int64_t xi = x[static_cast<std::size_t>(i)];
      if (xi < need) return 0.0;
      for (std::int64_t m = 0; m < need; ++m) prod *= static_cast<double>(xi - m);
    }
    return prod;
  }

  double kappa(int k, double t) const {
    const auto& e = entries_[static_cast<std::size_t>(k)];
    if (!e.periodic) return e.kappa_max;
    return e.base + e.amplitude * std::sin(e.angular * t + e.phase);
  }

  double actual(int k, std::span<const std::int64_t> x, double t) const {
    const double f = factor(k, x);
    return f == 0.0 ? 0.0 : kappa(k, t) * f;
  }

  // sup over t of the intensity at state x; equals actual() for
  // time-independent laws.
  double majorant(int k, std::span<const std::int64_t> x) const {
    const double f = factor(k, x);
    return f == 0.0 ? 0.0 : entries_[static_cast<std::size_t>(k)].kappa_max * f;
  }

 private:
  struct Entry {
    bool periodic = false;
    double kappa_max = 0.0;
    double base = 0.0, amplitude = 0.0, angular = 0.0, phase = 0.0;
    std::vector<std::pair<int, std::int64_t>> source_terms;
  };

  const ReactionNetwork* network_;
  ParamPoint theta_;
  std::vector<Entry> entries_;
};

inline std::int64_t l1_norm(std::span<const std::int64_t> x) {
  std::int64_t s = 0;
  for (auto v : x) s += std::llabs(v);
  return s;
}

// Mutable per-path bookkeeping shared by both engines.
struct PathRecorder {
  Trajectory traj;
  const SimConfig* config;
  std::uint64_t steps = 0;

  PathRecorder(std::span<const std::int64_t> x0, const SimConfig& cfg)
      : config(&cfg) {
    traj.x0.assign(x0.begin(), x0.end());
    traj.t_end = cfg.t_end;
    traj.final_state = traj.x0;
    traj.final_time = cfg.t_end;
    if (cfg.exit_radius && l1_norm(x0) >= *cfg.exit_radius) {
      traj.exit_flag = ExitFlag{*cfg.exit_radius, 0.0};
      traj.final_time = 0.0;
    }
  }

  bool exited() const { return traj.exit_flag.has_value(); }

  // Applies one jump; returns false when the path should stop (exit radius).
  bool apply(State& x, const Reaction& reaction, int k, double t) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] += reaction.change[i];
      if (x[i] < 0) {
        throw InternalError("negative copy number produced at t=" + std::to_string(t));
      }
    }
    ++traj.event_count;
    if (config->record_events) {
      traj.events.push_back(TrajectoryEvent{t, k, x});
    }
    if (config->exit_radius && l1_norm(x) >= *config->exit_radius) {
      traj.exit_flag = ExitFlag{*config->exit_radius, t};
      traj.final_state = x;
      traj.final_time = t;
      return false;
    }
    return true;
  }

  void guard(const State& x, double t) {
    if (++steps > config->max_events) {
      traj.final_state = x;
      traj.final_time = t;
      throw TruncationError(
          "max_events guard (" + std::to_string(config->max_events) +
              ") exceeded; the model may be explosive",
          std::move(traj));
    }
  }

  Trajectory finish(State x) {
    if (!exited()) {
      traj.final_state = std::move(x);
      traj.final_time = config->t_end;
    }
    return std::move(traj);
  }
};

}  // namespace detail

// Next-reaction simulation: every reaction owns a unit-rate process whose
// internal clock advances at the current intensity; the reaction whose
// pending fire is reached first jumps.  Exact for time-independent rate laws.
inline Trajectory simulate_rtc(const ReactionNetwork& network,
                               const ParamPoint& theta,
                               std::span<const std::int64_t> x0,
                               const SimConfig& config, const SeedSpec& seed) {
  if (network.time_dependent()) {
    throw UsageError("next-reaction engine requires time-independent rate laws");
  }
  detail::check_state(network, x0);
  const detail::IntensitySet rates(network, theta);
  const int K = rates.size();

  std::vector<UnitPoissonStream> streams;
  streams.reserve(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) streams.emplace_back(seed, role::unit(k));

  detail::PathRecorder rec(x0, config);
  State x(x0.begin(), x0.end());
  if (rec.exited()) return rec.finish(std::move(x));

  std::vector<double> lambda(static_cast<std::size_t>(K));
  double t = 0.0;
  while (true) {
    rec.guard(x, t);
    double best_dt = std::numeric_limits<double>::infinity();
    int best_k = -1;
    for (int k = 0; k < K; ++k) {
      const auto ks = static_cast<std::size_t>(k);
      lambda[ks] = rates.actual(k, x, t);
      if (lambda[ks] > 0.0) {
        const double dt =
            (streams[ks].next_fire() - streams[ks].internal_time()) / lambda[ks];
        if (dt < best_dt) {  // ties resolve to the lowest reaction index
          best_dt = dt;
          best_k = k;
        }
      }
    }
    if (best_k < 0) break;  // absorbing state
    if (t + best_dt > config.t_end) {
      const double dt = config.t_end - t;
      for (int k = 0; k < K; ++k) {
        streams[static_cast<std::size_t>(k)].add_internal_time(
            lambda[static_cast<std::size_t>(k)] * dt);
      }
      break;
    }
    t += best_dt;
    for (int k = 0; k < K; ++k) {
      auto& s = streams[static_cast<std::size_t>(k)];
      if (k == best_k) {
        s.set_internal_time(s.next_fire());
        s.advance_to_next_fire();
      } else {
        s.add_internal_time(lambda[static_cast<std::size_t>(k)] * best_dt);
      }
    }
    if (!rec.apply(x, network.reactions[static_cast<std::size_t>(best_k)], best_k, t)) {
      return rec.finish(std::move(x));
    }
  }
  return rec.finish(std::move(x));
}

// Thinning simulation: candidate events arrive at the stacked majorant rate
// B(x) = sum_k kappa_max_k * factor_k(x); a uniform mark placed in the
// interval layout [L_k, L_k + lambda_k(x, t)) accepts reaction k, marks
// landing in the residual band above the current intensity are rejected.
inline Trajectory simulate_ppp(const ReactionNetwork& network,
                               const ParamPoint& theta,
                               std::span<const std::int64_t> x0,
                               const SimConfig& config, const SeedSpec& seed) {
  detail::check_state(network, x0);
  const detail::IntensitySet rates(network, theta);
  const int K = rates.size();
  MarkStream marks(seed, role::kMark);

  detail::PathRecorder rec(x0, config);
  State x(x0.begin(), x0.end());
  if (rec.exited()) return rec.finish(std::move(x));

  std::vector<double> cap(static_cast<std::size_t>(K));
  double t = 0.0;
  while (true) {
    rec.guard(x, t);
    double total = 0.0;
    for (int k = 0; k < K; ++k) {
      cap[static_cast<std::size_t>(k)] = rates.majorant(k, x);
      total += cap[static_cast<std::size_t>(k)];
    }
    if (total <= 0.0) break;  // absorbing state
    const auto [holding, u] = marks.next_event(total);
    if (t + holding > config.t_end) break;
    t += holding;
    double level = u * total;
    int k = 0;
    while (k + 1 < K && level >= cap[static_cast<std::size_t>(k)]) {
      level -= cap[static_cast<std::size_t>(k)];
      ++k;
    }
    // Accept iff the mark lies below the instantaneous intensity.
    if (level < rates.actual(k, x, t)) {
      if (!rec.apply(x, network.reactions[static_cast<std::size_t>(k)], k, t)) {
        return rec.finish(std::move(x));
      }
    }
  }
  return rec.finish(std::move(x));
}

enum class Engine { automatic, rtc, ppp };

inline Trajectory simulate(const ReactionNetwork& network, const ParamPoint& theta,
                           std::span<const std::int64_t> x0, const SimConfig& config,
                           const SeedSpec& seed, Engine engine = Engine::automatic) {
  switch (engine) {
    case Engine::rtc:
      return simulate_rtc(network, theta, x0, config, seed);
    case Engine::ppp:
      return simulate_ppp(network, theta, x0, config, seed);
    case Engine::automatic:
    default:
      return network.time_dependent() ? simulate_ppp(network, theta, x0, config, seed)
                                      : simulate_rtc(network, theta, x0, config, seed);
  }
}

}  // namespace ccrn
