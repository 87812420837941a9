#pragma once

// Joint simulation of the pair (X^{theta+eps}, X^theta) under four
// constructions:
//
//   independent          two processes, disjoint randomness
//   common reaction path both legs driven by the same unit-rate process per
//                        reaction, each consuming internal time at its own
//                        intensity
//   split                per reaction, a shared channel at the pointwise
//                        minimum of the two intensities plus one residual
//                        channel per leg
//   stacked              one space-time point process; per reaction the legs
//                        share the interval [L_k, L_k + min) of the stacked
//                        layout and split the residual band up to max
//
// The stacked construction extends to time-dependent rate laws by proposing
// from the constant kappa-majorant stack and rejecting marks that land above
// the instantaneous intensity.  Split and common-reaction-path require
// time-independent laws here.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "coupled_crn/engines.hpp"
#include "coupled_crn/network.hpp"
#include "coupled_crn/streams.hpp"

namespace ccrn {

enum class CouplingMethod { independent, common_reaction_path, split, stacked };

inline const char* to_string(CouplingMethod m) {
  switch (m) {
    case CouplingMethod::independent: return "independent";
    case CouplingMethod::common_reaction_path: return "crp";
    case CouplingMethod::split: return "split";
    case CouplingMethod::stacked: return "stacked";
  }
  return "?";
}

inline constexpr std::uint64_t kNeverDecoupled =
    std::numeric_limits<std::uint64_t>::max();

struct CoupledTrajectory {
  Trajectory perturbed;  // X^{theta+eps}
  Trajectory nominal;    // X^theta
  std::uint64_t n_events = 0;  // jumps of the joint process up to t_end
  std::uint64_t decouple_index = kNeverDecoupled;  // ordinal of first disagreement
  double decouple_time = std::numeric_limits<double>::infinity();

  bool decoupled() const { return decouple_index != kNeverDecoupled; }
};

// One reaction's interval in the stacked layout at a fixed instant: the legs
// share [lo, lo + both); the band [lo + both, lo + top) belongs to whichever
// leg currently has the larger intensity.
enum class LargerSide { perturbed, nominal, tie };

struct StackedBand {
  double lo = 0.0;
  double both = 0.0;  // min of the two intensities
  double top = 0.0;   // max of the two intensities
  LargerSide larger = LargerSide::tie;
};

struct StackedFrame {
  std::vector<StackedBand> bands;
  double total = 0.0;  // sum of tops == lo_K + top_K
};

enum class MarkFate { both, perturbed_only, nominal_only, none };

struct MarkOutcome {
  int reaction = -1;
  MarkFate fate = MarkFate::none;
};

// Evaluates the stacked layout from the two current states at time t.
inline StackedFrame build_stacked_frame(const ReactionNetwork& network,
                                        const ParamPoint& theta,
                                        std::span<const double> eps,
                                        std::span<const std::int64_t> x_perturbed,
                                        std::span<const std::int64_t> x_nominal,
                                        double t) {
  detail::check_theta(network, theta);
  if (eps.size() != theta.size()) {
    throw UsageError("perturbation vector has wrong dimension");
  }
  ParamPoint shifted(theta.begin(), theta.end());
  for (std::size_t j = 0; j < shifted.size(); ++j) {
    shifted[j] += eps[j];
    if (!(shifted[j] > 0.0)) {
      throw UsageError("perturbed parameters must stay positive");
    }
  }
  StackedFrame frame;
  frame.bands.resize(network.reactions.size());
  double lo = 0.0;
  for (int k = 0; k < network.reaction_count(); ++k) {
    const double a = intensity(network, k, x_perturbed, t, shifted);
    const double b = intensity(network, k, x_nominal, t, theta);
    auto& band = frame.bands[static_cast<std::size_t>(k)];
    band.lo = lo;
    band.both = std::min(a, b);
    band.top = std::max(a, b);
    band.larger = a > b   ? LargerSide::perturbed
                  : b > a ? LargerSide::nominal
                          : LargerSide::tie;
    lo += band.top;
  }
  frame.total = lo;
  return frame;
}

// Maps a uniform mark to its reaction and to which legs fire.  The frame
// covers [0, total) with no gaps, so a fate of `none` is impossible here; an
// empty frame is a caller error.
inline MarkOutcome classify_mark(const StackedFrame& frame, double u) {
  if (!(u >= 0.0 && u < 1.0)) throw UsageError("mark must lie in [0,1)");
  if (frame.total <= 0.0) {
    throw UsageError("classify_mark on an empty frame: no event can be drawn");
  }
  const double v = u * frame.total;
  const int K = static_cast<int>(frame.bands.size());
  int k = K - 1;
  for (int i = 0; i < K; ++i) {
    const auto& band = frame.bands[static_cast<std::size_t>(i)];
    if (v < band.lo + band.top) {
      k = i;
      break;
    }
  }
  const auto& band = frame.bands[static_cast<std::size_t>(k)];
  if (v - band.lo < band.both) return {k, MarkFate::both};
  return {k, band.larger == LargerSide::perturbed ? MarkFate::perturbed_only
                                                  : MarkFate::nominal_only};
}

namespace detail {

// Shared bookkeeping for all coupled constructions: applies jumps to the two
// legs, tracks the joint event count, the first disagreement, optional exit
// radii, and the max_events guard.
class CoupledRecorder {
 public:
  CoupledRecorder(std::span<const std::int64_t> x0, const SimConfig& config)
      : config_(&config),
        perturbed_(x0, config),
        nominal_(x0, config),
        x_perturbed_(x0.begin(), x0.end()),
        x_nominal_(x0.begin(), x0.end()) {}

  State& x_perturbed() { return x_perturbed_; }
  State& x_nominal() { return x_nominal_; }

  bool initial_exit() const { return perturbed_.exited() || nominal_.exited(); }

  void guard(double t) {
    if (++steps_ > config_->max_events) {
      perturbed_.traj.final_state = x_perturbed_;
      perturbed_.traj.final_time = t;
      throw TruncationError(
          "max_events guard (" + std::to_string(config_->max_events) +
              ") exceeded in coupled simulation",
          std::move(perturbed_.traj));
    }
  }

  // Applies reaction k to the selected legs; returns false when an exit
  // radius stops the pair.
  bool record(int k, const Reaction& reaction, double t, bool fire_perturbed,
              bool fire_nominal) {
    bool keep_going = true;
    if (fire_perturbed) {
      keep_going &= perturbed_.apply(x_perturbed_, reaction, k, t);
    }
    if (fire_nominal) {
      keep_going &= nominal_.apply(x_nominal_, reaction, k, t);
    }
    ++result_.n_events;
    if (result_.decouple_index == kNeverDecoupled && x_perturbed_ != x_nominal_) {
      result_.decouple_index = result_.n_events;
      result_.decouple_time = t;
    }
    return keep_going;
  }

  CoupledTrajectory finish() {
    result_.perturbed = perturbed_.finish(std::move(x_perturbed_));
    result_.nominal = nominal_.finish(std::move(x_nominal_));
    return std::move(result_);
  }

 private:
  const SimConfig* config_;
  PathRecorder perturbed_;
  PathRecorder nominal_;
  State x_perturbed_;
  State x_nominal_;
  CoupledTrajectory result_;
  std::uint64_t steps_ = 0;
};

inline ParamPoint shifted_theta(const ReactionNetwork& network,
                                const ParamPoint& theta,
                                std::span<const double> eps) {
  check_theta(network, theta);
  if (eps.size() != theta.size()) {
    throw UsageError("perturbation vector has wrong dimension");
  }
  ParamPoint shifted(theta.begin(), theta.end());
  for (std::size_t j = 0; j < shifted.size(); ++j) {
    shifted[j] += eps[j];
    if (!(shifted[j] > 0.0)) {
      throw UsageError("perturbed parameters must stay positive");
    }
  }
  return shifted;
}

inline void require_time_independent(const ReactionNetwork& network,
                                     const char* method) {
  if (network.time_dependent()) {
    throw UsageError(std::string(method) +
                     " coupling requires time-independent rate laws; use the "
                     "stacked coupling instead");
  }
}

}  // namespace detail

// Stacked coupling: one mark stream; per event the two legs share the lower
// part of each reaction's band and split the residual.  For time-dependent
// laws, proposals come from the constant majorant stack and are thinned
// against the intensities at the arrival time.
inline CoupledTrajectory couple_stacked(const ReactionNetwork& network,
                                        const ParamPoint& theta,
                                        std::span<const double> eps,
                                        std::span<const std::int64_t> x0,
                                        const SimConfig& config,
                                        const SeedSpec& seed) {
  detail::check_state(network, x0);
  const ParamPoint shifted = detail::shifted_theta(network, theta, eps);
  const detail::IntensitySet rates_perturbed(network, shifted);
  const detail::IntensitySet rates_nominal(network, theta);
  const int K = rates_perturbed.size();
  const bool time_dependent = network.time_dependent();
  MarkStream marks(seed, role::kMark);

  detail::CoupledRecorder rec(x0, config);
  if (rec.initial_exit()) return rec.finish();

  std::vector<double> cap(static_cast<std::size_t>(K));
  double t = 0.0;
  while (true) {
    rec.guard(t);
    if (!time_dependent) {
      const StackedFrame frame = build_stacked_frame(
          network, theta, eps, rec.x_perturbed(), rec.x_nominal(), t);
      if (frame.total <= 0.0) break;
      const auto [holding, u] = marks.next_event(frame.total);
      if (t + holding > config.t_end) break;
      t += holding;
      const MarkOutcome outcome = classify_mark(frame, u);
      const auto& reaction =
          network.reactions[static_cast<std::size_t>(outcome.reaction)];
      if (!rec.record(outcome.reaction, reaction, t,
                      outcome.fate != MarkFate::nominal_only,
                      outcome.fate != MarkFate::perturbed_only)) {
        break;
      }
      continue;
    }
    // Time-dependent: stack the per-reaction majorants max over the two legs.
    double total = 0.0;
    for (int k = 0; k < K; ++k) {
      cap[static_cast<std::size_t>(k)] =
          std::max(rates_perturbed.majorant(k, rec.x_perturbed()),
                   rates_nominal.majorant(k, rec.x_nominal()));
      total += cap[static_cast<std::size_t>(k)];
    }
    if (total <= 0.0) break;
    const auto [holding, u] = marks.next_event(total);
    if (t + holding > config.t_end) break;
    t += holding;
    double level = u * total;
    int k = 0;
    while (k + 1 < K && level >= cap[static_cast<std::size_t>(k)]) {
      level -= cap[static_cast<std::size_t>(k)];
      ++k;
    }
    const double a = rates_perturbed.actual(k, rec.x_perturbed(), t);
    const double b = rates_nominal.actual(k, rec.x_nominal(), t);
    const double both = std::min(a, b);
    const double high = std::max(a, b);
    bool fire_perturbed = false;
    bool fire_nominal = false;
    if (level < both) {
      fire_perturbed = fire_nominal = true;
    } else if (level < high) {
      (a > b ? fire_perturbed : fire_nominal) = true;
    } else {
      continue;  // thinned proposal; no jump of the joint process
    }
    if (!rec.record(k, network.reactions[static_cast<std::size_t>(k)], t,
                    fire_perturbed, fire_nominal)) {
      break;
    }
  }
  return rec.finish();
}

// Split coupling: per reaction, a shared channel at rate min of the two
// intensities makes both legs jump, and one residual channel per leg fires it
// alone.  Next-reaction simulation over the 3K channels.
inline CoupledTrajectory couple_split(const ReactionNetwork& network,
                                      const ParamPoint& theta,
                                      std::span<const double> eps,
                                      std::span<const std::int64_t> x0,
                                      const SimConfig& config,
                                      const SeedSpec& seed) {
  detail::require_time_independent(network, "split");
  detail::check_state(network, x0);
  const ParamPoint shifted = detail::shifted_theta(network, theta, eps);
  const detail::IntensitySet rates_perturbed(network, shifted);
  const detail::IntensitySet rates_nominal(network, theta);
  const int K = rates_perturbed.size();

  std::vector<UnitPoissonStream> streams;
  streams.reserve(static_cast<std::size_t>(3 * K));
  for (int k = 0; k < K; ++k) streams.emplace_back(seed, role::split_both(k));
  for (int k = 0; k < K; ++k) streams.emplace_back(seed, role::split_perturbed(k));
  for (int k = 0; k < K; ++k) streams.emplace_back(seed, role::split_nominal(k));

  detail::CoupledRecorder rec(x0, config);
  if (rec.initial_exit()) return rec.finish();

  std::vector<double> channel_rate(static_cast<std::size_t>(3 * K));
  double t = 0.0;
  while (true) {
    rec.guard(t);
    for (int k = 0; k < K; ++k) {
      const double a = rates_perturbed.actual(k, rec.x_perturbed(), t);
      const double b = rates_nominal.actual(k, rec.x_nominal(), t);
      const double both = std::min(a, b);
      channel_rate[static_cast<std::size_t>(k)] = both;
      channel_rate[static_cast<std::size_t>(K + k)] = a - both;
      channel_rate[static_cast<std::size_t>(2 * K + k)] = b - both;
    }
    double best_dt = std::numeric_limits<double>::infinity();
    int best_c = -1;
    for (int c = 0; c < 3 * K; ++c) {
      const auto cs = static_cast<std::size_t>(c);
      if (channel_rate[cs] > 0.0) {
        const double dt =
            (streams[cs].next_fire() - streams[cs].internal_time()) / channel_rate[cs];
        if (dt < best_dt) {
          best_dt = dt;
          best_c = c;
        }
      }
    }
    if (best_c < 0) break;
    if (t + best_dt > config.t_end) {
      const double dt = config.t_end - t;
      for (int c = 0; c < 3 * K; ++c) {
        streams[static_cast<std::size_t>(c)].add_internal_time(
            channel_rate[static_cast<std::size_t>(c)] * dt);
      }
      break;
    }
    t += best_dt;
    for (int c = 0; c < 3 * K; ++c) {
      auto& s = streams[static_cast<std::size_t>(c)];
      if (c == best_c) {
        s.set_internal_time(s.next_fire());
        s.advance_to_next_fire();
      } else {
        s.add_internal_time(channel_rate[static_cast<std::size_t>(c)] * best_dt);
      }
    }
    const int k = best_c % K;
    const bool fire_perturbed = best_c < K || (best_c >= K && best_c < 2 * K);
    const bool fire_nominal = best_c < K || best_c >= 2 * K;
    if (!rec.record(k, network.reactions[static_cast<std::size_t>(k)], t,
                    fire_perturbed, fire_nominal)) {
      break;
    }
  }
  return rec.finish();
}

// Common reaction path coupling: both legs consume the same fire sequence of
// one unit-rate process per reaction, each at its own intensity.  Fires are
// memoized so the slower leg can reach points the faster leg has passed.
inline CoupledTrajectory couple_crp(const ReactionNetwork& network,
                                    const ParamPoint& theta,
                                    std::span<const double> eps,
                                    std::span<const std::int64_t> x0,
                                    const SimConfig& config, const SeedSpec& seed) {
  detail::require_time_independent(network, "common reaction path");
  detail::check_state(network, x0);
  const ParamPoint shifted = detail::shifted_theta(network, theta, eps);
  const detail::IntensitySet rates_perturbed(network, shifted);
  const detail::IntensitySet rates_nominal(network, theta);
  const int K = rates_perturbed.size();

  struct SharedFires {
    UnitPoissonStream stream;
    std::vector<double> cumulative;

    explicit SharedFires(UnitPoissonStream s) : stream(std::move(s)) {}

    double fire(std::size_t i) {
      while (cumulative.size() <= i) {
        cumulative.push_back(stream.advance_to_next_fire());
      }
      return cumulative[i];
    }
  };

  std::vector<SharedFires> fires;
  fires.reserve(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    fires.emplace_back(UnitPoissonStream(seed, role::unit(k)));
  }

  // Per leg and reaction: consumed internal time and index of the next fire.
  std::vector<double> internal(static_cast<std::size_t>(2 * K), 0.0);
  std::vector<std::size_t> next_index(static_cast<std::size_t>(2 * K), 0);
  const auto slot = [K](int leg, int k) {
    return static_cast<std::size_t>(leg * K + k);
  };

  detail::CoupledRecorder rec(x0, config);
  if (rec.initial_exit()) return rec.finish();

  std::vector<double> lambda(static_cast<std::size_t>(2 * K));
  double t = 0.0;
  while (true) {
    rec.guard(t);
    double best_dt = std::numeric_limits<double>::infinity();
    for (int leg = 0; leg < 2; ++leg) {
      const auto& rates = (leg == 0) ? rates_perturbed : rates_nominal;
      const State& x = (leg == 0) ? rec.x_perturbed() : rec.x_nominal();
      for (int k = 0; k < K; ++k) {
        const auto s = slot(leg, k);
        lambda[s] = rates.actual(k, x, t);
        if (lambda[s] > 0.0) {
          const double dt = (fires[static_cast<std::size_t>(k)].fire(next_index[s]) -
                             internal[s]) /
                            lambda[s];
          best_dt = std::min(best_dt, dt);
        }
      }
    }
    if (!(best_dt < std::numeric_limits<double>::infinity())) break;
    if (t + best_dt > config.t_end) {
      const double dt = config.t_end - t;
      for (std::size_t s = 0; s < internal.size(); ++s) internal[s] += lambda[s] * dt;
      break;
    }
    t += best_dt;
    // Advance every clock; legs whose pending fire is reached exactly now
    // jump together in this joint step (the symmetric case keeps eps = 0
    // pairs bit-identical).
    bool fire_leg[2] = {false, false};
    int fire_reaction[2] = {-1, -1};
    for (int leg = 0; leg < 2; ++leg) {
      for (int k = 0; k < K; ++k) {
        const auto s = slot(leg, k);
        if (lambda[s] <= 0.0) continue;
        const double pending = fires[static_cast<std::size_t>(k)].fire(next_index[s]);
        const double dt = (pending - internal[s]) / lambda[s];
        if (dt == best_dt && !fire_leg[leg]) {
          internal[s] = pending;
          ++next_index[s];
          fire_leg[leg] = true;
          fire_reaction[leg] = k;
        } else {
          internal[s] += lambda[s] * best_dt;
        }
      }
    }
    if (!fire_leg[0] && !fire_leg[1]) {
      throw InternalError("common reaction path step selected no reaction");
    }
    bool keep_going = true;
    if (fire_leg[0] && fire_leg[1] && fire_reaction[0] == fire_reaction[1]) {
      keep_going = rec.record(
          fire_reaction[0],
          network.reactions[static_cast<std::size_t>(fire_reaction[0])], t, true,
          true);
    } else {
      for (int leg = 0; leg < 2; ++leg) {
        if (!fire_leg[leg]) continue;
        keep_going &= rec.record(
            fire_reaction[leg],
            network.reactions[static_cast<std::size_t>(fire_reaction[leg])], t,
            leg == 0, leg == 1);
      }
    }
    if (!keep_going) break;
  }
  return rec.finish();
}

// Independent coupling: both legs carry disjoint randomness; they are stepped
// in merged time order so the joint event count and the first disagreement
// are still observed.
inline CoupledTrajectory couple_independent(const ReactionNetwork& network,
                                            const ParamPoint& theta,
                                            std::span<const double> eps,
                                            std::span<const std::int64_t> x0,
                                            const SimConfig& config,
                                            const SeedSpec& seed) {
  detail::check_state(network, x0);
  const ParamPoint shifted = detail::shifted_theta(network, theta, eps);
  const detail::IntensitySet rates_perturbed(network, shifted);
  const detail::IntensitySet rates_nominal(network, theta);
  const int K = rates_perturbed.size();

  detail::CoupledRecorder rec(x0, config);
  if (rec.initial_exit()) return rec.finish();

  if (!network.time_dependent()) {
    // Next-reaction over 2K channels with per-leg streams.
    std::vector<UnitPoissonStream> streams;
    streams.reserve(static_cast<std::size_t>(2 * K));
    for (int k = 0; k < K; ++k) streams.emplace_back(seed, role::indep_perturbed(k));
    for (int k = 0; k < K; ++k) streams.emplace_back(seed, role::indep_nominal(k));

    std::vector<double> lambda(static_cast<std::size_t>(2 * K));
    double t = 0.0;
    while (true) {
      rec.guard(t);
      double best_dt = std::numeric_limits<double>::infinity();
      int best_c = -1;
      for (int c = 0; c < 2 * K; ++c) {
        const auto cs = static_cast<std::size_t>(c);
        const auto& rates = (c < K) ? rates_perturbed : rates_nominal;
        const State& x = (c < K) ? rec.x_perturbed() : rec.x_nominal();
        lambda[cs] = rates.actual(c % K, x, t);
        if (lambda[cs] > 0.0) {
          const double dt =
              (streams[cs].next_fire() - streams[cs].internal_time()) / lambda[cs];
          if (dt < best_dt) {
            best_dt = dt;
            best_c = c;
          }
        }
      }
      if (best_c < 0) break;
      if (t + best_dt > config.t_end) {
        const double dt = config.t_end - t;
        for (int c = 0; c < 2 * K; ++c) {
          streams[static_cast<std::size_t>(c)].add_internal_time(
              lambda[static_cast<std::size_t>(c)] * dt);
        }
        break;
      }
      t += best_dt;
      for (int c = 0; c < 2 * K; ++c) {
        auto& s = streams[static_cast<std::size_t>(c)];
        if (c == best_c) {
          s.set_internal_time(s.next_fire());
          s.advance_to_next_fire();
        } else {
          s.add_internal_time(lambda[static_cast<std::size_t>(c)] * best_dt);
        }
      }
      const int k = best_c % K;
      if (!rec.record(k, network.reactions[static_cast<std::size_t>(k)], t,
                      best_c < K, best_c >= K)) {
        break;
      }
    }
    return rec.finish();
  }

  // Time-dependent: one thinning proposal clock per leg, stepped in merged
  // order; a leg redraws its candidate only when its own candidate fires.
  struct ThinLeg {
    const detail::IntensitySet* rates;
    MarkStream marks;
    double candidate_time = 0.0;
    double candidate_u = 0.0;
    double total = 0.0;

    ThinLeg(const detail::IntensitySet& r, MarkStream m)
        : rates(&r), marks(std::move(m)) {}

    void draw(const State& x, double now, double t_end) {
      const int K = rates->size();
      total = 0.0;
      for (int k = 0; k < K; ++k) total += rates->majorant(k, x);
      if (total <= 0.0) {
        candidate_time = std::numeric_limits<double>::infinity();
        return;
      }
      const auto [holding, u] = marks.next_event(total);
      candidate_time = now + holding;
      candidate_u = u;
      (void)t_end;
    }
  };

  ThinLeg legs[2] = {
      ThinLeg(rates_perturbed, MarkStream(seed, role::kIndepPerturbedMark)),
      ThinLeg(rates_nominal, MarkStream(seed, role::kIndepNominalMark))};
  legs[0].draw(rec.x_perturbed(), 0.0, config.t_end);
  legs[1].draw(rec.x_nominal(), 0.0, config.t_end);

  while (true) {
    const int leg = legs[0].candidate_time <= legs[1].candidate_time ? 0 : 1;
    const double t = legs[leg].candidate_time;
    if (t > config.t_end) break;
    rec.guard(t);
    State& x = (leg == 0) ? rec.x_perturbed() : rec.x_nominal();
    const auto& rates = *legs[leg].rates;
    double level = legs[leg].candidate_u * legs[leg].total;
    int k = 0;
    while (k + 1 < K && level >= rates.majorant(k, x)) {
      level -= rates.majorant(k, x);
      ++k;
    }
    bool keep_going = true;
    if (level < rates.actual(k, x, t)) {
      keep_going = rec.record(k, network.reactions[static_cast<std::size_t>(k)], t,
                              leg == 0, leg == 1);
    }
    if (!keep_going) break;
    legs[leg].draw(x, t, config.t_end);
  }
  return rec.finish();
}

inline CoupledTrajectory couple(const ReactionNetwork& network,
                                const ParamPoint& theta,
                                std::span<const double> eps,
                                std::span<const std::int64_t> x0,
                                const SimConfig& config, const SeedSpec& seed,
                                CouplingMethod method) {
  switch (method) {
    case CouplingMethod::independent:
      return couple_independent(network, theta, eps, x0, config, seed);
    case CouplingMethod::common_reaction_path:
      return couple_crp(network, theta, eps, x0, config, seed);
    case CouplingMethod::split:
      return couple_split(network, theta, eps, x0, config, seed);
    case CouplingMethod::stacked:
      return couple_stacked(network, theta, eps, x0, config, seed);
  }
  throw UsageError("unknown coupling method");
}

}  // namespace ccrn
