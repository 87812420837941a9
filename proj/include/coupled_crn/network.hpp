#pragma once

// Reaction networks with stochastic mass-action kinetics.
//
// A network is a list of reactions y_k -> y'_k over d species.  Reaction k
// fires at intensity
//
//     lambda_k(x, t) = kappa_k(t) * prod_i x_i (x_i - 1) ... (x_i - y_ki + 1)
//
// whenever x >= y_k componentwise, and zero otherwise.  kappa_k is either a
// parameter theta[j] (time-independent mass action) or the sinusoid
// base + amplitude * sin(2 pi t / period + phase); in the latter case the
// amplitude may itself be bound to a parameter so sensitivities with respect
// to it are expressible.  Everything in this header is an immutable value
// type; operations are pure functions and safe to share across workers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coupled_crn/errors.hpp"

namespace ccrn {

using State = std::vector<std::int64_t>;
using ParamPoint = std::vector<double>;   // strictly positive entries
using PerturbVec = std::vector<double>;   // same length as ParamPoint

// Nonnegative species counts forming a reaction's source or product.
struct Complex {
  std::vector<std::int64_t> counts;

  std::int64_t order() const {
    std::int64_t s = 0;
    for (auto c : counts) s += c;
    return s;
  }
};

struct RateLaw {
  enum class Kind { mass_action, periodic };

  Kind kind = Kind::mass_action;

  // mass_action: kappa = theta[param_index].
  int param_index = -1;

  // periodic: kappa(t) = base + amplitude(theta) * sin(2 pi t / period + phase),
  // where amplitude(theta) is theta[*amplitude_param] when bound, else the
  // literal amplitude below.
  double base = 0.0;
  double amplitude = 0.0;
  double period = 1.0;
  double phase = 0.0;
  std::optional<int> amplitude_param;

  static RateLaw mass_action(int param_index) {
    RateLaw law;
    law.kind = Kind::mass_action;
    law.param_index = param_index;
    return law;
  }

  static RateLaw periodic_rate(double base, double amplitude, double period,
                               double phase) {
    RateLaw law;
    law.kind = Kind::periodic;
    law.base = base;
    law.amplitude = amplitude;
    law.period = period;
    law.phase = phase;
    return law;
  }

  static RateLaw periodic_rate_param_amp(double base, int amplitude_param,
                                         double period, double phase) {
    RateLaw law;
    law.kind = Kind::periodic;
    law.base = base;
    law.amplitude_param = amplitude_param;
    law.period = period;
    law.phase = phase;
    return law;
  }

  bool time_dependent() const { return kind == Kind::periodic; }

  double amplitude_value(std::span<const double> theta) const {
    return amplitude_param ? theta[static_cast<std::size_t>(*amplitude_param)]
                           : amplitude;
  }

  // Rate constant at time t for the given parameters.
  double kappa(double t, std::span<const double> theta) const {
    if (kind == Kind::mass_action) {
      return theta[static_cast<std::size_t>(param_index)];
    }
    const double amp = amplitude_value(theta);
    return base + amp * std::sin(2.0 * std::numbers::pi * t / period + phase);
  }

  // sup_t kappa(t); exact for this rate family.
  double kappa_majorant(std::span<const double> theta) const {
    if (kind == Kind::mass_action) {
      return theta[static_cast<std::size_t>(param_index)];
    }
    return base + amplitude_value(theta);
  }
};

struct Reaction {
  Complex source;
  Complex product;
  std::vector<std::int64_t> change;  // product - source, componentwise
  RateLaw rate;
};

struct ReactionNetwork {
  int species_count = 0;
  std::vector<std::string> species_names;
  std::vector<Reaction> reactions;
  int param_count = 0;

  int reaction_count() const { return static_cast<int>(reactions.size()); }

  bool time_dependent() const {
    return std::any_of(reactions.begin(), reactions.end(),
                       [](const Reaction& r) { return r.rate.time_dependent(); });
  }

  // Parameter indices that enter some periodic law as its amplitude.
  bool param_is_periodic_amplitude(int j) const {
    for (const auto& r : reactions) {
      if (r.rate.amplitude_param && *r.rate.amplitude_param == j) return true;
    }
    return false;
  }
};

// Axis-aligned compact parameter box; suprema of the rate constants over it
// are attained at the upper corner.
struct ParamBox {
  std::vector<double> lower;
  std::vector<double> upper;

  static ParamBox point(const ParamPoint& theta) { return {theta, theta}; }

  // Smallest box containing both theta and theta + eps (used when no explicit
  // box is configured; a larger box can always be chosen).
  static ParamBox hull(const ParamPoint& theta, std::span<const double> eps) {
    ParamBox box{theta, theta};
    for (std::size_t j = 0; j < theta.size(); ++j) {
      const double shifted = theta[j] + (j < eps.size() ? eps[j] : 0.0);
      box.lower[j] = std::min(box.lower[j], shifted);
      box.upper[j] = std::max(box.upper[j], shifted);
    }
    return box;
  }

  bool contains(std::span<const double> theta) const {
    for (std::size_t j = 0; j < lower.size(); ++j) {
      if (theta[j] < lower[j] || theta[j] > upper[j]) return false;
    }
    return true;
  }
};

// Structural growth data extracted from a network: the uniform rate-constant
// bound, the polynomial order of the intensities, the set of
// population-increasing reactions, and the two jump magnitudes used by the
// exit-time bounds (largest net gain over the increasing set, and largest
// total jump over all reactions).
struct GrowthProfile {
  double rate_bound = 0.0;              // max_k sup_{theta, t} kappa_k
  int poly_order = 1;                   // max_k |y_k|_1, at least 1
  std::vector<int> gain_reactions;      // k with zeta_k . 1 > 0
  std::int64_t max_gain_jump = 1;       // max over gain_reactions of zeta_k . 1
  std::int64_t max_total_jump = 1;      // max_k |zeta_k|_1
  bool first_order_gain = false;        // all gain reactions have |y_k|_1 <= 1
  bool compliant = false;               // equals first_order_gain
};

namespace detail {

// Falling-factorial product prod_i x_i (x_i-1) ... (x_i - y_i + 1), zero when
// x < y in any coordinate.
inline double falling_factorial(std::span<const std::int64_t> x,
                                std::span<const std::int64_t> y) {
  double prod = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::int64_t need = y[i];
    if (need == 0) continue;
    if (x[i] < need) return 0.0;
    for (std::int64_t m = 0; m < need; ++m) {
      prod *= static_cast<double>(x[i] - m);
    }
  }
  return prod;
}

inline void check_theta(const ReactionNetwork& network,
                        std::span<const double> theta) {
  if (static_cast<int>(theta.size()) != network.param_count) {
    throw UsageError("parameter vector has length " +
                     std::to_string(theta.size()) + ", expected " +
                     std::to_string(network.param_count));
  }
  for (double v : theta) {
    if (!(v > 0.0)) throw UsageError("parameter entries must be positive");
  }
}

inline void check_state(const ReactionNetwork& network,
                        std::span<const std::int64_t> x) {
  if (static_cast<int>(x.size()) != network.species_count) {
    throw UsageError("state vector has wrong dimension");
  }
}

}  // namespace detail

// Validates structural invariants; throws ModelError on violation.
inline void validate_network(const ReactionNetwork& network) {
  if (network.species_count <= 0) throw ModelError("network needs d >= 1 species");
  if (network.reactions.empty()) throw ModelError("network needs K >= 1 reactions");
  if (static_cast<int>(network.species_names.size()) != network.species_count) {
    throw ModelError("species name list does not match species count");
  }
  const auto d = static_cast<std::size_t>(network.species_count);
  for (std::size_t k = 0; k < network.reactions.size(); ++k) {
    const auto& r = network.reactions[k];
    const std::string tag = "reaction " + std::to_string(k + 1) + ": ";
    if (r.source.counts.size() != d || r.product.counts.size() != d ||
        r.change.size() != d) {
      throw ModelError(tag + "complex dimension does not match species count");
    }
    bool all_equal = true;
    for (std::size_t i = 0; i < d; ++i) {
      if (r.source.counts[i] < 0 || r.product.counts[i] < 0) {
        throw ModelError(tag + "negative stoichiometry");
      }
      if (r.change[i] != r.product.counts[i] - r.source.counts[i]) {
        throw ModelError(tag + "reaction vector is not product - source");
      }
      if (r.change[i] != 0) all_equal = false;
    }
    if (all_equal) throw ModelError(tag + "source and product complexes are equal");
    const auto& law = r.rate;
    if (law.kind == RateLaw::Kind::mass_action) {
      if (law.param_index < 0 || law.param_index >= network.param_count) {
        throw ModelError(tag + "rate parameter index out of range");
      }
    } else {
      if (!(law.base > 0.0)) throw ModelError(tag + "periodic base must be positive");
      if (!(law.period > 0.0)) throw ModelError(tag + "periodic period must be positive");
      if (law.amplitude_param) {
        if (*law.amplitude_param < 0 || *law.amplitude_param >= network.param_count) {
          throw ModelError(tag + "amplitude parameter index out of range");
        }
      } else {
        if (law.amplitude < 0.0) throw ModelError(tag + "amplitude must be nonnegative");
        if (!(law.amplitude < law.base)) {
          throw ModelError(tag + "amplitude must be smaller than base");
        }
      }
    }
  }
}

// Intensity of reaction k at state x and time t.
inline double intensity(const ReactionNetwork& network, int k,
                        std::span<const std::int64_t> x, double t,
                        std::span<const double> theta) {
  if (k < 0 || k >= network.reaction_count()) {
    throw UsageError("reaction index out of range");
  }
  detail::check_state(network, x);
  detail::check_theta(network, theta);
  const auto& r = network.reactions[static_cast<std::size_t>(k)];
  const double ff = detail::falling_factorial(x, r.source.counts);
  if (ff == 0.0) return 0.0;
  return r.rate.kappa(t, theta) * ff;
}

// Total rate of moving from x to x_next: the sum of intensities over all
// reactions whose reaction vector equals x_next - x.
inline double transition_rate(const ReactionNetwork& network,
                              std::span<const std::int64_t> x,
                              std::span<const std::int64_t> x_next, double t,
                              std::span<const double> theta) {
  detail::check_state(network, x);
  detail::check_state(network, x_next);
  double total = 0.0;
  for (int k = 0; k < network.reaction_count(); ++k) {
    const auto& change = network.reactions[static_cast<std::size_t>(k)].change;
    bool match = true;
    for (std::size_t i = 0; i < change.size(); ++i) {
      if (x_next[i] - x[i] != change[i]) {
        match = false;
        break;
      }
    }
    if (match) total += intensity(network, k, x, t, theta);
  }
  return total;
}

// Extracts the growth profile over the parameter box.  The network is flagged
// compliant exactly when every population-increasing reaction is of order at
// most one; models violating this (such as 2A -> 3A) can explode.
inline GrowthProfile compute_growth_profile(const ReactionNetwork& network,
                                            const ParamBox& box) {
  if (box.lower.size() != static_cast<std::size_t>(network.param_count) ||
      box.upper.size() != box.lower.size()) {
    throw UsageError("parameter box has wrong dimension");
  }
  for (std::size_t j = 0; j < box.lower.size(); ++j) {
    if (!(box.lower[j] > 0.0) || box.lower[j] > box.upper[j]) {
      throw UsageError("parameter box must satisfy 0 < lower <= upper");
    }
  }
  GrowthProfile profile;
  std::int64_t max_order = 1;
  std::int64_t max_gain = 0;
  std::int64_t max_total = 1;
  double cbar = 0.0;
  bool first_order_gain = true;
  for (int k = 0; k < network.reaction_count(); ++k) {
    const auto& r = network.reactions[static_cast<std::size_t>(k)];
    const std::int64_t order = r.source.order();
    max_order = std::max(max_order, order);
    std::int64_t net = 0;
    std::int64_t total = 0;
    for (auto c : r.change) {
      net += c;
      total += std::llabs(c);
    }
    max_total = std::max(max_total, total);
    if (net > 0) {
      profile.gain_reactions.push_back(k);
      max_gain = std::max(max_gain, net);
      if (order > 1) first_order_gain = false;
    }
    const auto& law = r.rate;
    double kappa_sup = 0.0;
    if (law.kind == RateLaw::Kind::mass_action) {
      kappa_sup = box.upper[static_cast<std::size_t>(law.param_index)];
    } else if (law.amplitude_param) {
      kappa_sup = law.base + box.upper[static_cast<std::size_t>(*law.amplitude_param)];
    } else {
      kappa_sup = law.base + law.amplitude;
    }
    cbar = std::max(cbar, kappa_sup);
  }
  profile.rate_bound = cbar;
  profile.poly_order = static_cast<int>(max_order);
  profile.max_gain_jump = profile.gain_reactions.empty() ? 1 : max_gain;
  profile.max_total_jump = max_total;
  profile.first_order_gain = first_order_gain;
  profile.compliant = first_order_gain;
  return profile;
}

inline GrowthProfile compute_growth_profile(const ReactionNetwork& network,
                                            const ParamPoint& theta) {
  return compute_growth_profile(network, ParamBox::point(theta));
}

// State-free bound on the intensity-discrepancy ratio of a perturbed
// mass-action network: max over perturbed reactions of
// |eps_k| / max(kappa_k + eps_k, kappa_k).  Dominates coupling_ratio_at at
// every state and time.
inline double coupling_ratio_bound(const ReactionNetwork& network,
                                   const ParamPoint& theta,
                                   std::span<const double> eps) {
  detail::check_theta(network, theta);
  if (eps.size() != theta.size()) {
    throw UsageError("perturbation vector has wrong dimension");
  }
  for (std::size_t j = 0; j < theta.size(); ++j) {
    if (!(theta[j] + eps[j] > 0.0)) {
      throw UsageError("perturbed parameters must stay positive");
    }
    if (eps[j] != 0.0 && network.param_is_periodic_amplitude(static_cast<int>(j))) {
      throw UsageError(
          "coupling_ratio_bound requires mass-action rate laws in the "
          "perturbed parameters");
    }
  }
  double bound = 0.0;
  for (const auto& r : network.reactions) {
    if (r.rate.kind != RateLaw::Kind::mass_action) continue;
    const auto j = static_cast<std::size_t>(r.rate.param_index);
    if (eps[j] == 0.0) continue;
    const double kappa = theta[j];
    const double ratio = std::abs(eps[j]) / std::max(kappa + eps[j], kappa);
    bound = std::max(bound, ratio);
  }
  return bound;
}

// The intensity-discrepancy ratio at one state and time:
// sum_k |lambda_k^{theta+eps} - lambda_k^theta| over
// sum_k max(lambda_k^{theta+eps}, lambda_k^theta).
// Undefined (error) when every intensity vanishes at (x, t).
inline double coupling_ratio_at(const ReactionNetwork& network,
                                const ParamPoint& theta,
                                std::span<const double> eps,
                                std::span<const std::int64_t> x, double t) {
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
  double numerator = 0.0;
  double denominator = 0.0;
  for (int k = 0; k < network.reaction_count(); ++k) {
    const double a = intensity(network, k, x, t, shifted);
    const double b = intensity(network, k, x, t, theta);
    numerator += std::abs(a - b);
    denominator += std::max(a, b);
  }
  if (denominator == 0.0) {
    throw UsageError("coupling ratio undefined: all intensities vanish here");
  }
  return numerator / denominator;
}

}  // namespace ccrn
