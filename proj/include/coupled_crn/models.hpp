#pragma once

// Programmatic versions of the bundled models, used by the tests and kept in
// lockstep with the JSON files under models/ (a round-trip test enforces
// this).

#include "coupled_crn/network.hpp"

namespace ccrn::models {

namespace detail {

inline ccrn::Reaction make_reaction(std::vector<std::int64_t> source,
                                    std::vector<std::int64_t> product,
                                    RateLaw rate) {
  Reaction r;
  r.source.counts = std::move(source);
  r.product.counts = std::move(product);
  r.change.resize(r.source.counts.size());
  for (std::size_t i = 0; i < r.change.size(); ++i) {
    r.change[i] = r.product.counts[i] - r.source.counts[i];
  }
  r.rate = rate;
  return r;
}

}  // namespace detail

// Self-replication with pairwise annihilation: A -> 2A at theta[0],
// 2A -> A at theta[1].
inline ReactionNetwork example1() {
  ReactionNetwork net;
  net.species_count = 1;
  net.species_names = {"A"};
  net.param_count = 2;
  net.reactions.push_back(detail::make_reaction({1}, {2}, RateLaw::mass_action(0)));
  net.reactions.push_back(detail::make_reaction({2}, {1}, RateLaw::mass_action(1)));
  validate_network(net);
  return net;
}

inline ParamPoint example1_theta() { return {2.0, 1.0}; }

// Intracellular viral kinetics: template T, genome G, structural protein S,
// virus V; six reactions, unbounded state space.
inline ReactionNetwork viral() {
  ReactionNetwork net;
  net.species_count = 4;
  net.species_names = {"T", "G", "S", "V"};
  net.param_count = 6;
  using detail::make_reaction;
  net.reactions.push_back(
      make_reaction({1, 0, 0, 0}, {1, 1, 0, 0}, RateLaw::mass_action(0)));  // T -> T+G
  net.reactions.push_back(
      make_reaction({0, 1, 0, 0}, {1, 0, 0, 0}, RateLaw::mass_action(1)));  // G -> T
  net.reactions.push_back(
      make_reaction({1, 0, 0, 0}, {1, 0, 1, 0}, RateLaw::mass_action(2)));  // T -> T+S
  net.reactions.push_back(
      make_reaction({1, 0, 0, 0}, {0, 0, 0, 0}, RateLaw::mass_action(3)));  // T -> 0
  net.reactions.push_back(
      make_reaction({0, 0, 1, 0}, {0, 0, 0, 0}, RateLaw::mass_action(4)));  // S -> 0
  net.reactions.push_back(
      make_reaction({0, 1, 1, 0}, {0, 0, 0, 1}, RateLaw::mass_action(5)));  // G+S -> V
  validate_network(net);
  return net;
}

inline ParamPoint viral_theta() { return {1.0, 0.025, 1000.0, 0.25, 2.0, 7.5e-6}; }

// Gene transcription and translation under a dark-light cycle: transcription
// rate 60 + theta[0] sin(2 pi t / 24), translation at theta[1] per mRNA, unit
// degradation of both species.
inline ReactionNetwork circadian() {
  ReactionNetwork net;
  net.species_count = 2;
  net.species_names = {"M", "P"};
  net.param_count = 4;
  using detail::make_reaction;
  net.reactions.push_back(make_reaction(
      {0, 0}, {1, 0}, RateLaw::periodic_rate_param_amp(60.0, 0, 24.0, 0.0)));
  net.reactions.push_back(make_reaction({1, 0}, {1, 1}, RateLaw::mass_action(1)));
  net.reactions.push_back(make_reaction({1, 0}, {0, 0}, RateLaw::mass_action(2)));
  net.reactions.push_back(make_reaction({0, 1}, {0, 0}, RateLaw::mass_action(3)));
  validate_network(net);
  return net;
}

inline ParamPoint circadian_theta() { return {15.0, 100.0, 1.0, 1.0}; }

// Immigration-death: 0 -> S at theta[0], S -> 0 at theta[1] per copy.  From
// an empty start the time-t law is Poisson with mean
// theta[0]/theta[1] (1 - e^{-theta[1] t}).
inline ReactionNetwork birth_death() {
  ReactionNetwork net;
  net.species_count = 1;
  net.species_names = {"S"};
  net.param_count = 2;
  net.reactions.push_back(detail::make_reaction({0}, {1}, RateLaw::mass_action(0)));
  net.reactions.push_back(detail::make_reaction({1}, {0}, RateLaw::mass_action(1)));
  validate_network(net);
  return net;
}

inline ParamPoint birth_death_theta() { return {10.0, 1.0}; }

// Linear self-replication A -> 2A at theta[0].
inline ReactionNetwork pure_birth() {
  ReactionNetwork net;
  net.species_count = 1;
  net.species_names = {"A"};
  net.param_count = 1;
  net.reactions.push_back(detail::make_reaction({1}, {2}, RateLaw::mass_action(0)));
  validate_network(net);
  return net;
}

inline ParamPoint pure_birth_theta() { return {2.0}; }

// 2A -> 3A: a second-order reaction produces net growth, so the model is
// explosive and fails the compliance check.
inline ReactionNetwork explosive() {
  ReactionNetwork net;
  net.species_count = 1;
  net.species_names = {"A"};
  net.param_count = 1;
  net.reactions.push_back(detail::make_reaction({2}, {3}, RateLaw::mass_action(0)));
  validate_network(net);
  return net;
}

inline ParamPoint explosive_theta() { return {1.0}; }

}  // namespace ccrn::models
