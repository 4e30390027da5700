#pragma once

#include <optional>
#include <string>
#include <vector>

#include "collapse/hilbert.hpp"

namespace collapse {

// N-level measurement chain over a two-branch source: the top of the chain
// carries the branch amplitudes a and b through every level unchanged.
struct ChainSpec {
  int n_levels = 2;      // N >= 2, N <= 20 (dense vector limit)
  Complex amplitude_a;
  Complex amplitude_b;

  void validate(double tol_norm = kTolNorm) const;
};

// Branch amplitudes for a measured system observed by two observers, each
// with two possible brain states per branch.
struct TwoObserverSpec {
  Complex a, b;  // source branches
  Complex e, f;  // observer a, branch 1
  Complex g, h;  // observer b, branch 1
  Complex p, q;  // observer a, branch 2
  Complex r, s;  // observer b, branch 2

  void validate(double tol_norm = kTolNorm) const;
};

struct BranchOutcome {
  std::string level;   // factor id of the observed level
  std::string outcome; // state tag, "1" or "2" (or a brain tag like "1x")
  double probability = 0.0;
};

// Result of computing one collapse probability along two orderings.
struct PriorEventReport {
  double direct_probability = 0.0;    // single collapse at the brain level
  double staged_probability = 0.0;    // device-level collapse first, then brain
  double expected = 0.0;              // |a|^2 |e|^2
  double discrepancy = 0.0;           // |direct - staged|
};

// Chain state a|1...1> + b|2...2> over N two-dimensional factors "1".."N".
StateVector build_chain_state(const ChainSpec& spec);

// Projector onto outcome j of level n, lifted to the chain space.
Projector level_projector(const TensorSpace& space, int level, int outcome);

// Probability of outcome j at level n; identical for every n by
// construction of the chain state.
BranchOutcome chain_outcome_probability(const ChainSpec& spec, int level,
                                        int outcome);

// Six-factor observed-system state over factors {1, 2, 3a, 4a, 3b, 4b} with
// brain factors of dimension four (two tags per branch).
StateVector build_two_observer_state(const TwoObserverSpec& spec);

// The two-observer space used by build_two_observer_state.
TensorSpace two_observer_space();

// Collapse onto one tag of a brain factor ("4a" or "4b").
std::pair<StateVector, double> brain_collapse(const StateVector& state,
                                              const std::string& factor_id,
                                              const std::string& tag);

// Collapse onto observer a's brain tag (factor "4a"), e.g. "1x".
std::pair<StateVector, double> observer_a_collapse(const StateVector& state,
                                                   const std::string& tag);

// Returns the shared outcome index when every brain-factor amplitude of both
// observers lies in tags with the same leading branch index; nullopt when
// the support spans both branches.
std::optional<int> agreement_check(const StateVector& collapsed,
                                   double tol = 1e-10);

// Computes the brain-level collapse probability directly and via a prior
// device-level collapse; the two must agree.
PriorEventReport prior_event_equivalence(const TwoObserverSpec& spec);

}  // namespace collapse
