#include "collapse/chain.hpp"

#include <cmath>
#include <sstream>

namespace collapse {

namespace {

constexpr int kMaxLevels = 20;  // 2^20 amplitudes; beyond that, reject

void check_pair_norm(const char* names, Complex x, Complex y, double tol) {
  const double sum = std::norm(x) + std::norm(y);
  if (std::abs(sum - 1.0) > tol) {
    std::ostringstream msg;
    msg << "amplitudes (" << names << ") must satisfy |x|^2 + |y|^2 = 1; got "
        << sum;
    throw NormalizationError(msg.str());
  }
}

StateVector basis_state(const TensorSpace& single_factor_space, int index) {
  Vector amps = Vector::Zero(single_factor_space.total_dim());
  amps(index) = 1.0;
  return StateVector(single_factor_space, std::move(amps));
}

// Brain factors carry four tags: two distinguishable states per branch,
// with the leading character of the tag naming the branch.
const std::vector<std::string> kBrainTagsA = {"1x", "1y", "2u", "2v"};
const std::vector<std::string> kBrainTagsB = {"1z", "1w", "2c", "2d"};

}  // namespace

void ChainSpec::validate(double tol_norm) const {
  if (n_levels < 2) {
    throw DimensionError("chain needs at least 2 levels");
  }
  if (n_levels > kMaxLevels) {
    throw DimensionError("chain with " + std::to_string(n_levels) +
                         " levels exceeds the dense limit of " +
                         std::to_string(kMaxLevels));
  }
  check_pair_norm("a, b", amplitude_a, amplitude_b, tol_norm);
}

void TwoObserverSpec::validate(double tol_norm) const {
  check_pair_norm("a, b", a, b, tol_norm);
  check_pair_norm("e, f", e, f, tol_norm);
  check_pair_norm("g, h", g, h, tol_norm);
  check_pair_norm("p, q", p, q, tol_norm);
  check_pair_norm("r, s", r, s, tol_norm);
}

StateVector build_chain_state(const ChainSpec& spec) {
  spec.validate();
  std::vector<Factor> factors;
  factors.reserve(spec.n_levels);
  for (int n = 1; n <= spec.n_levels; ++n) {
    factors.push_back(Factor{std::to_string(n), 2, {}});
  }
  TensorSpace space(std::move(factors));

  // Two product branches: all levels registering 1, or all registering 2.
  // With row-major packing these are the first and last basis indices.
  Vector amps = Vector::Zero(space.total_dim());
  amps(0) = spec.amplitude_a;
  amps(space.total_dim() - 1) = spec.amplitude_b;
  return StateVector(std::move(space), std::move(amps));
}

Projector level_projector(const TensorSpace& space, int level, int outcome) {
  if (outcome != 1 && outcome != 2) {
    throw DimensionError("chain outcome must be 1 or 2; got " +
                         std::to_string(outcome));
  }
  const std::string id = std::to_string(level);
  const Factor& f = space.factor(id);  // throws for out-of-range levels
  TensorSpace local = TensorSpace::single(f.id, f.dim, f.tags);
  Projector local_projector = outer_projector(basis_state(local, outcome - 1));
  return lift_to_space(local_projector, space, id);
}

BranchOutcome chain_outcome_probability(const ChainSpec& spec, int level,
                                        int outcome) {
  if (level < 1 || level > spec.n_levels) {
    throw DimensionError("level " + std::to_string(level) +
                         " out of range 1.." + std::to_string(spec.n_levels));
  }
  if (outcome != 1 && outcome != 2) {
    throw DimensionError("chain outcome must be 1 or 2; got " +
                         std::to_string(outcome));
  }
  StateVector psi = build_chain_state(spec);

  // Tr(P_nj |psi><psi|) = ||P_nj psi||^2 for an orthogonal projector.
  // Applied factorwise so chains near the dense vector limit stay cheap.
  Matrix local = Matrix::Zero(2, 2);
  local(outcome - 1, outcome - 1) = 1.0;
  StateVector projected =
      apply_factor_operator(psi, std::to_string(level), local);
  return BranchOutcome{std::to_string(level), std::to_string(outcome),
                       projected.norm_squared()};
}

TensorSpace two_observer_space() {
  return TensorSpace({
      Factor{"1", 2, {}},
      Factor{"2", 2, {}},
      Factor{"3a", 2, {}},
      Factor{"4a", 4, kBrainTagsA},
      Factor{"3b", 2, {}},
      Factor{"4b", 4, kBrainTagsB},
  });
}

StateVector build_two_observer_state(const TwoObserverSpec& spec) {
  spec.validate();
  TensorSpace space = two_observer_space();

  auto single = [&](const std::string& id) {
    const Factor& f = space.factor(id);
    return TensorSpace::single(f.id, f.dim, f.tags);
  };
  auto superpose = [&](const std::string& id, int i0, Complex c0, int i1,
                       Complex c1) {
    Vector amps = Vector::Zero(space.factor(id).dim);
    amps(i0) = c0;
    amps(i1) = c1;
    return StateVector(single(id), std::move(amps));
  };

  // Branch 1: atom, device, and both early-processing factors register 1;
  // each observer's brain superposes its two branch-1 tags.
  StateVector branch1 = tensor_product({
      basis_state(single("1"), 0),
      basis_state(single("2"), 0),
      basis_state(single("3a"), 0),
      superpose("4a", 0, spec.e, 1, spec.f),
      basis_state(single("3b"), 0),
      superpose("4b", 0, spec.g, 1, spec.h),
  });
  StateVector branch2 = tensor_product({
      basis_state(single("1"), 1),
      basis_state(single("2"), 1),
      basis_state(single("3a"), 1),
      superpose("4a", 2, spec.p, 3, spec.q),
      basis_state(single("3b"), 1),
      superpose("4b", 2, spec.r, 3, spec.s),
  });

  Vector amps = spec.a * branch1.amplitudes() + spec.b * branch2.amplitudes();
  return StateVector(std::move(space), std::move(amps));
}

std::pair<StateVector, double> brain_collapse(const StateVector& state,
                                              const std::string& factor_id,
                                              const std::string& tag) {
  const TensorSpace& space = state.space();
  const Factor& brain = space.factor(factor_id);
  const int idx = space.tag_index(factor_id, tag);
  TensorSpace local = TensorSpace::single(brain.id, brain.dim, brain.tags);
  Projector lifted =
      lift_to_space(outer_projector(basis_state(local, idx)), space, factor_id);
  return collapse(state, lifted);
}

std::pair<StateVector, double> observer_a_collapse(const StateVector& state,
                                                   const std::string& tag) {
  return brain_collapse(state, "4a", tag);
}

std::optional<int> agreement_check(const StateVector& collapsed, double tol) {
  const TensorSpace& space = collapsed.space();
  const int pos_a = space.factor_position("4a");
  const int pos_b = space.factor_position("4b");

  bool seen[2] = {false, false};
  for (long i = 0; i < collapsed.dim(); ++i) {
    if (std::abs(collapsed.amplitudes()(i)) <= tol) continue;
    const auto idx = space.unpack(i);
    // The leading character of a brain tag is the branch it registers.
    for (int pos : {pos_a, pos_b}) {
      const std::string tag = space.factors()[pos].tag(idx[pos]);
      seen[tag[0] == '1' ? 0 : 1] = true;
    }
  }
  if (seen[0] && seen[1]) return std::nullopt;
  if (seen[0]) return 1;
  if (seen[1]) return 2;
  return std::nullopt;  // no support above tolerance
}

PriorEventReport prior_event_equivalence(const TwoObserverSpec& spec) {
  StateVector psi = build_two_observer_state(spec);
  const TensorSpace& space = psi.space();

  PriorEventReport report;
  report.expected = std::norm(spec.a) * std::norm(spec.e);

  const int brain_idx = space.tag_index("4a", "1x");
  Matrix brain_local = Matrix::Zero(4, 4);
  brain_local(brain_idx, brain_idx) = 1.0;

  // Direct route: one brain-level event.
  report.direct_probability =
      apply_factor_operator(psi, "4a", brain_local).norm_squared();

  // Staged route: device-level event first, then the brain-level event on
  // the renormalized state; the joint probability is the product. A branch
  // of probability zero cannot occur, so the staged probability is zero.
  Matrix device_local = Matrix::Zero(2, 2);
  device_local(0, 0) = 1.0;
  StateVector after_device = apply_factor_operator(psi, "2", device_local);
  const double p_device = after_device.norm_squared();
  if (p_device <= kTolZero) {
    report.staged_probability = 0.0;
  } else {
    StateVector renormalized(after_device.space(),
                             after_device.amplitudes() / std::sqrt(p_device));
    const double p_brain =
        apply_factor_operator(renormalized, "4a", brain_local).norm_squared();
    report.staged_probability = p_device * p_brain;
  }

  report.discrepancy =
      std::abs(report.direct_probability - report.staged_probability);
  return report;
}

}  // namespace collapse
