#pragma once

#include <vector>

#include "collapse/coherent.hpp"
#include "collapse/hilbert.hpp"

namespace collapse {

// Dissipative evolution that sustains one target state and contracts the
// orthogonal sector: V(t) = P0 + exp(-rate t) (I - P0). The target is a
// fixed point for all t, the orthogonal sector decays at exp(-rate t), and
// V(t) V(s) = V(t + s). Lost norm is read as flow into unmodeled
// environment states.
class AttractorEvolution {
 public:
  AttractorEvolution(StateVector target, double rate);

  const StateVector& target() const { return target_; }
  double rate() const { return rate_; }

  Matrix operator_at(double t) const;
  DensityOperator evolve(const DensityOperator& rho, double t) const;

 private:
  StateVector target_;
  double rate_;
};

// sum_z w (<0|z><z|0>)^2: the survival penalty paid when the sustained state
// is first scattered into the coherent mixture. Strictly inside (0, 1);
// equals 1/2 under the Gaussian overlap law.
double degradation_factor(const CoherentFamily& family);

struct SurvivalSample {
  PhasePoint z_row;
  PhasePoint z_col;
  Complex direct;       // <z'|V rho0 V^dag |z''>
  Complex grained;      // <z'|V rho0' V^dag|z''>
  double ratio;         // Re(grained / direct), where defined
  bool ratio_defined;   // |direct| above the smallness cutoff
};

struct SurvivalReport {
  double gamma_t = 0.0;
  double degradation = 0.0;      // sum_z w (<0|z><z|0>)^2 on these grids
  double control_ratio = 0.0;    // grained arm replaced by rho0: exactly 1
  double max_ratio_deviation = 0.0;  // max |ratio - degradation| over samples
  std::vector<SurvivalSample> samples;
};

// Evolves rho0 and coarse_grain(rho0) to time t and compares coherent-state
// matrix elements over a lattice of sampled (z', z'') pairs. For rho0 equal
// to the target projector the grained elements are the direct ones scaled by
// the degradation factor.
SurvivalReport survival_experiment(const DensityOperator& rho0,
                                   const CoherentFamily& family, double t,
                                   double rate = 1.0,
                                   double sample_extent = 2.0,
                                   int samples_per_axis = 3,
                                   double smallness_cutoff = 1e-8);

}  // namespace collapse
