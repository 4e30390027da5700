#pragma once

#include <vector>

#include "collapse/hilbert.hpp"

namespace collapse {

// Uniform one-dimensional sample grid for wave functions, x in [-L, L].
// Amplitudes of states built on this grid carry a factor sqrt(dx), so plain
// l2 inner products equal the quadrature integrals sum |psi|^2 dx. Dividing
// an amplitude by sqrt(dx) recovers the wave-function value.
struct PositionGrid {
  double extent = 12.0;  // L
  int n_points = 481;    // odd, so x = 0 is a sample

  PositionGrid() = default;
  PositionGrid(double extent_, int n_points_);

  double spacing() const { return 2.0 * extent / (n_points - 1); }
  double x(int k) const { return -extent + k * spacing(); }

  bool operator==(const PositionGrid& other) const = default;
};

// Square phase-space window q, p in [-Q, Q] sampled on an n x n lattice.
// The quadrature weight realizes the measure dp dq / (2 pi).
struct PhaseGrid {
  double extent = 6.0;  // Q
  int n_per_axis = 49;

  PhaseGrid() = default;
  PhaseGrid(double extent_, int n_per_axis_);

  double spacing() const { return 2.0 * extent / (n_per_axis - 1); }
  double weight() const;
  long size() const { return static_cast<long>(n_per_axis) * n_per_axis; }

  // A finer grid that also widens the window: the truncated-window sum of a
  // rapidly decaying integrand is tail-dominated, so a refinement that only
  // tightened the spacing would leave the residual pinned at the tail.
  PhaseGrid refined() const;

  bool operator==(const PhaseGrid& other) const = default;
};

struct PhasePoint {
  double q = 0.0;
  double p = 0.0;
};

TensorSpace position_space(const PositionGrid& grid);

// Minimum-uncertainty Gaussian at phase-space point (q, p), sampled on the
// grid and renormalized so the quadrature norm is exactly 1.
StateVector coherent_state(double q, double p, const PositionGrid& grid);

// General Gaussian wavepacket with width sigma (sigma = 1 reproduces
// coherent_state), used as a test and experiment input.
StateVector gaussian_wavepacket(double center_q, double center_p, double sigma,
                                const PositionGrid& grid);

// Quadrature inner product <z1|z2> of two coherent states on one grid.
Complex overlap(PhasePoint z1, PhasePoint z2, const PositionGrid& grid);

// All coherent states of a phase-grid lattice over one position grid.
class CoherentFamily {
 public:
  CoherentFamily(PositionGrid position_grid, PhaseGrid phase_grid);

  const PositionGrid& position_grid() const { return position_grid_; }
  const PhaseGrid& phase_grid() const { return phase_grid_; }
  const std::vector<StateVector>& states() const { return states_; }
  PhasePoint phase_point(long index) const;
  long size() const { return phase_grid_.size(); }

  // Amplitudes of every member as columns of a dim x size matrix.
  Matrix amplitude_matrix() const;

 private:
  PositionGrid position_grid_;
  PhaseGrid phase_grid_;
  std::vector<StateVector> states_;
};

// max over test states of ||(sum_z w |z><z|) v - v|| / ||v||.
double identity_resolution_residual(const CoherentFamily& family,
                                    const std::vector<StateVector>& test_states);

// Husimi diagonal <z|rho|z> at every family point (raw, unclamped).
Eigen::VectorXd husimi_diagonal(const DensityOperator& rho,
                                const CoherentFamily& family);

// The channel rho -> rho' = sum_z w P_z rho P_z. Each term is rank one with
// coefficient w * <z|rho|z>; diagonal values in [-1e-10, 0) are treated as
// quadrature noise and clamped to zero, anything lower is an error, so the
// output is positive semidefinite by construction. Output is exactly
// Hermitian.
DensityOperator coarse_grain(const DensityOperator& rho,
                             const CoherentFamily& family);

// max_z' |<z'|rho|z'> - <z'|rho'|z'>| with rho' = coarse_grain(rho).
// interior_margin > 0 restricts the scan to |q'|, |p'| <= Q - margin, where
// the truncated-window channel is meaningful.
double husimi_equivalence_error(const DensityOperator& rho,
                                const CoherentFamily& family,
                                double interior_margin = 0.0);

// Wave-function samples (x, Re psi, Im psi) of a grid state.
struct WaveSample {
  double x;
  double re;
  double im;
};
std::vector<WaveSample> wavefunction_samples(const StateVector& state,
                                             const PositionGrid& grid);

}  // namespace collapse
