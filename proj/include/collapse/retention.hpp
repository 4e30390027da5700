#pragma once

#include <vector>

#include "collapse/hilbert.hpp"

namespace collapse {

// Macro branch amplitudes (a, b) and projector coefficients (c, d) for the
// entangled macro-micro model.
struct RetentionSpec {
  Complex a, b;
  Complex c, d;

  void validate(double tol_norm = kTolNorm) const;
};

// The 2 x 2 macro (x) micro space with factors "phi" and "chi".
TensorSpace retention_space();

// |psi> = a |phi1 chi1> + b |phi2 chi2>.
StateVector build_entangled_state(const RetentionSpec& spec);

// P = (c|phi1> + d|phi2>)(c*<phi1| + d*<phi2|) (x) I_chi.
Projector superposition_projector(const RetentionSpec& spec);

// rho' = |a|^2 |phi1 chi1><phi1 chi1| + |b|^2 |phi2 chi2><phi2 chi2|:
// the mixture left after the micro environment decoheres the branches.
DensityOperator decohered_mixture(const RetentionSpec& spec);

// (Tr P rho, Tr P rho'); both equal |a|^2 |c|^2 + |b|^2 |d|^2.
std::pair<double, double> retention_identity(const RetentionSpec& spec);

struct SweepRow {
  double c = 0.0;                  // sqrt of the grid value
  double c_squared = 0.0;          // grid value, |c|^2
  double sensitivity = 0.0;        // |c|^2 - |d|^2
  double sensitivity_fd = 0.0;     // finite-difference d(Tr P rho)/d|a|^2
  double trace_p_rho = 0.0;        // via matrices
  double trace_p_rho_analytic = 0.0;
};

// Sensitivity of the event probability to the branch weight |a|^2 along a
// grid of projector coefficients. The grid is uniform in |c|^2 so that an
// odd row count hits the symmetric point |c|^2 = 1/2 exactly.
std::vector<SweepRow> sensitivity_sweep(const std::vector<double>& c_squared_grid,
                                        Complex a, Complex b,
                                        double fd_step = 1e-3);

// Uniform |c|^2 grid with n points covering [0, 1].
std::vector<double> uniform_c_squared_grid(int n);

}  // namespace collapse
