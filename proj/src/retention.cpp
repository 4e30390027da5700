#include "collapse/retention.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace collapse {

namespace {

void check_pair_norm(const char* names, Complex x, Complex y, double tol) {
  const double sum = std::norm(x) + std::norm(y);
  if (std::abs(sum - 1.0) > tol) {
    std::ostringstream msg;
    msg << "amplitudes (" << names << ") must satisfy |x|^2 + |y|^2 = 1; got "
        << sum;
    throw NormalizationError(msg.str());
  }
}

// Tr P rho for branch weight x = |a|^2, with the projector fixed.
double trace_at_branch_weight(const Projector& p, double x) {
  RetentionSpec probe{std::sqrt(x), std::sqrt(1.0 - x), 1.0, 0.0};
  StateVector psi = build_entangled_state(probe);
  DensityOperator rho(psi.space(),
                      psi.amplitudes() * psi.amplitudes().adjoint());
  return event_probability(p, rho);
}

}  // namespace

void RetentionSpec::validate(double tol_norm) const {
  check_pair_norm("a, b", a, b, tol_norm);
  check_pair_norm("c, d", c, d, tol_norm);
}

TensorSpace retention_space() {
  return TensorSpace({Factor{"phi", 2, {}}, Factor{"chi", 2, {}}});
}

StateVector build_entangled_state(const RetentionSpec& spec) {
  spec.validate();
  TensorSpace space = retention_space();
  Vector amps = Vector::Zero(4);
  amps(0) = spec.a;  // phi1 chi1
  amps(3) = spec.b;  // phi2 chi2
  return StateVector(std::move(space), std::move(amps));
}

Projector superposition_projector(const RetentionSpec& spec) {
  spec.validate();
  TensorSpace space = retention_space();
  Vector macro(2);
  macro(0) = spec.c;
  macro(1) = spec.d;
  Projector local =
      outer_projector(StateVector(TensorSpace::single("phi", 2), macro));
  return lift_to_space(local, space, "phi");
}

DensityOperator decohered_mixture(const RetentionSpec& spec) {
  spec.validate();
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = std::norm(spec.a);
  m(3, 3) = std::norm(spec.b);
  return DensityOperator(retention_space(), std::move(m));
}

std::pair<double, double> retention_identity(const RetentionSpec& spec) {
  StateVector psi = build_entangled_state(spec);
  DensityOperator rho(psi.space(),
                      psi.amplitudes() * psi.amplitudes().adjoint());
  Projector p = superposition_projector(spec);
  return {event_probability(p, rho),
          event_probability(p, decohered_mixture(spec))};
}

std::vector<double> uniform_c_squared_grid(int n) {
  if (n < 2) {
    throw ConfigError("sensitivity sweep needs at least 2 grid points");
  }
  std::vector<double> grid(n);
  for (int i = 0; i < n; ++i) {
    grid[i] = static_cast<double>(i) / (n - 1);
  }
  return grid;
}

std::vector<SweepRow> sensitivity_sweep(const std::vector<double>& c_squared_grid,
                                        Complex a, Complex b, double fd_step) {
  check_pair_norm("a, b", a, b, kTolNorm);
  if (fd_step <= 0.0 || fd_step >= 0.5) {
    throw ConfigError("finite-difference step must lie in (0, 0.5)");
  }
  const double x0 = std::norm(a);
  // Tr P rho is linear in |a|^2, so the centered stencil may be shifted
  // inward at the boundaries without changing the measured slope.
  const double x_center = std::clamp(x0, fd_step, 1.0 - fd_step);

  std::vector<SweepRow> rows;
  rows.reserve(c_squared_grid.size());
  for (double c2 : c_squared_grid) {
    if (c2 < 0.0 || c2 > 1.0) {
      throw ConfigError("|c|^2 grid values must lie in [0, 1]");
    }
    const double d2 = 1.0 - c2;
    RetentionSpec spec{a, b, std::sqrt(c2), std::sqrt(d2)};
    auto [tr_rho, tr_mixture] = retention_identity(spec);
    (void)tr_mixture;

    Projector p = superposition_projector(spec);
    const double fd = (trace_at_branch_weight(p, x_center + fd_step) -
                       trace_at_branch_weight(p, x_center - fd_step)) /
                      (2.0 * fd_step);

    SweepRow row;
    row.c = std::sqrt(c2);
    row.c_squared = c2;
    row.sensitivity = c2 - d2;
    row.sensitivity_fd = fd;
    row.trace_p_rho = tr_rho;
    row.trace_p_rho_analytic = std::norm(a) * c2 + std::norm(b) * d2;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace collapse
