#include "collapse/coherent.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace collapse {

namespace {

constexpr double kWindowMargin = 6.0;   // required position slack beyond Q
constexpr double kHusimiFloor = -1e-10; // tolerated quadrature negativity

}  // namespace

PositionGrid::PositionGrid(double extent_, int n_points_)
    : extent(extent_), n_points(n_points_) {
  if (extent <= 0.0) {
    throw GridError("position grid extent must be positive");
  }
  if (n_points < 3 || n_points % 2 == 0) {
    throw GridError("position grid needs an odd point count >= 3; got " +
                    std::to_string(n_points));
  }
  if (spacing() > 0.1) {
    std::ostringstream msg;
    msg << "position spacing " << spacing()
        << " exceeds 0.1 and cannot resolve the unit-width Gaussian";
    throw GridError(msg.str());
  }
}

PhaseGrid::PhaseGrid(double extent_, int n_per_axis_)
    : extent(extent_), n_per_axis(n_per_axis_) {
  if (extent <= 0.0) {
    throw GridError("phase grid extent must be positive");
  }
  if (n_per_axis < 2) {
    throw GridError("phase grid needs at least 2 points per axis");
  }
}

double PhaseGrid::weight() const {
  return spacing() * spacing() / (2.0 * std::numbers::pi);
}

PhaseGrid PhaseGrid::refined() const {
  return PhaseGrid(extent * 1.25, 2 * n_per_axis - 1);
}

TensorSpace position_space(const PositionGrid& grid) {
  return TensorSpace::single("x", grid.n_points);
}

StateVector coherent_state(double q, double p, const PositionGrid& grid) {
  return gaussian_wavepacket(q, p, 1.0, grid);
}

StateVector gaussian_wavepacket(double center_q, double center_p, double sigma,
                                const PositionGrid& grid) {
  if (sigma <= 0.0) {
    throw GridError("wavepacket width must be positive");
  }
  // Tail clearance 3 sigma + 2; for the unit-width coherent states this is
  // the |q| + 5 <= L support rule.
  const double clearance = 3.0 * sigma + 2.0;
  if (std::abs(center_q) + clearance > grid.extent) {
    std::ostringstream msg;
    msg << "wavepacket at q = " << center_q << " with width " << sigma
        << " is not supported inside the grid (|q| + " << clearance << " > "
        << grid.extent << ")";
    throw GridError(msg.str());
  }
  const double dx = grid.spacing();
  const double sqrt_dx = std::sqrt(dx);
  const double norm_const =
      std::pow(std::numbers::pi * sigma * sigma, -0.25);

  Vector amps(grid.n_points);
  for (int k = 0; k < grid.n_points; ++k) {
    const double x = grid.x(k);
    const double u = (x - center_q) / sigma;
    amps(k) = norm_const * std::exp(-0.5 * u * u) *
              std::exp(Complex(0.0, center_p * x)) * sqrt_dx;
  }
  amps /= amps.norm();  // quadrature norm exactly 1
  return StateVector(position_space(grid), std::move(amps));
}

Complex overlap(PhasePoint z1, PhasePoint z2, const PositionGrid& grid) {
  StateVector a = coherent_state(z1.q, z1.p, grid);
  StateVector b = coherent_state(z2.q, z2.p, grid);
  return a.amplitudes().dot(b.amplitudes());
}

CoherentFamily::CoherentFamily(PositionGrid position_grid, PhaseGrid phase_grid)
    : position_grid_(position_grid), phase_grid_(phase_grid) {
  if (position_grid_.extent < phase_grid_.extent + kWindowMargin) {
    std::ostringstream msg;
    msg << "position extent " << position_grid_.extent
        << " too small for phase extent " << phase_grid_.extent
        << "; need L >= Q + " << kWindowMargin;
    throw GridError(msg.str());
  }
  states_.reserve(phase_grid_.size());
  for (long m = 0; m < phase_grid_.size(); ++m) {
    const PhasePoint z = phase_point(m);
    states_.push_back(coherent_state(z.q, z.p, position_grid_));
  }
}

PhasePoint CoherentFamily::phase_point(long index) const {
  const int n = phase_grid_.n_per_axis;
  const long iq = index / n;
  const long ip = index % n;
  return PhasePoint{-phase_grid_.extent + iq * phase_grid_.spacing(),
                    -phase_grid_.extent + ip * phase_grid_.spacing()};
}

Matrix CoherentFamily::amplitude_matrix() const {
  Matrix s(position_grid_.n_points, states_.size());
  for (size_t m = 0; m < states_.size(); ++m) {
    s.col(m) = states_[m].amplitudes();
  }
  return s;
}

double identity_resolution_residual(
    const CoherentFamily& family, const std::vector<StateVector>& test_states) {
  const Matrix s = family.amplitude_matrix();
  const double w = family.phase_grid().weight();
  double worst = 0.0;
  for (const auto& v : test_states) {
    if (v.dim() != s.rows()) {
      throw GridError("test state does not live on the family's grid");
    }
    Vector coeff = s.adjoint() * v.amplitudes();
    Vector reconstructed = s * (w * coeff);
    const double residual =
        (reconstructed - v.amplitudes()).norm() / v.amplitudes().norm();
    worst = std::max(worst, residual);
  }
  return worst;
}

Eigen::VectorXd husimi_diagonal(const DensityOperator& rho,
                                const CoherentFamily& family) {
  if (rho.dim() != family.position_grid().n_points) {
    throw GridError("density operator does not live on the family's grid");
  }
  const Matrix s = family.amplitude_matrix();
  const Matrix t = rho.matrix() * s;
  Eigen::VectorXd h(s.cols());
  for (long m = 0; m < s.cols(); ++m) {
    h(m) = s.col(m).dot(t.col(m)).real();
  }
  return h;
}

DensityOperator coarse_grain(const DensityOperator& rho,
                             const CoherentFamily& family) {
  Eigen::VectorXd h = husimi_diagonal(rho, family);
  const double most_negative = h.minCoeff();
  if (most_negative < kHusimiFloor) {
    std::ostringstream msg;
    msg << "Husimi diagonal has negativity " << most_negative
        << " below the tolerated floor " << kHusimiFloor
        << "; input is not positive semidefinite";
    throw GridError(msg.str());
  }
  h = h.cwiseMax(0.0);

  const Matrix s = family.amplitude_matrix();
  const double w = family.phase_grid().weight();
  Matrix mixed = s * (w * h).asDiagonal() * s.adjoint();
  mixed = 0.5 * (mixed + mixed.adjoint().eval());
  return DensityOperator(rho.space(), std::move(mixed));
}

double husimi_equivalence_error(const DensityOperator& rho,
                                const CoherentFamily& family,
                                double interior_margin) {
  const Eigen::VectorXd before = husimi_diagonal(rho, family);
  const DensityOperator grained = coarse_grain(rho, family);
  const Eigen::VectorXd after = husimi_diagonal(grained, family);

  const double bound = family.phase_grid().extent - interior_margin;
  double worst = 0.0;
  for (long m = 0; m < before.size(); ++m) {
    const PhasePoint z = family.phase_point(m);
    if (std::abs(z.q) > bound || std::abs(z.p) > bound) continue;
    worst = std::max(worst, std::abs(before(m) - after(m)));
  }
  return worst;
}

std::vector<WaveSample> wavefunction_samples(const StateVector& state,
                                             const PositionGrid& grid) {
  if (state.dim() != grid.n_points) {
    throw GridError("state does not live on the given grid");
  }
  const double inv_sqrt_dx = 1.0 / std::sqrt(grid.spacing());
  std::vector<WaveSample> rows;
  rows.reserve(grid.n_points);
  for (int k = 0; k < grid.n_points; ++k) {
    const Complex psi = state.amplitudes()(k) * inv_sqrt_dx;
    rows.push_back(WaveSample{grid.x(k), psi.real(), psi.imag()});
  }
  return rows;
}

}  // namespace collapse
