#include "collapse/attractor.hpp"

#include <doctest.h>

#include "oracles.hpp"

using namespace collapse;

namespace {

DensityOperator pure_density(const StateVector& v) {
  return DensityOperator(v.space(),
                         v.amplitudes() * v.amplitudes().adjoint());
}

// A generic in-window mixed state for limit tests.
DensityOperator generic_mixture(const PositionGrid& grid) {
  StateVector za = coherent_state(0.5, 0.5, grid);
  StateVector zb = coherent_state(-1.0, 0.3, grid);
  Matrix rho = 0.6 * (za.amplitudes() * za.amplitudes().adjoint()) +
               0.4 * (zb.amplitudes() * zb.amplitudes().adjoint());
  return DensityOperator(za.space(), rho);
}

}  // namespace

TEST_CASE("the target is a fixed point of the evolution at any time") {
  PositionGrid grid(11.0, 221);
  StateVector target = coherent_state(0.0, 0.0, grid);
  AttractorEvolution dynamics(target, 1.0);
  for (double t : {0.0, 1.0, 10.0, 100.0}) {
    const Vector moved = dynamics.operator_at(t) * target.amplitudes();
    CHECK((moved - target.amplitudes()).norm() <= 1e-12);
  }
}

TEST_CASE("the orthogonal sector contracts at the dissipation rate") {
  PositionGrid grid(11.0, 221);
  StateVector target = coherent_state(0.0, 0.0, grid);
  const double gamma = 1.7;
  AttractorEvolution dynamics(target, gamma);

  StateVector probe = coherent_state(2.0, -1.0, grid);
  Vector orth = probe.amplitudes() -
                target.amplitudes().dot(probe.amplitudes()) * target.amplitudes();
  orth /= orth.norm();
  for (double t : {0.3, 1.0, 4.0}) {
    const double measured = (dynamics.operator_at(t) * orth).norm();
    CHECK(std::abs(measured - std::exp(-gamma * t)) <= 1e-10);
  }
}

TEST_CASE("the evolution family composes as a semigroup") {
  PositionGrid grid(11.0, 221);
  AttractorEvolution dynamics(coherent_state(0.0, 0.0, grid), 0.8);
  const Matrix gap = dynamics.operator_at(0.6) * dynamics.operator_at(2.3) -
                     dynamics.operator_at(2.9);
  CHECK(gap.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("negative times and unnormalized targets are rejected") {
  PositionGrid grid(11.0, 221);
  StateVector target = coherent_state(0.0, 0.0, grid);
  AttractorEvolution dynamics(target, 1.0);
  CHECK_THROWS_AS(dynamics.operator_at(-0.1), GridError);
  CHECK_THROWS_AS(AttractorEvolution(target, 0.0), GridError);

  Vector doubled = 2.0 * target.amplitudes();
  CHECK_THROWS_AS(AttractorEvolution(StateVector(target.space(), doubled), 1.0),
                  NormalizationError);
}

TEST_CASE("the target projector is invariant under evolve") {
  PositionGrid grid(11.0, 221);
  StateVector target = coherent_state(0.0, 0.0, grid);
  AttractorEvolution dynamics(target, 1.0);
  DensityOperator rho0 = pure_density(target);
  for (double t : {0.0, 1.0, 10.0, 100.0}) {
    DensityOperator evolved = dynamics.evolve(rho0, t);
    CHECK((evolved.matrix() - rho0.matrix()).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("orthogonal states lose trace at twice the rate") {
  PositionGrid grid(11.0, 221);
  StateVector target = coherent_state(0.0, 0.0, grid);
  const double gamma = 1.0;
  AttractorEvolution dynamics(target, gamma);

  StateVector probe = coherent_state(2.0, 0.0, grid);
  Vector orth = probe.amplitudes() -
                target.amplitudes().dot(probe.amplitudes()) * target.amplitudes();
  orth /= orth.norm();
  DensityOperator rho(target.space(), orth * orth.adjoint());
  for (double t : {0.5, 2.0}) {
    DensityOperator evolved = dynamics.evolve(rho, t);
    CHECK(evolved.trace().real() ==
          doctest::Approx(std::exp(-2.0 * gamma * t)).epsilon(1e-12));
  }
}

TEST_CASE("long times project every matrix element onto the target") {
  PositionGrid grid(11.0, 221);
  StateVector target = coherent_state(0.0, 0.0, grid);
  AttractorEvolution dynamics(target, 1.0);
  DensityOperator rho = generic_mixture(grid);
  DensityOperator evolved = dynamics.evolve(rho, 20.0);

  const Complex center =
      target.amplitudes().dot(rho.matrix() * target.amplitudes());
  const double rho_norm = rho.matrix().norm();

  double worst = 0.0;
  for (double qa : {-1.0, 0.0, 1.5}) {
    for (double qb : {-0.5, 0.0, 2.0}) {
      StateVector za = coherent_state(qa, 0.4, grid);
      StateVector zb = coherent_state(qb, -0.2, grid);
      const Complex measured =
          za.amplitudes().dot(evolved.matrix() * zb.amplitudes());
      const Complex limit = za.amplitudes().dot(target.amplitudes()) * center *
                            target.amplitudes().dot(zb.amplitudes());
      worst = std::max(worst, std::abs(measured - limit));
    }
  }
  CHECK(worst <= 1e-6 * rho_norm);
}

TEST_CASE("degradation factor is one half under the Gaussian overlap law") {
  CoherentFamily family(PositionGrid(11.0, 221), PhaseGrid(5.0, 21));
  const double factor = degradation_factor(family);
  CHECK(factor > 0.0);
  CHECK(factor < 1.0);
  CHECK(std::abs(factor - 0.5) <= 1e-4);

  // strictly below the survival sum itself, which resolves to 1
  const StateVector target = coherent_state(0.0, 0.0, family.position_grid());
  const Matrix s = family.amplitude_matrix();
  const Vector overlaps = s.adjoint() * target.amplitudes();
  double survival_sum = 0.0;
  for (long m = 0; m < overlaps.size(); ++m) {
    survival_sum += family.phase_grid().weight() * std::norm(overlaps(m));
  }
  CHECK(std::abs(survival_sum - 1.0) <= 1e-4);
  CHECK(factor < survival_sum);
}

TEST_CASE("degradation factor is stable under quadrature refinement") {
  PositionGrid grid(11.0, 221);
  const double coarse = degradation_factor(CoherentFamily(grid, PhaseGrid(5.0, 21)));
  const double fine = degradation_factor(CoherentFamily(grid, PhaseGrid(5.0, 41)));
  CHECK(std::abs(coarse - fine) <= 1e-5);
}

TEST_CASE("survival ratios factor through the degradation constant") {
  CoherentFamily family(PositionGrid(11.0, 221), PhaseGrid(5.0, 21));
  const PositionGrid& grid = family.position_grid();
  StateVector target = coherent_state(0.0, 0.0, grid);
  DensityOperator rho0 = pure_density(target);

  const SurvivalReport report =
      survival_experiment(rho0, family, 20.0, 1.0, 1.5, 3);
  CHECK(report.gamma_t == doctest::Approx(20.0));
  CHECK(report.degradation == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(report.control_ratio == 1.0);  // the control arm skips the channel
  CHECK(report.max_ratio_deviation <= 1e-3);

  // the ratio at the origin pair and its uniformity across sampled pairs
  bool found_origin = false;
  for (const auto& sample : report.samples) {
    if (sample.z_row.q == 0.0 && sample.z_row.p == 0.0 &&
        sample.z_col.q == 0.0 && sample.z_col.p == 0.0) {
      REQUIRE(sample.ratio_defined);
      CHECK(std::abs(sample.ratio - 0.5) <= 1e-3);
      found_origin = true;
    }
    if (sample.ratio_defined) {
      CHECK(std::abs(sample.ratio - report.degradation) <= 1e-3);
    }
  }
  CHECK(found_origin);
}

TEST_CASE("survival experiment validates its inputs") {
  CoherentFamily family(PositionGrid(11.0, 221), PhaseGrid(5.0, 21));
  DensityOperator foreign =
      pure_density(coherent_state(0.0, 0.0, PositionGrid(12.0, 481)));
  CHECK_THROWS_AS(survival_experiment(foreign, family, 20.0), GridError);
}
