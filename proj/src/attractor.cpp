#include "collapse/attractor.hpp"

#include <cmath>
#include <sstream>

namespace collapse {

AttractorEvolution::AttractorEvolution(StateVector target, double rate)
    : target_(std::move(target)), rate_(rate) {
  if (rate_ <= 0.0) {
    throw GridError("dissipation rate must be positive");
  }
  if (!target_.is_normalized()) {
    throw NormalizationError(
        "attractor target must be normalized to be a fixed point");
  }
}

Matrix AttractorEvolution::operator_at(double t) const {
  if (t < 0.0) {
    throw GridError("evolution time must be non-negative");
  }
  const double decay = std::exp(-rate_ * t);
  const long d = target_.dim();
  Matrix v = decay * Matrix::Identity(d, d);
  v.noalias() += (1.0 - decay) *
                 (target_.amplitudes() * target_.amplitudes().adjoint());
  return v;
}

DensityOperator AttractorEvolution::evolve(const DensityOperator& rho,
                                           double t) const {
  if (rho.dim() != target_.dim()) {
    throw DimensionError("state and attractor live on different spaces");
  }
  const Matrix v = operator_at(t);
  Matrix out = v * rho.matrix() * v.adjoint();
  return DensityOperator(rho.space(), std::move(out));
}

double degradation_factor(const CoherentFamily& family) {
  const StateVector target =
      coherent_state(0.0, 0.0, family.position_grid());
  const Matrix s = family.amplitude_matrix();
  const Vector overlaps = s.adjoint() * target.amplitudes();  // <z|0>
  const double w = family.phase_grid().weight();

  double sum = 0.0;
  for (long m = 0; m < overlaps.size(); ++m) {
    const double survival = std::norm(overlaps(m));  // <0|z><z|0>
    sum += w * survival * survival;
  }
  if (!(sum > 0.0 && sum < 1.0)) {
    std::ostringstream msg;
    msg << "degradation factor " << sum << " fell outside (0, 1)";
    throw GridError(msg.str());
  }
  return sum;
}

SurvivalReport survival_experiment(const DensityOperator& rho0,
                                   const CoherentFamily& family, double t,
                                   double rate, double sample_extent,
                                   int samples_per_axis,
                                   double smallness_cutoff) {
  const PositionGrid& grid = family.position_grid();
  if (rho0.dim() != grid.n_points) {
    throw GridError("initial state does not live on the family's grid");
  }
  if (samples_per_axis < 1) {
    throw GridError("need at least one sample per axis");
  }

  AttractorEvolution dynamics(coherent_state(0.0, 0.0, grid), rate);
  const DensityOperator direct = dynamics.evolve(rho0, t);
  const DensityOperator grained = dynamics.evolve(coarse_grain(rho0, family), t);

  // Sample coherent states on a small lattice well inside the window.
  std::vector<PhasePoint> points;
  std::vector<StateVector> probes;
  const int n = samples_per_axis;
  for (int iq = 0; iq < n; ++iq) {
    for (int ip = 0; ip < n; ++ip) {
      const double step = (n == 1) ? 0.0 : 2.0 * sample_extent / (n - 1);
      const PhasePoint z{-sample_extent + iq * step,
                         -sample_extent + ip * step};
      points.push_back(z);
      probes.push_back(coherent_state(z.q, z.p, grid));
    }
  }

  SurvivalReport report;
  report.gamma_t = rate * t;
  report.degradation = degradation_factor(family);

  bool control_set = false;
  for (size_t i = 0; i < probes.size(); ++i) {
    const Vector direct_row = direct.matrix() * probes[i].amplitudes();
    const Vector grained_row = grained.matrix() * probes[i].amplitudes();
    for (size_t j = 0; j < probes.size(); ++j) {
      SurvivalSample sample;
      sample.z_row = points[j];
      sample.z_col = points[i];
      sample.direct = probes[j].amplitudes().dot(direct_row);
      sample.grained = probes[j].amplitudes().dot(grained_row);
      sample.ratio_defined = std::abs(sample.direct) > smallness_cutoff;
      sample.ratio =
          sample.ratio_defined ? (sample.grained / sample.direct).real() : 0.0;
      if (sample.ratio_defined) {
        report.max_ratio_deviation =
            std::max(report.max_ratio_deviation,
                     std::abs(sample.ratio - report.degradation));
        if (!control_set) {
          // Control arm: skip the coarse graining and compare the direct
          // matrix element with itself.
          report.control_ratio = (sample.direct / sample.direct).real();
          control_set = true;
        }
      }
      report.samples.push_back(sample);
    }
  }
  return report;
}

}  // namespace collapse
