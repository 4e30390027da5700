#include "collapse/runner.hpp"

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <random>
#include <sstream>

#include "collapse/attractor.hpp"
#include "collapse/chain.hpp"
#include "collapse/coherent.hpp"
#include "collapse/retention.hpp"

namespace collapse {

namespace {

nlohmann::ordered_json complex_json(Complex z) {
  return nlohmann::ordered_json::array({z.real(), z.imag()});
}

double pair_norm_error(Complex x, Complex y) {
  return std::abs(std::norm(x) + std::norm(y) - 1.0);
}

// Normalized complex pair drawn from an isotropic Gaussian.
std::pair<Complex, Complex> random_pair(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  while (true) {
    Complex x(gauss(rng), gauss(rng));
    Complex y(gauss(rng), gauss(rng));
    const double n = std::sqrt(std::norm(x) + std::norm(y));
    if (n > 1e-6) return {x / n, y / n};
  }
}

TwoObserverSpec random_observer_spec(std::mt19937_64& rng) {
  TwoObserverSpec spec;
  std::tie(spec.a, spec.b) = random_pair(rng);
  std::tie(spec.e, spec.f) = random_pair(rng);
  std::tie(spec.g, spec.h) = random_pair(rng);
  std::tie(spec.p, spec.q) = random_pair(rng);
  std::tie(spec.r, spec.s) = random_pair(rng);
  return spec;
}

// Expected collapse probability for one of observer a's brain tags.
double expected_tag_probability(const ObserverParams& params,
                                const std::string& tag) {
  if (tag == "1x") return std::norm(params.a) * std::norm(params.e);
  if (tag == "1y") return std::norm(params.a) * std::norm(params.f);
  if (tag == "2u") return std::norm(params.b) * std::norm(params.p);
  if (tag == "2v") return std::norm(params.b) * std::norm(params.q);
  throw ConfigError("unknown brain tag '" + tag + "'");
}

TwoObserverSpec to_spec(const ObserverParams& p) {
  return TwoObserverSpec{p.a, p.b, p.e, p.f, p.g, p.h, p.p, p.q, p.r, p.s};
}

// Largest amplitude outside the support that a collapse onto the given
// brain tag must leave: all non-brain factors pinned to the tag's branch,
// factor 4a pinned to the tag, factor 4b free within the branch.
double support_leak(const StateVector& state, const std::string& tag) {
  const TensorSpace& space = state.space();
  const int branch = (tag[0] == '1') ? 0 : 1;
  const int pos_1 = space.factor_position("1");
  const int pos_2 = space.factor_position("2");
  const int pos_3a = space.factor_position("3a");
  const int pos_4a = space.factor_position("4a");
  const int pos_3b = space.factor_position("3b");
  const int pos_4b = space.factor_position("4b");
  const int tag_idx = space.tag_index("4a", tag);

  double leak = 0.0;
  for (long i = 0; i < state.dim(); ++i) {
    const auto idx = space.unpack(i);
    const bool in_support =
        idx[pos_1] == branch && idx[pos_2] == branch &&
        idx[pos_3a] == branch && idx[pos_4a] == tag_idx &&
        idx[pos_3b] == branch && idx[pos_4b] / 2 == branch;
    if (!in_support) {
      leak = std::max(leak, std::abs(state.amplitudes()(i)));
    }
  }
  return leak;
}

constexpr double kTight = 1e-12;

std::string experiment_kind(const std::string& tag) {
  return std::string(1, tag[0]);
}

}  // namespace

Complex parse_complex(const std::string& text) {
  std::string s;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  }
  if (s.empty()) throw ConfigError("empty amplitude");

  // Split into at most two signed terms, ignoring signs inside exponents.
  std::vector<std::string> terms;
  size_t start = 0;
  for (size_t i = 1; i < s.size(); ++i) {
    if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
      terms.push_back(s.substr(start, i - start));
      start = i;
    }
  }
  terms.push_back(s.substr(start));
  if (terms.size() > 2) {
    throw ConfigError("cannot parse amplitude '" + text + "'");
  }

  double re = 0.0, im = 0.0;
  bool saw_re = false, saw_im = false;
  for (std::string term : terms) {
    const bool imaginary = !term.empty() && (term.back() == 'i' || term.back() == 'I');
    if (imaginary) {
      term.pop_back();
      if (term.empty() || term == "+") term = "1";
      if (term == "-") term = "-1";
    }
    char* end = nullptr;
    const double value = std::strtod(term.c_str(), &end);
    if (end == term.c_str() || *end != '\0') {
      throw ConfigError("cannot parse amplitude '" + text + "'");
    }
    if (imaginary) {
      if (saw_im) throw ConfigError("duplicate imaginary part in '" + text + "'");
      im = value;
      saw_im = true;
    } else {
      if (saw_re) throw ConfigError("duplicate real part in '" + text + "'");
      re = value;
      saw_re = true;
    }
  }
  return Complex(re, im);
}

std::string default_output_path(const std::string& experiment,
                                const std::string& format) {
  return experiment + (format == "csv" ? "_table.csv" : "_report.json");
}

std::vector<std::string> validate(const ExperimentConfig& config) {
  std::vector<std::string> violations;
  auto flag = [&](const std::string& msg) { violations.push_back(msg); };

  const bool known_experiment =
      config.experiment == "chain" || config.experiment == "observers" ||
      config.experiment == "coherent" || config.experiment == "survival" ||
      config.experiment == "retention" || config.experiment == "all";
  if (!known_experiment) {
    flag("unknown experiment '" + config.experiment + "'");
  }
  if (config.format != "json" && config.format != "csv") {
    flag("output format must be json or csv; got '" + config.format + "'");
  }
  if (config.experiment == "all" && config.format == "csv") {
    flag("experiment 'all' aggregates differently shaped tables; use json");
  }
  if (!(config.tolerance_scale > 0.0)) {
    flag("tolerance scale must be positive");
  }

  auto check_pair = [&](const char* names, Complex x, Complex y) {
    const double err = pair_norm_error(x, y);
    if (err > kTolNorm) {
      std::ostringstream msg;
      msg << "amplitudes (" << names
          << ") violate the normalization constraint |x|^2 + |y|^2 = 1 "
             "(deviation "
          << err << ", tolerance " << kTolNorm << ")";
      flag(msg.str());
    }
  };
  auto check_grids = [&](const char* what, double l, int n_pos, double q,
                         int n_phase) {
    if (l <= 0.0) flag(std::string(what) + ": position extent must be positive");
    if (n_pos < 3 || n_pos % 2 == 0) {
      flag(std::string(what) + ": position grid needs an odd point count >= 3");
    } else if (l > 0.0 && 2.0 * l / (n_pos - 1) > 0.1) {
      std::ostringstream msg;
      msg << what << ": position spacing " << 2.0 * l / (n_pos - 1)
          << " violates the resolution rule dx <= 0.1";
      flag(msg.str());
    }
    if (q <= 0.0) flag(std::string(what) + ": phase extent must be positive");
    if (n_phase < 2) flag(std::string(what) + ": phase grid needs >= 2 points per axis");
    if (l < q + 6.0) {
      std::ostringstream msg;
      msg << what << ": position extent " << l
          << " must cover the phase window (L >= Q + 6)";
      flag(msg.str());
    }
  };

  if (config.experiment == "chain" || config.experiment == "all") {
    check_pair("a, b", config.chain.a, config.chain.b);
    if (config.chain.levels < 2 || config.chain.levels > 20) {
      flag("chain levels must lie in 2..20");
    }
  }
  if (config.experiment == "observers" || config.experiment == "all") {
    const ObserverParams& o = config.observers;
    check_pair("a, b", o.a, o.b);
    check_pair("e, f", o.e, o.f);
    check_pair("g, h", o.g, o.h);
    check_pair("p, q", o.p, o.q);
    check_pair("r, s", o.r, o.s);
    if (o.tag != "1x" && o.tag != "1y" && o.tag != "2u" && o.tag != "2v") {
      flag("observer tag must be one of 1x, 1y, 2u, 2v");
    }
    if (o.trials < 1) flag("observers: trials must be >= 1");
  }
  if (config.experiment == "coherent" || config.experiment == "all") {
    const CoherentParams& c = config.coherent;
    check_grids("coherent", c.position_extent, c.position_points,
                c.phase_extent, c.phase_points);
    if (c.phase_extent < 6.0) {
      flag("coherent: phase extent must be >= 6 so the canonical test states "
           "sit inside the window");
    }
    if (std::abs(c.state_q) > c.phase_extent - 4.0 ||
        std::abs(c.state_p) > c.phase_extent - 4.0) {
      flag("coherent: exported state must sit inside the window "
           "(|q|, |p| <= Q - 4)");
    }
  }
  if (config.experiment == "survival" || config.experiment == "all") {
    const SurvivalParams& s = config.survival;
    check_grids("survival", s.position_extent, s.position_points,
                s.phase_extent, s.phase_points);
    if (!(s.gamma > 0.0)) flag("survival: gamma must be positive");
    if (s.gamma * s.time < 20.0) {
      flag("survival: need gamma * t >= 20 for the large-time limit");
    }
    if (s.samples_per_axis < 1) flag("survival: samples_per_axis must be >= 1");
    if (s.sample_extent < 0.0 || s.sample_extent > s.phase_extent - 2.0) {
      flag("survival: sample extent must lie in [0, Q - 2]");
    }
  }
  if (config.experiment == "retention" || config.experiment == "all") {
    const RetentionParams& r = config.retention;
    check_pair("a, b", r.a, r.b);
    if (r.sweep < 2) flag("retention: sweep needs at least 2 rows");
    if (!(r.fd_step > 0.0 && r.fd_step < 0.5)) {
      flag("retention: finite-difference step must lie in (0, 0.5)");
    }
    if (r.trials < 1) flag("retention: trials must be >= 1");
  }
  return violations;
}

ExperimentResult run_chain(const ChainParams& params, double tolerance_scale) {
  ExperimentResult result;
  ExperimentReport& report = result.report;
  report.experiment = "chain";
  report.inputs = {{"a", complex_json(params.a)},
                   {"b", complex_json(params.b)},
                   {"levels", params.levels}};

  ChainSpec spec{params.levels, params.a, params.b};
  const double expected[2] = {std::norm(params.a), std::norm(params.b)};

  result.csv_header = {"level", "outcome", "probability"};
  nlohmann::ordered_json table = nlohmann::ordered_json::array();
  double max_level_variation = 0.0;
  double max_born_error = 0.0;
  double max_completeness_error = 0.0;
  double reference[2] = {0.0, 0.0};
  for (int n = 1; n <= params.levels; ++n) {
    double row_sum = 0.0;
    for (int j = 1; j <= 2; ++j) {
      const BranchOutcome outcome = chain_outcome_probability(spec, n, j);
      row_sum += outcome.probability;
      if (n == 1) {
        reference[j - 1] = outcome.probability;
      } else {
        max_level_variation = std::max(
            max_level_variation, std::abs(outcome.probability - reference[j - 1]));
      }
      max_born_error = std::max(
          max_born_error, std::abs(outcome.probability - expected[j - 1]));
      result.csv_rows.push_back({outcome.level, outcome.outcome,
                                 csv_number(clamp_probability(outcome.probability))});
      table.push_back({{"level", n},
                       {"outcome", j},
                       {"probability", clamp_probability(outcome.probability)}});
    }
    max_completeness_error =
        std::max(max_completeness_error, std::abs(row_sum - 1.0));
  }
  report.quantities.push_back(
      Quantity{"outcome_probabilities", "level_independence", table});

  report.checks.push_back(make_check("level_independence", "level_independence",
                                     max_level_variation,
                                     kTight * tolerance_scale));
  report.checks.push_back(make_check("outcome_probability_value", "born_rule",
                                     max_born_error, kTight * tolerance_scale));
  report.checks.push_back(make_check("outcome_completeness",
                                     "branch_completeness",
                                     max_completeness_error,
                                     kTight * tolerance_scale));
  return result;
}

ExperimentResult run_observers(const ObserverParams& params,
                               std::uint64_t seed, double tolerance_scale) {
  ExperimentResult result;
  ExperimentReport& report = result.report;
  report.experiment = "observers";
  report.inputs = {{"a", complex_json(params.a)}, {"b", complex_json(params.b)},
                   {"e", complex_json(params.e)}, {"f", complex_json(params.f)},
                   {"g", complex_json(params.g)}, {"h", complex_json(params.h)},
                   {"p", complex_json(params.p)}, {"q", complex_json(params.q)},
                   {"r", complex_json(params.r)}, {"s", complex_json(params.s)},
                   {"tag", params.tag},
                   {"trials", params.trials}};
  report.seed = seed;

  const TwoObserverSpec spec = to_spec(params);
  StateVector psi = build_two_observer_state(spec);

  // Per-tag collapse table.
  result.csv_header = {"tag", "probability", "agreement"};
  nlohmann::ordered_json table = nlohmann::ordered_json::array();
  double probe_probability = 0.0;
  double probe_leak = 0.0;
  int probe_agreement = -1;
  for (const std::string tag : {"1x", "1y", "2u", "2v"}) {
    double probability = 0.0;
    std::string agreement_text = "zero-probability";
    try {
      auto [collapsed, p] = observer_a_collapse(psi, tag);
      probability = p;
      auto agreement = agreement_check(collapsed);
      agreement_text =
          agreement ? std::to_string(*agreement) : "disagreement";
      if (tag == params.tag) {
        probe_probability = p;
        probe_leak = support_leak(collapsed, tag);
        probe_agreement = agreement ? *agreement : -1;
      }
    } catch (const ZeroProbabilityError&) {
      if (tag == params.tag) {
        throw;  // the configured tag must be reachable
      }
    }
    result.csv_rows.push_back(
        {tag, csv_number(clamp_probability(probability)), agreement_text});
    table.push_back({{"tag", tag},
                     {"probability", clamp_probability(probability)},
                     {"agreement", agreement_text}});
  }
  report.quantities.push_back(
      Quantity{"collapse_outcomes", "intersubjective_agreement", table});

  const double expected = expected_tag_probability(params, params.tag);
  report.checks.push_back(make_check(
      "collapse_probability_" + params.tag, "collapse_probability_product",
      std::abs(probe_probability - expected), kTight * tolerance_scale));
  report.checks.push_back(make_check("support_confined_to_branch",
                                     "intersubjective_agreement", probe_leak,
                                     kTight * tolerance_scale));
  const int expected_branch = experiment_kind(params.tag) == "1" ? 1 : 2;
  report.checks.push_back(make_check(
      "agreement_outcome", "intersubjective_agreement",
      probe_agreement == expected_branch ? 0.0 : 1.0, 0.0));

  // Completeness over the eight branch-consistent two-collapse sequences.
  double total = 0.0;
  for (const std::string tag_a : {"1x", "1y", "2u", "2v"}) {
    const int branch = tag_a[0] == '1' ? 0 : 1;
    for (const std::string& tag_b :
         branch == 0 ? std::vector<std::string>{"1z", "1w"}
                     : std::vector<std::string>{"2c", "2d"}) {
      try {
        auto [after_a, p_a] = observer_a_collapse(psi, tag_a);
        auto [after_b, p_b] = brain_collapse(after_a, "4b", tag_b);
        (void)after_b;
        total += p_a * p_b;
      } catch (const ZeroProbabilityError&) {
        // measure-zero sequence contributes nothing
      }
    }
  }
  report.quantities.push_back(Quantity{"sequence_probability_sum",
                                       "branch_completeness", total});
  report.checks.push_back(make_check("sequence_completeness",
                                     "branch_completeness",
                                     std::abs(total - 1.0),
                                     kTight * tolerance_scale));

  // Randomized prior-event equivalence batch.
  std::mt19937_64 rng(seed);
  double worst_discrepancy = 0.0;
  for (int trial = 0; trial < params.trials; ++trial) {
    const PriorEventReport r = prior_event_equivalence(random_observer_spec(rng));
    worst_discrepancy = std::max(worst_discrepancy, r.discrepancy);
  }
  report.quantities.push_back(Quantity{"prior_event_max_discrepancy",
                                       "prior_event_equivalence",
                                       worst_discrepancy});
  report.checks.push_back(make_check("prior_event_equivalence",
                                     "prior_event_equivalence",
                                     worst_discrepancy,
                                     kTight * tolerance_scale));
  return result;
}

ExperimentResult run_coherent(const CoherentParams& params,
                              double tolerance_scale) {
  ExperimentResult result;
  ExperimentReport& report = result.report;
  report.experiment = "coherent";
  report.inputs = {{"position_extent", params.position_extent},
                   {"position_points", params.position_points},
                   {"phase_extent", params.phase_extent},
                   {"phase_points", params.phase_points},
                   {"state_q", params.state_q},
                   {"state_p", params.state_p}};

  const PositionGrid grid(params.position_extent, params.position_points);
  const PhaseGrid phase(params.phase_extent, params.phase_points);

  // Norms and the overlap law on a 5 x 5 phase sample.
  double worst_norm = 0.0;
  double worst_overlap = 0.0;
  for (int iq = -2; iq <= 2; ++iq) {
    for (int ip = -2; ip <= 2; ++ip) {
      const double q = static_cast<double>(iq);
      const double p = static_cast<double>(ip);
      StateVector z = coherent_state(q, p, grid);
      worst_norm = std::max(worst_norm, std::abs(z.norm_squared() - 1.0));
      const Complex o = overlap(PhasePoint{0.0, 0.0}, PhasePoint{q, p}, grid);
      worst_overlap = std::max(
          worst_overlap,
          std::abs(std::norm(o) - std::exp(-0.5 * (q * q + p * p))));
    }
  }
  report.checks.push_back(make_check("quadrature_norm", "state_normalization",
                                     worst_norm, kTight * tolerance_scale));
  report.checks.push_back(make_check("overlap_gaussian_law", "overlap_kernel",
                                     worst_overlap, 1e-6 * tolerance_scale));

  CoherentFamily family(grid, phase);

  // Identity resolution on canonical in-window probes.
  const std::vector<StateVector> probes = {
      coherent_state(0.0, 0.0, grid),
      coherent_state(1.0, 0.0, grid),
      coherent_state(0.0, 1.0, grid),
      gaussian_wavepacket(0.0, 0.0, 0.8, grid),
      gaussian_wavepacket(0.0, 0.0, 1.25, grid),
      gaussian_wavepacket(-1.0, -0.5, 0.9, grid),
  };
  const double residual = identity_resolution_residual(family, probes);
  report.quantities.push_back(
      Quantity{"identity_residual", "identity_resolution", residual});
  report.checks.push_back(make_check("identity_resolution",
                                     "identity_resolution", residual,
                                     1e-3 * tolerance_scale));

  // Channel trace preservation on the exported state.
  StateVector probe = coherent_state(params.state_q, params.state_p, grid);
  DensityOperator rho(probe.space(),
                      probe.amplitudes() * probe.amplitudes().adjoint());
  DensityOperator grained = coarse_grain(rho, family);
  const double trace_error =
      std::abs((grained.trace() - rho.trace()).real()) +
      std::abs((grained.trace() - rho.trace()).imag());
  report.quantities.push_back(
      Quantity{"channel_trace", "trace_preservation", grained.trace().real()});
  report.checks.push_back(make_check("channel_trace_preservation",
                                     "trace_preservation", trace_error,
                                     1e-5 * tolerance_scale));

  // Husimi smoothing of a width-2 packet against the closed-form error.
  {
    const double sigma = 2.0;
    const double vq = (sigma * sigma + 1.0) / 2.0;
    const double vp = (sigma * sigma + 1.0) / (2.0 * sigma * sigma);
    const double peak = 1.0 / std::sqrt(vq * vp);
    const double smoothed_peak = 1.0 / std::sqrt((vq + 1.0) * (vp + 1.0));
    const double analytic = peak - smoothed_peak;

    StateVector wide = gaussian_wavepacket(0.0, 0.0, sigma, grid);
    DensityOperator rho_wide(wide.space(),
                             wide.amplitudes() * wide.amplitudes().adjoint());
    const double measured = husimi_equivalence_error(rho_wide, family);
    report.quantities.push_back(
        Quantity{"husimi_smoothing_error", "husimi_equivalence", measured});
    report.checks.push_back(make_check("husimi_smoothing_error",
                                       "husimi_equivalence",
                                       std::abs(measured - analytic),
                                       0.02 * tolerance_scale));
  }

  // Plot table: the exported wave function.
  result.csv_header = {"x", "re_psi", "im_psi"};
  for (const WaveSample& s : wavefunction_samples(probe, grid)) {
    result.csv_rows.push_back(
        {csv_number(s.x), csv_number(s.re), csv_number(s.im)});
  }
  return result;
}

ExperimentResult run_survival(const SurvivalParams& params,
                              double tolerance_scale) {
  ExperimentResult result;
  ExperimentReport& report = result.report;
  report.experiment = "survival";
  report.inputs = {{"position_extent", params.position_extent},
                   {"position_points", params.position_points},
                   {"phase_extent", params.phase_extent},
                   {"phase_points", params.phase_points},
                   {"gamma", params.gamma},
                   {"time", params.time},
                   {"sample_extent", params.sample_extent},
                   {"samples_per_axis", params.samples_per_axis}};

  const PositionGrid grid(params.position_extent, params.position_points);
  const PhaseGrid phase(params.phase_extent, params.phase_points);
  CoherentFamily family(grid, phase);

  StateVector target = coherent_state(0.0, 0.0, grid);
  AttractorEvolution dynamics(target, params.gamma);

  // Attractor algebra at the configured horizon.
  {
    const Matrix v = dynamics.operator_at(params.time);
    const double fixed_point_error =
        (v * target.amplitudes() - target.amplitudes()).norm();
    report.checks.push_back(make_check("attractor_fixed_point",
                                       "attractor_fixed_point",
                                       fixed_point_error,
                                       kTight * tolerance_scale));

    const double t1 = 0.7, t2 = 1.9;
    const Matrix semigroup_gap = dynamics.operator_at(t1) * dynamics.operator_at(t2) -
                                 dynamics.operator_at(t1 + t2);
    report.checks.push_back(make_check(
        "semigroup_composition", "semigroup",
        semigroup_gap.cwiseAbs().maxCoeff(), kTight * tolerance_scale));

    // Orthogonal-sector contraction at a point where exp(-gamma t) is
    // comfortably representable.
    StateVector probe = coherent_state(1.5, -0.5, grid);
    Vector orth = probe.amplitudes() -
                  target.amplitudes().dot(probe.amplitudes()) * target.amplitudes();
    orth /= orth.norm();
    const double t_decay = 3.0;
    const double measured = (dynamics.operator_at(t_decay) * orth).norm();
    report.checks.push_back(make_check(
        "orthogonal_sector_decay", "orthogonal_decay",
        std::abs(measured - std::exp(-params.gamma * t_decay)),
        1e-10 * tolerance_scale));
  }

  DensityOperator rho0(target.space(),
                       target.amplitudes() * target.amplitudes().adjoint());
  const SurvivalReport survival = survival_experiment(
      rho0, family, params.time, params.gamma, params.sample_extent,
      params.samples_per_axis);

  report.quantities.push_back(
      Quantity{"degradation_factor", "degradation_factor", survival.degradation});
  report.quantities.push_back(
      Quantity{"control_ratio", "survival_ratio_factorization",
               survival.control_ratio});
  report.quantities.push_back(
      Quantity{"max_ratio_deviation", "survival_ratio_factorization",
               survival.max_ratio_deviation});

  const double inside_error =
      std::max(0.0, std::max(-survival.degradation, survival.degradation - 1.0));
  report.checks.push_back(make_check("degradation_in_unit_interval",
                                     "degradation_factor", inside_error, 0.0));
  report.checks.push_back(make_check("degradation_gaussian_value",
                                     "degradation_factor",
                                     std::abs(survival.degradation - 0.5),
                                     1e-4 * tolerance_scale));
  report.checks.push_back(make_check("control_ratio_is_one",
                                     "survival_ratio_factorization",
                                     std::abs(survival.control_ratio - 1.0),
                                     0.0));
  report.checks.push_back(make_check("grained_ratio_factorizes",
                                     "survival_ratio_factorization",
                                     survival.max_ratio_deviation,
                                     1e-3 * tolerance_scale));

  result.csv_header = {"q_row", "p_row", "q_col", "p_col", "ratio"};
  for (const SurvivalSample& s : survival.samples) {
    if (!s.ratio_defined) continue;
    result.csv_rows.push_back({csv_number(s.z_row.q), csv_number(s.z_row.p),
                               csv_number(s.z_col.q), csv_number(s.z_col.p),
                               csv_number(s.ratio)});
  }
  return result;
}

ExperimentResult run_retention(const RetentionParams& params,
                               std::uint64_t seed, double tolerance_scale) {
  ExperimentResult result;
  ExperimentReport& report = result.report;
  report.experiment = "retention";
  report.inputs = {{"a", complex_json(params.a)},
                   {"b", complex_json(params.b)},
                   {"sweep", params.sweep},
                   {"fd_step", params.fd_step},
                   {"trials", params.trials}};
  report.seed = seed;

  const auto rows = sensitivity_sweep(uniform_c_squared_grid(params.sweep),
                                      params.a, params.b, params.fd_step);

  result.csv_header = {"c", "sensitivity", "trace_p_rho_analytic",
                       "trace_p_rho_numeric"};
  nlohmann::ordered_json table = nlohmann::ordered_json::array();
  double max_fd_error = 0.0;
  double symmetric_sensitivity = 0.0;
  bool has_symmetric_row = false;
  double max_interior = 0.0, max_boundary = 0.0;
  for (const SweepRow& row : rows) {
    max_fd_error =
        std::max(max_fd_error, std::abs(row.sensitivity_fd - row.sensitivity));
    if (row.c_squared == 0.5) {
      has_symmetric_row = true;
      symmetric_sensitivity = std::abs(row.sensitivity);
    }
    if (row.c_squared == 0.0 || row.c_squared == 1.0) {
      max_boundary = std::max(max_boundary, std::abs(row.sensitivity));
    } else {
      max_interior = std::max(max_interior, std::abs(row.sensitivity));
    }
    result.csv_rows.push_back({csv_number(row.c), csv_number(row.sensitivity),
                               csv_number(row.trace_p_rho_analytic),
                               csv_number(row.trace_p_rho)});
    table.push_back({{"c", row.c},
                     {"sensitivity", row.sensitivity},
                     {"trace_p_rho_analytic", row.trace_p_rho_analytic},
                     {"trace_p_rho_numeric", row.trace_p_rho}});
  }
  report.quantities.push_back(
      Quantity{"sensitivity_sweep", "information_sensitivity", table});

  report.checks.push_back(make_check("finite_difference_consistency",
                                     "information_sensitivity", max_fd_error,
                                     1e-8 * tolerance_scale));
  if (has_symmetric_row) {
    report.checks.push_back(make_check("symmetric_projector_blindness",
                                       "information_sensitivity",
                                       symmetric_sensitivity,
                                       kTight * tolerance_scale));
  }
  report.checks.push_back(make_check(
      "sensitivity_maximal_at_classical_projectors", "information_sensitivity",
      std::max(0.0, max_interior - max_boundary), 0.0));

  // Randomized identity batch.
  std::mt19937_64 rng(seed);
  double max_identity_gap = 0.0;
  double max_formula_gap = 0.0;
  for (int trial = 0; trial < params.trials; ++trial) {
    RetentionSpec spec;
    std::tie(spec.a, spec.b) = random_pair(rng);
    std::tie(spec.c, spec.d) = random_pair(rng);
    const auto [tr_rho, tr_mixture] = retention_identity(spec);
    const double formula = std::norm(spec.a) * std::norm(spec.c) +
                           std::norm(spec.b) * std::norm(spec.d);
    max_identity_gap = std::max(max_identity_gap, std::abs(tr_rho - tr_mixture));
    max_formula_gap = std::max(max_formula_gap, std::abs(tr_rho - formula));
  }
  report.quantities.push_back(Quantity{"max_identity_gap", "retention_identity",
                                       max_identity_gap});
  report.checks.push_back(make_check("trace_identity_random_batch",
                                     "retention_identity", max_identity_gap,
                                     kTight * tolerance_scale));
  report.checks.push_back(make_check("trace_formula_random_batch",
                                     "retention_identity", max_formula_gap,
                                     kTight * tolerance_scale));
  return result;
}

RunOutcome run(const ExperimentConfig& config) {
  RunOutcome outcome;
  const std::vector<std::string> violations = validate(config);
  if (!violations.empty()) {
    outcome.exit_code = kExitConfigError;
    return outcome;
  }

  std::vector<std::string> order;
  if (config.experiment == "all") {
    order = {"chain", "observers", "coherent", "survival", "retention"};
  } else {
    order = {config.experiment};
  }

  std::vector<ExperimentResult> results;
  for (const std::string& name : order) {
    ExperimentResult result;
    if (name == "chain") {
      result = run_chain(config.chain, config.tolerance_scale);
    } else if (name == "observers") {
      result = run_observers(config.observers, config.seed,
                             config.tolerance_scale);
    } else if (name == "coherent") {
      result = run_coherent(config.coherent, config.tolerance_scale);
    } else if (name == "survival") {
      result = run_survival(config.survival, config.tolerance_scale);
    } else {
      result = run_retention(config.retention, config.seed,
                             config.tolerance_scale);
    }
    result.report.seed = config.seed;
    results.push_back(std::move(result));
  }

  const std::string path = config.output_path.empty()
                               ? default_output_path(config.experiment,
                                                     config.format)
                               : config.output_path;
  try {
    if (config.format == "csv") {
      // Single experiment; 'all' with csv is rejected by validate().
      write_text_atomic(path,
                        render_csv(results[0].csv_header, results[0].csv_rows));
    } else if (config.experiment == "all") {
      nlohmann::ordered_json aggregate;
      aggregate["experiments"] = nlohmann::ordered_json::array();
      bool all_passed = true;
      for (const auto& r : results) {
        aggregate["experiments"].push_back(r.report.to_json());
        all_passed = all_passed && r.report.passed();
      }
      aggregate["passed"] = all_passed;
      write_text_atomic(path, aggregate.dump(2) + "\n");
    } else {
      write_text_atomic(path, results[0].report.to_json().dump(2) + "\n");
    }
  } catch (const Error&) {
    outcome.exit_code = kExitIoError;
    for (auto& r : results) outcome.reports.push_back(std::move(r.report));
    return outcome;
  }
  outcome.outputs_written.push_back(path);

  bool all_passed = true;
  for (auto& r : results) {
    all_passed = all_passed && r.report.passed();
    outcome.reports.push_back(std::move(r.report));
  }
  outcome.exit_code = all_passed ? kExitPass : kExitCheckFailure;
  return outcome;
}

}  // namespace collapse
