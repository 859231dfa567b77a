#pragma once

// Batch command drivers behind the command-line tool. Each run_* function
// takes a validated configuration, computes deterministically, and returns
// the CSV/report text; the binary maps exceptions onto exit codes.

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cutofflab/bounds.hpp"
#include "cutofflab/config.hpp"
#include "cutofflab/csv.hpp"
#include "cutofflab/errors.hpp"
#include "cutofflab/group.hpp"
#include "cutofflab/oracle.hpp"
#include "cutofflab/spectra.hpp"
#include "cutofflab/state.hpp"

namespace cutofflab {

struct CliOverrides {
  std::optional<std::string> output;
  std::optional<unsigned> threads;
  std::optional<std::size_t> cap;
  std::optional<double> epsilon;
  std::optional<unsigned> radius;
};

struct CommandResult {
  std::string csv;      // machine output (may be empty for report commands)
  std::string summary;  // human-readable report
  bool ok = true;       // false marks an oracle/tolerance failure
};

namespace detail_cli {

inline AnalysisSettings effective_settings(const ExperimentConfig& cfg,
                                           const CliOverrides& ov) {
  AnalysisSettings a = cfg.analysis;
  if (ov.cap) a.cap = *ov.cap;
  if (ov.epsilon) a.epsilon = *ov.epsilon;
  if (ov.radius) a.radius = *ov.radius;
  return a;
}

inline std::string describe_group(const GroupModel& m) {
  return m.name() + " |S|=" + std::to_string(m.generating_set_size());
}

inline void settings_comments(CsvWriter& w, const AnalysisSettings& a) {
  w.comment("epsilon=" + format_g17(a.epsilon) +
            " truncation_radius=" + std::to_string(a.radius) +
            " profile_radius=" + std::to_string(a.profile_radius) +
            " cap=" + std::to_string(a.cap));
  w.comment("psd_tolerance=" + format_g17(a.psd_tolerance) +
            " strictness_tolerance=" + format_g17(a.strictness_tolerance));
}

inline double omega_for(const GroupModel& model, unsigned profile_radius,
                        std::size_t cap) {
  if (const auto exact = growth_rate_limit(model)) return *exact;
  const auto table = growth_table(model, std::max(profile_radius, 2u), cap);
  return table.growth_estimates.back();
}

// One CSV row for a fixed power k.
inline CsvRow make_row(const GroupModel& model, const StateModel& state,
                       long family_param, unsigned k,
                       const AnalysisSettings& a, const DecayProfile& profile,
                       double omega) {
  CsvRow row;
  row.family_param = family_param;
  row.k = k;
  row.truncation_radius = a.radius;

  const auto bound = l2_upper_bound(model, state, k, a.radius, a.cap);
  row.upper_l2 = bound.value;
  row.tail_bound = bound.tail_bound;

  const double nan = std::numeric_limits<double>::quiet_NaN();
  row.upper_closed_paper = nan;
  row.upper_closed_exact = nan;
  const std::size_t size_S = model.generating_set_size();
  if (state.certificate && size_S >= 3) {
    const double alpha = state.certificate->rate;
    const double c =
        static_cast<double>(k) -
        std::log(static_cast<double>(size_S) - 1.0) / (2.0 * alpha);
    if (alpha > 0.0 && c > 0.0) {
      const auto cf = closed_form_upper(size_S, alpha, c);
      row.upper_closed_paper = cf.paper_form;
      row.upper_closed_exact = cf.exact;
    }
  }

  const double phi_plus_1 = profile.phi_plus(1);
  const double predicted =
      (std::isfinite(phi_plus_1) && phi_plus_1 > 0.0 && size_S > 2)
          ? std::log(static_cast<double>(size_S) - 1.0) / (2.0 * phi_plus_1)
          : 0.0;
  const auto lower = detail_bounds::best_lower_bound_at(
      model, state, profile, phi_plus_1, predicted, k, a.cap);
  if (lower.value >= 0.0) {
    row.lower_best = lower.value;
    row.lower_kind = lower.kind;
  } else {
    row.lower_best = nan;
    row.lower_kind = "none";
  }

  if (omega > 1.0 + 1e-9) {
    const auto verdict = density_verdict(profile, omega, k);
    row.density_verdict = to_string(verdict.verdict);
  }
  return row;
}

inline DecayProfile profile_for(const GroupModel& model,
                                const StateModel& state,
                                const AnalysisSettings& a) {
  return decay_profile(model, state, std::max(5u, a.profile_radius), a.cap);
}

// Largest radius <= r_max whose ball stays within the element budget.
inline unsigned feasible_ball_radius(const GroupModel& model, unsigned r_max,
                                     double budget) {
  const double s = static_cast<double>(model.generating_set_size());
  double total = 1.0;
  unsigned r = 0;
  for (unsigned i = 1; i <= r_max; ++i) {
    total += s * std::pow(std::max(1.0, s - 1.0), static_cast<double>(i - 1));
    if (total > budget) break;
    r = i;
  }
  return std::max(1u, r);
}

}  // namespace detail_cli

/// analyze: one CSV row per power k for a single group/state pair.
inline CommandResult run_analyze(const ExperimentConfig& cfg,
                                 const CliOverrides& ov = {}) {
  const auto a = detail_cli::effective_settings(cfg, ov);
  const GroupModel model = build_group(cfg.group);
  const StateModel state = build_state(cfg.state, model);
  const auto profile = detail_cli::profile_for(model, state, a);
  const double omega = detail_cli::omega_for(model, a.profile_radius, a.cap);

  CsvWriter w;
  w.comment("cutofflab analyze");
  w.comment("group=" + detail_cli::describe_group(model));
  w.comment("state=" + state.kind);
  detail_cli::settings_comments(w, a);
  w.header();
  const long param = static_cast<long>(model.generator_count());
  for (unsigned k = a.k_min; k <= a.k_max; ++k)
    w.row(detail_cli::make_row(model, state, param, k, a, profile, omega));

  CommandResult res;
  res.csv = w.str();
  std::ostringstream s;
  s << "analyze: " << detail_cli::describe_group(model) << ", state "
    << state.kind << ", k in [" << a.k_min << ", " << a.k_max << "]\n";
  res.summary = s.str();
  return res;
}

/// scan: per-(N, k) rows plus per-N window comments and a family summary.
inline CommandResult run_scan(const ExperimentConfig& cfg,
                              const CliOverrides& ov = {}) {
  if (!cfg.family)
    throw ConfigError("scan: config has no family block");
  const auto a = detail_cli::effective_settings(cfg, ov);

  ScanSettings settings;
  settings.epsilon = a.epsilon;
  settings.truncation_radius = a.radius;
  settings.cap = a.cap;
  settings.threads = ov.threads.value_or(1);

  auto family = [&cfg](long value) {
    auto [model, state] = instantiate_family_member(cfg, value);
    FamilyMember m;
    m.param = value;
    m.model = std::move(model);
    m.state = std::move(state);
    return m;
  };
  // fixed row order: family parameter ascending, then k ascending
  auto values = cfg.family->values;
  std::sort(values.begin(), values.end());
  const auto scan = cutoff_scan(family, values, settings);

  CsvWriter w;
  w.comment("cutofflab scan");
  w.comment("family parameter=" + cfg.family->parameter);
  detail_cli::settings_comments(w, a);
  w.header();
  for (const auto& value : values) {
    auto [model, state] = instantiate_family_member(cfg, value);
    const auto profile = detail_cli::profile_for(model, state, a);
    const double omega = detail_cli::omega_for(model, a.profile_radius, a.cap);
    for (unsigned k = a.k_min; k <= a.k_max; ++k)
      w.row(detail_cli::make_row(model, state, value, k, a, profile, omega));
  }
  for (const auto& win : scan.windows) {
    std::string line = "window param=" + std::to_string(win.family_param) +
                       " predicted=" + format_g17(win.predicted_location);
    line += win.k_upper ? " k_upper=" + std::to_string(*win.k_upper)
                        : " k_upper=undefined";
    line += win.k_lower ? " k_lower=" + std::to_string(*win.k_lower)
                        : " k_lower=undefined";
    line += " lower_kind=" + win.lower_kind;
    line += std::string(" k1_divergent=") + (win.k1_divergent ? "1" : "0");
    w.comment(line);
  }
  const auto& sum = scan.summary;
  w.comment("summary max_upper_offset=" + format_g17(sum.max_upper_offset) +
            " max_lower_offset=" + format_g17(sum.max_lower_offset));
  if (sum.no_cutoff) {
    w.comment("summary NO-CUTOFF k_upper stabilizes at " +
              std::to_string(sum.stable_k_upper) + " from param=" +
              std::to_string(*sum.stable_from));
  }

  CommandResult res;
  res.csv = w.str();
  std::ostringstream s;
  s << "scan: " << cfg.family->values.size() << " family members, epsilon "
    << format_g17(a.epsilon) << "\n";
  s << "max window offsets: upper " << format_g17(sum.max_upper_offset)
    << ", lower " << format_g17(sum.max_lower_offset) << "\n";
  if (sum.no_cutoff)
    s << "NO-CUTOFF: k_upper stabilizes at " << sum.stable_k_upper
      << " from param " << *sum.stable_from << "\n";
  res.summary = s.str();
  return res;
}

/// verify: run every oracle comparison applicable to the configured pair.
inline CommandResult run_verify(const ExperimentConfig& cfg,
                                const CliOverrides& ov = {}) {
  const auto a = detail_cli::effective_settings(cfg, ov);
  const GroupModel model = build_group(cfg.group);
  const StateModel state = build_state(cfg.state, model);

  std::ostringstream rep;
  bool all_ok = true;
  auto check = [&](const std::string& name, double max_dev, double tol) {
    const bool ok = max_dev <= tol;
    all_ok = all_ok && ok;
    rep << "check " << name << ": max_dev=" << format_g17(max_dev)
        << " tol=" << format_g17(tol) << (ok ? " PASS" : " FAIL") << "\n";
  };

  const unsigned ball_radius = detail_cli::feasible_ball_radius(
      model, std::min(a.radius, 4u), 20000.0);
  const auto ball = enumerate_ball(model, ball_radius, a.cap);

  {
    const double dev = std::abs(state.evaluate(identity_element()) - 1.0);
    check("normalization", dev, 1e-12);
  }
  {
    double dev = 0.0;
    for (const auto& g : ball)
      dev = std::max(dev, std::abs(state.evaluate(inverse(model, g)) -
                                   std::conj(state.evaluate(g))));
    check("hermitian_symmetry", dev, 1e-12);
  }
  {
    const auto b3 = enumerate_ball(model, std::min(ball_radius, 3u), a.cap);
    const auto gram = gram_psd_check(model, state, b3, a.psd_tolerance);
    check("gram_psd", std::max(0.0, -gram.min_eigenvalue), a.psd_tolerance);
  }
  if (has_sphere_size_closed_form(model)) {
    double dev = 0.0;
    for (unsigned i = 1; i <= std::min(a.radius, 6u); ++i) {
      const double closed = sphere_size_real(model, i, a.cap);
      const double counted =
          static_cast<double>(enumerate_sphere(model, i, a.cap).size());
      dev = std::max(dev, std::abs(closed - counted));
    }
    check("sphere_closed_form", dev, 0.0);
  }
  if (state.certificate) {
    const unsigned r = std::min(a.radius, 5u);
    double dev = 0.0;
    for (unsigned k = a.k_min; k <= std::min(a.k_max, a.k_min + 2); ++k) {
      const auto bound = l2_upper_bound(model, state, k, r, a.cap);
      const double reference =
          oracle::tv_l2_truncated_sum(model, state, k, r, a.cap);
      const double scale = std::max(1.0, std::abs(reference));
      dev = std::max(dev, std::abs(bound.truncated_sum - reference) / scale);
    }
    check("l2_truncation_vs_oracle", dev, 1e-12);
    const unsigned cert_radius = detail_cli::feasible_ball_radius(
        model, std::min(a.radius, 8u), 50000.0);
    check("certificate_on_ball",
          certificate_holds_on_ball(model, state, cert_radius, 1e-12, a.cap)
              ? 0.0
              : 1.0,
          0.0);
  }
  if (cfg.state.at("kind").get<std::string>() == "radial") {
    RadialCoefficients coeffs;
    for (const auto& v : cfg.state.at("lambda"))
      coeffs.lambda.push_back(v.get<double>());
    if (cfg.state.value("normalize", false)) coeffs = coeffs.normalized(model);
    double dev = 0.0;
    const unsigned m = static_cast<unsigned>(coeffs.max_support());
    for (const auto& g : ball) {
      const auto direct = oracle::radial_direct_inner_product(
          model, coeffs, g, m + static_cast<unsigned>(word_length(g)), a.cap);
      dev = std::max(dev, std::abs(state.evaluate(g) - direct));
    }
    check("radial_closed_vs_direct", dev, 1e-10);
  }
  if (model.kind() == GroupKind::Free) {
    double dev = 0.0;
    for (const auto& g : enumerate_ball(model, 2, a.cap)) {
      const auto counts = oracle::translate_sphere_counts(
          model, g, 3, 3 + static_cast<unsigned>(word_length(g)), a.cap);
      for (unsigned i = 0; i <= 3; ++i) {
        double row = 0.0;
        for (const auto& c : counts[i]) row += static_cast<double>(c);
        dev = std::max(dev, std::abs(row - sphere_size_real(model, i, a.cap)));
      }
    }
    check("translate_partition", dev, 0.0);
  }
  if (cfg.state.at("kind").get<std::string>() == "length") {
    // e^{-t|g|} < 1 away from the identity: the scan must come back empty
    const auto hits = strictness_scan(model, state, ball_radius,
                                      a.strictness_tolerance, a.cap);
    check("strictness_on_ball", static_cast<double>(hits.size()), 0.0);

    const double t = cfg.state.at("t").get<double>();
    double dev = 0.0;
    for (unsigned k = a.k_min; k <= std::min(a.k_max, a.k_min + 3); ++k) {
      const auto mv = oracle::variance_exact(model, state, k, a.cap);
      const double s = static_cast<double>(model.generating_set_size());
      dev = std::max(dev, std::abs(mv.mean - s * std::exp(-t * k)));
      if (model.minimal_generating_set()) {
        const double var_bound = s * (1.0 - std::exp(-2.0 * t * k));
        dev = std::max(dev, std::max(0.0, mv.variance - var_bound));
      }
    }
    check("chi1_moments_vs_length_formula", dev, 1e-10);
  }
  if (cfg.state.at("kind").get<std::string>() == "free_product") {
    std::vector<StateModel> factors;
    for (std::size_t i = 0; i < model.factors().size(); ++i)
      factors.push_back(
          build_state(cfg.state.at("factors")[i], model.factors()[i]));
    double dev = 0.0;
    for (const auto& g : ball)
      if (!oracle::free_product_refactor_check(model, factors, state, g))
        dev = 1.0;
    check("free_product_refactor", dev, 0.0);

    double var_total = 0.0;
    const auto mv = oracle::variance_exact(model, state, a.k_min, a.cap);
    for (std::size_t i = 0; i < model.factors().size(); ++i)
      var_total +=
          oracle::variance_exact(model.factors()[i], factors[i], a.k_min, a.cap)
              .variance;
    check("free_variance_additivity", std::abs(mv.variance - var_total), 1e-12);
  }

  CommandResult res;
  res.ok = all_ok;
  res.summary = rep.str() + (all_ok ? "verify: PASS\n" : "verify: FAIL\n");
  return res;
}

/// cogrowth: kernel-word counts r_i and running gamma estimates.
inline CommandResult run_cogrowth(const ExperimentConfig& cfg,
                                  const CliOverrides& ov = {}) {
  const auto a = detail_cli::effective_settings(cfg, ov);
  const GroupModel model = build_group(cfg.group);
  const auto est = cogrowth_count(model, cfg.cogrowth_max_length, a.cap);

  std::string csv;
  csv += "# cutofflab cogrowth\n";
  csv += "# group=" + detail_cli::describe_group(model) +
         " marking_rank=" + std::to_string(model.generator_count()) + "\n";
  csv += "i,kernel_count,gamma_hat,gamma_convention,gamma_value\n";
  std::optional<double> running;
  for (unsigned i = 1; i <= est.max_length; ++i) {
    if (est.count(i) > 0)
      running = std::pow(static_cast<double>(est.count(i)),
                         1.0 / static_cast<double>(i));
    csv += std::to_string(i) + "," + std::to_string(est.count(i)) + ",";
    csv += running ? format_g17(*running)
                   : std::string("nan");
    csv += ",";
    csv += (est.gamma_convention ? "1" : "0");
    csv += "," + format_g17(est.gamma_value) + "\n";
  }

  CommandResult res;
  res.csv = csv;
  std::ostringstream s;
  s << "cogrowth: " << detail_cli::describe_group(model) << ", lengths up to "
    << est.max_length << "\n";
  if (est.gamma_convention)
    s << "no kernel words found; gamma set to sqrt(|S|-1) = "
      << format_g17(est.gamma_value) << " by convention\n";
  else
    s << "gamma_hat = " << format_g17(est.gamma_value) << "\n";
  res.summary = s.str();
  return res;
}

/// psd-check: Gram spectrum of the state and its low Schur powers on B(R).
inline CommandResult run_psd_check(const ExperimentConfig& cfg,
                                   const CliOverrides& ov = {}) {
  const auto a = detail_cli::effective_settings(cfg, ov);
  const GroupModel model = build_group(cfg.group);
  const StateModel state = build_state(cfg.state, model);
  const unsigned radius = detail_cli::feasible_ball_radius(
      model, std::min(a.radius, 4u), 3000.0);
  const auto ball = enumerate_ball(model, radius, a.cap);
  if (ball.size() > 4096)
    throw CapacityError("psd-check: ball of " + std::to_string(ball.size()) +
                        " elements is too large for a dense eigensolve");

  std::ostringstream rep;
  bool ok = true;
  for (unsigned k = 1; k <= std::min(3u, a.k_max); ++k) {
    const auto powered = k == 1 ? state : power_state(state, k);
    const auto gram = gram_psd_check(model, powered, ball, a.psd_tolerance);
    ok = ok && gram.psd;
    rep << "gram k=" << k << " ball_radius=" << radius
        << " n=" << ball.size()
        << " min_eigenvalue=" << format_g17(gram.min_eigenvalue)
        << (gram.psd ? " PASS" : " FAIL") << "\n";
  }
  CommandResult res;
  res.ok = ok;
  res.summary = rep.str() + (ok ? "psd-check: PASS\n" : "psd-check: FAIL\n");
  return res;
}

}  // namespace cutofflab
