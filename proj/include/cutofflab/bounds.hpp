#pragma once

// Rigorous total-variation upper/lower bounds for ||phi^k - delta_e||,
// density verdicts, and cut-off window detection across group families.
//
// Upper bounds come from the L^2 estimate
//   ||phi^k - delta_e||^2 <= (1/4) sum_{g != e} |phi(g)|^{2k},
// split into an exactly evaluated truncation plus a certified geometric tail.
// Lower bounds come from Chebyshev estimates on spectral projections of the
// generator sum chi_1.

#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cutofflab/errors.hpp"
#include "cutofflab/group.hpp"
#include "cutofflab/oracle.hpp"
#include "cutofflab/spectra.hpp"
#include "cutofflab/state.hpp"

namespace cutofflab {

enum class Rigor { Exact, UpperCertified, Divergent, Unknown };

inline const char* to_string(Rigor r) {
  switch (r) {
    case Rigor::Exact: return "exact";
    case Rigor::UpperCertified: return "upper_certified";
    case Rigor::Divergent: return "divergent";
    case Rigor::Unknown: return "unknown";
  }
  return "?";
}

/// A certified bound value. For UpperCertified results the squared bound
/// decomposes as truncated_sum + tail_bound (value = sqrt(sum)/2).
struct BoundResult {
  double value = std::numeric_limits<double>::quiet_NaN();
  Rigor rigor = Rigor::Unknown;
  unsigned truncation_radius = 0;
  double truncated_sum = std::numeric_limits<double>::quiet_NaN();
  double tail_bound = std::numeric_limits<double>::quiet_NaN();
};

namespace detail_bounds {

// Majorization constant C_rho = max_i (i+1)^{2kd} rho^{-i}, scanned up to the
// analytic maximizer of the log expression.
inline double poly_majorant_constant(double two_k_d, double rho) {
  const double lr = std::log(rho);
  const double i_star = two_k_d / lr;
  const std::size_t i_hi = static_cast<std::size_t>(std::ceil(i_star)) + 1;
  double best = 1.0;
  for (std::size_t i = 0; i <= i_hi; ++i) {
    const double v = two_k_d * std::log(static_cast<double>(i + 1)) -
                     static_cast<double>(i) * lr;
    best = std::max(best, std::exp(v));
  }
  return best;
}

}  // namespace detail_bounds

/// Certified upper bound (1/2) sqrt(T + tail) on ||phi^k - delta_e||, where
/// T runs over spheres 1..R exactly (via the radial closed form when the
/// state is radial, element enumeration otherwise) and the tail majorizes
/// s_i <= |S|(|S|-1)^{i-1} and (i+1)^{2kd} <= C_rho rho^i for an admissible
/// rho. Divergent when no admissible rho exists; Unknown without a
/// certificate.
inline BoundResult l2_upper_bound(const GroupModel& model,
                                  const StateModel& state, unsigned k,
                                  unsigned truncation_radius,
                                  std::size_t cap = kDefaultCap) {
  if (truncation_radius < 1)
    throw DomainError("l2_upper_bound: truncation radius must be >= 1");
  if (k < 1) throw DomainError("l2_upper_bound: k must be >= 1");
  BoundResult r;
  r.truncation_radius = truncation_radius;
  if (!state.certificate) {
    r.rigor = Rigor::Unknown;
    return r;
  }
  const double alpha = state.certificate->rate;
  const unsigned d = state.certificate->poly_degree;
  const double size_S = static_cast<double>(model.generating_set_size());
  const double two_k = 2.0 * static_cast<double>(k);

  double T = 0.0;
  if (state.is_radial()) {
    for (unsigned i = 1; i <= truncation_radius; ++i) {
      const double v = std::abs(state.radial(i));
      if (v > 0.0) T += sphere_size_real(model, i, cap) * std::pow(v, two_k);
    }
  } else {
    const auto layers = enumerate_sphere_layers(model, truncation_radius, cap);
    for (unsigned i = 1; i <= truncation_radius; ++i)
      for (const auto& g : layers[i])
        T += std::pow(std::abs(state.evaluate(g)), two_k);
  }
  r.truncated_sum = T;

  // ratio tests carry a relative guard so that exact-threshold certificates
  // (rate = ln(|S|-1)/2k) classify deterministically despite exp/log rounding
  const double q0 = (size_S - 1.0) * std::exp(-two_k * alpha);
  double tail;
  if (d == 0) {
    if (q0 >= 1.0 - 1e-12) {
      r.rigor = Rigor::Divergent;
      r.value = kInfinity;
      r.tail_bound = kInfinity;
      return r;
    }
    tail = (size_S / (size_S - 1.0)) *
           std::pow(q0, static_cast<double>(truncation_radius + 1)) /
           (1.0 - q0);
  } else {
    const double rho_max = std::exp(two_k * alpha) / (size_S - 1.0);
    if (rho_max <= 1.0 + 1e-12) {
      r.rigor = Rigor::Divergent;
      r.value = kInfinity;
      r.tail_bound = kInfinity;
      return r;
    }
    const double rho = std::sqrt(rho_max);  // geometric mean of 1 and rho_max
    const double c_rho = detail_bounds::poly_majorant_constant(
        two_k * static_cast<double>(d), rho);
    const double q = q0 * rho;
    tail = (size_S / (size_S - 1.0)) * c_rho *
           std::pow(q, static_cast<double>(truncation_radius + 1)) / (1.0 - q);
  }
  r.tail_bound = tail;
  r.value = 0.5 * std::sqrt(T + tail);
  r.rigor = Rigor::UpperCertified;
  return r;
}

/// Closed-form upper bound at k = ln(|S|-1)/(2 alpha) + c for a state with
/// exponential decay rate alpha. `exact` substitutes that k into the
/// geometric series and is authoritative; `paper_form` is the display
/// e^{-alpha c}/sqrt(2 - 2 e^{-alpha c}), reported for comparison.
struct ClosedFormUpper {
  double exact = 0.0;
  double paper_form = 0.0;
};

inline ClosedFormUpper closed_form_upper(std::size_t size_S, double alpha,
                                         double c) {
  if (size_S < 3) throw DomainError("closed_form_upper: need |S| >= 3");
  if (!(alpha > 0.0)) throw DomainError("closed_form_upper: alpha must be > 0");
  if (!(c > 0.0)) throw DomainError("closed_form_upper: c must be > 0");
  const double s = static_cast<double>(size_S);
  const double x = std::exp(-2.0 * alpha * c);
  ClosedFormUpper out;
  out.exact = 0.5 * std::sqrt((s / (s - 1.0)) * x / (1.0 - x));
  const double y = std::exp(-alpha * c);
  out.paper_form = y / std::sqrt(2.0 - 2.0 * y);
  return out;
}

/// Two-sided Chebyshev lower bound on the total variation distance from the
/// mean and variances of the test observable chi_1:
///   max(0, 1 - 4 var_haar / m^2 - 4 var_state / m^2).
inline double chebyshev_lower(double mean_m, double var_state,
                              double var_haar) {
  if (!(mean_m > 0.0)) throw DomainError("chebyshev_lower: mean must be > 0");
  const double m2 = mean_m * mean_m;
  return std::max(0.0, 1.0 - 4.0 * var_haar / m2 - 4.0 * var_state / m2);
}

/// Cogrowth-based lower bound, valid at k = ln(|S|-1)/(2 phi_plus_1) - c for
/// states taking nonnegative values on S:
///   max(0, 1 - 4 (2 + 3 gamma^2/|S|) e^{-2 phi_plus_1 c}).
inline double cogrowth_lower_bound(std::size_t size_S, double gamma,
                                   double phi_plus_1, double c) {
  const double s = static_cast<double>(size_S);
  if (!(gamma >= std::sqrt(s - 1.0) - 1e-12))
    throw DomainError("cogrowth_lower_bound: gamma below convention floor");
  if (!(phi_plus_1 > 0.0) || !std::isfinite(phi_plus_1))
    throw DomainError("cogrowth_lower_bound: phi_plus(1) must be finite > 0");
  if (!(c > 0.0)) throw DomainError("cogrowth_lower_bound: c must be > 0");
  const double factor = 4.0 * (2.0 + 3.0 * gamma * gamma / s);
  return std::max(0.0, 1.0 - factor * std::exp(-2.0 * phi_plus_1 * c));
}

struct MinimalGenLowerResult {
  bool applicable = false;
  double value = 0.0;
  std::string diagnostic;
};

/// Sharper lower bound max(0, 1 - 8 e^{-2 phi_plus_1 c}), valid at
/// k = ln(|S|-1)/(2 phi_plus_1) - c for minimal symmetric generating sets
/// when phi_minus(2) >= 2 phi_plus(1) (so that products of two generators
/// decay no slower than squared single letters). Refuses with a diagnostic
/// otherwise; callers fall back to cogrowth_lower_bound.
inline MinimalGenLowerResult minimal_gen_lower_bound(
    std::size_t size_S, double phi_plus_1, double c, const DecayProfile& profile,
    bool minimal_generating_set) {
  MinimalGenLowerResult out;
  if (!minimal_generating_set) {
    out.diagnostic = "generating set not flagged minimal";
    return out;
  }
  if (size_S < 3) {
    out.diagnostic = "|S| < 3 degenerates the window location";
    return out;
  }
  if (!(phi_plus_1 > 0.0) || !std::isfinite(phi_plus_1)) {
    out.diagnostic = "phi_plus(1) not finite positive";
    return out;
  }
  if (profile.radius < 2) {
    out.diagnostic = "decay profile radius < 2";
    return out;
  }
  if (!(profile.phi_minus(2) >= 2.0 * phi_plus_1 - 1e-12)) {
    out.diagnostic = "phi_minus(2) < 2 phi_plus(1)";
    return out;
  }
  if (!(c > 0.0)) {
    out.diagnostic = "c must be > 0";
    return out;
  }
  out.applicable = true;
  out.value = std::max(0.0, 1.0 - 8.0 * std::exp(-2.0 * phi_plus_1 * c));
  return out;
}

enum class DensityVerdictKind { HasL2, NoL2, NotBoundedOnLGamma, Inconclusive };

inline const char* to_string(DensityVerdictKind k) {
  switch (k) {
    case DensityVerdictKind::HasL2: return "has_l2";
    case DensityVerdictKind::NoL2: return "no_l2";
    case DensityVerdictKind::NotBoundedOnLGamma: return "not_bounded";
    case DensityVerdictKind::Inconclusive: return "inconclusive";
  }
  return "?";
}

/// Verdict on whether phi^k has an L^2 density with respect to the trace.
/// A finite profile window [ceil(R/2), R] stands in for the liminf of
/// phi_-(i)/i (resp. phi_+(i)/i); the margin records the inequality slack.
struct DensityVerdict {
  DensityVerdictKind verdict = DensityVerdictKind::Inconclusive;
  double margin = 0.0;
  double window_min_lower_rate = 0.0;  // min over window of phi_-(i)/i
  double window_max_upper_rate = 0.0;  // max over window of phi_+(i)/i
  double threshold = 0.0;              // ln(omega)/(2k)
  std::string note = "finite-window proxy for liminf";
};

/// `rapid_decay_positive` asserts the hypotheses under which failure of the
/// necessary condition upgrades NoL2 to NotBoundedOnLGamma (positive-valued
/// state on a rapid-decay group of exponential growth).
inline DensityVerdict density_verdict(const DecayProfile& profile,
                                      double omega_estimate, unsigned k,
                                      bool rapid_decay_positive = false) {
  if (profile.radius < 5)
    throw DomainError("density_verdict: profile radius must be >= 5");
  if (k < 1) throw DomainError("density_verdict: k must be >= 1");
  if (!(omega_estimate > 1.0))
    throw DomainError("density_verdict: omega must exceed 1");
  DensityVerdict v;
  v.threshold = std::log(omega_estimate) / (2.0 * static_cast<double>(k));
  const unsigned lo = (profile.radius + 1) / 2;
  double min_lower = kInfinity;
  double max_upper = 0.0;
  for (unsigned i = lo; i <= profile.radius; ++i) {
    min_lower = std::min(min_lower, profile.phi_minus(i) / i);
    max_upper = std::max(max_upper, profile.phi_plus(i) / i);
  }
  v.window_min_lower_rate = min_lower;
  v.window_max_upper_rate = max_upper;
  if (min_lower > v.threshold) {
    v.verdict = DensityVerdictKind::HasL2;
    v.margin = min_lower - v.threshold;
  } else if (max_upper < v.threshold) {
    v.verdict = rapid_decay_positive ? DensityVerdictKind::NotBoundedOnLGamma
                                     : DensityVerdictKind::NoL2;
    v.margin = v.threshold - max_upper;
  } else {
    v.verdict = DensityVerdictKind::Inconclusive;
    v.margin = 0.0;
  }
  return v;
}

/// One family member of a cut-off scan.
struct FamilyMember {
  long param = 0;
  GroupModel model;
  StateModel state;
};

struct ScanSettings {
  double epsilon = 0.01;
  unsigned k_max = 64;
  unsigned truncation_radius = 20;
  std::size_t cap = kDefaultCap;
  unsigned threads = 1;
};

/// Detected window for one family member. k_upper is the least power whose
/// certified upper bound drops to epsilon; k_lower the greatest power whose
/// certified lower bound still exceeds 1 - epsilon (0 when no positive power
/// qualifies: at k = 0 the distance is trivially maximal). predicted_location
/// is ln(|S|-1)/(2 phi_plus(1)).
struct CutoffWindow {
  long family_param = 0;
  double predicted_location = 0.0;
  std::optional<unsigned> k_upper;
  std::optional<unsigned> k_lower;
  std::string lower_kind = "none";
  bool k1_divergent = false;
};

struct ScanSummary {
  double max_upper_offset = 0.0;  // sup_N (k_upper - predicted)
  double max_lower_offset = 0.0;  // sup_N (predicted - k_lower)
  bool any_upper_undefined = false;
  bool any_lower_undefined = false;
  bool no_cutoff = false;
  std::optional<long> stable_from;  // least param after which k_upper is constant
  unsigned stable_k_upper = 0;
};

struct ScanResult {
  std::vector<CutoffWindow> windows;
  ScanSummary summary;
};

namespace detail_bounds {

struct LowerCandidate {
  double value = -1.0;
  std::string kind = "none";
};

inline LowerCandidate best_lower_bound_at(const GroupModel& model,
                                          const StateModel& state,
                                          const DecayProfile& profile,
                                          double phi_plus_1, double predicted,
                                          unsigned k, std::size_t cap) {
  LowerCandidate best;
  const std::size_t size_S = model.generating_set_size();
  const double c = predicted - static_cast<double>(k);
  if (c > 0.0 && std::isfinite(phi_plus_1) && phi_plus_1 > 0.0) {
    const auto mg = minimal_gen_lower_bound(size_S, phi_plus_1, c, profile,
                                            model.minimal_generating_set());
    if (mg.applicable && mg.value > best.value) {
      best.value = mg.value;
      best.kind = "minimal_gen";
    }
    // Cogrowth fallback: the free kinds use the exact convention value, the
    // rest a sound upper estimate gamma <= 2n - 1.
    double gamma;
    if (model.kind() == GroupKind::Free) {
      gamma = std::sqrt(static_cast<double>(size_S) - 1.0);
    } else {
      gamma = 2.0 * static_cast<double>(model.generator_count()) - 1.0;
    }
    if (gamma >= std::sqrt(static_cast<double>(size_S) - 1.0) - 1e-12) {
      const double cg = cogrowth_lower_bound(size_S, gamma, phi_plus_1, c);
      if (cg > best.value) {
        best.value = cg;
        best.kind = "cogrowth";
      }
    }
  }
  // Chebyshev from exact first and second moments of chi_1 at power k.
  const auto mv = oracle::variance_exact(model, state, k, cap);
  if (mv.mean > 0.0) {
    const auto haar = oracle::variance_exact(model, dirac_state(model), 1, cap);
    const double cb = chebyshev_lower(mv.mean, mv.variance, haar.variance);
    if (cb > best.value) {
      best.value = cb;
      best.kind = "chebyshev";
    }
  }
  return best;
}

inline CutoffWindow scan_member(const FamilyMember& member,
                                const ScanSettings& settings) {
  CutoffWindow w;
  w.family_param = member.param;
  const auto profile = decay_profile(member.model, member.state, 2, settings.cap);
  const double phi_plus_1 = profile.phi_plus(1);
  const double size_S =
      static_cast<double>(member.model.generating_set_size());
  w.predicted_location =
      (std::isfinite(phi_plus_1) && phi_plus_1 > 0.0 && size_S > 2.0)
          ? std::log(size_S - 1.0) / (2.0 * phi_plus_1)
          : 0.0;

  w.k1_divergent = l2_upper_bound(member.model, member.state, 1,
                                  settings.truncation_radius, settings.cap)
                       .rigor == Rigor::Divergent;

  // least k in [1, k_max] with a certified bound <= epsilon (monotone in k)
  auto upper_ok = [&](unsigned k) {
    const auto b = l2_upper_bound(member.model, member.state, k,
                                  settings.truncation_radius, settings.cap);
    return b.rigor == Rigor::UpperCertified && b.value <= settings.epsilon;
  };
  if (upper_ok(settings.k_max)) {
    unsigned lo = 1, hi = settings.k_max;
    while (lo < hi) {
      const unsigned mid = lo + (hi - lo) / 2;
      if (upper_ok(mid))
        hi = mid;
      else
        lo = mid + 1;
    }
    w.k_upper = lo;
  }

  // greatest k >= 1 with a certified lower bound >= 1 - epsilon; k = 0 is
  // always certified (phi^0 is the trivial state, at maximal distance).
  const unsigned k_start = static_cast<unsigned>(
      std::max(0.0, std::floor(w.predicted_location)));
  bool found = false;
  for (unsigned k = k_start; k >= 1 && !found; --k) {
    const auto cand = best_lower_bound_at(member.model, member.state, profile,
                                          phi_plus_1, w.predicted_location, k,
                                          settings.cap);
    if (cand.value >= 1.0 - settings.epsilon) {
      w.k_lower = k;
      w.lower_kind = cand.kind;
      found = true;
    }
  }
  if (!found) {
    // k = 0 is the conventional floor; flag members where no lower-bound
    // operation applies at all (no finite decay exponent, no positive mean).
    const bool formula_path = std::isfinite(phi_plus_1) && phi_plus_1 > 0.0 &&
                              w.predicted_location > 0.0;
    const bool chebyshev_path =
        oracle::variance_exact(member.model, member.state, 1, settings.cap)
            .mean > 0.0;
    if (formula_path || chebyshev_path) {
      w.k_lower = 0;
      w.lower_kind = "floor";
    } else {
      w.k_lower = std::nullopt;
      w.lower_kind = "none";
    }
  }
  return w;
}

}  // namespace detail_bounds

/// Evaluates windows for every family member and summarizes the empirical
/// window width. Members may be processed in parallel; output order follows
/// the parameter list.
inline ScanResult cutoff_scan(
    const std::function<FamilyMember(long)>& family,
    const std::vector<long>& params, const ScanSettings& settings = {}) {
  ScanResult result;
  result.windows.resize(params.size());
  const unsigned threads = std::max(1u, settings.threads);
  std::size_t next = 0;
  while (next < params.size()) {
    const std::size_t batch =
        std::min<std::size_t>(threads, params.size() - next);
    std::vector<std::future<CutoffWindow>> futs;
    for (std::size_t b = 0; b < batch; ++b) {
      const long param = params[next + b];
      futs.push_back(std::async(
          threads > 1 ? std::launch::async : std::launch::deferred,
          [&family, param, &settings] {
            return detail_bounds::scan_member(family(param), settings);
          }));
    }
    for (std::size_t b = 0; b < batch; ++b)
      result.windows[next + b] = futs[b].get();
    next += batch;
  }

  auto& s = result.summary;
  bool nonincreasing = true;
  std::optional<unsigned> prev;
  for (const auto& w : result.windows) {
    if (w.k_upper) {
      s.max_upper_offset = std::max(
          s.max_upper_offset,
          static_cast<double>(*w.k_upper) - w.predicted_location);
      if (prev && *w.k_upper > *prev) nonincreasing = false;
      prev = *w.k_upper;
    } else {
      s.any_upper_undefined = true;
    }
    if (w.k_lower) {
      s.max_lower_offset =
          std::max(s.max_lower_offset,
                   w.predicted_location - static_cast<double>(*w.k_lower));
    } else {
      s.any_lower_undefined = true;
    }
  }
  if (!result.windows.empty() && !s.any_upper_undefined) {
    const unsigned last = *result.windows.back().k_upper;
    s.stable_k_upper = last;
    for (auto it = result.windows.rbegin(); it != result.windows.rend(); ++it) {
      if (*it->k_upper != last) break;
      s.stable_from = it->family_param;
    }
    s.no_cutoff = nonincreasing && s.stable_from.has_value() &&
                  result.windows.size() >= 2 &&
                  *s.stable_from < result.windows.back().family_param;
  }
  return result;
}

}  // namespace cutofflab
