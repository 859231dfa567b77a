#pragma once

// Constructors and evaluators for normalized positive definite functions,
// plus empirical positivity / strictness / decay diagnostics.

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "cutofflab/errors.hpp"
#include "cutofflab/group.hpp"

namespace cutofflab {

using Complex = std::complex<double>;

inline constexpr double kPsdTolerance = 1e-9;
inline constexpr double kStrictnessTolerance = 1e-12;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Certified pointwise bound |phi(g)| <= (|g|+1)^poly_degree * e^{-rate*|g|}.
/// Certificates enable closed-form tail bounds on the series over spheres.
struct DecayCertificate {
  unsigned poly_degree = 0;
  double rate = 0.0;
};

/// Finitely supported radial coefficients lambda_0..lambda_M for a vector
/// xi = sum_i lambda_i chi_i in l^2 of a free group. Unit norm means
/// sum_i lambda_i^2 * s_i = 1 with s_i the sphere sizes.
struct RadialCoefficients {
  std::vector<double> lambda;

  std::size_t max_support() const {
    std::size_t m = 0;
    for (std::size_t i = 0; i < lambda.size(); ++i)
      if (lambda[i] != 0.0) m = i;
    return m;
  }

  double squared_norm(const GroupModel& model) const {
    double n = 0.0;
    for (std::size_t i = 0; i < lambda.size(); ++i)
      n += lambda[i] * lambda[i] *
           sphere_size_real(model, static_cast<unsigned>(i));
    return n;
  }

  /// Scaled copy with unit norm for the given model.
  RadialCoefficients normalized(const GroupModel& model) const {
    const double n2 = squared_norm(model);
    if (!(n2 > 0.0))
      throw DomainError("RadialCoefficients: cannot normalize zero vector");
    RadialCoefficients out;
    out.lambda.reserve(lambda.size());
    const double s = 1.0 / std::sqrt(n2);
    for (double v : lambda) out.lambda.push_back(v * s);
    return out;
  }

  /// eta_i = (|S|-1)^{i/2} lambda_i.
  std::vector<double> eta(const GroupModel& model) const {
    const double q = static_cast<double>(model.generating_set_size()) - 1.0;
    std::vector<double> out;
    out.reserve(lambda.size());
    for (std::size_t i = 0; i < lambda.size(); ++i)
      out.push_back(std::pow(q, static_cast<double>(i) / 2.0) * lambda[i]);
    return out;
  }
};

/// Per-sphere extremal decay exponents for 1 <= i <= radius:
///   phi_plus(i)  = -ln( min |phi| over S(i) )
///   phi_minus(i) = -ln( max |phi| over S(i) )
/// Entries are +infinity where phi vanishes on the whole sphere (phi_minus)
/// or at some point of it (phi_plus). Always phi_minus(i) <= phi_plus(i).
struct DecayProfile {
  unsigned radius = 0;
  std::vector<double> plus;   // [i-1] holds phi_plus(i)
  std::vector<double> minus;  // [i-1] holds phi_minus(i)

  double phi_plus(unsigned i) const { return plus.at(i - 1); }
  double phi_minus(unsigned i) const { return minus.at(i - 1); }
};

/// A normalized positive definite function phi on a marked group.
/// `radial` is set when the value depends only on word length; it must then
/// agree with `evaluate` everywhere.
struct StateModel {
  std::string kind;
  std::function<Complex(const GroupElement&)> evaluate;
  std::function<Complex(std::size_t)> radial;  // null when not radial
  std::optional<DecayCertificate> certificate;

  bool is_radial() const { return static_cast<bool>(radial); }
};

/// phi(g) = e^{-t |g|}. Positive definite for the supported kinds, where the
/// word length is conditionally negative definite. Certificate (0, t).
inline StateModel length_state(const GroupModel& model, double t) {
  if (!(t > 0.0)) throw DomainError("length_state: t must be positive");
  (void)model;
  StateModel s;
  s.kind = "length(t=" + std::to_string(t) + ")";
  s.radial = [t](std::size_t len) {
    return Complex(std::exp(-t * static_cast<double>(len)), 0.0);
  };
  s.evaluate = [t](const GroupElement& g) {
    return Complex(std::exp(-t * static_cast<double>(word_length(g))), 0.0);
  };
  s.certificate = DecayCertificate{0, t};
  return s;
}

/// The trivial character g -> 1. Not strict; carries no decay certificate.
inline StateModel counit_state(const GroupModel& model) {
  (void)model;
  StateModel s;
  s.kind = "counit";
  s.radial = [](std::size_t) { return Complex(1.0, 0.0); };
  s.evaluate = [](const GroupElement&) { return Complex(1.0, 0.0); };
  return s;
}

/// The canonical trace: 1 at the identity, 0 elsewhere.
inline StateModel dirac_state(const GroupModel& model) {
  (void)model;
  StateModel s;
  s.kind = "dirac";
  s.radial = [](std::size_t len) { return Complex(len == 0 ? 1.0 : 0.0, 0.0); };
  s.evaluate = [](const GroupElement& g) {
    return Complex(word_length(g) == 0 ? 1.0 : 0.0, 0.0);
  };
  return s;
}

namespace detail {

struct FactorBlock {
  std::size_t factor = 0;
  GroupElement local;
};

inline std::vector<FactorBlock> split_blocks(const GroupModel& model,
                                             const GroupElement& g) {
  std::vector<FactorBlock> blocks;
  std::size_t p = 0;
  const auto& w = g.letters;
  while (p < w.size()) {
    const auto [f, local0] = model.factor_of(w[p].generator);
    const std::uint32_t off = model.factor_offset(f);
    FactorBlock b;
    b.factor = f;
    b.local.letters.push_back(Letter{local0, w[p].inverted});
    std::size_t q = p + 1;
    while (q < w.size() && model.factor_of(w[q].generator).first == f) {
      b.local.letters.push_back(Letter{w[q].generator - off, w[q].inverted});
      ++q;
    }
    blocks.push_back(std::move(b));
    p = q;
  }
  return blocks;
}

}  // namespace detail

/// Free product of factor states: the value at g is the product of factor
/// values over the alternating block decomposition of g. The certificate
/// combines factor certificates with the worst rate and degree.
inline StateModel free_product_state(const GroupModel& model,
                                     std::vector<StateModel> factors) {
  if (model.kind() != GroupKind::FreeProduct)
    throw DomainError("free_product_state: model is not a free product");
  if (factors.size() != model.factors().size())
    throw DomainError("free_product_state: factor state count " +
                      std::to_string(factors.size()) + " != group factors " +
                      std::to_string(model.factors().size()));
  for (const auto& f : factors) {
    if (std::abs(f.evaluate(identity_element()) - Complex(1.0, 0.0)) > 1e-12)
      throw DomainError("free_product_state: factor state is not normalized");
  }
  std::optional<DecayCertificate> cert;
  bool all = true;
  unsigned d = 0;
  double rate = kInfinity;
  for (const auto& f : factors) {
    if (!f.certificate) {
      all = false;
      break;
    }
    d = std::max(d, f.certificate->poly_degree);
    rate = std::min(rate, f.certificate->rate);
  }
  if (all) cert = DecayCertificate{d, rate};

  auto shared = std::make_shared<std::vector<StateModel>>(std::move(factors));
  StateModel s;
  s.kind = "free_product(" + std::to_string(shared->size()) + " factors)";
  s.certificate = cert;
  s.evaluate = [model, shared](const GroupElement& g) {
    Complex v(1.0, 0.0);
    for (const auto& b : detail::split_blocks(model, g))
      v *= (*shared)[b.factor].evaluate(b.local);
    return v;
  };
  return s;
}

namespace detail {

// Number of h in S(i) with |g h| = i + p - 2t, for |g| = p >= 1 in a free
// group with |S| generators-and-inverses. Exactly t letters cancel; when the
// cancellation stops strictly inside both words, the next letter of h is
// constrained twice (it must keep h reduced and must not cancel further),
// which costs a factor (|S|-2) instead of (|S|-1).
inline double free_translate_count(double size_S, std::size_t i, std::size_t t,
                                   std::size_t p) {
  const double q = size_S - 1.0;
  if (t == 0 || t == i || t == p)
    return std::pow(q, static_cast<double>(i - t));
  return (size_S - 2.0) * std::pow(q, static_cast<double>(i - t - 1));
}

inline double free_sphere_size(double size_S, std::size_t i) {
  if (i == 0) return 1.0;
  return size_S * std::pow(size_S - 1.0, static_cast<double>(i - 1));
}

inline double radial_value(const std::vector<double>& lambda, double size_S,
                           std::size_t p) {
  const std::size_t M = lambda.size();
  if (p == 0) {
    double acc = 0.0;
    for (std::size_t i = 0; i < M; ++i)
      acc += lambda[i] * lambda[i] * free_sphere_size(size_S, i);
    return acc;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < M; ++i) {
    if (lambda[i] == 0.0) continue;
    const std::size_t tmax = std::min(i, p);
    for (std::size_t t = 0; t <= tmax; ++t) {
      const std::size_t j = i + p - 2 * t;
      if (j >= M || lambda[j] == 0.0) continue;
      acc += lambda[i] * lambda[j] * free_translate_count(size_S, i, t, p);
    }
  }
  return acc;
}

}  // namespace detail

/// Radial state phi_xi(g) = <g.xi, xi> for xi = sum lambda_i chi_i on a free
/// group of rank >= 2. Values depend only on |g| and are computed in closed
/// form from the exact translate counts. Certificate (1, ln(|S|-1)/2) from
/// the bound |phi(g)| <= (|g|+1)(|S|-1)^{-|g|/2}.
inline StateModel radial_state(const GroupModel& model,
                               const RadialCoefficients& coeffs,
                               double norm_tolerance = 1e-9) {
  if (model.kind() != GroupKind::Free)
    throw DomainError("radial_state: model must be a free group");
  if (model.generator_count() < 2)
    throw DomainError("radial_state: free rank must be >= 2");
  if (coeffs.lambda.empty())
    throw DomainError("radial_state: empty coefficient vector");
  const double n2 = coeffs.squared_norm(model);
  if (std::abs(n2 - 1.0) > norm_tolerance)
    throw DomainError("radial_state: coefficients not unit-norm (|xi|^2 = " +
                      std::to_string(n2) + ")");
  const double size_S = static_cast<double>(model.generating_set_size());
  auto lambda = std::make_shared<std::vector<double>>(coeffs.lambda);
  StateModel s;
  s.kind = "radial(m=" + std::to_string(coeffs.max_support()) + ")";
  s.radial = [lambda, size_S](std::size_t len) {
    return Complex(detail::radial_value(*lambda, size_S, len), 0.0);
  };
  s.evaluate = [radial = s.radial](const GroupElement& g) {
    return radial(word_length(g));
  };
  s.certificate = DecayCertificate{1, std::log(size_S - 1.0) / 2.0};
  return s;
}

/// Pointwise k-th power. Positive definiteness is preserved (Schur products);
/// the certificate scales to (k*d, k*rate).
inline StateModel power_state(const StateModel& base, unsigned k) {
  if (k < 1) throw DomainError("power_state: k must be >= 1");
  StateModel s;
  s.kind = base.kind + "^" + std::to_string(k);
  s.evaluate = [eval = base.evaluate, k](const GroupElement& g) {
    return std::pow(eval(g), static_cast<double>(k));
  };
  if (base.radial) {
    s.radial = [rad = base.radial, k](std::size_t len) {
      return std::pow(rad(len), static_cast<double>(k));
    };
  }
  if (base.certificate) {
    s.certificate = DecayCertificate{base.certificate->poly_degree * k,
                                     base.certificate->rate * k};
  }
  return s;
}

struct GramCheckResult {
  double min_eigenvalue = 0.0;
  bool psd = false;
};

/// Builds the Hermitian matrix M_ij = phi(g_i g_j^{-1}) over the given
/// distinct elements and reports its minimum eigenvalue.
inline GramCheckResult gram_psd_check(const GroupModel& model,
                                      const StateModel& state,
                                      const std::vector<GroupElement>& elements,
                                      double tolerance = kPsdTolerance) {
  const std::size_t n = elements.size();
  if (n == 0) throw DomainError("gram_psd_check: empty element list");
  {
    std::vector<GroupElement> sorted = elements;
    std::sort(sorted.begin(), sorted.end(), shortlex_less);
    for (std::size_t i = 1; i < n; ++i)
      if (sorted[i] == sorted[i - 1])
        throw DomainError("gram_psd_check: duplicate elements");
  }
  std::vector<GroupElement> inverses;
  inverses.reserve(n);
  for (const auto& g : elements) inverses.push_back(inverse(model, g));
  Eigen::MatrixXcd m(n, n);
  GroupElement prod;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      multiply_into(model, elements[i], inverses[j], prod);
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          state.evaluate(prod);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(
      m, Eigen::EigenvaluesOnly);
  const double min_eig = solver.eigenvalues().minCoeff();
  return GramCheckResult{min_eig, min_eig >= -tolerance};
}

/// All g != e in B(radius) with |phi(g)| >= 1 - tolerance. An empty result
/// certifies strictness on the scanned ball only.
inline std::vector<GroupElement> strictness_scan(
    const GroupModel& model, const StateModel& state, unsigned radius,
    double tolerance = kStrictnessTolerance, std::size_t cap = kDefaultCap) {
  if (radius < 1) throw DomainError("strictness_scan: radius must be >= 1");
  std::vector<GroupElement> hits;
  for (const auto& g : enumerate_ball(model, radius, cap)) {
    if (word_length(g) == 0) continue;
    if (std::abs(state.evaluate(g)) >= 1.0 - tolerance) hits.push_back(g);
  }
  return hits;
}

/// Extremal decay exponents over each sphere up to `radius`, by exact
/// enumeration (or directly from the radial closed form when available).
inline DecayProfile decay_profile(const GroupModel& model,
                                  const StateModel& state, unsigned radius,
                                  std::size_t cap = kDefaultCap) {
  if (radius < 1) throw DomainError("decay_profile: radius must be >= 1");
  DecayProfile p;
  p.radius = radius;
  p.plus.resize(radius);
  p.minus.resize(radius);
  auto neg_log = [](double v) { return v > 0.0 ? -std::log(v) : kInfinity; };
  // The radial shortcut needs every sphere nonempty; right-angled Coxeter
  // groups can be finite, so they go through enumeration below.
  if (state.is_radial() && model.kind() != GroupKind::RightAngledCoxeter) {
    for (unsigned i = 1; i <= radius; ++i) {
      const double v = std::abs(state.radial(i));
      p.plus[i - 1] = neg_log(v);
      p.minus[i - 1] = neg_log(v);
    }
    return p;
  }
  auto layers = enumerate_sphere_layers(model, radius, cap);
  for (unsigned i = 1; i <= radius; ++i) {
    double lo = kInfinity;
    double hi = 0.0;
    for (const auto& g : layers[i]) {
      const double v = std::abs(state.evaluate(g));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (layers[i].empty()) {
      p.plus[i - 1] = kInfinity;
      p.minus[i - 1] = kInfinity;
    } else {
      p.plus[i - 1] = neg_log(lo);
      p.minus[i - 1] = neg_log(hi);
    }
  }
  return p;
}

/// Empirical certificate check: |phi(g)| <= (|g|+1)^d e^{-rate |g|} for all
/// g in B(radius), within `slack`.
inline bool certificate_holds_on_ball(const GroupModel& model,
                                      const StateModel& state, unsigned radius,
                                      double slack = 1e-12,
                                      std::size_t cap = kDefaultCap) {
  if (!state.certificate) return false;
  const auto& c = *state.certificate;
  for (const auto& g : enumerate_ball(model, radius, cap)) {
    const double len = static_cast<double>(word_length(g));
    const double bound =
        std::pow(len + 1.0, static_cast<double>(c.poly_degree)) *
        std::exp(-c.rate * len);
    if (std::abs(state.evaluate(g)) > bound + slack) return false;
  }
  return true;
}

}  // namespace cutofflab
