#pragma once

// Growth and cogrowth statistics of a marked group, and the operator-norm
// formula for the generator sum chi_1.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cutofflab/errors.hpp"
#include "cutofflab/group.hpp"

namespace cutofflab {

/// Exact sphere sizes s_0..s_R together with the diagnostics s_i^{1/i},
/// which converge to the growth rate of the marked group.
struct SphereTable {
  unsigned radius = 0;
  std::vector<std::uint64_t> sizes;       // index i holds s_i, 0 <= i <= R
  std::vector<double> growth_estimates;   // index i-1 holds s_i^{1/i}, i >= 1
};

inline SphereTable growth_table(const GroupModel& model, unsigned radius,
                                std::size_t cap = kDefaultCap) {
  if (radius < 1) throw DomainError("growth_table: radius must be >= 1");
  SphereTable t;
  t.radius = radius;
  t.sizes.reserve(radius + 1);
  if (has_sphere_size_closed_form(model)) {
    for (unsigned i = 0; i <= radius; ++i)
      t.sizes.push_back(sphere_size(model, i, cap));
  } else {
    const auto layers = enumerate_sphere_layers(model, radius, cap);
    for (unsigned i = 0; i <= radius; ++i)
      t.sizes.push_back(layers[i].size());
  }
  for (unsigned i = 1; i <= radius; ++i)
    t.growth_estimates.push_back(
        std::pow(static_cast<double>(t.sizes[i]), 1.0 / static_cast<double>(i)));
  return t;
}

/// Known closed-form growth rate, when the model has one.
inline std::optional<double> growth_rate_limit(const GroupModel& model) {
  switch (model.kind()) {
    case GroupKind::Free:
      return static_cast<double>(2 * model.generator_count()) - 1.0;
    case GroupKind::UniversalCoxeter:
      return static_cast<double>(model.generator_count()) - 1.0;
    default:
      return std::nullopt;
  }
}

/// Counts of reduced words in the kernel of the marking F_n -> Gamma, where
/// n is the number of generator indices and each free letter maps onto the
/// corresponding generator (involutions absorb both a letter and its
/// inverse, so a^2 and a^-2 are counted separately).
struct CogrowthEstimate {
  unsigned max_length = 0;
  std::vector<std::uint64_t> counts;  // index i-1 holds r_i, 1 <= i <= L
  /// r_i^{1/i} for the largest i with r_i > 0; empty when all counts vanish.
  std::optional<double> gamma_hat;
  /// True when no relation was seen: gamma falls back to sqrt(|S|-1), which
  /// is exact for groups free on their marking and a warning otherwise.
  bool gamma_convention = false;
  double gamma_value = 0.0;

  std::uint64_t count(unsigned i) const { return counts.at(i - 1); }
};

inline CogrowthEstimate cogrowth_count(const GroupModel& model, unsigned max_length,
                                       std::size_t cap = kDefaultCap) {
  if (max_length < 1) throw DomainError("cogrowth_count: max_length must be >= 1");
  const unsigned n = model.generator_count();
  {
    // total reduced words to visit: sum_i 2n(2n-1)^{i-1}
    double total = 0.0;
    for (unsigned i = 1; i <= max_length; ++i)
      total += 2.0 * n * std::pow(2.0 * n - 1.0, static_cast<double>(i - 1));
    if (total > static_cast<double>(cap))
      throw CapacityError("cogrowth_count: " + std::to_string(total) +
                          " reduced words exceed cap " + std::to_string(cap));
  }

  CogrowthEstimate est;
  est.max_length = max_length;
  est.counts.assign(max_length, 0);

  // Iterative DFS over reduced words in the free group on n letters; the
  // image in the model is maintained incrementally.
  struct Frame {
    Letter letter;        // free-group letter chosen at this depth
    GroupElement image;   // image of the prefix ending here
  };
  std::vector<Frame> stack;
  std::vector<GroupElement> gen_images(2 * n);
  for (std::uint32_t g = 0; g < n; ++g) {
    Word w{Letter{g, false}};
    gen_images[2 * g] = normal_form(model, w);
    Word wi{Letter{g, true}};
    gen_images[2 * g + 1] = normal_form(model, wi);
  }
  // letters are encoded 0..2n-1 as (gen, inverted); iterate depth-first
  std::vector<std::uint32_t> next_choice;
  stack.reserve(max_length);
  next_choice.assign(max_length + 1, 0);
  GroupElement scratch;
  const GroupElement id;
  while (true) {
    const std::size_t depth = stack.size();
    std::uint32_t c = next_choice[depth];
    bool descended = false;
    for (; c < 2 * n && depth < max_length; ++c) {
      const Letter l{c / 2, (c % 2) != 0};
      if (!stack.empty()) {
        const Letter prev = stack.back().letter;
        if (prev.generator == l.generator && prev.inverted != l.inverted)
          continue;  // not reduced in F_n
      }
      const GroupElement& base = stack.empty() ? id : stack.back().image;
      multiply_into(model, base, gen_images[c], scratch);
      next_choice[depth] = c + 1;
      stack.push_back(Frame{l, scratch});
      next_choice[depth + 1] = 0;
      if (scratch.letters.empty()) est.counts[depth]++;
      descended = true;
      break;
    }
    if (descended) continue;
    if (stack.empty()) break;
    stack.pop_back();
  }

  const double size_S = static_cast<double>(model.generating_set_size());
  for (unsigned i = max_length; i >= 1; --i) {
    if (est.counts[i - 1] > 0) {
      est.gamma_hat = std::pow(static_cast<double>(est.counts[i - 1]),
                               1.0 / static_cast<double>(i));
      break;
    }
  }
  if (est.gamma_hat) {
    est.gamma_value = *est.gamma_hat;
  } else {
    est.gamma_convention = true;
    est.gamma_value = std::sqrt(size_S - 1.0);
  }
  return est;
}

/// Operator norm of chi_1 from the cogrowth rate:
/// |chi_1| = gamma + (|S|-1)/gamma, valid for gamma >= sqrt(|S|-1)
/// (the convention value for groups free on S).
inline double chi1_norm_cohen(std::size_t size_S, double gamma) {
  const double q = static_cast<double>(size_S) - 1.0;
  if (!(gamma >= std::sqrt(q) - 1e-12))
    throw DomainError("chi1_norm_cohen: gamma below convention floor sqrt(|S|-1)");
  return gamma + q / gamma;
}

}  // namespace cutofflab
