#pragma once

// Independent brute-force verifiers. Everything here recomputes closed forms
// by exhaustive enumeration and deliberately avoids the code paths of the
// formulas it checks.

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "cutofflab/errors.hpp"
#include "cutofflab/group.hpp"
#include "cutofflab/state.hpp"

namespace cutofflab {
namespace oracle {

/// sum over g in B(R)\{e} of |phi(g)|^{2k}, element by element. This is the
/// reference value for the truncated part of the certified series bound.
inline double tv_l2_truncated_sum(const GroupModel& model,
                                  const StateModel& state, unsigned k,
                                  unsigned radius,
                                  std::size_t cap = kDefaultCap) {
  double acc = 0.0;
  for (const auto& g : enumerate_ball(model, radius, cap)) {
    if (word_length(g) == 0) continue;
    acc += std::pow(std::abs(state.evaluate(g)),
                    2.0 * static_cast<double>(k));
  }
  return acc;
}

/// counts[i][j] = |(g S(i)) cap S(j)| for i <= i_max, j <= j_max, computed by
/// translating every element of B(i_max) through exact word arithmetic.
inline std::vector<std::vector<std::uint64_t>> translate_sphere_counts(
    const GroupModel& model, const GroupElement& g, unsigned i_max,
    unsigned j_max, std::size_t cap = kDefaultCap) {
  std::vector<std::vector<std::uint64_t>> counts(
      i_max + 1, std::vector<std::uint64_t>(j_max + 1, 0));
  const auto layers = enumerate_sphere_layers(model, i_max, cap);
  GroupElement prod;
  for (unsigned i = 0; i <= i_max; ++i) {
    for (const auto& h : layers[i]) {
      multiply_into(model, g, h, prod);
      const std::size_t j = prod.letters.size();
      if (j <= j_max) counts[i][j]++;
    }
  }
  return counts;
}

/// |(g S(i)) cap S(j)| by direct enumeration of S(i).
inline std::uint64_t intersection_count(const GroupModel& model,
                                        const GroupElement& g, unsigned i,
                                        unsigned j,
                                        std::size_t cap = kDefaultCap) {
  std::uint64_t count = 0;
  GroupElement prod;
  for (const auto& h : enumerate_sphere(model, i, cap)) {
    multiply_into(model, g, h, prod);
    if (prod.letters.size() == j) count++;
  }
  return count;
}

/// <g.xi, xi> for xi = sum_i lambda_i chi_i, evaluated from translate counts:
/// <g.xi, xi> = sum_{i,j} lambda_i lambda_j |(g S(i)) cap S(j)|.
/// `workspace_radius` must cover the translated support, i.e. be at least
/// max_support + |g|, so that no mass is silently truncated.
inline Complex radial_direct_inner_product(const GroupModel& model,
                                           const RadialCoefficients& coeffs,
                                           const GroupElement& g,
                                           unsigned workspace_radius,
                                           std::size_t cap = kDefaultCap) {
  const unsigned m = static_cast<unsigned>(coeffs.max_support());
  if (workspace_radius < m + word_length(g))
    throw DomainError(
        "radial_direct_inner_product: workspace radius would truncate the "
        "translated vector");
  const auto counts = translate_sphere_counts(model, g, m, m, cap);
  double acc = 0.0;
  for (unsigned i = 0; i <= m; ++i)
    for (unsigned j = 0; j <= m; ++j)
      acc += coeffs.lambda[i] * coeffs.lambda[j] *
             static_cast<double>(counts[i][j]);
  return Complex(acc, 0.0);
}

struct MeanVariance {
  double mean = 0.0;
  double variance = 0.0;
};

/// Mean and variance of chi_1 = sum of generators under phi^k: the square is
/// expanded exactly over ordered generator pairs.
inline MeanVariance variance_exact(const GroupModel& model,
                                   const StateModel& state, unsigned k,
                                   std::size_t cap = kDefaultCap) {
  const auto sphere1 = enumerate_sphere(model, 1, cap);
  const double kk = static_cast<double>(k);
  double mean = 0.0;
  for (const auto& g : sphere1)
    mean += std::pow(state.evaluate(g), kk).real();
  double second = 0.0;
  GroupElement prod;
  for (const auto& g : sphere1) {
    for (const auto& h : sphere1) {
      multiply_into(model, g, h, prod);
      second += std::pow(state.evaluate(prod), kk).real();
    }
  }
  return MeanVariance{mean, second - mean * mean};
}

namespace detail_oracle {

// Independent block splitter for free products; does not share code with
// the evaluator's decomposition.
inline std::vector<std::pair<std::size_t, GroupElement>> alternating_blocks(
    const GroupModel& model, const GroupElement& g) {
  std::vector<std::pair<std::size_t, GroupElement>> blocks;
  for (const auto& letter : g.letters) {
    const auto [f, local] = model.factor_of(letter.generator);
    if (blocks.empty() || blocks.back().first != f)
      blocks.emplace_back(f, GroupElement{});
    blocks.back().second.letters.push_back(Letter{local, letter.inverted});
  }
  return blocks;
}

}  // namespace detail_oracle

/// Recomputes a free-product state value from the alternating block
/// factorization and compares it with the evaluator output.
inline bool free_product_refactor_check(const GroupModel& model,
                                        const std::vector<StateModel>& factors,
                                        const StateModel& product_state,
                                        const GroupElement& g,
                                        double tolerance = 1e-12) {
  Complex block_product(1.0, 0.0);
  for (const auto& [f, local] : detail_oracle::alternating_blocks(model, g))
    block_product *= factors[f].evaluate(local);
  return std::abs(block_product - product_state.evaluate(g)) <= tolerance;
}

}  // namespace oracle
}  // namespace cutofflab
