#pragma once

// Exact word arithmetic, normal forms and sphere/ball enumeration for
// marked groups: free groups, universal Coxeter groups, right-angled
// Coxeter groups and free products of those.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cutofflab/errors.hpp"

namespace cutofflab {

/// One letter of a word: a generator index plus an inversion flag.
/// Involutive generators (Coxeter kinds) always carry inverted = false.
struct Letter {
  std::uint32_t generator = 0;
  bool inverted = false;

  friend bool operator==(const Letter&, const Letter&) = default;
};

/// Packed key used for shortlex comparisons: (generator, inverted).
inline std::uint64_t letter_key(const Letter& l) {
  return (static_cast<std::uint64_t>(l.generator) << 1) |
         (l.inverted ? 1u : 0u);
}

using Word = std::vector<Letter>;

/// A group element held in model normal form. Default value is the identity.
struct GroupElement {
  Word letters;

  friend bool operator==(const GroupElement&, const GroupElement&) = default;
};

inline std::size_t word_length(const GroupElement& g) {
  return g.letters.size();
}

/// Shortlex order: length first, then letter keys lexicographically.
inline bool shortlex_less(const GroupElement& a, const GroupElement& b) {
  if (a.letters.size() != b.letters.size())
    return a.letters.size() < b.letters.size();
  for (std::size_t i = 0; i < a.letters.size(); ++i) {
    const auto ka = letter_key(a.letters[i]);
    const auto kb = letter_key(b.letters[i]);
    if (ka != kb) return ka < kb;
  }
  return false;
}

enum class GroupKind { Free, UniversalCoxeter, RightAngledCoxeter, FreeProduct };

/// Descriptor plus normal-form engine for one marked group.
///
/// Generator indices are 0-based; for a free product they run contiguously
/// over the factors in order. The generating set S is symmetric: for a free
/// group of rank N it has 2N elements (letters and their inverses), for the
/// Coxeter kinds it has N involutions, and for a free product it is the
/// disjoint union of the factor sets.
class GroupModel {
 public:
  static GroupModel free_group(unsigned rank) {
    if (rank < 1) throw DomainError("free_group: rank must be >= 1");
    GroupModel m;
    m.kind_ = GroupKind::Free;
    m.rank_ = rank;
    m.name_ = "free(" + std::to_string(rank) + ")";
    return m;
  }

  static GroupModel universal_coxeter(unsigned rank) {
    if (rank < 2) throw DomainError("universal_coxeter: rank must be >= 2");
    GroupModel m;
    m.kind_ = GroupKind::UniversalCoxeter;
    m.rank_ = rank;
    m.name_ = "universal_coxeter(" + std::to_string(rank) + ")";
    return m;
  }

  /// `commuting_edges` lists unordered generator pairs that commute. The
  /// graph must be loop-free; it is stored symmetrically.
  static GroupModel right_angled_coxeter(
      unsigned rank, const std::vector<std::pair<unsigned, unsigned>>& commuting_edges) {
    if (rank < 2) throw DomainError("right_angled_coxeter: rank must be >= 2");
    GroupModel m;
    m.kind_ = GroupKind::RightAngledCoxeter;
    m.rank_ = rank;
    m.commute_.assign(rank, std::vector<bool>(rank, false));
    for (const auto& [u, v] : commuting_edges) {
      if (u >= rank || v >= rank)
        throw DomainError("right_angled_coxeter: edge endpoint out of range");
      if (u == v) throw DomainError("right_angled_coxeter: loop edge");
      m.commute_[u][v] = true;
      m.commute_[v][u] = true;
    }
    m.name_ = "right_angled_coxeter(" + std::to_string(rank) + ")";
    return m;
  }

  static GroupModel free_product(std::vector<GroupModel> factors) {
    if (factors.size() < 2)
      throw DomainError("free_product: needs at least two factors");
    GroupModel m;
    m.kind_ = GroupKind::FreeProduct;
    m.factors_ = std::move(factors);
    m.offsets_.clear();
    unsigned off = 0;
    bool minimal = true;
    for (const auto& f : m.factors_) {
      m.offsets_.push_back(off);
      off += f.generator_count();
      minimal = minimal && f.minimal_generating_set();
    }
    m.rank_ = off;
    m.minimal_ = minimal;
    m.name_ = "free_product(" + std::to_string(m.factors_.size()) + " factors)";
    return m;
  }

  GroupKind kind() const { return kind_; }
  const std::string& name() const { return name_; }

  /// Number of distinct generator indices.
  unsigned generator_count() const { return rank_; }

  /// Size of the canonical symmetric generating set S.
  std::size_t generating_set_size() const {
    switch (kind_) {
      case GroupKind::Free:
        return 2u * rank_;
      case GroupKind::UniversalCoxeter:
      case GroupKind::RightAngledCoxeter:
        return rank_;
      case GroupKind::FreeProduct: {
        std::size_t s = 0;
        for (const auto& f : factors_) s += f.generating_set_size();
        return s;
      }
    }
    return 0;
  }

  bool involutive(std::uint32_t gen) const {
    switch (kind_) {
      case GroupKind::Free:
        return false;
      case GroupKind::UniversalCoxeter:
      case GroupKind::RightAngledCoxeter:
        return true;
      case GroupKind::FreeProduct: {
        const auto [f, local] = factor_of(gen);
        return factors_[f].involutive(local);
      }
    }
    return false;
  }

  bool generators_commute(std::uint32_t a, std::uint32_t b) const {
    return commute_[a][b];
  }

  /// Flag recorded on the descriptor; the base kinds ship minimal symmetric
  /// sets, a free product inherits the conjunction of its factors. Not a
  /// proof of minimality for arbitrary compositions.
  bool minimal_generating_set() const { return minimal_; }

  const std::vector<GroupModel>& factors() const { return factors_; }

  /// Maps a global generator index to (factor index, local generator index).
  std::pair<std::size_t, std::uint32_t> factor_of(std::uint32_t gen) const {
    for (std::size_t f = factors_.size(); f-- > 0;) {
      if (gen >= offsets_[f]) return {f, gen - offsets_[f]};
    }
    throw DomainError("factor_of: generator index out of range");
  }

  std::uint32_t factor_offset(std::size_t f) const { return offsets_[f]; }

 private:
  GroupKind kind_ = GroupKind::Free;
  unsigned rank_ = 1;
  bool minimal_ = true;
  std::string name_;
  std::vector<std::vector<bool>> commute_;  // RACG only
  std::vector<GroupModel> factors_;         // FreeProduct only
  std::vector<std::uint32_t> offsets_;      // FreeProduct only
};

namespace detail {

inline void check_letters(const GroupModel& model, const Word& raw) {
  for (const auto& l : raw) {
    if (l.generator >= model.generator_count())
      throw DomainError("normal_form: generator index " +
                        std::to_string(l.generator) + " out of range for " +
                        model.name());
  }
}

// Free / universal Coxeter reduction is a single stack pass: a letter
// cancels against the top when it is its inverse (Free) or equal (Coxeter).
inline void stack_reduce_free(Word& out, const Word& in) {
  for (const auto& l : in) {
    if (!out.empty() && out.back().generator == l.generator &&
        out.back().inverted != l.inverted) {
      out.pop_back();
    } else {
      out.push_back(l);
    }
  }
}

inline void stack_reduce_involutive(Word& out, const Word& in) {
  for (const auto& l : in) {
    if (!out.empty() && out.back().generator == l.generator) {
      out.pop_back();
    } else {
      out.push_back(Letter{l.generator, false});
    }
  }
}

// RACG: delete pairs of equal letters separated only by letters commuting
// with them, to a fixed point. The survivor is geodesic.
inline void racg_geodesic(const GroupModel& m, Word& w) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t p = 0; p < w.size() && !changed; ++p) {
      for (std::size_t q = p + 1; q < w.size(); ++q) {
        if (w[q].generator == w[p].generator) {
          bool clear = true;
          for (std::size_t r = p + 1; r < q; ++r) {
            if (!m.generators_commute(w[r].generator, w[p].generator)) {
              clear = false;
              break;
            }
          }
          if (clear) {
            w.erase(w.begin() + static_cast<std::ptrdiff_t>(q));
            w.erase(w.begin() + static_cast<std::ptrdiff_t>(p));
            changed = true;
            break;
          }
        }
        if (!m.generators_commute(w[q].generator, w[p].generator)) break;
      }
    }
  }
}

// Lexicographically least word in the commutation class: repeatedly emit the
// smallest letter that can be moved to the front past commuting letters.
inline Word racg_shortlex(const GroupModel& m, const Word& w) {
  Word pool = w;
  Word out;
  out.reserve(w.size());
  while (!pool.empty()) {
    std::size_t best = pool.size();
    for (std::size_t idx = 0; idx < pool.size(); ++idx) {
      bool movable = true;
      for (std::size_t r = 0; r < idx; ++r) {
        if (!m.generators_commute(pool[r].generator, pool[idx].generator)) {
          movable = false;
          break;
        }
      }
      if (movable &&
          (best == pool.size() || pool[idx].generator < pool[best].generator)) {
        best = idx;
      }
    }
    out.push_back(pool[best]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return out;
}

}  // namespace detail

GroupElement normal_form(const GroupModel& model, const Word& raw);

namespace detail {

// Free product: cut into maximal same-factor runs, normalize each run in its
// factor, drop identity runs and merge newly adjacent runs, to a fixed point.
inline Word free_product_reduce(const GroupModel& m, const Word& raw) {
  Word cur = raw;
  while (true) {
    Word next;
    next.reserve(cur.size());
    std::size_t p = 0;
    while (p < cur.size()) {
      const auto [f, local0] = m.factor_of(cur[p].generator);
      const std::uint32_t off = m.factor_offset(f);
      Word local;
      local.push_back(Letter{local0, cur[p].inverted});
      std::size_t q = p + 1;
      while (q < cur.size() && m.factor_of(cur[q].generator).first == f) {
        local.push_back(Letter{cur[q].generator - off, cur[q].inverted});
        ++q;
      }
      const GroupElement nf = normal_form(m.factors()[f], local);
      for (const auto& l : nf.letters)
        next.push_back(Letter{l.generator + off, l.inverted});
      p = q;
    }
    if (next == cur) return cur;
    cur = std::move(next);
  }
}

}  // namespace detail

/// Canonical representative of the word `raw`. Idempotent; the letter count
/// of the result is the word length for the model's generating set.
inline GroupElement normal_form(const GroupModel& model, const Word& raw) {
  detail::check_letters(model, raw);
  GroupElement g;
  switch (model.kind()) {
    case GroupKind::Free:
      g.letters.reserve(raw.size());
      detail::stack_reduce_free(g.letters, raw);
      break;
    case GroupKind::UniversalCoxeter:
      g.letters.reserve(raw.size());
      detail::stack_reduce_involutive(g.letters, raw);
      break;
    case GroupKind::RightAngledCoxeter: {
      Word w;
      w.reserve(raw.size());
      for (const auto& l : raw) w.push_back(Letter{l.generator, false});
      detail::racg_geodesic(model, w);
      g.letters = detail::racg_shortlex(model, w);
      break;
    }
    case GroupKind::FreeProduct:
      g.letters = detail::free_product_reduce(model, raw);
      break;
  }
  return g;
}

inline GroupElement identity_element() { return GroupElement{}; }

/// Normal form of g * h; inputs must already be in normal form.
inline void multiply_into(const GroupModel& model, const GroupElement& g,
                          const GroupElement& h, GroupElement& out) {
  switch (model.kind()) {
    case GroupKind::Free:
      out.letters.clear();
      out.letters.reserve(g.letters.size() + h.letters.size());
      out.letters = g.letters;
      detail::stack_reduce_free(out.letters, h.letters);
      break;
    case GroupKind::UniversalCoxeter:
      out.letters.clear();
      out.letters.reserve(g.letters.size() + h.letters.size());
      out.letters = g.letters;
      detail::stack_reduce_involutive(out.letters, h.letters);
      break;
    default: {
      Word concat = g.letters;
      concat.insert(concat.end(), h.letters.begin(), h.letters.end());
      out = normal_form(model, concat);
      break;
    }
  }
}

inline GroupElement multiply(const GroupModel& model, const GroupElement& g,
                             const GroupElement& h) {
  GroupElement out;
  multiply_into(model, g, h, out);
  return out;
}

inline GroupElement inverse(const GroupModel& model, const GroupElement& g) {
  Word rev;
  rev.reserve(g.letters.size());
  for (auto it = g.letters.rbegin(); it != g.letters.rend(); ++it) {
    const bool inv = model.involutive(it->generator) ? false : !it->inverted;
    rev.push_back(Letter{it->generator, inv});
  }
  return normal_form(model, rev);
}

/// The canonical symmetric generating set, in shortlex letter order.
inline std::vector<Letter> generating_letters(const GroupModel& model) {
  std::vector<Letter> out;
  switch (model.kind()) {
    case GroupKind::Free:
      for (std::uint32_t g = 0; g < model.generator_count(); ++g) {
        out.push_back(Letter{g, false});
        out.push_back(Letter{g, true});
      }
      break;
    case GroupKind::UniversalCoxeter:
    case GroupKind::RightAngledCoxeter:
      for (std::uint32_t g = 0; g < model.generator_count(); ++g)
        out.push_back(Letter{g, false});
      break;
    case GroupKind::FreeProduct:
      for (std::uint32_t g = 0; g < model.generator_count(); ++g) {
        if (model.involutive(g)) {
          out.push_back(Letter{g, false});
        } else {
          out.push_back(Letter{g, false});
          out.push_back(Letter{g, true});
        }
      }
      break;
  }
  return out;
}

/// All elements of word length exactly `radius`, each once, in shortlex
/// order. Throws CapacityError when any layer would exceed `cap` elements.
inline std::vector<std::vector<GroupElement>> enumerate_sphere_layers(
    const GroupModel& model, unsigned radius, std::size_t cap = kDefaultCap) {
  std::vector<std::vector<GroupElement>> layers(radius + 1);
  layers[0].push_back(identity_element());
  std::vector<GroupElement> gens;
  for (const auto& l : generating_letters(model)) {
    GroupElement one;
    one.letters.push_back(l);
    gens.push_back(one);
  }
  GroupElement step;
  for (unsigned i = 1; i <= radius; ++i) {
    auto& layer = layers[i];
    for (const auto& w : layers[i - 1]) {
      for (const auto& one : gens) {
        multiply_into(model, w, one, step);
        if (step.letters.size() == i) {
          layer.push_back(step);
          if (layer.size() > 2 * cap + 16)
            throw CapacityError("enumerate_sphere: cap exceeded at radius " +
                                std::to_string(i));
        }
      }
    }
    std::sort(layer.begin(), layer.end(), shortlex_less);
    layer.erase(std::unique(layer.begin(), layer.end()), layer.end());
    if (layer.size() > cap)
      throw CapacityError("enumerate_sphere: sphere of radius " +
                          std::to_string(i) + " has " +
                          std::to_string(layer.size()) + " elements > cap " +
                          std::to_string(cap));
  }
  return layers;
}

inline std::vector<GroupElement> enumerate_sphere(const GroupModel& model,
                                                  unsigned radius,
                                                  std::size_t cap = kDefaultCap) {
  return std::move(enumerate_sphere_layers(model, radius, cap)[radius]);
}

/// B(radius) as concatenated shortlex spheres (itself shortlex ordered).
inline std::vector<GroupElement> enumerate_ball(const GroupModel& model,
                                                unsigned radius,
                                                std::size_t cap = kDefaultCap) {
  auto layers = enumerate_sphere_layers(model, radius, cap);
  std::vector<GroupElement> ball;
  std::size_t total = 0;
  for (const auto& l : layers) total += l.size();
  if (total > cap)
    throw CapacityError("enumerate_ball: ball has " + std::to_string(total) +
                        " elements > cap " + std::to_string(cap));
  ball.reserve(total);
  for (auto& l : layers)
    for (auto& g : l) ball.push_back(std::move(g));
  return ball;
}

/// Whether sphere sizes have a closed form for this model.
inline bool has_sphere_size_closed_form(const GroupModel& model) {
  return model.kind() == GroupKind::Free ||
         model.kind() == GroupKind::UniversalCoxeter;
}

/// Sphere size as a double, exact for the closed-form kinds at any radius.
/// Enumeration-backed kinds go through enumerate_sphere (cap applies).
inline double sphere_size_real(const GroupModel& model, unsigned i,
                               std::size_t cap = kDefaultCap) {
  if (i == 0) return 1.0;
  const double s = static_cast<double>(model.generating_set_size());
  switch (model.kind()) {
    case GroupKind::Free:
    case GroupKind::UniversalCoxeter:
      return s * std::pow(s - 1.0, static_cast<double>(i - 1));
    default:
      return static_cast<double>(enumerate_sphere(model, i, cap).size());
  }
}

/// Exact sphere size; throws CapacityError if it does not fit in 64 bits or
/// (for enumeration-backed models) exceeds the cap.
inline std::uint64_t sphere_size(const GroupModel& model, unsigned i,
                                 std::size_t cap = kDefaultCap) {
  if (i == 0) return 1;
  switch (model.kind()) {
    case GroupKind::Free:
    case GroupKind::UniversalCoxeter: {
      const std::uint64_t s = model.generating_set_size();
      std::uint64_t acc = s;
      for (unsigned j = 1; j < i; ++j) {
        const std::uint64_t next = acc * (s - 1);
        if (s > 1 && next / (s - 1) != acc)
          throw CapacityError("sphere_size: 64-bit overflow at radius " +
                              std::to_string(i));
        acc = next;
      }
      return acc;
    }
    default:
      return enumerate_sphere(model, i, cap).size();
  }
}

}  // namespace cutofflab
