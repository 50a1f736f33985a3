#pragma once

// Rational points of the diagonal torus in the twisted model, the rational
// Weyl group W(T)^{F'} = C_{S_n}(w), root subtori at level r−1 and their norm
// images, and the regularity / general-position tests.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "hdl/abelian.hpp"
#include "hdl/twistgroup.hpp"

namespace hdl {

// Dual coordinates with respect to the torus' canonical abelian basis.
struct TorusCharacter {
  std::vector<int> coords;
  friend bool operator==(const TorusCharacter&, const TorusCharacter&) = default;
  std::string to_string() const {
    std::string s = "(";
    for (std::size_t i = 0; i < coords.size(); ++i) s += (i ? "," : "") + std::to_string(coords[i]);
    return s + ")";
  }
};

class Torus {
 public:
  static constexpr std::size_t kMaxSize = std::size_t{1} << 16;

  explicit Torus(GroupSpec spec) : spec_(std::move(spec)), cycles_(perm_cycles(spec_.w())) {
    const TruncRing& R = spec_.ring();
    std::size_t total = 1;
    std::vector<std::vector<RingElem>> factor_units;
    for (const auto& c : cycles_) {
      factor_units.push_back(R.units_over(static_cast<unsigned>(c.size())));
      total *= factor_units.back().size();
      if (total > kMaxSize) throw cap_exceeded("torus order exceeds 2^16");
    }
    // first cycle most significant
    for (std::size_t idx = 0; idx < total; ++idx) {
      std::size_t rest = idx;
      std::vector<RingElem> values(cycles_.size());
      for (std::size_t c = cycles_.size(); c-- > 0;) {
        values[c] = factor_units[c][rest % factor_units[c].size()];
        rest /= factor_units[c].size();
      }
      const Mat A = avatar(values);
      index_.emplace(spec_.key(A), static_cast<std::int32_t>(elements_.size()));
      elements_.push_back(A);
    }
    identity_ = static_cast<std::size_t>(index_of(spec_.identity()));
    build_weyl();
  }

  const GroupSpec& spec() const { return spec_; }
  const std::vector<std::vector<int>>& cycles() const { return cycles_; }
  std::vector<int> cycle_type() const {
    std::vector<int> t;
    for (const auto& c : cycles_) t.push_back(static_cast<int>(c.size()));
    return t;
  }
  bool is_coxeter() const { return cycles_.size() == 1; }
  bool is_split() const { return cycles_.size() == static_cast<std::size_t>(spec_.n()); }

  std::size_t size() const { return elements_.size(); }
  const Mat& element(std::size_t i) const { return elements_[i]; }
  std::size_t identity() const { return identity_; }

  // Diagonal matrix whose entry at position c_j of cycle c is F^j(value_c).
  Mat avatar(const std::vector<RingElem>& values) const {
    Mat A;
    for (std::size_t c = 0; c < cycles_.size(); ++c) {
      RingElem x = values[c];
      for (int pos : cycles_[c]) {
        spec_.set_entry(A, pos, pos, x);
        x = spec_.ring().frobenius(x);
      }
    }
    return A;
  }
  std::vector<RingElem> factor_values(std::size_t i) const {
    std::vector<RingElem> out;
    for (const auto& c : cycles_) out.push_back(spec_.entry(elements_[i], c.front(), c.front()));
    return out;
  }

  // ∏_i (q^{n_i} − 1) q^{n_i (r−1)}
  std::uint64_t order_formula() const {
    std::uint64_t out = 1;
    for (const auto& c : cycles_) out *= spec_.ring().unit_count(static_cast<unsigned>(c.size()));
    return out;
  }

  std::int32_t index_of(const Mat& A) const {
    if (!spec_.is_diagonal(A) || !spec_.is_fixed(A)) return -1;
    auto it = index_.find(spec_.key(A));
    return it == index_.end() ? -1 : it->second;
  }
  std::size_t mul(std::size_t i, std::size_t j) const {
    return static_cast<std::size_t>(index_of(spec_.mul(elements_[i], elements_[j])));
  }

  // T^k = T ∩ G^k
  std::vector<std::size_t> level_subgroup(int k) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < size(); ++i)
      if (spec_.member(elements_[i], SubgroupTag::kernel(k))) out.push_back(i);
    return out;
  }
  // Constant diagonal matrices: the multiplicative lift of T_1^{F'}.
  std::vector<std::size_t> teichmuller_subgroup() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < size(); ++i) {
      bool constant = true;
      for (int a = 0; a < spec_.n() && constant; ++a)
        for (int k = 1; k < spec_.r(); ++k)
          if (spec_.coef(elements_[i], a, a, k)) constant = false;
      if (constant) out.push_back(i);
    }
    return out;
  }

  // --- characters ---------------------------------------------------------

  const AbelianDual& dual() const {
    if (!dual_) dual_ = std::make_unique<AbelianDual>(size(), identity_, [this](std::size_t a, std::size_t b) { return mul(a, b); });
    return *dual_;
  }
  // Root-of-unity order used for character values: lcm(exponent, p).
  std::uint32_t value_order() const { return static_cast<std::uint32_t>(std::lcm<std::uint64_t>(dual().exponent(), spec_.p())); }

  std::size_t character_count() const { return dual().character_count(); }
  TorusCharacter character(std::size_t idx) const { return {dual().character_coords(idx)}; }
  std::size_t character_index(const TorusCharacter& th) const { return dual().character_index(th.coords); }
  TorusCharacter trivial_character() const { return {std::vector<int>(dual().rank(), 0)}; }

  // exponent of θ(t) in Z/M with M = value_order()
  std::uint32_t value(const TorusCharacter& th, std::size_t t) const { return dual().value(th.coords, t, value_order()); }

  // --- rational Weyl group ------------------------------------------------

  const std::vector<Perm>& weyl_group() const { return weyl_; }
  const std::vector<Perm>& weyl_generators() const { return weyl_gens_; }
  // ∏_s mult_s! · s^{mult_s}
  std::uint64_t weyl_order_formula() const {
    std::map<int, int> mult;
    for (const auto& c : cycles_) ++mult[static_cast<int>(c.size())];
    std::uint64_t out = 1;
    for (auto [s, k] : mult)
      for (int i = 1; i <= k; ++i) out *= static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(s);
    return out;
  }
  // P_v t P_v^{-1}
  std::size_t weyl_act(const Perm& v, std::size_t t) const {
    Mat A;
    for (int i = 0; i < spec_.n(); ++i)
      spec_.set_entry(A, v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(i)], spec_.entry(elements_[t], i, i));
    const auto k = index_of(A);
    check(k >= 0, "Weyl action left the torus");
    return static_cast<std::size_t>(k);
  }
  // (v·θ)(t) = θ(P_v^{-1} t P_v)
  TorusCharacter weyl_act(const Perm& v, const TorusCharacter& th) const {
    const Perm vinv = perm_inverse(v);
    const auto& D = dual();
    const std::uint32_t M = value_order();
    // solve for coordinates from values on the basis
    std::vector<int> e(D.rank());
    for (std::size_t i = 0; i < D.rank(); ++i) {
      // the coefficient e_i is read off by pairing with the basis dual:
      // θ'(g_j) = ζ^{Σ e_i c_i(g_j) M/o_i} = ζ^{e_j M/o_j}
      const std::uint32_t val = value(th, weyl_act(vinv, D.basis()[i]));
      e[i] = static_cast<int>(val / (M / D.orders()[i]));
      check(val % (M / D.orders()[i]) == 0, "Weyl action: value outside the expected roots");
    }
    return {e};
  }

  // --- root subtori and norms -----------------------------------------------

  // Image of t ↦ t·F'(t)⋯F'^{a−1}(t) on {1 + π^{r−1} x (E_aa − E_bb) : x ∈ F_{q^a}},
  // as sorted torus indices. iterations = 0 selects ord(w).
  std::vector<std::size_t> norm_subgroup(int a, int b, int iterations = 0) const {
    const int ord = perm_order(spec_.w());
    if (iterations == 0) iterations = ord;
    if (a == b || a < 0 || b < 0 || a >= spec_.n() || b >= spec_.n()) throw domain_error("root needs a ≠ b");
    if (iterations % ord != 0 || spec_.field().d() % static_cast<unsigned>(iterations) != 0)
      throw domain_error("norm iterations must be a multiple of ord(w) dividing the field degree");
    if (spec_.r() < 2) throw domain_error("root subtori need level r ≥ 2");
    const TruncRing& R = spec_.ring();
    const Field& f = spec_.field();
    std::set<std::size_t> image;
    for (auto x : f.subfield_elements(static_cast<unsigned>(iterations) * f.m())) {
      Mat t = spec_.identity();
      spec_.set_entry(t, a, a, R.add(R.one(), R.pi_power(spec_.r() - 1, x)));
      spec_.set_entry(t, b, b, R.add(R.one(), R.pi_power(spec_.r() - 1, f.neg(x))));
      Mat acc = spec_.identity(), cur = t;
      for (int j = 0; j < iterations; ++j) {
        acc = spec_.mul(acc, cur);
        cur = spec_.twisted_frobenius(cur);
      }
      check(cur == t, "root subtorus element not fixed by F'^a");
      const auto k = index_of(acc);
      check(k >= 0, "norm left the rational torus");
      image.insert(static_cast<std::size_t>(k));
    }
    return {image.begin(), image.end()};
  }

  bool is_regular(const TorusCharacter& th, int iterations = 0) const {
    for (int a = 0; a < spec_.n(); ++a)
      for (int b = 0; b < spec_.n(); ++b) {
        if (a == b) continue;
        bool nontrivial = false;
        for (auto t : norm_subgroup(a, b, iterations))
          if (value(th, t) != 0) {
            nontrivial = true;
            break;
          }
        if (!nontrivial) return false;
      }
    return true;
  }

  bool is_general_position(const TorusCharacter& th) const {
    for (const auto& v : weyl_) {
      if (is_identity(v)) continue;
      if (weyl_act(v, th) == th) return false;
    }
    return true;
  }

 private:
  static bool is_identity(const Perm& v) {
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i] != static_cast<int>(i)) return false;
    return true;
  }

  // Generators: the rotation of each cycle, and the swap of each pair of
  // consecutive equal-length cycles. Closure gives C_{S_n}(w).
  void build_weyl() {
    const auto n = static_cast<std::size_t>(spec_.n());
    Perm id(n);
    std::iota(id.begin(), id.end(), 0);
    for (const auto& c : cycles_) {
      if (c.size() == 1) continue;
      Perm v = id;
      for (std::size_t j = 0; j < c.size(); ++j) v[static_cast<std::size_t>(c[j])] = c[(j + 1) % c.size()];
      weyl_gens_.push_back(v);
    }
    for (std::size_t a = 0; a < cycles_.size(); ++a)
      for (std::size_t b = a + 1; b < cycles_.size(); ++b) {
        if (cycles_[a].size() != cycles_[b].size()) continue;
        bool consecutive = true;  // no equal-length cycle strictly between
        for (std::size_t c = a + 1; c < b; ++c)
          if (cycles_[c].size() == cycles_[a].size()) consecutive = false;
        if (!consecutive) continue;
        Perm v = id;
        for (std::size_t j = 0; j < cycles_[a].size(); ++j) {
          v[static_cast<std::size_t>(cycles_[a][j])] = cycles_[b][j];
          v[static_cast<std::size_t>(cycles_[b][j])] = cycles_[a][j];
        }
        weyl_gens_.push_back(v);
      }
    std::set<Perm> seen{id};
    std::vector<Perm> queue{id};
    for (std::size_t h = 0; h < queue.size(); ++h)
      for (const auto& g : weyl_gens_) {
        Perm x = perm_compose(g, queue[h]);
        if (seen.insert(x).second) queue.push_back(x);
      }
    weyl_.assign(seen.begin(), seen.end());
    for (const auto& v : weyl_) {
      check(perm_compose(v, spec_.w()) == perm_compose(spec_.w(), v), "Weyl element does not commute with w");
      check(spec_.is_fixed(spec_.permutation_matrix(v)), "Weyl avatar not F'-fixed");
    }
  }

  GroupSpec spec_;
  std::vector<std::vector<int>> cycles_;
  std::vector<Mat> elements_;
  std::unordered_map<std::uint64_t, std::int32_t> index_;
  std::size_t identity_ = 0;
  mutable std::unique_ptr<AbelianDual> dual_;
  std::vector<Perm> weyl_, weyl_gens_;
};

// Cycle type from a CLI string such as "3", "2,1", "1,1,1".
inline std::vector<int> parse_cycle_type(const std::string& s) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto comma = s.find(',', pos);
    const std::string tok = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (tok.empty()) throw domain_error("bad torus cycle type '" + s + "'");
    int v = 0;
    for (char ch : tok) {
      if (ch < '0' || ch > '9') throw domain_error("bad torus cycle type '" + s + "'");
      v = v * 10 + (ch - '0');
    }
    if (v < 1) throw domain_error("cycle lengths must be positive");
    out.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

inline std::string cycle_type_string(const std::vector<int>& t) {
  std::string s;
  for (std::size_t i = 0; i < t.size(); ++i) s += (i ? "," : "") + std::to_string(t[i]);
  return s;
}

}  // namespace hdl
