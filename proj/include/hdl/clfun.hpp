#pragma once

// Class functions on G^{F'}: induction from a subgroup (coset transversal and
// full-sum forms), inner products in exact and numeric form, Frobenius
// reciprocity, the Mackey double-coset sum, and the bundle used to check
// Ind_{(TU^±)^{F'}}^{G^{F'}} θ̃ for generic θ.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "hdl/chars.hpp"
#include "hdl/cyclo.hpp"
#include "hdl/parallel.hpp"

namespace hdl {

using GroupTablePtr = std::shared_ptr<const GroupTable>;

struct Subgroup {
  std::vector<std::int32_t> elems;  // G-indices, increasing
  std::vector<std::int32_t> pos;    // G-index → position in elems, or −1

  Subgroup() = default;
  Subgroup(std::size_t group_size, std::vector<std::int32_t> members) : elems(std::move(members)) {
    std::sort(elems.begin(), elems.end());
    pos.assign(group_size, -1);
    for (std::size_t i = 0; i < elems.size(); ++i) pos[static_cast<std::size_t>(elems[i])] = static_cast<std::int32_t>(i);
  }
  std::size_t size() const { return elems.size(); }
  bool contains(std::int32_t g) const { return pos[static_cast<std::size_t>(g)] >= 0; }
};

// Closure under products and inverses on sampled pairs.
inline void require_subgroup(const GroupTable& G, const Subgroup& H, int samples = 200) {
  if (H.size() == 0 || !H.contains(G.identity_index())) throw domain_error("subgroup must contain the identity");
  if (G.size() % H.size() != 0) throw domain_error("subgroup order does not divide |G|");
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> pick(0, H.size() - 1);
  for (int t = 0; t < samples; ++t) {
    const auto a = static_cast<std::size_t>(H.elems[pick(rng)]);
    const auto b = static_cast<std::size_t>(H.elems[pick(rng)]);
    if (!H.contains(G.mul(a, b)) || !H.contains(G.inv(a))) throw domain_error("element list is not closed under the group law");
  }
}

// A linear character on a subgroup: exponent in Z/M per subgroup position.
struct LinearCharacter {
  std::uint32_t M = 1;
  std::vector<std::uint32_t> exps;
};

struct ClassFunction {
  std::uint32_t M = 1;
  std::vector<CycloValue> values;  // per conjugacy class

  std::optional<std::int64_t> degree(const ClassTable& C, std::int32_t identity) const {
    return values[static_cast<std::size_t>(C.class_of[static_cast<std::size_t>(identity)])].as_integer();
  }
  const CycloValue& at(const ClassTable& C, std::int32_t g) const {
    return values[static_cast<std::size_t>(C.class_of[static_cast<std::size_t>(g)])];
  }
  ClassFunction lifted(std::uint32_t M2) const {
    if (M2 == M) return *this;
    ClassFunction out{M2, {}};
    for (const auto& v : values) out.values.push_back(v.lift(M2));
    return out;
  }
};

inline ClassFunction trivial_class_function(const ClassTable& C) {
  return {1, std::vector<CycloValue>(C.count(), CycloValue::integer(1, 1))};
}

// An exact rational with the accompanying floating route.
struct Pairing {
  Rational exact;               // unreduced; den is the normalizing order
  std::complex<double> numeric;  // same quantity, evaluated in C
  double residual = 0;           // distance of numeric from the nearest k/den
  bool agree = false;            // nearest k/den equals exact and residual < 1e−6

  static constexpr double kTolerance = 1e-6;
};

namespace detail {

inline std::complex<double> pairwise_sum(std::vector<std::complex<double>> v) {
  for (std::size_t w = 1; w < v.size(); w *= 2)
    for (std::size_t i = 0; i + w < v.size(); i += 2 * w) v[i] += v[i + w];
  return v.empty() ? std::complex<double>{} : v[0];
}

inline std::complex<double> root_value(std::uint32_t M, std::uint64_t e) {
  const double ang = 2.0 * std::numbers::pi * static_cast<double>(e % M) / static_cast<double>(M);
  return {std::cos(ang), std::sin(ang)};
}

// exact_sum = den · value, which must be a rational integer.
inline Pairing finish_pairing(const CycloValue& exact_sum, std::complex<double> numeric_sum, std::int64_t den) {
  const auto k = exact_sum.as_integer();
  check(k.has_value(), "pairing sum is not a rational integer");
  Pairing out;
  out.exact = Rational{*k, den};
  out.numeric = numeric_sum / static_cast<double>(den);
  const double nearest = std::round(numeric_sum.real());
  out.residual = std::abs(numeric_sum - std::complex<double>(nearest, 0.0)) / static_cast<double>(den);
  out.agree = static_cast<std::int64_t>(nearest) == *k && out.residual < Pairing::kTolerance;
  return out;
}

}  // namespace detail

// ⟨f1, f2⟩ = (1/|G|) Σ_classes |C| f1(C) conj f2(C).
inline Pairing inner_product(const ClassTable& C, std::size_t group_order, const ClassFunction& f1, const ClassFunction& f2) {
  const std::uint32_t M = std::lcm(f1.M, f2.M);
  const ClassFunction a = f1.lifted(M), b = f2.lifted(M);
  CycloValue acc(M);
  std::vector<std::complex<double>> terms(C.count());
  for (std::size_t c = 0; c < C.count(); ++c) {
    const CycloValue cb = b.values[c].conj();
    acc += (a.values[c] * cb).scaled(C.sizes[c]);
    terms[c] = static_cast<double>(C.sizes[c]) * a.values[c].numeric() * std::conj(b.values[c].numeric());
  }
  return detail::finish_pairing(acc, detail::pairwise_sum(std::move(terms)), static_cast<std::int64_t>(group_order));
}

// Induction through a left transversal: Ind χ(g) = Σ_{x ∈ X} [x⁻¹gx ∈ H] χ(x⁻¹gx).
class InductionPlan {
 public:
  InductionPlan(const GroupTable& G, const ClassTable& C, const Subgroup& H) : H_(&H) {
    require_subgroup(G, H);
    std::vector<char> covered(G.size(), 0);
    for (std::size_t x = 0; x < G.size(); ++x) {
      if (covered[x]) continue;
      transversal_.push_back(static_cast<std::int32_t>(x));
      const Mat X = G.element(x);
      for (auto h : H.elems) covered[static_cast<std::size_t>(G.index_of_fixed(G.spec().mul(X, G.element(static_cast<std::size_t>(h)))))] = 1;
    }
    check(transversal_.size() * H.size() == G.size(), "coset transversal has the wrong size");
    std::vector<Mat> xs, xs_inv;
    for (auto x : transversal_) {
      xs.push_back(G.element(static_cast<std::size_t>(x)));
      xs_inv.push_back(G.spec().inv(xs.back()));
    }
    hits_.resize(C.count());
    parallel_for(C.count(), [&](std::size_t c) {
      const Mat g = G.element(static_cast<std::size_t>(C.reps[c]));
      for (std::size_t t = 0; t < xs.size(); ++t) {
        const auto y = G.index_of_fixed(G.spec().mul(G.spec().mul(xs_inv[t], g), xs[t]));
        const auto p = H.pos[static_cast<std::size_t>(y)];
        if (p >= 0) hits_[c].push_back(p);
      }
    });
  }

  const Subgroup& subgroup() const { return *H_; }
  const std::vector<std::int32_t>& transversal() const { return transversal_; }
  std::size_t index() const { return transversal_.size(); }

  ClassFunction induce(const LinearCharacter& chi) const {
    check(chi.exps.size() == H_->size(), "character length differs from the subgroup order");
    ClassFunction out{chi.M, {}};
    out.values.reserve(hits_.size());
    for (const auto& hs : hits_) {
      CycloValue v(chi.M);
      for (auto p : hs) v.add_root(chi.exps[static_cast<std::size_t>(p)]);
      out.values.push_back(std::move(v));
    }
    return out;
  }

  // Induction of an arbitrary class function of H given per position.
  ClassFunction induce(std::uint32_t M, const std::vector<CycloValue>& values_on_h) const {
    ClassFunction out{M, {}};
    for (const auto& hs : hits_) {
      CycloValue v(M);
      for (auto p : hs) v += values_on_h[static_cast<std::size_t>(p)];
      out.values.push_back(std::move(v));
    }
    return out;
  }

 private:
  const Subgroup* H_;
  std::vector<std::int32_t> transversal_;
  std::vector<std::vector<std::int32_t>> hits_;  // per class
};

// Ind χ(g) = (1/|H|) Σ_{x ∈ G} [x g x⁻¹ ∈ H] χ(x g x⁻¹), summed over all of G.
inline ClassFunction induce_by_full_sum(const GroupTable& G, const ClassTable& C, const Subgroup& H, const LinearCharacter& chi) {
  std::vector<Mat> inverses(G.size());
  for (std::size_t x = 0; x < G.size(); ++x) inverses[x] = G.spec().inv(G.element(x));
  ClassFunction out{chi.M, std::vector<CycloValue>(C.count(), CycloValue(chi.M))};
  parallel_for(C.count(), [&](std::size_t c) {
    const Mat g = G.element(static_cast<std::size_t>(C.reps[c]));
    CycloValue v(chi.M);
    for (std::size_t x = 0; x < G.size(); ++x) {
      const auto y = G.index_of_fixed(G.spec().mul(G.spec().mul(G.element(x), g), inverses[x]));
      const auto p = H.pos[static_cast<std::size_t>(y)];
      if (p >= 0) v.add_root(chi.exps[static_cast<std::size_t>(p)]);
    }
    CycloValue w(chi.M);
    const auto h = static_cast<std::int64_t>(H.size());
    for (std::uint32_t e = 0; e < chi.M; ++e) {
      const std::int64_t k = v.coefficients()[e];
      check(k % h == 0, "full-sum induction is not divisible by |H|");
      w.add_root(e, k / h);
    }
    out.values[c] = std::move(w);
  });
  return out;
}

// ⟨χ, Res ψ⟩_H = (1/|H|) Σ_h χ(h) conj ψ(h).
inline Pairing restricted_pairing(const ClassTable& C, const Subgroup& H, const LinearCharacter& chi, const ClassFunction& psi) {
  const std::uint32_t M = std::lcm(chi.M, psi.M);
  const ClassFunction b = psi.lifted(M);
  CycloValue acc(M);
  std::vector<std::complex<double>> terms(H.size());
  for (std::size_t i = 0; i < H.size(); ++i) {
    const std::uint64_t e = std::uint64_t{chi.exps[i]} * (M / chi.M);
    const CycloValue& pv = b.at(C, H.elems[i]);
    acc += CycloValue::root(M, static_cast<std::uint32_t>(e % M)) * pv.conj();
    terms[i] = detail::root_value(M, e) * std::conj(pv.numeric());
  }
  return detail::finish_pairing(acc, detail::pairwise_sum(std::move(terms)), static_cast<std::int64_t>(H.size()));
}

struct ReciprocityCheck {
  Pairing induced_side;    // ⟨Ind χ, ψ⟩_G
  Pairing restricted_side;  // ⟨χ, Res ψ⟩_H
  bool equal() const { return induced_side.exact == restricted_side.exact; }
};

inline ReciprocityCheck frobenius_reciprocity_check(const GroupTable& G, const ClassTable& C, const InductionPlan& plan,
                                                    const LinearCharacter& chi, const ClassFunction& psi) {
  return {inner_product(C, G.size(), plan.induce(chi), psi), restricted_pairing(C, plan.subgroup(), chi, psi)};
}

// Σ_{s ∈ H\G/K} ⟨χ^s, ψ⟩ on H^s ∩ K, with H^s = s⁻¹Hs and χ^s(y) = χ(s y s⁻¹).
class MackeyPlan {
 public:
  struct DoubleCoset {
    std::int32_t rep;
    std::size_t size;  // |HsK|
    std::vector<std::pair<std::int32_t, std::int32_t>> pairs;  // (position in K, position in H) over H^s ∩ K
  };

  MackeyPlan(const GroupTable& G, const Subgroup& H, const Subgroup& K) : order_(G.size()) {
    require_subgroup(G, H);
    require_subgroup(G, K);
    const GroupSpec& S = G.spec();
    // left cosets xK
    std::vector<std::int32_t> coset_of(G.size(), -1);
    std::int32_t cosets = 0;
    for (std::size_t x = 0; x < G.size(); ++x) {
      if (coset_of[x] >= 0) continue;
      const Mat X = G.element(x);
      for (auto k : K.elems) coset_of[static_cast<std::size_t>(G.index_of_fixed(S.mul(X, G.element(static_cast<std::size_t>(k)))))] = cosets;
      ++cosets;
    }
    // H-orbits on G/K
    std::vector<char> seen(static_cast<std::size_t>(cosets), 0);
    std::vector<Mat> hs;
    for (auto h : H.elems) hs.push_back(G.element(static_cast<std::size_t>(h)));
    std::size_t total = 0;
    for (std::size_t x = 0; x < G.size(); ++x) {
      if (seen[static_cast<std::size_t>(coset_of[x])]) continue;
      const Mat s = G.element(x), s_inv = S.inv(s);
      std::size_t orbit = 0;
      for (const auto& h : hs) {
        auto& c = seen[static_cast<std::size_t>(coset_of[static_cast<std::size_t>(G.index_of_fixed(S.mul(h, s)))])];
        if (!c) {
          c = 1;
          ++orbit;
        }
      }
      DoubleCoset dc{static_cast<std::int32_t>(x), orbit * K.size(), {}};
      for (std::size_t k = 0; k < K.size(); ++k) {
        const Mat y = G.element(static_cast<std::size_t>(K.elems[k]));
        const auto z = G.index_of_fixed(S.mul(S.mul(s, y), s_inv));
        const auto p = H.pos[static_cast<std::size_t>(z)];
        if (p >= 0) dc.pairs.emplace_back(static_cast<std::int32_t>(k), p);
      }
      // |HsK| = |H||K| / |H^s ∩ K|
      check(dc.size == H.size() * K.size() / dc.pairs.size(), "double coset size mismatch");
      total += dc.size;
      cosets_.push_back(std::move(dc));
    }
    check(total == G.size(), "double cosets do not partition G");
  }

  const std::vector<DoubleCoset>& double_cosets() const { return cosets_; }

  // Rational with denominator |G|.
  Pairing pairing(const LinearCharacter& chi, const LinearCharacter& psi) const {
    const std::uint32_t M = std::lcm(chi.M, psi.M);
    const std::uint64_t a = M / chi.M, b = M / psi.M;
    std::int64_t num = 0;
    std::vector<std::complex<double>> terms;
    for (const auto& dc : cosets_) {
      CycloValue acc(M);
      std::vector<std::complex<double>> inner;
      for (auto [kp, hp] : dc.pairs) {
        const std::uint64_t e = (chi.exps[static_cast<std::size_t>(hp)] * a + (M - (psi.exps[static_cast<std::size_t>(kp)] * b) % M)) % M;
        acc.add_root(static_cast<std::uint32_t>(e));
        inner.push_back(detail::root_value(M, e));
      }
      const auto k = acc.as_integer();
      check(k.has_value(), "Mackey term is not rational");
      const auto inter = static_cast<std::int64_t>(dc.pairs.size());
      check((static_cast<std::int64_t>(order_) * *k) % inter == 0, "Mackey term is not a multiple of 1/|G|");
      num += static_cast<std::int64_t>(order_) * *k / inter;
      terms.push_back(detail::pairwise_sum(std::move(inner)) * (static_cast<double>(order_) / static_cast<double>(inter)));
    }
    CycloValue exact = CycloValue::integer(1, num);
    return detail::finish_pairing(exact, detail::pairwise_sum(std::move(terms)), static_cast<std::int64_t>(order_));
  }

 private:
  std::size_t order_;
  std::vector<DoubleCoset> cosets_;
};

struct MainTheoremReport {
  std::size_t theta_index = 0;
  TorusCharacter theta;
  std::string beta;
  GenericityReport generic;
  std::int64_t degree = 0;
  std::int64_t target_degree = 0;  // |G_l^{F'}| / |T_l^{F'}|
  Pairing norm;
  bool degree_ok() const { return degree == target_degree; }
  bool norm_ok() const { return norm.exact.is_integer(1); }
  bool exact_ok() const { return norm.agree; }
  bool pass() const { return degree_ok() && norm_ok() && exact_ok(); }
};

// G^{F'}, its classes, one torus T, (TU^±)^{F'} and the induction machinery.
class TorusSetting {
 public:
  explicit TorusSetting(GroupTablePtr group, PsiSpec psi = {})
      : group_(std::move(group)),
        classes_(conjugacy_classes(*group_)),
        torus_(group_->spec()),
        chars_(std::make_unique<TorusCharacters>(torus_, psi)) {}
  TorusSetting(const TorusSetting&) = delete;
  TorusSetting& operator=(const TorusSetting&) = delete;

  const GroupSpec& spec() const { return group_->spec(); }
  const GroupTable& group() const { return *group_; }
  const ClassTable& classes() const { return classes_; }
  const Torus& torus() const { return torus_; }
  const TorusCharacters& characters() const { return *chars_; }

  const Subgroup& tu() const {
    if (!tu_) {
      tu_ = std::make_unique<Subgroup>(group_->size(), group_->subgroup({SubgroupTag::Kind::torus_times_radical, 0}));
      for (auto g : tu_->elems) {
        const auto t = torus_.index_of(spec().tu_decompose(group_->element(static_cast<std::size_t>(g))).torus);
        check(t >= 0, "torus part outside T");
        tu_torus_.push_back(static_cast<std::size_t>(t));
      }
    }
    return *tu_;
  }
  const InductionPlan& tu_plan() const {
    if (!tu_plan_) tu_plan_ = std::make_unique<InductionPlan>(*group_, classes_, tu());
    return *tu_plan_;
  }

  // Upper-triangular Borel (split torus only).
  const Subgroup& borel() const {
    if (!torus_.is_split()) throw domain_error("the rational Borel needs the split torus");
    if (!borel_) {
      borel_ = std::make_unique<Subgroup>(group_->size(), group_->subgroup({SubgroupTag::Kind::borel, 0}));
      for (auto g : borel_->elems) {
        const Mat b = group_->element(static_cast<std::size_t>(g));
        Mat t;
        for (int i = 0; i < spec().n(); ++i) spec().set_entry(t, i, i, spec().entry(b, i, i));
        borel_torus_.push_back(static_cast<std::size_t>(torus_.index_of(t)));
      }
    }
    return *borel_;
  }
  const InductionPlan& borel_plan() const {
    if (!borel_plan_) borel_plan_ = std::make_unique<InductionPlan>(*group_, classes_, borel());
    return *borel_plan_;
  }

  // θ̃(g) = θ(t) for g = t·u with u ∈ (U^±)^{F'}.
  LinearCharacter trivial_lift(const TorusCharacter& th) const {
    tu();
    return lift_through(th, tu_torus_);
  }
  // θ̃(b) = θ(diag b) on the Borel.
  LinearCharacter borel_lift(const TorusCharacter& th) const {
    borel();
    return lift_through(th, borel_torus_);
  }

  ClassFunction induced(const TorusCharacter& th) const { return tu_plan().induce(trivial_lift(th)); }

  Pairing inner_product(const ClassFunction& a, const ClassFunction& b) const {
    return hdl::inner_product(classes_, group_->size(), a, b);
  }

  std::int64_t target_degree() const {
    const auto gl = static_cast<std::int64_t>(chars_->level_table().size());
    const auto tl = static_cast<std::int64_t>(chars_->level_torus_order());
    check(gl % tl == 0, "|T_l| does not divide |G_l|");
    return gl / tl;
  }

  // Indices of characters passing all three genericity conditions.
  const std::vector<std::size_t>& generic_characters() const {
    if (!generic_) {
      std::vector<char> flag(torus_.character_count(), 0);
      for (std::size_t i = 0; i < torus_.character_count(); ++i) flag[i] = chars_->genericity(torus_.character(i)).generic();
      generic_ = std::make_unique<std::vector<std::size_t>>();
      for (std::size_t i = 0; i < flag.size(); ++i)
        if (flag[i]) generic_->push_back(i);
    }
    return *generic_;
  }

  MainTheoremReport verify_main_theorem(std::size_t theta_index) const {
    MainTheoremReport rep;
    rep.theta_index = theta_index;
    rep.theta = torus_.character(theta_index);
    rep.generic = chars_->genericity(rep.theta);
    if (!rep.generic.generic()) throw domain_error("θ " + rep.theta.to_string() + " is not generic");
    rep.beta = chars_->level_spec().to_string(chars_->extract_beta(rep.theta));
    const ClassFunction ind = induced(rep.theta);
    const auto deg = ind.degree(classes_, group_->identity_index());
    check(deg.has_value(), "induced degree is not an integer");
    rep.degree = *deg;
    check(rep.degree == static_cast<std::int64_t>(tu_plan().index()), "degree differs from [G : TU^±]");
    rep.target_degree = target_degree();
    rep.norm = inner_product(ind, ind);
    return rep;
  }

 private:
  LinearCharacter lift_through(const TorusCharacter& th, const std::vector<std::size_t>& torus_index) const {
    LinearCharacter chi{torus_.value_order(), {}};
    chi.exps.reserve(torus_index.size());
    for (auto t : torus_index) chi.exps.push_back(torus_.value(th, t));
    return chi;
  }

  GroupTablePtr group_;
  ClassTable classes_;
  Torus torus_;
  std::unique_ptr<TorusCharacters> chars_;
  mutable std::unique_ptr<Subgroup> tu_, borel_;
  mutable std::vector<std::size_t> tu_torus_, borel_torus_;
  mutable std::unique_ptr<InductionPlan> tu_plan_, borel_plan_;
  mutable std::unique_ptr<std::vector<std::size_t>> generic_;
};

}  // namespace hdl
