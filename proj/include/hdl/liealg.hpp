#pragma once

// The finite Lie algebra g = M_n(F_q) at level r = 2, identified with the
// kernel G^1 through 1 + πX ↦ X. Adjoint orbits, the orbit-sum characters
// χ^O = Σ_{β ∈ O} ψ_β, the similarity type of β (n = 2, 3), and the pairing
// (Ψ, R) = (1/|G_1|) Σ_X Ψ(X) R(1 + π(−X)) against induced characters.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hdl/clfun.hpp"

namespace hdl {

namespace detail {

// Rank of an n×n matrix over the field (entries of a level-1 Mat).
inline int matrix_rank(const GroupSpec& s, const Mat& A) {
  const Field& f = s.field();
  const int n = s.n();
  std::vector<std::vector<Field::Elem>> a(static_cast<std::size_t>(n), std::vector<Field::Elem>(static_cast<std::size_t>(n)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = s.coef(A, i, j, 0);
  int rank = 0;
  for (int c = 0; c < n && rank < n; ++c) {
    int piv = -1;
    for (int r = rank; r < n; ++r)
      if (a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]) {
        piv = r;
        break;
      }
    if (piv < 0) continue;
    std::swap(a[static_cast<std::size_t>(piv)], a[static_cast<std::size_t>(rank)]);
    const auto& pr = a[static_cast<std::size_t>(rank)];
    const Field::Elem inv = f.inv(pr[static_cast<std::size_t>(c)]);
    for (int r = 0; r < n; ++r) {
      if (r == rank) continue;
      auto& row = a[static_cast<std::size_t>(r)];
      const Field::Elem factor = f.mul(row[static_cast<std::size_t>(c)], inv);
      if (!factor) continue;
      for (int k = 0; k < n; ++k) row[static_cast<std::size_t>(k)] = f.sub(row[static_cast<std::size_t>(k)], f.mul(factor, pr[static_cast<std::size_t>(k)]));
    }
    ++rank;
  }
  return rank;
}

// Coefficients low → high of a polynomial over the field.
using FieldPoly = std::vector<Field::Elem>;

inline Field::Elem poly_eval(const Field& f, const FieldPoly& p, Field::Elem x) {
  Field::Elem acc = 0;
  for (std::size_t i = p.size(); i-- > 0;) acc = f.add(f.mul(acc, x), p[i]);
  return acc;
}

// Divides by (x − a); the remainder must vanish.
inline FieldPoly poly_divide_linear(const Field& f, const FieldPoly& p, Field::Elem a) {
  FieldPoly q(p.size() - 1);
  Field::Elem carry = 0;
  for (std::size_t i = p.size(); i-- > 1;) {
    carry = f.add(p[i], f.mul(carry, a));
    q[i - 1] = carry;
  }
  return q;
}

}  // namespace detail

struct BetaClass {
  std::string tag;              // "1", "2" for n = 2; "1'", "2'", "2''" for n = 3
  std::vector<Field::Elem> params;  // (a, b, *) / (s, Δ) / (a, b, c, *1, *2) / (s, Δ, a) / cubic coefficients
  Mat canonical;                // representative in M_n(F_q)
  std::vector<int> torus;       // witness torus cycle type
  std::string to_string(const Field& f) const {
    std::string s = tag + "(";
    for (std::size_t i = 0; i < params.size(); ++i) s += (i ? "," : "") + f.to_string(params[i]);
    return s + ")";
  }
  friend bool operator==(const BetaClass& a, const BetaClass& b) { return a.tag == b.tag && a.params == b.params; }
};

class LieAlgebraModel {
 public:
  LieAlgebraModel(std::uint32_t p, unsigned m, int n, PsiSpec psi = {})
      : spec_(p, m, n, 1, identity_perm(n)), psi_(psi) {
    if (spec_.key_space() > (std::uint64_t{1} << 20)) throw cap_exceeded("q^{n²} exceeds 2^20");
    gl_ = std::make_unique<GroupTable>(spec_);
  }

  const GroupSpec& spec() const { return spec_; }
  const PsiSpec& psi() const { return psi_; }
  int n() const { return spec_.n(); }
  std::uint32_t q() const { return spec_.q(); }
  std::size_t size() const { return static_cast<std::size_t>(spec_.key_space()); }
  Mat element(std::size_t k) const { return spec_.from_key(k); }
  std::size_t key(const Mat& X) const { return static_cast<std::size_t>(spec_.key(X)); }
  const GroupTable& residue_group() const { return *gl_; }  // G_1 = GL_n(F_q)

  // ψ_β(X) as an exponent mod p.
  std::uint32_t psi_exponent(const Mat& beta, const Mat& X) const { return psi_beta(spec_, psi_, beta, X); }

  // Adjoint orbits, each sorted, numbered by their smallest key.
  const std::vector<std::vector<std::size_t>>& orbits() const {
    if (orbits_.empty()) {
      std::vector<Mat> gens, gens_inv;
      for (auto g : gl_->generators()) {
        gens.push_back(gl_->element(static_cast<std::size_t>(g)));
        gens_inv.push_back(spec_.inv(gens.back()));
      }
      std::vector<char> seen(size(), 0);
      for (std::size_t start = 0; start < size(); ++start) {
        if (seen[start]) continue;
        std::vector<std::size_t> orbit{start};
        seen[start] = 1;
        for (std::size_t h = 0; h < orbit.size(); ++h) {
          const Mat X = element(orbit[h]);
          for (std::size_t s = 0; s < gens.size(); ++s) {
            const auto k = key(spec_.conj(X, gens[s], gens_inv[s]));
            if (!seen[k]) {
              seen[k] = 1;
              orbit.push_back(k);
            }
          }
        }
        std::sort(orbit.begin(), orbit.end());
        orbits_.push_back(std::move(orbit));
      }
    }
    return orbits_;
  }

  // χ^O(X) = Σ_{β ∈ O} ψ_β(X)
  CycloValue invariant_character_value(std::size_t orbit, const Mat& X) const {
    CycloValue v(spec_.p());
    for (auto b : orbits()[orbit]) v.add_root(psi_exponent(element(b), X));
    return v;
  }

  // Similarity type via eigenvalues and Jordan structure (n = 2, 3).
  BetaClass classify(const Mat& beta) const {
    const int n = spec_.n();
    if (n != 2 && n != 3) throw domain_error("β classification supports n = 2, 3 only");
    const Field& f = spec_.field();
    auto e = [&](int i, int j) { return spec_.coef(beta, i, j, 0); };
    // characteristic polynomial
    detail::FieldPoly cp;
    if (n == 2) {
      const Field::Elem tr = f.add(e(0, 0), e(1, 1));
      const Field::Elem det = f.sub(f.mul(e(0, 0), e(1, 1)), f.mul(e(0, 1), e(1, 0)));
      cp = {det, f.neg(tr), 1};
    } else {
      const Field::Elem tr = f.add(f.add(e(0, 0), e(1, 1)), e(2, 2));
      auto minor = [&](int a, int b) { return f.sub(f.mul(e(a, a), e(b, b)), f.mul(e(a, b), e(b, a))); };
      const Field::Elem c2 = f.add(f.add(minor(0, 1), minor(0, 2)), minor(1, 2));
      const Field::Elem det = f.add(
          f.sub(f.mul(e(0, 0), minor(1, 2)), f.mul(e(0, 1), f.sub(f.mul(e(1, 0), e(2, 2)), f.mul(e(1, 2), e(2, 0))))),
          f.mul(e(0, 2), f.sub(f.mul(e(1, 0), e(2, 1)), f.mul(e(1, 1), e(2, 0)))));
      cp = {f.neg(det), c2, f.neg(tr), 1};
    }
    // roots with multiplicity
    std::map<Field::Elem, int> roots;
    detail::FieldPoly rest = cp;
    bool found = true;
    while (found && rest.size() > 1) {
      found = false;
      for (Field::Elem a = 0; a < f.size(); ++a)
        if (detail::poly_eval(f, rest, a) == 0) {
          ++roots[a];
          rest = detail::poly_divide_linear(f, rest, a);
          found = true;
          break;
        }
    }
    BetaClass out;
    const int split_count = n - static_cast<int>(rest.size()) + 1;
    if (split_count == n) {
      // eigenvalues by (multiplicity desc, code asc); Jordan structure from ranks
      std::vector<std::pair<int, Field::Elem>> ev;
      for (auto [a, k] : roots) ev.emplace_back(-k, a);
      std::sort(ev.begin(), ev.end());
      std::vector<Field::Elem> diag;
      std::vector<Field::Elem> stars(static_cast<std::size_t>(n - 1), 0);
      std::size_t pos = 0;
      for (auto [negk, a] : ev) {
        const int k = -negk;
        const int blocks = n - detail::matrix_rank(spec_, spec_.sub(beta, spec_.scalar(spec_.ring().constant(a))));
        // one Jordan block of size k − blocks + 1, the rest of size 1
        const int big = k - blocks + 1;
        for (int t = 0; t < k; ++t) diag.push_back(a);
        for (int t = 0; t + 1 < big; ++t) stars[pos + static_cast<std::size_t>(t)] = 1;
        pos += static_cast<std::size_t>(k);
      }
      out.tag = n == 2 ? "1" : "1'";
      out.params = diag;
      out.params.insert(out.params.end(), stars.begin(), stars.end());
      Mat rep;
      for (int i = 0; i < n; ++i) spec_.set_entry(rep, i, i, spec_.ring().constant(diag[static_cast<std::size_t>(i)]));
      for (int i = 0; i + 1 < n; ++i)
        if (stars[static_cast<std::size_t>(i)]) spec_.set_entry(rep, i, i + 1, spec_.ring().one());
      out.canonical = rep;
      out.torus.assign(static_cast<std::size_t>(n), 1);
    } else if (n == 2) {
      // x² − s x + Δ irreducible
      const Field::Elem s = f.neg(cp[1]), delta = cp[0];
      out.tag = "2";
      out.params = {s, delta};
      out.canonical = companion({delta, f.neg(s)}, 0);
      out.torus = {2};
    } else if (split_count == 1) {
      const Field::Elem a = roots.begin()->first;
      const Field::Elem s = f.neg(rest[1]), delta = rest[0];
      out.tag = "2'";
      out.params = {s, delta, a};
      Mat rep = companion({delta, f.neg(s)}, 0);
      spec_.set_entry(rep, 2, 2, spec_.ring().constant(a));
      out.canonical = rep;
      out.torus = {2, 1};
    } else {
      out.tag = "2''";
      out.params = {cp[0], cp[1], cp[2]};
      out.canonical = companion({cp[0], cp[1], cp[2]}, 0);
      out.torus = {3};
    }
    return out;
  }

 private:
  static Perm identity_perm(int n) {
    Perm id(static_cast<std::size_t>(n));
    std::iota(id.begin(), id.end(), 0);
    return id;
  }
  // Companion block of the monic polynomial with low coefficients c, placed at
  // diagonal offset o: sub-diagonal ones and last column −c.
  Mat companion(const std::vector<Field::Elem>& c, int o) const {
    Mat A;
    const int k = static_cast<int>(c.size());
    const Field& f = spec_.field();
    for (int i = 1; i < k; ++i) spec_.set_entry(A, o + i, o + i - 1, spec_.ring().one());
    for (int i = 0; i < k; ++i) spec_.set_entry(A, o + i, o + k - 1, spec_.ring().constant(f.neg(c[static_cast<std::size_t>(i)])));
    return A;
  }

  GroupSpec spec_;
  PsiSpec psi_;
  std::unique_ptr<GroupTable> gl_;
  mutable std::vector<std::vector<std::size_t>> orbits_;
};

// Reference count of similarity classes of M_n(F_q): orbits of all of
// GL_n(F_q) by direct marking, no generating set.
inline std::size_t similarity_class_count_bruteforce(const LieAlgebraModel& g) {
  const GroupTable& G = g.residue_group();
  std::vector<Mat> els, invs;
  for (std::size_t i = 0; i < G.size(); ++i) {
    els.push_back(G.element(i));
    invs.push_back(g.spec().inv(els.back()));
  }
  std::vector<char> seen(g.size(), 0);
  std::size_t count = 0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (seen[k]) continue;
    ++count;
    const Mat X = g.element(k);
    for (std::size_t i = 0; i < els.size(); ++i) seen[g.key(g.spec().mul(g.spec().mul(els[i], X), invs[i]))] = 1;
  }
  return count;
}

// An induced character on a level-2 group together with the way to reach
// the kernel from M_n(F_q).
struct LieWitness {
  const TorusSetting* setting = nullptr;
  ClassFunction character;
  std::size_t theta_index = 0;
  std::string subgroup;  // "B" or "TU"
};

// Carries X ∈ M_n(F_q) into the kernel of a (possibly twisted) level-2 group.
class KernelMap {
 public:
  KernelMap(const LieAlgebraModel& g, const TorusSetting& s)
      : g_(&g), s_(&s), twisted1_(std::make_unique<GroupSpec>(s.spec().at_level(1))) {
    if (s.spec().r() != 2) throw domain_error("Lie algebra pairing needs level r = 2");
    if (!s.torus().is_split()) iso_ = std::make_unique<SplitIsomorphism>(*twisted1_, g.spec());
  }
  // index of 1 + π·(±X') in the group, X' the transported X
  std::int32_t index(const Mat& X, bool negate) const {
    Mat Y = iso_ ? iso_->to_twisted(X) : X;
    if (negate) Y = twisted1_->neg(Y);
    const auto k = s_->group().index_of_fixed(s_->spec().from_kernel_coordinates(Y, 1));
    check(k >= 0, "kernel element missing from the group");
    return k;
  }
  // λ X λ⁻¹ as an element of M_n(F_q)
  Mat to_split(const Mat& X_twisted) const { return iso_ ? iso_->to_split(X_twisted) : X_twisted; }

 private:
  const LieAlgebraModel* g_;
  const TorusSetting* s_;
  std::unique_ptr<GroupSpec> twisted1_;
  std::unique_ptr<SplitIsomorphism> iso_;
};

struct LiePairings {
  Pairing letellier;  // (Ψ, R), denominator |G_1|
  Pairing bracket;    // ⟨Ψ, Res R⟩ on the kernel, denominator |g|
};

// (Ψ, R) = (1/|G_1|) Σ_X Ψ(X) R(1 + π(−X)) and ⟨Ψ, Res R⟩ = (1/|g|) Σ_X Ψ(X) conj R(1 + πX).
inline LiePairings letellier_pairing(const LieAlgebraModel& g, std::size_t orbit, const TorusSetting& s, const ClassFunction& R) {
  const KernelMap km(g, s);
  const std::uint32_t M = std::lcm(g.spec().p(), R.M);
  const ClassFunction Rl = R.lifted(M);
  CycloValue sum_minus(M), sum_conj(M);
  std::vector<std::complex<double>> num_minus, num_conj;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Mat X = g.element(k);
    const CycloValue psi = g.invariant_character_value(orbit, X).lift(M);
    const CycloValue& r_minus = Rl.at(s.classes(), km.index(X, true));
    const CycloValue& r_plus = Rl.at(s.classes(), km.index(X, false));
    sum_minus += psi * r_minus;
    sum_conj += psi * r_plus.conj();
    num_minus.push_back(psi.numeric() * r_minus.numeric());
    num_conj.push_back(psi.numeric() * std::conj(r_plus.numeric()));
  }
  return {detail::finish_pairing(sum_minus, detail::pairwise_sum(std::move(num_minus)), static_cast<std::int64_t>(g.residue_group().size())),
          detail::finish_pairing(sum_conj, detail::pairwise_sum(std::move(num_conj)), static_cast<std::int64_t>(g.size()))};
}

struct LetellierRow {
  std::size_t orbit = 0;
  std::size_t orbit_size = 0;
  BetaClass type;
  std::string beta_rep;
  std::string torus_cycles;
  std::size_t theta_index = 0;
  std::string theta_coords;
  std::string witness;  // "prescribed", "fallback", or "none"
  std::string subgroup;  // "B" or "TU"
  std::optional<GenericityReport> witness_genericity;  // twisted witnesses
  LiePairings pairings;
  bool nonzero() const { return !pairings.letellier.exact.is_zero(); }
  bool brackets_consistent() const { return nonzero() == !pairings.bracket.exact.is_zero(); }
};

struct LetellierReport {
  int n = 0;
  std::uint32_t q = 0;
  std::size_t orbit_count = 0;
  std::size_t type_count = 0;  // distinct similarity types
  std::vector<LetellierRow> rows;
  bool all_prescribed_nonzero() const {
    for (const auto& r : rows)
      if (r.witness != "prescribed" || !r.nonzero()) return false;
    return true;
  }
  bool all_nonzero() const {
    for (const auto& r : rows)
      if (!r.nonzero()) return false;
    return true;
  }
};

// Settings for every torus cycle type needed by the witnesses, keyed by the
// cycle-type string.
class LetellierLab {
 public:
  LetellierLab(std::uint32_t p, unsigned m, int n, PsiSpec psi = {}) : g_(p, m, n, psi), psi_(psi) {}

  const LieAlgebraModel& algebra() const { return g_; }

  const TorusSetting& setting(const std::vector<int>& cycles) const {
    const std::string key = cycle_type_string(cycles);
    auto it = settings_.find(key);
    if (it != settings_.end()) return *it->second;
    Perm w = perm_from_cycle_type(cycles);
    auto G = std::make_shared<GroupTable>(GroupSpec(g_.spec().p(), g_.spec().m(), g_.n(), 2, w));
    return *settings_.emplace(key, std::make_unique<TorusSetting>(G, psi_)).first->second;
  }

  // Twisted diagonal β = diag(ρ, F(ρ), …) per cycle matching the type.
  Mat twisted_beta(const BetaClass& type, const TorusSetting& s) const {
    const GroupSpec& S1 = s.characters().level_spec();
    const Field& K = S1.field();
    const auto& emb = embedding(g_.spec().field(), K);
    auto root_of = [&](const std::vector<Field::Elem>& low) {  // monic, low coefficients in F_q
      for (Field::Elem x = 0; x < K.size(); ++x) {
        Field::Elem acc = 1;
        for (std::size_t i = low.size(); i-- > 0;) acc = K.add(K.mul(acc, x), emb[low[i]]);
        if (acc == 0) return x;
      }
      throw verification_error("no root of the characteristic factor in the splitting field");
    };
    const Field& F = g_.spec().field();
    std::vector<Field::Elem> values;
    if (type.tag == "2") values = {root_of({type.params[1], F.neg(type.params[0])})};
    else if (type.tag == "2'") values = {root_of({type.params[1], F.neg(type.params[0])}), emb[type.params[2]]};
    else if (type.tag == "2''") values = {root_of({type.params[0], type.params[1], type.params[2]})};
    else throw domain_error("twisted β only for types 2, 2', 2''");
    std::vector<RingElem> ring_values;
    for (auto v : values) ring_values.push_back(S1.ring().constant(v));
    Mat beta;
    const auto cycles = perm_cycles(S1.w());
    check(cycles.size() == ring_values.size(), "cycle count differs from the factor count");
    for (std::size_t c = 0; c < cycles.size(); ++c) {
      RingElem x = ring_values[c];
      for (int pos : cycles[c]) {
        S1.set_entry(beta, pos, pos, x);
        x = S1.ring().frobenius(x);
      }
    }
    return beta;
  }

  LetellierRow row(std::size_t orbit) const {
    LetellierRow row;
    const auto& O = g_.orbits()[orbit];
    row.orbit = orbit;
    row.orbit_size = O.size();
    const Mat beta = g_.element(O.front());
    row.type = g_.classify(beta);
    row.beta_rep = g_.spec().to_string(row.type.canonical);
    if (try_prescribed(row)) return row;
    try_fallback(row);
    return row;
  }

  LetellierReport verify() const {
    LetellierReport rep;
    rep.n = g_.n();
    rep.q = g_.q();
    rep.orbit_count = g_.orbits().size();
    std::vector<BetaClass> types;
    for (std::size_t o = 0; o < g_.orbits().size(); ++o) {
      rep.rows.push_back(row(o));
      if (std::find(types.begin(), types.end(), rep.rows.back().type) == types.end()) types.push_back(rep.rows.back().type);
    }
    rep.type_count = types.size();
    return rep;
  }

  // All (θ, R) pairs for one torus cycle type, pairing value per θ index.
  std::vector<std::pair<std::size_t, LiePairings>> scan_torus(std::size_t orbit, const std::vector<int>& cycles) const {
    const TorusSetting& s = setting(cycles);
    std::vector<std::pair<std::size_t, LiePairings>> out;
    for (std::size_t i = 0; i < s.torus().character_count(); ++i)
      out.emplace_back(i, letellier_pairing(g_, orbit, s, s.induced(s.torus().character(i))));
    return out;
  }

 private:
  bool try_prescribed(LetellierRow& row) const {
    const TorusSetting& s = setting(row.type.torus);
    row.torus_cycles = cycle_type_string(row.type.torus);
    const TorusCharacters& C = s.characters();
    std::optional<TorusCharacter> th;
    ClassFunction R;
    if (s.torus().is_split()) {
      // θ matching the diagonal of the upper-triangular representative
      const GroupSpec& S1 = C.level_spec();
      Mat d;
      for (int i = 0; i < g_.n(); ++i) S1.set_entry(d, i, i, g_.spec().entry(row.type.canonical, i, i));
      th = C.principal_character(d);
      if (!th) return false;
      R = s.borel_plan().induce(s.borel_lift(*th));
      row.subgroup = "B";
    } else {
      th = C.principal_character(twisted_beta(row.type, s));
      if (!th) return false;
      row.witness_genericity = C.genericity(*th);
      R = s.induced(*th);
      row.subgroup = "TU";
    }
    row.theta_index = s.torus().character_index(*th);
    row.theta_coords = th->to_string();
    row.pairings = letellier_pairing(g_, row.orbit, s, R);
    row.witness = "prescribed";
    return row.nonzero();
  }

  void try_fallback(LetellierRow& row) const {
    const LiePairings prescribed = row.pairings;
    for (const auto& cycles : partitions(g_.n())) {
      for (const auto& [idx, pr] : scan_torus(row.orbit, cycles)) {
        if (pr.letellier.exact.is_zero()) continue;
        const TorusSetting& s = setting(cycles);
        row.torus_cycles = cycle_type_string(cycles);
        row.theta_index = idx;
        row.theta_coords = s.torus().character(idx).to_string();
        row.subgroup = "TU";
        row.witness_genericity.reset();
        row.pairings = pr;
        row.witness = "fallback";
        return;
      }
    }
    row.pairings = prescribed;
    row.witness = "none";
  }

  static std::vector<std::vector<int>> partitions(int n) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    auto rec = [&](auto&& self, int rest, int maxpart) -> void {
      if (rest == 0) {
        out.push_back(cur);
        return;
      }
      for (int k = std::min(rest, maxpart); k >= 1; --k) {
        cur.push_back(k);
        self(self, rest - k, k);
        cur.pop_back();
      }
    };
    rec(rec, n, n);
    return out;
  }

  LieAlgebraModel g_;
  PsiSpec psi_;
  mutable std::map<std::string, std::unique_ptr<TorusSetting>> settings_;
};

}  // namespace hdl
